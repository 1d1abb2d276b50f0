#include "scdgn/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "scdgn/errors.hpp"
#include "scdgn/parallel.hpp"
#include "scdgn/serialize.hpp"

namespace scdgn {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        const bool word = std::isalnum(c) != 0 || c >= 0x80;
        if (word) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

TokenTable load_token_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open token table: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty token table");
    TokenTable table;
    try {
        table.dim = std::stoul(line);
    } catch (const std::exception&) {
        throw DataError(path.string() + ": header must be the vector dimension, got '" + line + "'");
    }
    if (table.dim == 0) throw DataError(path.string() + ": zero vector dimension");

    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": expected token<TAB>values");
        std::istringstream nums(line.substr(tab + 1));
        std::size_t count = 0;
        double v;
        while (nums >> v) {
            values.push_back(v);
            ++count;
        }
        if (count != table.dim)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(table.dim) + " values, got " + std::to_string(count));
        table.tokens.push_back(line.substr(0, tab));
    }
    table.vectors = Matrix(table.tokens.size(), table.dim);
    std::copy(values.begin(), values.end(), table.vectors.data().begin());
    table.index.reserve(table.tokens.size());
    for (std::uint32_t i = 0; i < table.tokens.size(); ++i) table.index.emplace(table.tokens[i], i);
    return table;
}

void save_token_table(const TokenTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << table.dim << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < table.tokens.size(); ++i) {
        out << table.tokens[i] << '\t';
        const auto row = table.vectors.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ' ';
            out << row[j];
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

double TfIdfModel::weight(std::uint32_t doc, const std::string& token) const {
    auto vit = vocab_index.find(token);
    if (vit == vocab_index.end()) return 0.0;
    const auto& tf = doc_tf[doc];
    auto it = std::lower_bound(tf.begin(), tf.end(), vit->second,
                               [](const auto& p, std::uint32_t id) { return p.first < id; });
    if (it == tf.end() || it->first != vit->second) return 0.0;
    return it->second * idf[vit->second];
}

TfIdfModel fit_tfidf(std::span<const std::string> docs) {
    if (docs.empty()) throw DataError("tf-idf: empty corpus");
    TfIdfModel model;
    model.doc_count = docs.size();
    model.doc_tf.resize(docs.size());

    std::vector<std::uint64_t> df;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto tokens = tokenize(docs[d]);
        if (tokens.empty()) {
            ++model.empty_docs;
            continue;
        }
        std::unordered_map<std::uint32_t, std::uint64_t> counts;
        for (const auto& tok : tokens) {
            auto [it, inserted] =
                model.vocab_index.try_emplace(tok, static_cast<std::uint32_t>(model.vocab.size()));
            if (inserted) {
                model.vocab.push_back(tok);
                df.push_back(0);
            }
            ++counts[it->second];
        }
        auto& tf = model.doc_tf[d];
        tf.reserve(counts.size());
        const double inv_len = 1.0 / static_cast<double>(tokens.size());
        for (const auto& [id, n] : counts) {
            tf.emplace_back(id, static_cast<double>(n) * inv_len);
            ++df[id];
        }
        std::sort(tf.begin(), tf.end());
    }
    model.idf.resize(model.vocab.size());
    const double n_docs = static_cast<double>(model.doc_count);
    for (std::size_t i = 0; i < model.idf.size(); ++i)
        model.idf[i] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[i]))) + 1.0;
    return model;
}

std::vector<double> item_semantic_embedding(std::uint32_t doc, const TfIdfModel& tfidf,
                                            const TokenTable& table, SemanticsStats* stats) {
    std::vector<double> vec(table.dim, 0.0);
    bool any = false;
    for (const auto& [vocab_id, tf] : tfidf.doc_tf[doc]) {
        const double* token_vec = table.find(tfidf.vocab[vocab_id]);
        if (token_vec == nullptr) {
            if (stats) ++stats->oov_tokens;
            continue;
        }
        any = true;
        const double w = tf * tfidf.idf[vocab_id];
        for (std::size_t j = 0; j < table.dim; ++j) vec[j] += w * token_vec[j];
    }
    if (!any && stats) ++stats->zero_items;
    return vec;
}

Matrix compute_item_vectors(const TfIdfModel& tfidf, const TokenTable& table,
                            SemanticsStats* stats) {
    Matrix out(tfidf.doc_tf.size(), table.dim);
    for (std::uint32_t d = 0; d < tfidf.doc_tf.size(); ++d) {
        const auto vec = item_semantic_embedding(d, tfidf, table, stats);
        std::copy(vec.begin(), vec.end(), out.row(d).begin());
    }
    return out;
}

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// k-means++: first centroid uniform, then proportional to squared distance
// from the nearest chosen centroid.
Matrix kmeanspp_init(const Matrix& points, std::uint32_t k, std::mt19937_64& rng) {
    const std::size_t n = points.rows();
    Matrix centroids(k, points.cols());
    std::uniform_int_distribution<std::size_t> uniform(0, n - 1);
    std::size_t first = uniform(rng);
    std::copy(points.row(first).begin(), points.row(first).end(), centroids.row(0).begin());

    std::vector<double> best(n, std::numeric_limits<double>::max());
    for (std::uint32_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best[i] = std::min(best[i], sq_distance(points.row(i), centroids.row(c - 1)));
            total += best[i];
        }
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = uniform(rng); // all remaining points coincide with centroids
        } else {
            std::uniform_real_distribution<double> pick(0.0, total);
            double r = pick(rng);
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                r -= best[i];
                if (r <= 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        std::copy(points.row(chosen).begin(), points.row(chosen).end(), centroids.row(c).begin());
    }
    return centroids;
}

} // namespace

ClusterModel kmeans(const Matrix& points, std::uint32_t k, std::uint64_t seed,
                    std::uint32_t max_iter) {
    const std::size_t n = points.rows();
    if (k < 2) throw DataError("kmeans: k must be >= 2");
    if (k > n)
        throw DataError("kmeans: k=" + std::to_string(k) + " exceeds item count " +
                        std::to_string(n));

    std::mt19937_64 rng(seed);
    ClusterModel model;
    model.k = k;
    model.centroids = kmeanspp_init(points, k, rng);
    model.assignment.assign(n, 0);

    std::vector<double> point_dist(n, 0.0);
    std::vector<std::uint32_t> next(n, 0);
    for (std::uint32_t iter = 0; iter < max_iter; ++iter) {
        // Assignment step (ties go to the lower cluster index).
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double best = std::numeric_limits<double>::max();
                std::uint32_t arg = 0;
                for (std::uint32_t c = 0; c < k; ++c) {
                    const double d = sq_distance(points.row(i), model.centroids.row(c));
                    if (d < best) {
                        best = d;
                        arg = c;
                    }
                }
                next[i] = arg;
                point_dist[i] = best;
            }
        });
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += point_dist[i];
        model.inertia_trace.push_back(inertia);
        model.inertia = inertia;

        const bool changed = iter == 0 || next != model.assignment;
        model.assignment = next;
        if (!changed) {
            model.converged = true;
            break;
        }

        // Update step: means of members.
        model.centroids.fill(0.0);
        std::vector<std::uint64_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            axpy(1.0, points.row(i), model.centroids.row(model.assignment[i]));
            ++sizes[model.assignment[i]];
        }
        std::vector<std::uint32_t> empties;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) {
                empties.push_back(c);
                continue;
            }
            const double inv = 1.0 / static_cast<double>(sizes[c]);
            for (double& x : model.centroids.row(c)) x *= inv;
        }
        // Reseed each emptied cluster to the point farthest from its own
        // assigned centroid (distances from the assignment step).
        std::vector<bool> taken(n, false);
        for (std::uint32_t c : empties) {
            std::size_t far = 0;
            double far_dist = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (point_dist[i] > far_dist) {
                    far_dist = point_dist[i];
                    far = i;
                }
            }
            taken[far] = true;
            std::copy(points.row(far).begin(), points.row(far).end(),
                      model.centroids.row(c).begin());
        }
    }
    // Keep inertia consistent with the stored centroids and assignment even
    // when the loop stopped at max_iter (centroids moved after the last
    // assignment pass).
    if (!model.converged) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            inertia += sq_distance(points.row(i), model.centroids.row(model.assignment[i]));
        model.inertia = inertia;
    }
    return model;
}

std::vector<double> cluster_semantic_embedding(std::uint32_t cluster, const ClusterModel& model,
                                               const Matrix& item_vectors) {
    std::vector<double> mean(item_vectors.cols(), 0.0);
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < model.assignment.size(); ++i) {
        if (model.assignment[i] != cluster) continue;
        axpy(1.0, item_vectors.row(i), mean);
        ++count;
    }
    if (count == 0)
        throw DataError("cluster " + std::to_string(cluster) + " is empty");
    for (double& x : mean) x /= static_cast<double>(count);
    return mean;
}

Matrix compute_cluster_vectors(const ClusterModel& model, const Matrix& item_vectors) {
    Matrix out(model.k, item_vectors.cols());
    std::vector<std::uint64_t> sizes(model.k, 0);
    for (std::size_t i = 0; i < model.assignment.size(); ++i) {
        axpy(1.0, item_vectors.row(i), out.row(model.assignment[i]));
        ++sizes[model.assignment[i]];
    }
    for (std::uint32_t c = 0; c < model.k; ++c) {
        if (sizes[c] == 0)
            throw DataError("cluster " + std::to_string(c) + " is empty");
        const double inv = 1.0 / static_cast<double>(sizes[c]);
        for (double& x : out.row(c)) x *= inv;
    }
    return out;
}

SemanticArchive build_semantics(std::span<const std::string> docs, const TokenTable& table,
                                std::uint32_t k, std::uint64_t seed) {
    SemanticArchive archive;
    const auto tfidf = fit_tfidf(docs);
    archive.item_vectors = compute_item_vectors(tfidf, table, &archive.stats);
    archive.clusters = kmeans(archive.item_vectors, k, seed);
    archive.cluster_vectors = compute_cluster_vectors(archive.clusters, archive.item_vectors);
    return archive;
}

namespace {
constexpr char kSemMagic[8] = {'S', 'C', 'D', 'G', 'N', 'S', 'E', 'M'};
constexpr std::uint32_t kSemVersion = 1;
} // namespace

void save_semantics(const SemanticArchive& archive, const std::filesystem::path& path) {
    BinaryWriter w(path);
    w.magic(kSemMagic, kSemVersion);
    w.matrix(archive.item_vectors);
    w.u32(archive.clusters.k);
    w.matrix(archive.clusters.centroids);
    w.vec(archive.clusters.assignment);
    w.f64(archive.clusters.inertia);
    w.vec(archive.clusters.inertia_trace);
    w.u8(archive.clusters.converged ? 1 : 0);
    w.matrix(archive.cluster_vectors);
    w.u64(archive.stats.oov_tokens);
    w.u64(archive.stats.zero_items);
    w.close();
}

SemanticArchive load_semantics(const std::filesystem::path& path) {
    BinaryReader r(path);
    const auto version = r.magic(kSemMagic);
    if (version != kSemVersion)
        throw DataError(path.string() + ": unsupported semantics version " +
                        std::to_string(version));
    SemanticArchive a;
    a.item_vectors = r.matrix();
    a.clusters.k = r.u32();
    a.clusters.centroids = r.matrix();
    a.clusters.assignment = r.vec<std::uint32_t>();
    a.clusters.inertia = r.f64();
    a.clusters.inertia_trace = r.vec<double>();
    a.clusters.converged = r.u8() != 0;
    a.cluster_vectors = r.matrix();
    a.stats.oov_tokens = r.u64();
    a.stats.zero_items = r.u64();
    return a;
}

} // namespace scdgn
