#include "scdgn/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace scdgn {

namespace {

std::int64_t parse_timestamp(std::string_view text, const std::string& where) {
    std::int64_t value = 0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw DataError(where + ": bad timestamp '" + std::string(text) + "'");
    return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    return in;
}

struct UserLocal {
    std::vector<std::uint32_t> record_indices; // into the filtered record list
};

} // namespace

std::vector<RawInteraction> read_interactions_tsv(const std::filesystem::path& path, Domain domain) {
    auto in = open_input(path);
    std::vector<RawInteraction> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto where = path.filename().string() + ":" + std::to_string(lineno);
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos)
            throw DataError(where + ": expected user<TAB>item<TAB>timestamp");
        RawInteraction r;
        r.user_key = line.substr(0, tab1);
        r.item_key = line.substr(tab1 + 1, tab2 - tab1 - 1);
        r.timestamp = parse_timestamp(std::string_view(line).substr(tab2 + 1), where);
        r.domain = domain;
        if (r.user_key.empty() || r.item_key.empty())
            throw DataError(where + ": empty user or item key");
        if (r.timestamp < 0)
            throw DataError(where + ": negative timestamp");
        out.push_back(std::move(r));
    }
    return out;
}

std::unordered_map<std::string, std::string> read_texts_tsv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::unordered_map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path.filename().string() + ":" + std::to_string(lineno) +
                            ": expected item_key<TAB>document");
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

IngestResult ingest(std::vector<RawInteraction> records,
                    std::unordered_map<std::string, std::string> target_texts,
                    std::unordered_map<std::string, std::string> source_texts) {
    IngestResult result;
    result.target_texts = std::move(target_texts);
    result.source_texts = std::move(source_texts);

    std::unordered_set<std::string> seen;
    seen.reserve(records.size());
    std::vector<std::string> missing;
    std::size_t index = 0;
    for (auto& r : records) {
        ++index;
        if (r.timestamp < 0)
            throw DataError("record " + std::to_string(index) + ": negative timestamp");
        std::string key = r.user_key + '\x1f' + r.item_key + '\x1f' +
                          std::to_string(r.timestamp) + '\x1f' +
                          (r.domain == Domain::target ? 't' : 's');
        if (!seen.insert(std::move(key)).second) continue;
        const auto& texts = r.domain == Domain::target ? result.target_texts : result.source_texts;
        if (texts.find(r.item_key) == texts.end()) missing.push_back(r.item_key);
        if (r.domain == Domain::target)
            result.target.push_back(std::move(r));
        else
            result.source.push_back(std::move(r));
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        std::string msg = "items without a text entry:";
        for (const auto& k : missing) msg += " " + k;
        throw DataError(msg);
    }
    return result;
}

std::vector<RawInteraction> density_filter(const std::vector<RawInteraction>& records,
                                           DomainRole role, FilterStats* stats) {
    const std::uint64_t user_lo = 3;
    const std::uint64_t user_hi = role == DomainRole::source_domain ? 10 : 5;
    const std::uint64_t item_lo = role == DomainRole::source_domain ? 10 : 5;
    const std::uint64_t item_hi = 15;

    std::unordered_map<std::string, std::uint64_t> user_counts, item_counts;
    for (const auto& r : records) {
        ++user_counts[r.user_key];
        ++item_counts[r.item_key];
    }
    std::vector<RawInteraction> kept;
    std::unordered_set<std::string> kept_users, kept_items;
    for (const auto& r : records) {
        const auto uc = user_counts[r.user_key];
        const auto ic = item_counts[r.item_key];
        if (uc < user_lo || uc > user_hi || ic < item_lo || ic > item_hi) continue;
        kept_users.insert(r.user_key);
        kept_items.insert(r.item_key);
        kept.push_back(r);
    }
    if (stats) {
        stats->input_records = records.size();
        stats->kept_records = kept.size();
        stats->kept_users = static_cast<std::uint32_t>(kept_users.size());
        stats->kept_items = static_cast<std::uint32_t>(kept_items.size());
    }
    if (kept.empty() && !records.empty())
        throw DataError("density filter removed every record; relax the count thresholds "
                        "or supply denser data");
    return kept;
}

namespace {

// Assigns dense indices in first-appearance order over the given records.
struct IdSpace {
    std::unordered_map<std::string, std::uint32_t> index;
    std::vector<std::string> keys;

    std::uint32_t intern(const std::string& key) {
        auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(keys.size()));
        if (inserted) keys.push_back(key);
        return it->second;
    }
};

} // namespace

DatasetBundle build_bundle(const std::vector<RawInteraction>& filtered_target,
                           const std::vector<RawInteraction>& filtered_source,
                           const std::unordered_map<std::string, std::string>& target_texts,
                           const std::unordered_map<std::string, std::string>& source_texts,
                           PrepareStats* stats) {
    DatasetBundle bundle;

    // The leave-one-out split needs >= 3 records per user; users that fell
    // below that after item-bound filtering are dropped here.
    std::unordered_map<std::string, std::uint64_t> target_user_counts;
    for (const auto& r : filtered_target) ++target_user_counts[r.user_key];
    std::uint32_t dropped_users = 0;
    for (const auto& [key, n] : target_user_counts)
        if (n < 3) ++dropped_users;

    IdSpace target_users, target_items;
    std::vector<const RawInteraction*> target_kept;
    target_kept.reserve(filtered_target.size());
    for (const auto& r : filtered_target) {
        if (target_user_counts[r.user_key] < 3) continue;
        target_users.intern(r.user_key);
        target_items.intern(r.item_key);
        target_kept.push_back(&r);
    }
    if (target_kept.empty())
        throw DataError("no target user kept >= 3 interactions after filtering");

    bundle.users_target = static_cast<std::uint32_t>(target_users.keys.size());
    bundle.items_target = static_cast<std::uint32_t>(target_items.keys.size());
    bundle.target_user_keys = target_users.keys;
    bundle.target_item_keys = target_items.keys;

    // Per-user chronological sort; stable so equal timestamps keep input order.
    std::vector<std::vector<std::pair<std::int64_t, std::uint32_t>>> per_user(bundle.users_target);
    std::vector<Interaction> dense(target_kept.size());
    for (std::uint32_t i = 0; i < target_kept.size(); ++i) {
        const auto& r = *target_kept[i];
        Interaction it;
        it.user = target_users.index.at(r.user_key);
        it.item = target_items.index.at(r.item_key);
        it.domain = Domain::target;
        dense[i] = it;
        per_user[it.user].emplace_back(r.timestamp, i);
    }
    bundle.user_target_items.resize(bundle.users_target);
    for (std::uint32_t u = 0; u < bundle.users_target; ++u) {
        auto& recs = per_user[u];
        std::stable_sort(recs.begin(), recs.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::size_t n = recs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Interaction& it = dense[recs[i].second];
            if (i + 2 < n)
                bundle.target_train.push_back(it);
            else if (i + 2 == n)
                bundle.target_valid.push_back(it);
            else
                bundle.target_test.push_back(it);
            bundle.user_target_items[u].push_back(it.item);
        }
        auto& items = bundle.user_target_items[u];
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
    }

    IdSpace source_users, source_items;
    for (const auto& r : filtered_source) {
        Interaction it;
        it.user = bundle.users_target + source_users.intern(r.user_key);
        it.item = source_items.intern(r.item_key); // offset applied below
        it.domain = Domain::source;
        bundle.source_all.push_back(it);
    }
    bundle.users_source = static_cast<std::uint32_t>(source_users.keys.size());
    bundle.items_source = static_cast<std::uint32_t>(source_items.keys.size());
    bundle.source_user_keys = source_users.keys;
    bundle.source_item_keys = source_items.keys;
    for (auto& it : bundle.source_all) it.item += bundle.items_target;

    bundle.item_docs.resize(bundle.item_count());
    for (std::uint32_t v = 0; v < bundle.items_target; ++v) {
        auto it = target_texts.find(bundle.target_item_keys[v]);
        if (it == target_texts.end())
            throw DataError("target item without text: " + bundle.target_item_keys[v]);
        bundle.item_docs[v] = it->second;
    }
    for (std::uint32_t v = 0; v < bundle.items_source; ++v) {
        auto it = source_texts.find(bundle.source_item_keys[v]);
        if (it == source_texts.end())
            throw DataError("source item without text: " + bundle.source_item_keys[v]);
        bundle.item_docs[bundle.items_target + v] = it->second;
    }

    if (stats) {
        stats->target.users = bundle.users_target;
        stats->target.items = bundle.items_target;
        stats->target.interactions = bundle.target_train.size() + bundle.target_valid.size() +
                                     bundle.target_test.size();
        stats->source.users = bundle.users_source;
        stats->source.items = bundle.items_source;
        stats->source.interactions = bundle.source_all.size();
        stats->dropped_target_users = dropped_users;
    }
    return bundle;
}

void annotate_clusters(DatasetBundle& bundle, const std::vector<std::uint32_t>& item_to_cluster) {
    if (item_to_cluster.size() != bundle.item_count())
        throw DataError("cluster assignment covers " + std::to_string(item_to_cluster.size()) +
                        " items, bundle has " + std::to_string(bundle.item_count()));
    auto annotate = [&](std::vector<Interaction>& v) {
        for (auto& it : v) it.cluster = item_to_cluster[it.item];
    };
    annotate(bundle.target_train);
    annotate(bundle.target_valid);
    annotate(bundle.target_test);
    annotate(bundle.source_all);
}

namespace {

constexpr char kBundleMagic[8] = {'S', 'C', 'D', 'G', 'N', 'B', 'N', 'D'};
constexpr std::uint32_t kBundleVersion = 1;

void write_interactions(BinaryWriter& w, const std::vector<Interaction>& v) {
    w.u64(v.size());
    for (const auto& it : v) {
        w.u32(it.user);
        w.u32(it.item);
        w.u32(it.cluster);
        w.u8(static_cast<std::uint8_t>(it.domain));
    }
}

std::vector<Interaction> read_interactions(BinaryReader& r) {
    std::vector<Interaction> v(r.u64());
    for (auto& it : v) {
        it.user = r.u32();
        it.item = r.u32();
        it.cluster = r.u32();
        it.domain = static_cast<Domain>(r.u8());
    }
    return v;
}

} // namespace

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& path) {
    BinaryWriter w(path);
    w.magic(kBundleMagic, kBundleVersion);
    w.u32(bundle.users_target);
    w.u32(bundle.users_source);
    w.u32(bundle.items_target);
    w.u32(bundle.items_source);
    write_interactions(w, bundle.target_train);
    write_interactions(w, bundle.target_valid);
    write_interactions(w, bundle.target_test);
    write_interactions(w, bundle.source_all);
    w.strings(bundle.target_user_keys);
    w.strings(bundle.source_user_keys);
    w.strings(bundle.target_item_keys);
    w.strings(bundle.source_item_keys);
    w.strings(bundle.item_docs);
    w.u64(bundle.user_target_items.size());
    for (const auto& items : bundle.user_target_items) w.vec(items);
    w.close();
}

DatasetBundle load_bundle(const std::filesystem::path& path) {
    BinaryReader r(path);
    const auto version = r.magic(kBundleMagic);
    if (version != kBundleVersion)
        throw DataError(path.string() + ": unsupported bundle version " + std::to_string(version));
    DatasetBundle b;
    b.users_target = r.u32();
    b.users_source = r.u32();
    b.items_target = r.u32();
    b.items_source = r.u32();
    b.target_train = read_interactions(r);
    b.target_valid = read_interactions(r);
    b.target_test = read_interactions(r);
    b.source_all = read_interactions(r);
    b.target_user_keys = r.strings();
    b.source_user_keys = r.strings();
    b.target_item_keys = r.strings();
    b.source_item_keys = r.strings();
    b.item_docs = r.strings();
    b.user_target_items.resize(r.u64());
    for (auto& items : b.user_target_items) items = r.vec<std::uint32_t>();
    return b;
}

std::uint64_t bundle_hash(const DatasetBundle& bundle) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    auto mix_strings = [&](const std::vector<std::string>& v) {
        for (const auto& s : v) {
            mix(s.data(), s.size());
            mix("\x1f", 1);
        }
    };
    const std::uint32_t counts[4] = {bundle.users_target, bundle.users_source,
                                     bundle.items_target, bundle.items_source};
    mix(counts, sizeof counts);
    mix_strings(bundle.target_user_keys);
    mix_strings(bundle.source_user_keys);
    mix_strings(bundle.target_item_keys);
    mix_strings(bundle.source_item_keys);
    return h;
}

void write_corpus(const DatasetBundle& bundle, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    for (const auto& doc : bundle.item_docs) out << doc << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::string> read_corpus(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<std::string> docs;
    std::string line;
    while (std::getline(in, line)) docs.push_back(line);
    return docs;
}

std::string stats_json(const PrepareStats& stats) {
    nlohmann::json j;
    auto domain = [](const DomainCounts& c) {
        nlohmann::json d;
        d["users"] = c.users;
        d["items"] = c.items;
        d["interactions"] = c.interactions;
        d["interactions_per_user"] = c.users == 0 ? 0.0
                                                  : static_cast<double>(c.interactions) / c.users;
        return d;
    };
    j["target"] = domain(stats.target);
    j["source"] = domain(stats.source);
    j["dropped_target_users"] = stats.dropped_target_users;
    return j.dump(2);
}

DatasetBundle prepare_dataset(const std::filesystem::path& source_interactions,
                              const std::filesystem::path& target_interactions,
                              const std::filesystem::path& source_texts,
                              const std::filesystem::path& target_texts,
                              PrepareStats* stats) {
    auto records = read_interactions_tsv(target_interactions, Domain::target);
    auto source_records = read_interactions_tsv(source_interactions, Domain::source);
    records.insert(records.end(), std::make_move_iterator(source_records.begin()),
                   std::make_move_iterator(source_records.end()));
    auto ingested = ingest(std::move(records), read_texts_tsv(target_texts),
                           read_texts_tsv(source_texts));
    auto target_kept = density_filter(ingested.target, DomainRole::target_domain);
    auto source_kept = density_filter(ingested.source, DomainRole::source_domain);
    return build_bundle(target_kept, source_kept, ingested.target_texts, ingested.source_texts,
                        stats);
}

} // namespace scdgn
