#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "scdgn/errors.hpp"

namespace scdgn {

enum class Domain : std::uint8_t { target = 0, source = 1 };

inline constexpr std::uint32_t kNoCluster = 0xFFFFFFFFu;

/// One interaction event as it appears in the input logs.
struct RawInteraction {
    std::string user_key;
    std::string item_key;
    std::int64_t timestamp = 0; // unix seconds, >= 0
    Domain domain = Domain::target;

    friend bool operator==(const RawInteraction&, const RawInteraction&) = default;
};

/// Dense-index training record. cluster stays kNoCluster until the
/// clustering stage annotates the bundle.
struct Interaction {
    std::uint32_t user = 0;    // global user index (target users first)
    std::uint32_t item = 0;    // global item index (target items first)
    std::uint32_t cluster = kNoCluster;
    Domain domain = Domain::target;

    friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct DomainCounts {
    std::uint32_t users = 0;
    std::uint32_t items = 0;
    std::uint64_t interactions = 0;
};

/// Canonical dataset: dense ID spaces, chronological leave-one-out splits
/// for the target domain, and the text corpus aligned to item indices.
/// Target users occupy user indices [0, users_target); source users follow.
/// Item indices are laid out the same way.
struct DatasetBundle {
    std::uint32_t users_target = 0;
    std::uint32_t users_source = 0;
    std::uint32_t items_target = 0;
    std::uint32_t items_source = 0;

    std::vector<Interaction> target_train;
    std::vector<Interaction> target_valid; // one per target user
    std::vector<Interaction> target_test;  // one per target user
    std::vector<Interaction> source_all;   // source domain has no split

    // dense index -> opaque key, per domain
    std::vector<std::string> target_user_keys;
    std::vector<std::string> source_user_keys;
    std::vector<std::string> target_item_keys;
    std::vector<std::string> source_item_keys;

    // global item index -> document text (both domains)
    std::vector<std::string> item_docs;

    // target user -> sorted distinct target items over all splits (V_u)
    std::vector<std::vector<std::uint32_t>> user_target_items;

    std::uint32_t user_count() const { return users_target + users_source; }
    std::uint32_t item_count() const { return items_target + items_source; }
    bool is_target_user(std::uint32_t u) const { return u < users_target; }
    bool is_target_item(std::uint32_t v) const { return v < items_target; }

    friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

/// Deduplicated per-domain records plus their documents.
struct IngestResult {
    std::vector<RawInteraction> target;
    std::vector<RawInteraction> source;
    std::unordered_map<std::string, std::string> target_texts;
    std::unordered_map<std::string, std::string> source_texts;
};

enum class DomainRole { source_domain, target_domain };

struct FilterStats {
    std::uint64_t input_records = 0;
    std::uint64_t kept_records = 0;
    std::uint32_t kept_users = 0;
    std::uint32_t kept_items = 0;
};

struct PrepareStats {
    DomainCounts target;
    DomainCounts source;
    std::uint32_t dropped_target_users = 0; // fell below 3 records after filtering
};

/// Parses a tab-separated interactions file: user<TAB>item<TAB>unix-seconds.
/// Malformed lines and negative timestamps raise DataError with the line number.
std::vector<RawInteraction> read_interactions_tsv(const std::filesystem::path& path, Domain domain);

/// Parses item_key<TAB>document, one item per line. Missing tabs raise DataError.
std::unordered_map<std::string, std::string> read_texts_tsv(const std::filesystem::path& path);

/// Deduplicates (user, item, timestamp) triples per domain and checks that
/// every item key has a text entry; missing keys raise DataError listing them.
IngestResult ingest(std::vector<RawInteraction> records,
                    std::unordered_map<std::string, std::string> target_texts,
                    std::unordered_map<std::string, std::string> source_texts);

/// One simultaneous pass: keeps a record iff its user's and its item's
/// interaction counts, both measured on the unfiltered input, sit inside the
/// role's inclusive bounds (source: users 3-10, items 10-15; target: users
/// 3-5, items 5-15). Raises DataError if nothing survives.
std::vector<RawInteraction> density_filter(const std::vector<RawInteraction>& records,
                                           DomainRole role, FilterStats* stats = nullptr);

/// Builds dense ID spaces and the per-user chronological leave-one-out split
/// (last -> test, second-last -> validation, equal timestamps keep input
/// order). Target users left with fewer than 3 records after filtering are
/// dropped and counted in stats. Every target/source item key must have a
/// document in the corresponding text map.
DatasetBundle build_bundle(const std::vector<RawInteraction>& filtered_target,
                           const std::vector<RawInteraction>& filtered_source,
                           const std::unordered_map<std::string, std::string>& target_texts,
                           const std::unordered_map<std::string, std::string>& source_texts,
                           PrepareStats* stats = nullptr);

/// Fills the cluster field of every interaction from a per-item assignment.
void annotate_clusters(DatasetBundle& bundle, const std::vector<std::uint32_t>& item_to_cluster);

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& path);
DatasetBundle load_bundle(const std::filesystem::path& path);

/// FNV-1a over the bundle's ID spaces; checkpoints store it to detect
/// bundle/checkpoint mismatches.
std::uint64_t bundle_hash(const DatasetBundle& bundle);

/// One document per line, line i = document of global item i.
void write_corpus(const DatasetBundle& bundle, const std::filesystem::path& path);
std::vector<std::string> read_corpus(const std::filesystem::path& path);

/// JSON stats with per-domain user/item/interaction counts.
std::string stats_json(const PrepareStats& stats);

/// End-to-end prepare stage: read, ingest, filter both domains, split, save.
DatasetBundle prepare_dataset(const std::filesystem::path& source_interactions,
                              const std::filesystem::path& target_interactions,
                              const std::filesystem::path& source_texts,
                              const std::filesystem::path& target_texts,
                              PrepareStats* stats = nullptr);

} // namespace scdgn
