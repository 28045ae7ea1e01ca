#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "imgcf/interactions.hpp"
#include "imgcf/rng.hpp"

namespace imgcf {

// One raw interaction event. Behavior is stored as an index into the
// declared behavior list.
struct RawEvent {
    std::string user_key;
    std::string item_key;
    int behavior = 0;
};

struct RawEventLog {
    std::vector<std::string> behavior_names;  // ordered, e.g. click < cart < purchase
    std::vector<RawEvent> records;
};

// Column mapping for delimiter-separated input.
struct IngestSchema {
    char delimiter = '\t';
    bool has_header = false;
    int user_column = 0;
    int item_column = 1;
    int behavior_column = 2;
};

// A prepared multi-behavior dataset: dense user/item indexing shared by all
// behaviors and splits, with per-behavior disjoint train/test pair sets.
struct Dataset {
    std::vector<std::string> behavior_names;
    int target_behavior = 0;
    std::int64_t num_users = 0;
    std::int64_t num_items = 0;
    std::vector<InteractionSet> train;  // one per behavior
    std::vector<InteractionSet> test;
    std::unordered_map<std::string, std::int64_t> user_index;
    std::unordered_map<std::string, std::int64_t> item_index;

    int num_behaviors() const { return static_cast<int>(behavior_names.size()); }

    // Behavior with the most training pairs; ties go to the lowest index.
    int richest_behavior() const;

    // Richest train size divided by sparsest train size.
    double imbalance_ratio() const;
};

// Seeded generator of an imbalanced behavior funnel: latent Gaussian factors
// score every (user, item) cell and each behavior keeps the top fraction of
// cells, so behaviors nest along the declared order.
struct SyntheticSpec {
    std::int64_t num_users = 0;
    std::int64_t num_items = 0;
    std::int64_t latent_dim = 8;
    std::vector<double> keep_fractions;  // in (0, 1], non-increasing
    std::vector<std::string> behavior_names;  // optional; defaults to b0, b1, ...
    int target_behavior = -1;                 // defaults to the sparsest (last)
    double split_ratio = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

// Parses a delimiter-separated interaction log. Rows whose behavior label is
// not in behavior_names are an error naming the line.
RawEventLog ingest(const std::filesystem::path& path, const IngestSchema& schema,
                   std::vector<std::string> behavior_names);

struct FilterStats {
    std::int64_t users_before = 0, users_after = 0;
    std::int64_t items_before = 0, items_after = 0;
    std::int64_t events_before = 0, events_after = 0;
};

// Single-pass cold-start filter: counts each user's and item's events summed
// over all behaviors, then drops every event incident to an entity below the
// threshold. Not iterated to a fixed point; stats make the choice auditable.
RawEventLog filter_cold_start(const RawEventLog& log, std::int64_t threshold = 20,
                              FilterStats* stats = nullptr);

struct SplitOptions {
    double ratio = 0.8;           // train share; train gets ceil(ratio * n)
    std::uint64_t seed = 0;
    int target_behavior = -1;     // -1: last behavior in the declared order
    bool split_source_behaviors = true;  // false: sources go 100% to train
};

// Per-behavior seeded shuffle-split over deduplicated pairs. Index maps are
// built from the full log so every split shares the same dense indexing.
Dataset split(const RawEventLog& log, const SplitOptions& options);

// Uniform draw from the items the user has not interacted with in this
// behavior's training set, by rejection sampling. Throws DataError for a
// user positive on every item.
std::int64_t sample_negative(const InteractionSet& train_k, std::int64_t user,
                             RngStream& rng);

Dataset generate_synthetic(const SyntheticSpec& spec);

// Single-behavior view of one behavior (shared indexing, K = 1, target 0).
Dataset restrict_to_behavior(const Dataset& dataset, int behavior);

// Moves a seeded fraction of the target behavior's training pairs into a
// validation set that replaces the test split, for leakage-free model
// selection. The returned dataset trains on the remainder.
Dataset carve_validation(const Dataset& dataset, double fraction, std::uint64_t seed);

}  // namespace imgcf
