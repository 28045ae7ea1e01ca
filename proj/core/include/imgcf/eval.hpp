#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imgcf/dataset.hpp"
#include "imgcf/model.hpp"

namespace imgcf {

// Full-ranking top-K evaluation of the target behavior. Candidates are all
// items minus the user's training positives in the target behavior; ties
// break by ascending item index.
struct EvalConfig {
    std::int64_t k = 20;
    int threads = 1;

    void validate() const;
};

struct MetricsReport {
    double recall_at_k = 0.0;
    double ndcg_at_k = 0.0;
    std::int64_t users_evaluated = 0;
    // Users whose unmasked candidate list was shorter than K and were ranked
    // over all remaining candidates.
    std::int64_t users_with_short_lists = 0;
    std::int64_t k = 0;
    std::string target_behavior;
    std::uint64_t seed = 0;
    std::string timestamp;    // empty when timing is suppressed
    std::string config_echo;  // full resolved run configuration, one key=value per line
};

// Top-K items for one user by dot-product score over the target behavior's
// scoring matrix, with the user's target-behavior training positives masked.
// Returns fewer than K items only when fewer candidates exist.
std::vector<std::int64_t> rank_topk(std::int64_t user,
                                    const std::vector<BehaviorRepresentation>& representations,
                                    const Dataset& dataset, const EvalConfig& config);

// |topk ∩ test| / |test|. test_items must be sorted ascending and non-empty.
double recall_at_k(std::span<const std::int64_t> topk,
                   std::span<const std::int64_t> test_items);

// Binary-relevance NDCG: DCG sums 1/log2(p+2) over hit positions p (0-based),
// IDCG over the first min(K, |test|) positions.
double ndcg_at_k(std::span<const std::int64_t> topk,
                 std::span<const std::int64_t> test_items, std::int64_t k);

// Means over all users with a non-empty target test set. Pure: identical
// inputs produce identical reports.
MetricsReport evaluate(const std::vector<BehaviorRepresentation>& representations,
                       const Dataset& dataset, const EvalConfig& config);

// Key-value text form, doubles at full precision.
std::string to_key_value(const MetricsReport& report);
void write_metrics_report(const MetricsReport& report, const std::filesystem::path& path);

// One-line JSON for the results ledger.
std::string ledger_line(const MetricsReport& report, const std::string& run_id,
                        const std::string& config_hash);

}  // namespace imgcf
