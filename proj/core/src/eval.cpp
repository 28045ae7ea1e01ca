#include "imgcf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "imgcf/errors.hpp"
#include "imgcf/parallel.hpp"

namespace imgcf {

namespace {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace

void EvalConfig::validate() const {
    if (k < 1) {
        throw ConfigError("EvalConfig: k must be >= 1");
    }
}

std::vector<std::int64_t> rank_topk(std::int64_t user,
                                    const std::vector<BehaviorRepresentation>& representations,
                                    const Dataset& dataset, const EvalConfig& config) {
    config.validate();
    const auto target = static_cast<std::size_t>(dataset.target_behavior);
    const Matrix& scoring = representations[target].scoring_matrix();
    const InteractionSet& train_positives = dataset.train[target];
    const std::int64_t num_users = dataset.num_users;
    const std::int64_t num_items = dataset.num_items;

    const auto user_row = scoring.row(user);
    const auto masked = train_positives.items_of(user);

    struct Candidate {
        double score;
        std::int64_t item;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(num_items - static_cast<std::int64_t>(masked.size())));
    std::size_t mask_cursor = 0;
    for (std::int64_t i = 0; i < num_items; ++i) {
        if (mask_cursor < masked.size() && masked[mask_cursor] == i) {
            ++mask_cursor;
            continue;
        }
        candidates.push_back({score(user_row, scoring.row(num_users + i)), i});
    }

    const auto better = [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item < b.item;
    };
    const auto keep = std::min<std::int64_t>(config.k,
                                             static_cast<std::int64_t>(candidates.size()));
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(), better);

    std::vector<std::int64_t> topk;
    topk.reserve(static_cast<std::size_t>(keep));
    for (std::int64_t p = 0; p < keep; ++p) {
        topk.push_back(candidates[static_cast<std::size_t>(p)].item);
    }
    return topk;
}

double recall_at_k(std::span<const std::int64_t> topk,
                   std::span<const std::int64_t> test_items) {
    if (test_items.empty()) {
        throw ConfigError("recall_at_k: empty test set");
    }
    std::int64_t hits = 0;
    for (const auto item : topk) {
        if (std::binary_search(test_items.begin(), test_items.end(), item)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(test_items.size());
}

double ndcg_at_k(std::span<const std::int64_t> topk,
                 std::span<const std::int64_t> test_items, std::int64_t k) {
    if (test_items.empty()) {
        throw ConfigError("ndcg_at_k: empty test set");
    }
    double dcg = 0.0;
    for (std::size_t p = 0; p < topk.size(); ++p) {
        if (std::binary_search(test_items.begin(), test_items.end(), topk[p])) {
            dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
        }
    }
    const auto ideal_hits =
        std::min<std::int64_t>(k, static_cast<std::int64_t>(test_items.size()));
    double idcg = 0.0;
    for (std::int64_t p = 0; p < ideal_hits; ++p) {
        idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
    return dcg / idcg;
}

MetricsReport evaluate(const std::vector<BehaviorRepresentation>& representations,
                       const Dataset& dataset, const EvalConfig& config) {
    config.validate();
    const auto target = static_cast<std::size_t>(dataset.target_behavior);
    const InteractionSet& test_set = dataset.test[target];
    const InteractionSet& train_set = dataset.train[target];

    std::vector<std::int64_t> users;
    for (std::int64_t u = 0; u < dataset.num_users; ++u) {
        if (test_set.user_degree(u) > 0) {
            users.push_back(u);
        }
    }
    if (users.empty()) {
        throw DataError("evaluate: no users with target-behavior test interactions");
    }

    struct PerUser {
        double recall;
        double ndcg;
        bool short_list;
    };
    std::vector<PerUser> results(users.size());
    parallel_for(static_cast<std::int64_t>(users.size()), config.threads,
                 [&](std::int64_t begin, std::int64_t end) {
                     for (std::int64_t idx = begin; idx < end; ++idx) {
                         const std::int64_t u = users[static_cast<std::size_t>(idx)];
                         const auto topk = rank_topk(u, representations, dataset, config);
                         const auto test_items = test_set.items_of(u);
                         auto& out = results[static_cast<std::size_t>(idx)];
                         out.recall = recall_at_k(topk, test_items);
                         out.ndcg = ndcg_at_k(topk, test_items, config.k);
                         const std::int64_t candidates =
                             dataset.num_items - train_set.user_degree(u);
                         out.short_list = candidates < config.k;
                     }
                 });

    // Reduce in user order regardless of thread count.
    MetricsReport report;
    double recall_sum = 0.0;
    double ndcg_sum = 0.0;
    for (const auto& r : results) {
        recall_sum += r.recall;
        ndcg_sum += r.ndcg;
        if (r.short_list) ++report.users_with_short_lists;
    }
    report.users_evaluated = static_cast<std::int64_t>(users.size());
    report.recall_at_k = recall_sum / static_cast<double>(users.size());
    report.ndcg_at_k = ndcg_sum / static_cast<double>(users.size());
    report.k = config.k;
    report.target_behavior = dataset.behavior_names[target];
    return report;
}

std::string to_key_value(const MetricsReport& report) {
    std::string text;
    text += "recall_at_" + std::to_string(report.k) + " = " + format_double(report.recall_at_k) + "\n";
    text += "ndcg_at_" + std::to_string(report.k) + " = " + format_double(report.ndcg_at_k) + "\n";
    text += "k = " + std::to_string(report.k) + "\n";
    text += "target_behavior = " + report.target_behavior + "\n";
    text += "users_evaluated = " + std::to_string(report.users_evaluated) + "\n";
    text += "users_with_short_lists = " + std::to_string(report.users_with_short_lists) + "\n";
    text += "seed = " + std::to_string(report.seed) + "\n";
    text += "timestamp = " + report.timestamp + "\n";
    if (!report.config_echo.empty()) {
        text += "\n# resolved configuration\n";
        text += report.config_echo;
        if (text.back() != '\n') text += '\n';
    }
    return text;
}

void write_metrics_report(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << to_key_value(report);
}

std::string ledger_line(const MetricsReport& report, const std::string& run_id,
                        const std::string& config_hash) {
    nlohmann::json line;
    line["run_id"] = run_id;
    line["config_hash"] = config_hash;
    line["k"] = report.k;
    line["recall"] = report.recall_at_k;
    line["ndcg"] = report.ndcg_at_k;
    line["users_evaluated"] = report.users_evaluated;
    line["target_behavior"] = report.target_behavior;
    line["seed"] = report.seed;
    return line.dump();
}

}  // namespace imgcf
