#include "imgcf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "imgcf/errors.hpp"
#include "imgcf/matrix.hpp"

namespace imgcf {

namespace {

// ceil(ratio * n) with a tolerance absorbing the decimal-to-binary error of
// ratio, so 0.8 of 10 pairs is 8, never 9.
std::int64_t train_count(double ratio, std::int64_t n) {
    const double product = ratio * static_cast<double>(n);
    auto count = static_cast<std::int64_t>(std::ceil(product - 1e-9));
    return std::clamp<std::int64_t>(count, 0, n);
}

// Seeded shuffle-split of canonically ordered pairs: first ceil(ratio * n)
// go to train, the remainder to test.
void split_pairs(std::vector<UserItemPair> pairs, double ratio, RngStream& rng,
                 std::vector<UserItemPair>& train_out, std::vector<UserItemPair>& test_out) {
    rng.shuffle(pairs);
    const std::int64_t cut = train_count(ratio, static_cast<std::int64_t>(pairs.size()));
    train_out.assign(pairs.begin(), pairs.begin() + cut);
    test_out.assign(pairs.begin() + cut, pairs.end());
}

int resolve_behavior(const std::string& label, const std::vector<std::string>& names) {
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == label) return static_cast<int>(k);
    }
    return -1;
}

}  // namespace

int Dataset::richest_behavior() const {
    int best = 0;
    for (int k = 1; k < num_behaviors(); ++k) {
        if (train[static_cast<std::size_t>(k)].num_pairs() >
            train[static_cast<std::size_t>(best)].num_pairs()) {
            best = k;
        }
    }
    return best;
}

double Dataset::imbalance_ratio() const {
    std::int64_t richest = 0;
    std::int64_t sparsest = 0;
    for (const auto& set : train) {
        richest = std::max(richest, set.num_pairs());
        sparsest = (sparsest == 0) ? set.num_pairs() : std::min(sparsest, set.num_pairs());
    }
    return sparsest > 0 ? static_cast<double>(richest) / static_cast<double>(sparsest) : 0.0;
}

void SyntheticSpec::validate() const {
    if (num_users <= 0 || num_items <= 0) {
        throw ConfigError("SyntheticSpec: user and item counts must be positive");
    }
    if (latent_dim <= 0) {
        throw ConfigError("SyntheticSpec: latent_dim must be positive");
    }
    if (keep_fractions.empty()) {
        throw ConfigError("SyntheticSpec: at least one keep fraction required");
    }
    for (std::size_t k = 0; k < keep_fractions.size(); ++k) {
        const double f = keep_fractions[k];
        if (!(f > 0.0 && f <= 1.0)) {
            throw ConfigError("SyntheticSpec: keep fraction " + std::to_string(f) +
                              " outside (0, 1]");
        }
        if (k > 0 && f > keep_fractions[k - 1]) {
            throw ConfigError("SyntheticSpec: keep fractions must be non-increasing "
                              "along the behavior order");
        }
    }
    if (!behavior_names.empty() && behavior_names.size() != keep_fractions.size()) {
        throw ConfigError("SyntheticSpec: behavior_names / keep_fractions length mismatch");
    }
    if (!(split_ratio > 0.0 && split_ratio <= 1.0)) {
        throw ConfigError("SyntheticSpec: split_ratio outside (0, 1]");
    }
}

RawEventLog ingest(const std::filesystem::path& path, const IngestSchema& schema,
                   std::vector<std::string> behavior_names) {
    if (behavior_names.empty()) {
        throw ConfigError("ingest: behavior list must not be empty");
    }
    std::ifstream input(path);
    if (!input) {
        throw DataError("ingest: cannot open '" + path.string() + "'");
    }

    const int max_column =
        std::max({schema.user_column, schema.item_column, schema.behavior_column});

    RawEventLog log;
    log.behavior_names = std::move(behavior_names);

    std::string line;
    std::int64_t line_number = 0;
    std::vector<std::string> fields;
    while (std::getline(input, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) continue;
        if (schema.has_header && line_number == 1) continue;

        fields.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = line.find(schema.delimiter, start);
            fields.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (static_cast<int>(fields.size()) <= max_column) {
            throw DataError("ingest: line " + std::to_string(line_number) + " of '" +
                            path.string() + "' has " + std::to_string(fields.size()) +
                            " columns, need at least " + std::to_string(max_column + 1));
        }
        const std::string& behavior_label = fields[static_cast<std::size_t>(schema.behavior_column)];
        const int behavior = resolve_behavior(behavior_label, log.behavior_names);
        if (behavior < 0) {
            throw DataError("ingest: line " + std::to_string(line_number) + " of '" +
                            path.string() + "' has undeclared behavior '" + behavior_label + "'");
        }
        log.records.push_back({fields[static_cast<std::size_t>(schema.user_column)],
                               fields[static_cast<std::size_t>(schema.item_column)], behavior});
    }
    return log;
}

RawEventLog filter_cold_start(const RawEventLog& log, std::int64_t threshold,
                              FilterStats* stats) {
    std::unordered_map<std::string, std::int64_t> user_events;
    std::unordered_map<std::string, std::int64_t> item_events;
    for (const auto& event : log.records) {
        ++user_events[event.user_key];
        ++item_events[event.item_key];
    }

    RawEventLog filtered;
    filtered.behavior_names = log.behavior_names;
    filtered.records.reserve(log.records.size());
    for (const auto& event : log.records) {
        if (user_events[event.user_key] >= threshold &&
            item_events[event.item_key] >= threshold) {
            filtered.records.push_back(event);
        }
    }

    if (stats != nullptr) {
        std::unordered_map<std::string, std::int64_t> users_after;
        std::unordered_map<std::string, std::int64_t> items_after;
        for (const auto& event : filtered.records) {
            ++users_after[event.user_key];
            ++items_after[event.item_key];
        }
        stats->users_before = static_cast<std::int64_t>(user_events.size());
        stats->items_before = static_cast<std::int64_t>(item_events.size());
        stats->users_after = static_cast<std::int64_t>(users_after.size());
        stats->items_after = static_cast<std::int64_t>(items_after.size());
        stats->events_before = static_cast<std::int64_t>(log.records.size());
        stats->events_after = static_cast<std::int64_t>(filtered.records.size());
    }
    return filtered;
}

Dataset split(const RawEventLog& log, const SplitOptions& options) {
    if (log.records.empty()) {
        throw DataError("split: event log is empty");
    }
    if (!(options.ratio > 0.0 && options.ratio <= 1.0)) {
        throw ConfigError("split: ratio " + std::to_string(options.ratio) + " outside (0, 1]");
    }
    const int num_behaviors = static_cast<int>(log.behavior_names.size());
    int target = options.target_behavior;
    if (target == -1) target = num_behaviors - 1;
    if (target < 0 || target >= num_behaviors) {
        throw ConfigError("split: target behavior index " + std::to_string(target) +
                          " out of range");
    }

    Dataset dataset;
    dataset.behavior_names = log.behavior_names;
    dataset.target_behavior = target;

    // Dense indices by first appearance over the full log, shared by every
    // behavior and split.
    for (const auto& event : log.records) {
        dataset.user_index.try_emplace(event.user_key, dataset.user_index.size());
        dataset.item_index.try_emplace(event.item_key, dataset.item_index.size());
    }
    dataset.num_users = static_cast<std::int64_t>(dataset.user_index.size());
    dataset.num_items = static_cast<std::int64_t>(dataset.item_index.size());

    std::vector<std::vector<UserItemPair>> behavior_pairs(static_cast<std::size_t>(num_behaviors));
    for (const auto& event : log.records) {
        behavior_pairs[static_cast<std::size_t>(event.behavior)].emplace_back(
            dataset.user_index.at(event.user_key), dataset.item_index.at(event.item_key));
    }

    RngStream rng = RngStream::derive(options.seed, "split");
    for (int k = 0; k < num_behaviors; ++k) {
        auto& pairs = behavior_pairs[static_cast<std::size_t>(k)];
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        if (pairs.empty()) {
            std::cerr << "warning: behavior '" << log.behavior_names[static_cast<std::size_t>(k)]
                      << "' has no interactions, producing empty splits\n";
        }
        std::vector<UserItemPair> train_pairs;
        std::vector<UserItemPair> test_pairs;
        const bool keep_all = !options.split_source_behaviors && k != target;
        split_pairs(std::move(pairs), keep_all ? 1.0 : options.ratio, rng, train_pairs,
                    test_pairs);
        dataset.train.push_back(InteractionSet::from_pairs(k, dataset.num_users,
                                                           dataset.num_items,
                                                           std::move(train_pairs)));
        dataset.test.push_back(InteractionSet::from_pairs(k, dataset.num_users,
                                                          dataset.num_items,
                                                          std::move(test_pairs)));
    }
    return dataset;
}

std::int64_t sample_negative(const InteractionSet& train_k, std::int64_t user,
                             RngStream& rng) {
    const std::int64_t num_items = train_k.num_items();
    if (train_k.user_degree(user) >= num_items) {
        throw DataError("sample_negative: user " + std::to_string(user) +
                        " interacted with every item in behavior " +
                        std::to_string(train_k.behavior_id()));
    }
    while (true) {
        const std::int64_t candidate = rng.next_index(num_items);
        if (!train_k.contains(user, candidate)) {
            return candidate;
        }
    }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::int64_t m = spec.num_users;
    const std::int64_t n = spec.num_items;
    const std::int64_t cells = m * n;
    const int num_behaviors = static_cast<int>(spec.keep_fractions.size());

    std::vector<std::int64_t> counts(static_cast<std::size_t>(num_behaviors));
    for (int k = 0; k < num_behaviors; ++k) {
        counts[static_cast<std::size_t>(k)] =
            std::llround(spec.keep_fractions[static_cast<std::size_t>(k)] *
                         static_cast<double>(cells));
        if (counts[static_cast<std::size_t>(k)] <= 0) {
            throw DataError("generate_synthetic: keep fraction " +
                            std::to_string(spec.keep_fractions[static_cast<std::size_t>(k)]) +
                            " yields zero pairs for behavior " + std::to_string(k));
        }
    }

    RngStream latent_rng = RngStream::derive(spec.seed, "synthetic");
    Matrix user_factors(m, spec.latent_dim);
    Matrix item_factors(n, spec.latent_dim);
    for (double& v : user_factors.data()) v = latent_rng.next_normal(0.0, 1.0);
    for (double& v : item_factors.data()) v = latent_rng.next_normal(0.0, 1.0);

    struct ScoredCell {
        double score;
        std::int64_t user;
        std::int64_t item;
    };
    std::vector<ScoredCell> scored;
    scored.reserve(static_cast<std::size_t>(cells));
    for (std::int64_t u = 0; u < m; ++u) {
        for (std::int64_t i = 0; i < n; ++i) {
            scored.push_back({dot(user_factors.row(u), item_factors.row(i)), u, i});
        }
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredCell& a, const ScoredCell& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.user != b.user) return a.user < b.user;
        return a.item < b.item;
    });

    Dataset dataset;
    dataset.behavior_names = spec.behavior_names;
    if (dataset.behavior_names.empty()) {
        for (int k = 0; k < num_behaviors; ++k) {
            dataset.behavior_names.push_back("b" + std::to_string(k));
        }
    }
    dataset.target_behavior =
        spec.target_behavior >= 0 ? spec.target_behavior : num_behaviors - 1;
    if (dataset.target_behavior >= num_behaviors) {
        throw ConfigError("generate_synthetic: target behavior out of range");
    }
    dataset.num_users = m;
    dataset.num_items = n;
    for (std::int64_t u = 0; u < m; ++u) {
        dataset.user_index.emplace(std::to_string(u), u);
    }
    for (std::int64_t i = 0; i < n; ++i) {
        dataset.item_index.emplace(std::to_string(i), i);
    }

    RngStream split_rng = RngStream::derive(spec.seed, "split");
    for (int k = 0; k < num_behaviors; ++k) {
        // Top-count prefix of the shared ranking; non-increasing counts nest
        // the behaviors into a funnel.
        std::vector<UserItemPair> pairs;
        pairs.reserve(static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]));
        for (std::int64_t idx = 0; idx < counts[static_cast<std::size_t>(k)]; ++idx) {
            pairs.emplace_back(scored[static_cast<std::size_t>(idx)].user,
                               scored[static_cast<std::size_t>(idx)].item);
        }
        std::sort(pairs.begin(), pairs.end());
        std::vector<UserItemPair> train_pairs;
        std::vector<UserItemPair> test_pairs;
        split_pairs(std::move(pairs), spec.split_ratio, split_rng, train_pairs, test_pairs);
        dataset.train.push_back(
            InteractionSet::from_pairs(k, m, n, std::move(train_pairs)));
        dataset.test.push_back(InteractionSet::from_pairs(k, m, n, std::move(test_pairs)));
    }
    return dataset;
}

Dataset restrict_to_behavior(const Dataset& dataset, int behavior) {
    if (behavior < 0 || behavior >= dataset.num_behaviors()) {
        throw ConfigError("restrict_to_behavior: behavior index out of range");
    }
    Dataset single;
    single.behavior_names = {dataset.behavior_names[static_cast<std::size_t>(behavior)]};
    single.target_behavior = 0;
    single.num_users = dataset.num_users;
    single.num_items = dataset.num_items;
    single.user_index = dataset.user_index;
    single.item_index = dataset.item_index;
    single.train.push_back(InteractionSet::from_pairs(
        0, dataset.num_users, dataset.num_items,
        dataset.train[static_cast<std::size_t>(behavior)].pairs()));
    single.test.push_back(InteractionSet::from_pairs(
        0, dataset.num_users, dataset.num_items,
        dataset.test[static_cast<std::size_t>(behavior)].pairs()));
    return single;
}

Dataset carve_validation(const Dataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("carve_validation: fraction must lie in (0, 1)");
    }
    const auto k = static_cast<std::size_t>(dataset.target_behavior);
    auto pairs = dataset.train[k].pairs();
    if (pairs.size() < 2) {
        throw DataError("carve_validation: target behavior has too few training pairs");
    }
    RngStream rng = RngStream::derive(seed, "validation");
    std::vector<UserItemPair> keep;
    std::vector<UserItemPair> validation;
    split_pairs(std::move(pairs), 1.0 - fraction, rng, keep, validation);
    if (validation.empty()) {
        throw DataError("carve_validation: fraction produced no validation pairs");
    }

    Dataset carved = dataset;
    carved.train[k] = InteractionSet::from_pairs(dataset.target_behavior, dataset.num_users,
                                                 dataset.num_items, std::move(keep));
    carved.test[k] = InteractionSet::from_pairs(dataset.target_behavior, dataset.num_users,
                                                dataset.num_items, std::move(validation));
    return carved;
}

}  // namespace imgcf
