#pragma once

// Shared generators for randomized tests.

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "imgcf/dataset.hpp"
#include "imgcf/interactions.hpp"
#include "imgcf/matrix.hpp"
#include "imgcf/rng.hpp"
#include "imgcf/trainer.hpp"

namespace imgcf::testing {

inline InteractionSet random_interactions(int behavior_id, std::int64_t num_users,
                                          std::int64_t num_items, std::int64_t num_pairs,
                                          RngStream& rng) {
    std::set<UserItemPair> unique;
    const std::int64_t cells = num_users * num_items;
    const std::int64_t want = std::min(num_pairs, cells);
    while (static_cast<std::int64_t>(unique.size()) < want) {
        unique.emplace(rng.next_index(num_users), rng.next_index(num_items));
    }
    return InteractionSet::from_pairs(behavior_id, num_users, num_items,
                                      {unique.begin(), unique.end()});
}

inline Matrix random_matrix(std::int64_t rows, std::int64_t cols, RngStream& rng,
                            double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        v = rng.next_normal(0.0, scale);
    }
    return m;
}

// Small multi-behavior dataset with dense-enough training sets for
// triplet sampling. Test splits stay empty unless asked for.
inline Dataset random_dataset(std::int64_t num_users, std::int64_t num_items,
                              const std::vector<std::int64_t>& train_sizes, RngStream& rng,
                              std::int64_t test_size = 0) {
    Dataset dataset;
    dataset.num_users = num_users;
    dataset.num_items = num_items;
    dataset.target_behavior = static_cast<int>(train_sizes.size()) - 1;
    for (std::size_t k = 0; k < train_sizes.size(); ++k) {
        dataset.behavior_names.push_back("b" + std::to_string(k));
        dataset.train.push_back(random_interactions(static_cast<int>(k), num_users,
                                                    num_items, train_sizes[k], rng));
        dataset.test.push_back(random_interactions(static_cast<int>(k), num_users, num_items,
                                                   test_size, rng));
    }
    for (std::int64_t u = 0; u < num_users; ++u) {
        dataset.user_index.emplace(std::to_string(u), u);
    }
    for (std::int64_t i = 0; i < num_items; ++i) {
        dataset.item_index.emplace(std::to_string(i), i);
    }
    return dataset;
}

// Valid triplets for a behavior: positives from the training set, negatives
// sampled outside it.
inline TripletBatch random_batch(const InteractionSet& train_k, int behavior_id,
                                 std::int64_t size, RngStream& rng) {
    const auto pairs = train_k.pairs();
    TripletBatch batch;
    batch.behavior_id = behavior_id;
    for (std::int64_t n = 0; n < size; ++n) {
        const auto& [u, i] =
            pairs[static_cast<std::size_t>(rng.next_index(static_cast<std::int64_t>(pairs.size())))];
        batch.triplets.push_back({u, i, sample_negative(train_k, u, rng)});
    }
    return batch;
}

}  // namespace imgcf::testing
