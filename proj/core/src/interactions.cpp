#include "imgcf/interactions.hpp"

#include <algorithm>
#include <string>

#include "imgcf/errors.hpp"

namespace imgcf {

InteractionSet InteractionSet::from_pairs(int behavior_id, std::int64_t num_users,
                                          std::int64_t num_items,
                                          std::vector<UserItemPair> pairs) {
    if (num_users < 0 || num_items < 0) {
        throw ConfigError("InteractionSet: negative user/item count");
    }
    for (const auto& [u, i] : pairs) {
        if (u < 0 || u >= num_users || i < 0 || i >= num_items) {
            throw ConfigError("InteractionSet: pair (" + std::to_string(u) + ", " +
                              std::to_string(i) + ") out of range for " +
                              std::to_string(num_users) + " users / " +
                              std::to_string(num_items) + " items");
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    InteractionSet set;
    set.behavior_id_ = behavior_id;
    set.num_users_ = num_users;
    set.num_items_ = num_items;
    set.user_offsets_.assign(static_cast<std::size_t>(num_users) + 1, 0);
    set.items_.reserve(pairs.size());
    for (const auto& [u, i] : pairs) {
        ++set.user_offsets_[static_cast<std::size_t>(u) + 1];
        set.items_.push_back(i);
    }
    for (std::size_t u = 0; u < static_cast<std::size_t>(num_users); ++u) {
        set.user_offsets_[u + 1] += set.user_offsets_[u];
    }
    return set;
}

bool InteractionSet::contains(std::int64_t user, std::int64_t item) const {
    const auto items = items_of(user);
    return std::binary_search(items.begin(), items.end(), item);
}

std::vector<UserItemPair> InteractionSet::pairs() const {
    std::vector<UserItemPair> result;
    result.reserve(items_.size());
    for (std::int64_t u = 0; u < num_users_; ++u) {
        for (const auto i : items_of(u)) {
            result.emplace_back(u, i);
        }
    }
    return result;
}

}  // namespace imgcf
