#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace imgcf {

using UserItemPair = std::pair<std::int64_t, std::int64_t>;

// Deduplicated positive (user, item) pairs of one behavior. Stored in CSR
// form over users with item lists in ascending order, which makes membership
// tests, per-user candidate masking and adjacency construction direct.
class InteractionSet {
public:
    InteractionSet() = default;

    // Validates index ranges, sorts and deduplicates.
    static InteractionSet from_pairs(int behavior_id, std::int64_t num_users,
                                     std::int64_t num_items,
                                     std::vector<UserItemPair> pairs);

    int behavior_id() const { return behavior_id_; }
    std::int64_t num_users() const { return num_users_; }
    std::int64_t num_items() const { return num_items_; }
    std::int64_t num_pairs() const { return static_cast<std::int64_t>(items_.size()); }

    std::int64_t user_degree(std::int64_t user) const {
        return user_offsets_[static_cast<std::size_t>(user) + 1] -
               user_offsets_[static_cast<std::size_t>(user)];
    }

    // Items of one user, ascending.
    std::span<const std::int64_t> items_of(std::int64_t user) const {
        const auto lo = user_offsets_[static_cast<std::size_t>(user)];
        const auto hi = user_offsets_[static_cast<std::size_t>(user) + 1];
        return {items_.data() + lo, static_cast<std::size_t>(hi - lo)};
    }

    bool contains(std::int64_t user, std::int64_t item) const;

    // Materializes the pair list in ascending (u, i) order.
    std::vector<UserItemPair> pairs() const;

private:
    int behavior_id_ = 0;
    std::int64_t num_users_ = 0;
    std::int64_t num_items_ = 0;
    std::vector<std::int64_t> user_offsets_;  // size num_users + 1
    std::vector<std::int64_t> items_;
};

}  // namespace imgcf
