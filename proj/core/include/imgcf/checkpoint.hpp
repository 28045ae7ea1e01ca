#pragma once

#include <filesystem>

#include "imgcf/model.hpp"

namespace imgcf {

// Saved trainable state: model configuration, node counts and every
// parameter table with its Adam moments and step counter.
struct Checkpoint {
    ModelConfig config;
    std::int64_t num_users = 0;
    std::int64_t num_items = 0;
    ModelParameters params;
};

// Binary format with raw little-endian doubles; load(save(x)) == x bit for
// bit.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace imgcf
