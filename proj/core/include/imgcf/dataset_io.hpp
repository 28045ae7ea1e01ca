#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "imgcf/dataset.hpp"

namespace imgcf {

// Extra provenance recorded next to the split files.
struct DatasetProvenance {
    std::string source;  // "ingested" or "synthetic"
    std::uint64_t seed = 0;
    std::int64_t filter_threshold = 0;  // 0: no cold-start filter applied
    double split_ratio = 0.8;
    double imbalance_ratio = 0.0;
};

// Canonical dataset directory: metadata.json plus one pair-list file per
// behavior per split (train_<name>.tsv / test_<name>.tsv, two tab-separated
// integer columns in ascending (u, i) order). Writing is deterministic, so
// the same dataset always produces a byte-identical directory.
void write_dataset_dir(const Dataset& dataset, const std::filesystem::path& dir,
                       const DatasetProvenance& provenance);

Dataset read_dataset_dir(const std::filesystem::path& dir);

// Reads metadata.json provenance back (per-field; missing fields keep their
// defaults).
DatasetProvenance read_provenance(const std::filesystem::path& dir);

// FNV-1a hash of the metadata file contents, used to tie runs to the exact
// dataset they were trained on.
std::string dataset_metadata_hash(const std::filesystem::path& dir);

}  // namespace imgcf
