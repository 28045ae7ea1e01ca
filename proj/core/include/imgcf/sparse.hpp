#pragma once

#include <cstdint>
#include <vector>

namespace imgcf {

// Compressed sparse row matrix with 64-bit values. Column indices within a
// row are strictly increasing; row_offsets is monotone with
// row_offsets[0] == 0 and row_offsets[num_rows] == nnz.
struct SparseMatrixCSR {
    std::int64_t num_rows = 0;
    std::int64_t num_cols = 0;
    std::vector<std::int64_t> row_offsets;
    std::vector<std::int64_t> col_indices;
    std::vector<double> values;

    std::int64_t nnz() const { return static_cast<std::int64_t>(col_indices.size()); }

    // Entry lookup by binary search; 0.0 for structural zeros.
    double value_at(std::int64_t row, std::int64_t col) const;

    // Number of stored entries in a row.
    std::int64_t row_nnz(std::int64_t row) const {
        return row_offsets[static_cast<std::size_t>(row) + 1] -
               row_offsets[static_cast<std::size_t>(row)];
    }

    // Checks the structural invariants above; throws ConfigError on violation.
    void check_invariants() const;

    friend bool operator==(const SparseMatrixCSR& a, const SparseMatrixCSR& b) = default;
};

}  // namespace imgcf
