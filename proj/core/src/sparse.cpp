#include "imgcf/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imgcf/errors.hpp"

namespace imgcf {

double SparseMatrixCSR::value_at(std::int64_t row, std::int64_t col) const {
    const auto begin = col_indices.begin() + row_offsets[static_cast<std::size_t>(row)];
    const auto end = col_indices.begin() + row_offsets[static_cast<std::size_t>(row) + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) {
        return 0.0;
    }
    return values[static_cast<std::size_t>(it - col_indices.begin())];
}

void SparseMatrixCSR::check_invariants() const {
    if (num_rows < 0 || num_cols < 0) {
        throw ConfigError("SparseMatrixCSR: negative dimensions");
    }
    if (row_offsets.size() != static_cast<std::size_t>(num_rows) + 1) {
        throw ConfigError("SparseMatrixCSR: row_offsets size != num_rows + 1");
    }
    if (!row_offsets.empty() && row_offsets.front() != 0) {
        throw ConfigError("SparseMatrixCSR: row_offsets[0] != 0");
    }
    if (row_offsets.back() != nnz() || values.size() != col_indices.size()) {
        throw ConfigError("SparseMatrixCSR: offsets/nnz mismatch");
    }
    for (std::int64_t r = 0; r < num_rows; ++r) {
        const auto lo = row_offsets[static_cast<std::size_t>(r)];
        const auto hi = row_offsets[static_cast<std::size_t>(r) + 1];
        if (hi < lo) {
            throw ConfigError("SparseMatrixCSR: row_offsets not monotone at row " +
                              std::to_string(r));
        }
        for (auto idx = lo; idx < hi; ++idx) {
            const auto col = col_indices[static_cast<std::size_t>(idx)];
            if (col < 0 || col >= num_cols) {
                throw ConfigError("SparseMatrixCSR: column out of range at row " +
                                  std::to_string(r));
            }
            if (idx > lo && col <= col_indices[static_cast<std::size_t>(idx) - 1]) {
                throw ConfigError("SparseMatrixCSR: columns not strictly increasing in row " +
                                  std::to_string(r));
            }
            if (!std::isfinite(values[static_cast<std::size_t>(idx)])) {
                throw ConfigError("SparseMatrixCSR: non-finite value at row " +
                                  std::to_string(r));
            }
        }
    }
}

}  // namespace imgcf
