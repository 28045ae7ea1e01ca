#pragma once

#include "imgcf/interactions.hpp"
#include "imgcf/matrix.hpp"
#include "imgcf/sparse.hpp"

namespace imgcf {

// Symmetrically normalized bipartite adjacency of one behavior over M+N
// nodes: users occupy rows [0, M), items rows [M, M+N). The entry for edge
// (p, q) is 1/sqrt(deg(p) * deg(q)); zero-degree rows stay empty.
struct NormalizedGraph {
    SparseMatrixCSR adjacency;
    int behavior_id = 0;

    std::int64_t num_nodes() const { return adjacency.num_rows; }
};

// (M+N)x(M+N) binary symmetric adjacency with the user block in the first M
// rows: entry (u, M+i) = 1 iff (u, i) is an interaction, mirrored below the
// diagonal. The user-user and item-item blocks are empty.
SparseMatrixCSR build_adjacency(const InteractionSet& interactions);

// Replaces each nonzero (p, q) of a square symmetric binary adjacency with
// 1/sqrt(D_pp * D_qq) where D_pp is the row sum. Degree-zero rows contribute
// nothing (0^{-1/2} reads as an empty row).
NormalizedGraph normalize_adjacency(const SparseMatrixCSR& adjacency, int behavior_id = 0);

// Exact sparse-dense product adjacency * dense, accumulated row-major in
// ascending column order. Row-parallel execution is bit-identical to the
// single-threaded result because rows never share an accumulator.
Matrix spmm(const NormalizedGraph& graph, const Matrix& dense, int threads = 1);

}  // namespace imgcf
