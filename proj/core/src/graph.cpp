#include "imgcf/graph.hpp"

#include <cmath>
#include <string>

#include "imgcf/errors.hpp"
#include "imgcf/parallel.hpp"

namespace imgcf {

SparseMatrixCSR build_adjacency(const InteractionSet& interactions) {
    const std::int64_t num_users = interactions.num_users();
    const std::int64_t num_items = interactions.num_items();
    const std::int64_t num_nodes = num_users + num_items;

    SparseMatrixCSR adj;
    adj.num_rows = num_nodes;
    adj.num_cols = num_nodes;
    adj.row_offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);

    // Row sizes: user rows take their item lists, item rows the mirror.
    for (std::int64_t u = 0; u < num_users; ++u) {
        for (const auto i : interactions.items_of(u)) {
            if (i < 0 || i >= num_items) {
                throw ConfigError("build_adjacency: pair (" + std::to_string(u) + ", " +
                                  std::to_string(i) + ") out of range");
            }
            ++adj.row_offsets[static_cast<std::size_t>(u) + 1];
            ++adj.row_offsets[static_cast<std::size_t>(num_users + i) + 1];
        }
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(num_nodes); ++r) {
        adj.row_offsets[r + 1] += adj.row_offsets[r];
    }

    const std::int64_t nnz = adj.row_offsets.back();
    adj.col_indices.assign(static_cast<std::size_t>(nnz), 0);
    adj.values.assign(static_cast<std::size_t>(nnz), 1.0);

    std::vector<std::int64_t> cursor(adj.row_offsets.begin(), adj.row_offsets.end() - 1);
    // Ascending u with ascending items keeps every row's columns sorted:
    // user rows receive columns M+i in item order, item rows receive u in
    // user order.
    for (std::int64_t u = 0; u < num_users; ++u) {
        for (const auto i : interactions.items_of(u)) {
            adj.col_indices[static_cast<std::size_t>(cursor[static_cast<std::size_t>(u)]++)] =
                num_users + i;
            adj.col_indices[static_cast<std::size_t>(
                cursor[static_cast<std::size_t>(num_users + i)]++)] = u;
        }
    }
    return adj;
}

NormalizedGraph normalize_adjacency(const SparseMatrixCSR& adjacency, int behavior_id) {
    if (adjacency.num_rows != adjacency.num_cols) {
        throw ConfigError("normalize_adjacency: matrix is not square (" +
                          std::to_string(adjacency.num_rows) + " x " +
                          std::to_string(adjacency.num_cols) + ")");
    }
    std::vector<double> degree(static_cast<std::size_t>(adjacency.num_rows), 0.0);
    for (std::int64_t r = 0; r < adjacency.num_rows; ++r) {
        double sum = 0.0;
        const auto lo = adjacency.row_offsets[static_cast<std::size_t>(r)];
        const auto hi = adjacency.row_offsets[static_cast<std::size_t>(r) + 1];
        for (auto idx = lo; idx < hi; ++idx) {
            sum += adjacency.values[static_cast<std::size_t>(idx)];
        }
        degree[static_cast<std::size_t>(r)] = sum;
    }

    NormalizedGraph graph;
    graph.behavior_id = behavior_id;
    graph.adjacency = adjacency;
    for (std::int64_t r = 0; r < adjacency.num_rows; ++r) {
        const auto lo = adjacency.row_offsets[static_cast<std::size_t>(r)];
        const auto hi = adjacency.row_offsets[static_cast<std::size_t>(r) + 1];
        for (auto idx = lo; idx < hi; ++idx) {
            const auto c = adjacency.col_indices[static_cast<std::size_t>(idx)];
            graph.adjacency.values[static_cast<std::size_t>(idx)] =
                1.0 / std::sqrt(degree[static_cast<std::size_t>(r)] *
                                degree[static_cast<std::size_t>(c)]);
        }
    }
    return graph;
}

Matrix spmm(const NormalizedGraph& graph, const Matrix& dense, int threads) {
    const SparseMatrixCSR& adj = graph.adjacency;
    if (adj.num_cols != dense.rows()) {
        throw ConfigError("spmm: dimension mismatch, adjacency is " +
                          std::to_string(adj.num_rows) + " x " + std::to_string(adj.num_cols) +
                          " but dense has " + std::to_string(dense.rows()) + " rows");
    }
    Matrix out(adj.num_rows, dense.cols());
    parallel_for(adj.num_rows, threads, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r) {
            const auto out_row = out.row(r);
            const auto lo = adj.row_offsets[static_cast<std::size_t>(r)];
            const auto hi = adj.row_offsets[static_cast<std::size_t>(r) + 1];
            for (auto idx = lo; idx < hi; ++idx) {
                const auto c = adj.col_indices[static_cast<std::size_t>(idx)];
                const double v = adj.values[static_cast<std::size_t>(idx)];
                const auto in_row = dense.row(c);
                for (std::size_t d = 0; d < out_row.size(); ++d) {
                    out_row[d] += v * in_row[d];
                }
            }
        }
    });
    return out;
}

}  // namespace imgcf
