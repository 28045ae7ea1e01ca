#pragma once

// Independent dense-matrix reference pipeline used as the oracle for the CSR
// graph core, the forward pass and the analytic gradients. Everything here
// is deliberately naive: dense storage, triple-loop products, no sharing
// with the library code paths under test.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "imgcf/dataset.hpp"
#include "imgcf/matrix.hpp"
#include "imgcf/model.hpp"
#include "imgcf/trainer.hpp"

namespace imgcf::testing {

Matrix dense_adjacency(const InteractionSet& interactions);

// D^{-1/2} A D^{-1/2} with zero-degree rows left at zero.
Matrix dense_normalize(const Matrix& adjacency);

Matrix dense_matmul(const Matrix& a, const Matrix& b);

// P = (1/(L+1)) * sum_{l=0}^{L} A^l.
Matrix dense_propagation_operator(const Matrix& a_norm, std::int64_t num_layers);

double max_abs_difference(const Matrix& a, const Matrix& b);

// Dense mirror of the full multi-behavior forward + BPR loss, structured for
// finite differencing. Propagation operators are precomputed per behavior.
class DenseReferenceModel {
public:
    DenseReferenceModel(const Dataset& dataset, const ModelConfig& config);

    int num_behaviors() const { return static_cast<int>(operators_.size()); }
    std::int64_t num_nodes() const { return num_users_ + num_items_; }

    // Branch representations E^k = P^k * table(k).
    std::vector<Matrix> branch_representations(const std::vector<Matrix>& tables) const;

    // Scoring matrices after enhancement. When frozen_rich is non-null, the
    // rich input of every enhanced behavior is taken from it instead of the
    // live branches (the stop-gradient reading of the loss).
    std::vector<Matrix> scoring_matrices(const std::vector<Matrix>& tables,
                                         const std::vector<Matrix>* frozen_rich) const;

    double total_loss(const std::vector<Matrix>& tables,
                      const std::vector<TripletBatch>& batches,
                      const std::vector<Matrix>* frozen_rich) const;

    // Central finite differences of total_loss w.r.t. every table entry.
    // Under stop_gradient the differenced loss freezes the rich branches at
    // the unperturbed tables.
    std::vector<Matrix> fd_base_gradient(const std::vector<Matrix>& tables,
                                         const std::vector<TripletBatch>& batches,
                                         double step) const;

    // Closed-form base gradient with the rich branch frozen to constants;
    // the independent check of the stop-gradient contract.
    std::vector<Matrix> frozen_rich_base_gradient(const std::vector<Matrix>& tables,
                                                  const TripletBatch& batch) const;

private:
    std::int64_t num_users_ = 0;
    std::int64_t num_items_ = 0;
    ModelConfig config_;
    std::vector<std::pair<int, int>> enhancement_;
    std::vector<Matrix> operators_;  // dense P^k

    int rich_source_of(int behavior) const;
    std::size_t table_index(int behavior) const;
};

}  // namespace imgcf::testing
