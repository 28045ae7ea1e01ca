#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <unordered_map>
#include <vector>

#include "imgcf/dataset.hpp"
#include "imgcf/eval.hpp"
#include "imgcf/model.hpp"

namespace imgcf {

struct TrainConfig {
    std::int64_t batch_size = 2048;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2_coefficient = 0.0;
    std::int64_t max_epochs = 100;
    std::int64_t eval_every = 10;
    std::int64_t early_stop_patience = 5;
    // > 0: carve this share of the target behavior's training pairs into a
    // leakage-free validation split and monitor that instead of the test set.
    double validation_fraction = 0.0;
    int threads = 1;
    bool record_timing = true;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Triplet {
    std::int64_t user;
    std::int64_t pos_item;  // item index in [0, N)
    std::int64_t neg_item;
};

struct TripletBatch {
    int behavior_id = 0;
    std::vector<Triplet> triplets;
};

// Sparse node-row gradients on one branch matrix E^k. Rows accumulate in
// insertion order; densification scatters whole rows, so the dense result
// does not depend on map iteration order.
class GradientAccumulator {
public:
    GradientAccumulator(int behavior_tag, std::int64_t width)
        : behavior_tag_(behavior_tag), width_(width) {}

    int behavior_tag() const { return behavior_tag_; }
    std::int64_t width() const { return width_; }
    bool empty() const { return rows_.empty(); }

    // Row for a node, created zero-filled on first touch.
    std::vector<double>& row(std::int64_t node);

    const std::unordered_map<std::int64_t, std::vector<double>>& rows() const {
        return rows_;
    }

    bool all_finite() const;

    Matrix to_dense(std::int64_t num_nodes) const;

private:
    int behavior_tag_;
    std::int64_t width_;
    std::unordered_map<std::int64_t, std::vector<double>> rows_;
};

struct BprLossGrad {
    double loss;    // -ln sigmoid(diff), stable at any |diff|
    double d_diff;  // sigmoid(diff) - 1, in (-1, 0)
};

// BPR pairwise loss for diff = score_pos - score_neg.
BprLossGrad bpr_pair_loss(double score_pos, double score_neg);

// Gradients of one behavior's summed batch loss w.r.t. the branch matrices
// it touches: always the behavior's own branch; additionally the rich source
// branch when the behavior is enhanced and stop_gradient is off. The mean
// aggregator splits row gradients in half between branches, concat routes
// the first d columns to the sparse branch and the last d to the rich one.
struct BatchGradients {
    double loss_sum = 0.0;
    std::int64_t triplet_count = 0;
    std::vector<GradientAccumulator> branches;
};

BatchGradients batch_gradients(const TripletBatch& batch,
                               const std::vector<BehaviorRepresentation>& representations,
                               const Model& model);

// Pullback through E^k = P^k E with P^k = (1/(L+1)) sum_l (A^k)^l: since A^k
// is symmetric, G_base = P^k G_branch, computed as L successive spmm calls
// plus averaging. Exact.
Matrix backprop_to_base(const GradientAccumulator& branch_gradients,
                        const NormalizedGraph& graph, std::int64_t num_layers,
                        int threads = 1);

// Per-table base-space gradient of one behavior's batch: branch routing
// followed by pullback through each touched branch's graph. The returned
// vector matches params.tables in length.
std::vector<Matrix> behavior_base_gradient(const TripletBatch& batch,
                                           const std::vector<BehaviorRepresentation>& representations,
                                           const Model& model, int threads = 1);

// Bias-corrected Adam on the dense table; the L2 term l2 * values joins the
// gradient first when l2 > 0. Moments persist across steps.
void adam_step(EmbeddingTable& table, const Matrix& base_gradient,
               const TrainConfig& config);

struct EpochStats {
    std::int64_t epoch = 0;
    std::vector<double> mean_loss;           // per behavior
    std::vector<std::int64_t> triplet_counts;  // per behavior
};

struct HistoryRecord {
    std::int64_t epoch = 0;
    std::vector<std::pair<std::string, double>> mean_loss;  // behavior name -> loss
    std::optional<double> recall;
    std::optional<double> ndcg;
    std::optional<double> wall_time_s;

    std::string to_json_line() const;
};

struct FitResult {
    ModelParameters best_params;
    std::int64_t best_epoch = 0;
    double best_metric = -1.0;  // monitored recall; -1 when never evaluated
    std::vector<HistoryRecord> history;
};

void write_history(const std::vector<HistoryRecord>& history,
                   const std::filesystem::path& path);

// Multi-task BPR training: each step draws one batch per behavior, pacing on
// the largest behavior (its positives visited once per epoch through a
// shuffled permutation, smaller behaviors resampled with replacement), sums
// per-behavior base gradients and applies a single Adam step.
class Trainer {
public:
    Trainer(const Dataset& dataset, ModelConfig model_config, TrainConfig train_config,
            EvalConfig eval_config = {});

    const Model& model() const { return model_; }
    // The dataset actually trained on (validation carved out when requested).
    const Dataset& dataset() const { return dataset_; }

    EpochStats train_epoch(ModelParameters& params, RngStream& rng,
                           std::int64_t epoch_index);

    FitResult fit();

private:
    Dataset dataset_;
    Model model_;
    TrainConfig train_config_;
    EvalConfig eval_config_;
    int pacing_behavior_ = 0;
};

}  // namespace imgcf
