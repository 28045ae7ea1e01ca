#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "imgcf/dataset.hpp"
#include "imgcf/graph.hpp"
#include "imgcf/matrix.hpp"
#include "imgcf/rng.hpp"

namespace imgcf {

enum class Aggregator { kNone, kMean, kConcat };

const char* to_string(Aggregator aggregator);
Aggregator aggregator_from_string(const std::string& name);

enum class BaseEmbeddingMode { kShared, kPerBehavior };

struct ModelConfig {
    std::int64_t embedding_dim = 64;
    std::int64_t num_layers = 3;
    Aggregator aggregator = Aggregator::kMean;
    // sparse behavior -> rich source. Empty: every behavior except the one
    // with the most training pairs is enhanced by that richest behavior.
    std::vector<std::pair<int, int>> enhancement_map;
    BaseEmbeddingMode base_embedding_mode = BaseEmbeddingMode::kShared;
    bool stop_gradient = true;
    double init_scale = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Dense base parameters with Adam moment state.
struct EmbeddingTable {
    Matrix values;
    Matrix first_moment;
    Matrix second_moment;
    std::int64_t step = 0;
};

// All trainable state: one table in shared mode, one per behavior otherwise.
struct ModelParameters {
    std::vector<EmbeddingTable> tables;

    EmbeddingTable& table_for(int behavior, BaseEmbeddingMode mode) {
        return tables[mode == BaseEmbeddingMode::kShared ? 0
                                                         : static_cast<std::size_t>(behavior)];
    }
    const EmbeddingTable& table_for(int behavior, BaseEmbeddingMode mode) const {
        return tables[mode == BaseEmbeddingMode::kShared ? 0
                                                         : static_cast<std::size_t>(behavior)];
    }
};

// Propagated state of one behavior: the layer-averaged matrix and, for
// enhanced behaviors, the aggregated matrix actually used for scoring.
struct BehaviorRepresentation {
    int behavior_id = 0;
    std::vector<Matrix> layer_outputs;  // L+1 matrices when retained
    Matrix averaged;
    std::optional<Matrix> enhanced;  // width d (mean) or 2d (concat)

    const Matrix& scoring_matrix() const { return enhanced ? *enhanced : averaged; }
};

// Entries i.i.d. normal(0, init_scale^2) from the seeded init stream;
// moments zero, step 0.
EmbeddingTable init_embeddings(const ModelConfig& config, std::int64_t num_users,
                               std::int64_t num_items);

ModelParameters init_parameters(const ModelConfig& config, std::int64_t num_users,
                                std::int64_t num_items, int num_behaviors);

// [base, A*base, A^2*base, ..., A^L*base].
std::vector<Matrix> propagate(const NormalizedGraph& graph, const Matrix& base,
                              std::int64_t num_layers, int threads = 1);

// Elementwise mean with weight 1/(L+1).
Matrix layer_average(const std::vector<Matrix>& layers);

// mean: (sparse + rich) / 2, width d. concat: [sparse | rich], width 2d.
// none: sparse unchanged. Applies to every row, users and items alike.
Matrix enhance(const Matrix& sparse_rep, const Matrix& rich_rep, Aggregator aggregator);

// Dot-product interaction score over rows of a scoring matrix. Under concat
// this decomposes as the sum of the two branch dot products.
double score(std::span<const double> user_row, std::span<const double> item_row);

// Pairs (sparse, rich) actually in effect for a dataset: the explicit map,
// or the default rule when the config leaves it empty. Empty result when the
// aggregator is none or K == 1.
std::vector<std::pair<int, int>> resolve_enhancement_map(const ModelConfig& config,
                                                         const Dataset& dataset);

// Owns the per-behavior normalized graphs (built once from the train split)
// and computes the full forward pass.
class Model {
public:
    Model(const Dataset& dataset, ModelConfig config);

    const ModelConfig& config() const { return config_; }
    int num_behaviors() const { return static_cast<int>(graphs_.size()); }
    std::int64_t num_nodes() const { return num_users_ + num_items_; }
    std::int64_t num_users() const { return num_users_; }
    std::int64_t num_items() const { return num_items_; }
    const NormalizedGraph& graph(int behavior) const {
        return graphs_[static_cast<std::size_t>(behavior)];
    }
    const std::vector<std::pair<int, int>>& enhancement_map() const {
        return enhancement_map_;
    }
    // Rich source for a sparse behavior, or -1.
    int rich_source_of(int behavior) const;

    // Propagate, layer-average, then enhance sparse behaviors. layer_outputs
    // are retained only on request; the training loop does not need them.
    std::vector<BehaviorRepresentation> forward(const ModelParameters& params,
                                                int threads = 1,
                                                bool keep_layer_outputs = false) const;

private:
    ModelConfig config_;
    std::int64_t num_users_ = 0;
    std::int64_t num_items_ = 0;
    std::vector<NormalizedGraph> graphs_;
    std::vector<std::pair<int, int>> enhancement_map_;
};

}  // namespace imgcf
