#include "imgcf/model.hpp"

#include <algorithm>
#include <string>

#include "imgcf/errors.hpp"

namespace imgcf {

const char* to_string(Aggregator aggregator) {
    switch (aggregator) {
        case Aggregator::kNone: return "none";
        case Aggregator::kMean: return "mean";
        case Aggregator::kConcat: return "concat";
    }
    return "none";
}

Aggregator aggregator_from_string(const std::string& name) {
    if (name == "none") return Aggregator::kNone;
    if (name == "mean") return Aggregator::kMean;
    if (name == "concat") return Aggregator::kConcat;
    throw ConfigError("unknown aggregator '" + name + "', expected none|mean|concat");
}

void ModelConfig::validate() const {
    if (embedding_dim < 1) {
        throw ConfigError("ModelConfig: embedding_dim must be >= 1");
    }
    if (num_layers < 0) {
        throw ConfigError("ModelConfig: num_layers must be >= 0");
    }
    if (!(init_scale > 0.0)) {
        throw ConfigError("ModelConfig: init_scale must be positive");
    }
    for (const auto& [sparse, rich] : enhancement_map) {
        if (sparse == rich) {
            throw ConfigError("ModelConfig: behavior " + std::to_string(sparse) +
                              " cannot enhance itself");
        }
    }
    // Rich sources must not themselves be enhanced (keeps the map acyclic).
    for (const auto& [sparse, rich] : enhancement_map) {
        for (const auto& [other_sparse, other_rich] : enhancement_map) {
            if (rich == other_sparse) {
                throw ConfigError("ModelConfig: behavior " + std::to_string(rich) +
                                  " is both a rich source and an enhanced behavior");
            }
            if (sparse == other_sparse && rich != other_rich) {
                throw ConfigError("ModelConfig: behavior " + std::to_string(sparse) +
                                  " has two rich sources");
            }
        }
    }
}

EmbeddingTable init_embeddings(const ModelConfig& config, std::int64_t num_users,
                               std::int64_t num_items) {
    config.validate();
    const std::int64_t nodes = num_users + num_items;
    EmbeddingTable table;
    table.values = Matrix(nodes, config.embedding_dim);
    table.first_moment = Matrix(nodes, config.embedding_dim);
    table.second_moment = Matrix(nodes, config.embedding_dim);
    RngStream rng = RngStream::derive(config.seed, "init");
    for (double& v : table.values.data()) {
        v = rng.next_normal(0.0, config.init_scale);
    }
    return table;
}

ModelParameters init_parameters(const ModelConfig& config, std::int64_t num_users,
                                std::int64_t num_items, int num_behaviors) {
    ModelParameters params;
    if (config.base_embedding_mode == BaseEmbeddingMode::kShared) {
        params.tables.push_back(init_embeddings(config, num_users, num_items));
    } else {
        // Distinct streams per behavior so per-behavior tables start apart.
        for (int k = 0; k < num_behaviors; ++k) {
            ModelConfig per = config;
            per.seed = config.seed + static_cast<std::uint64_t>(k);
            params.tables.push_back(init_embeddings(per, num_users, num_items));
        }
    }
    return params;
}

std::vector<Matrix> propagate(const NormalizedGraph& graph, const Matrix& base,
                              std::int64_t num_layers, int threads) {
    if (graph.num_nodes() != base.rows()) {
        throw ConfigError("propagate: base has " + std::to_string(base.rows()) +
                          " rows but graph has " + std::to_string(graph.num_nodes()) +
                          " nodes");
    }
    std::vector<Matrix> layers;
    layers.reserve(static_cast<std::size_t>(num_layers) + 1);
    layers.push_back(base);
    for (std::int64_t l = 0; l < num_layers; ++l) {
        layers.push_back(spmm(graph, layers.back(), threads));
    }
    return layers;
}

Matrix layer_average(const std::vector<Matrix>& layers) {
    if (layers.empty()) {
        throw ConfigError("layer_average: empty layer list");
    }
    for (const auto& layer : layers) {
        if (!layer.same_shape(layers.front())) {
            throw ConfigError("layer_average: layer shapes differ");
        }
    }
    Matrix mean = layers.front();
    for (std::size_t l = 1; l < layers.size(); ++l) {
        mean.add_scaled(layers[l], 1.0);
    }
    const double weight = 1.0 / static_cast<double>(layers.size());
    for (double& v : mean.data()) {
        v *= weight;
    }
    return mean;
}

Matrix enhance(const Matrix& sparse_rep, const Matrix& rich_rep, Aggregator aggregator) {
    if (aggregator == Aggregator::kNone) {
        return sparse_rep;
    }
    if (!sparse_rep.same_shape(rich_rep)) {
        throw ConfigError("enhance: sparse and rich representations differ in shape");
    }
    if (aggregator == Aggregator::kMean) {
        Matrix out = sparse_rep;
        for (std::size_t i = 0; i < out.data().size(); ++i) {
            out.data()[i] = 0.5 * (sparse_rep.data()[i] + rich_rep.data()[i]);
        }
        return out;
    }
    Matrix out(sparse_rep.rows(), 2 * sparse_rep.cols());
    for (std::int64_t r = 0; r < sparse_rep.rows(); ++r) {
        const auto sparse_row = sparse_rep.row(r);
        const auto rich_row = rich_rep.row(r);
        const auto out_row = out.row(r);
        std::copy(sparse_row.begin(), sparse_row.end(), out_row.begin());
        std::copy(rich_row.begin(), rich_row.end(),
                  out_row.begin() + sparse_rep.cols());
    }
    return out;
}

double score(std::span<const double> user_row, std::span<const double> item_row) {
    if (user_row.size() != item_row.size()) {
        throw ConfigError("score: row widths differ");
    }
    return dot(user_row, item_row);
}

std::vector<std::pair<int, int>> resolve_enhancement_map(const ModelConfig& config,
                                                         const Dataset& dataset) {
    if (config.aggregator == Aggregator::kNone || dataset.num_behaviors() < 2) {
        return {};
    }
    if (!config.enhancement_map.empty()) {
        for (const auto& [sparse, rich] : config.enhancement_map) {
            if (sparse < 0 || sparse >= dataset.num_behaviors() || rich < 0 ||
                rich >= dataset.num_behaviors()) {
                throw ConfigError("enhancement map references behavior out of range");
            }
        }
        return config.enhancement_map;
    }
    const int rich = dataset.richest_behavior();
    std::vector<std::pair<int, int>> resolved;
    for (int k = 0; k < dataset.num_behaviors(); ++k) {
        if (k != rich) {
            resolved.emplace_back(k, rich);
        }
    }
    return resolved;
}

Model::Model(const Dataset& dataset, ModelConfig config)
    : config_(std::move(config)),
      num_users_(dataset.num_users),
      num_items_(dataset.num_items) {
    config_.validate();
    enhancement_map_ = resolve_enhancement_map(config_, dataset);
    graphs_.reserve(static_cast<std::size_t>(dataset.num_behaviors()));
    for (int k = 0; k < dataset.num_behaviors(); ++k) {
        graphs_.push_back(normalize_adjacency(
            build_adjacency(dataset.train[static_cast<std::size_t>(k)]), k));
    }
}

int Model::rich_source_of(int behavior) const {
    for (const auto& [sparse, rich] : enhancement_map_) {
        if (sparse == behavior) return rich;
    }
    return -1;
}

std::vector<BehaviorRepresentation> Model::forward(const ModelParameters& params,
                                                   int threads,
                                                   bool keep_layer_outputs) const {
    std::vector<BehaviorRepresentation> reps(graphs_.size());
    for (int k = 0; k < num_behaviors(); ++k) {
        auto& rep = reps[static_cast<std::size_t>(k)];
        rep.behavior_id = k;
        const Matrix& base =
            params.table_for(k, config_.base_embedding_mode).values;
        auto layers = propagate(graphs_[static_cast<std::size_t>(k)], base,
                                config_.num_layers, threads);
        rep.averaged = layer_average(layers);
        if (keep_layer_outputs) {
            rep.layer_outputs = std::move(layers);
        }
    }
    for (const auto& [sparse, rich] : enhancement_map_) {
        reps[static_cast<std::size_t>(sparse)].enhanced =
            enhance(reps[static_cast<std::size_t>(sparse)].averaged,
                    reps[static_cast<std::size_t>(rich)].averaged, config_.aggregator);
    }
    return reps;
}

}  // namespace imgcf
