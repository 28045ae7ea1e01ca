#include "imgcf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "imgcf/errors.hpp"

namespace imgcf {

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("TrainConfig: adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("TrainConfig: epsilon must be positive");
    if (l2_coefficient < 0.0) throw ConfigError("TrainConfig: l2_coefficient must be >= 0");
    if (max_epochs < 0) throw ConfigError("TrainConfig: max_epochs must be >= 0");
    if (eval_every < 1) throw ConfigError("TrainConfig: eval_every must be >= 1");
    if (early_stop_patience < 0) throw ConfigError("TrainConfig: early_stop_patience must be >= 0");
    if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
        throw ConfigError("TrainConfig: validation_fraction must lie in [0, 1)");
    }
}

std::vector<double>& GradientAccumulator::row(std::int64_t node) {
    auto [it, inserted] = rows_.try_emplace(node);
    if (inserted) {
        it->second.assign(static_cast<std::size_t>(width_), 0.0);
    }
    return it->second;
}

bool GradientAccumulator::all_finite() const {
    for (const auto& [node, values] : rows_) {
        for (const double v : values) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

Matrix GradientAccumulator::to_dense(std::int64_t num_nodes) const {
    Matrix dense(num_nodes, width_);
    for (const auto& [node, values] : rows_) {
        std::copy(values.begin(), values.end(), dense.row(node).begin());
    }
    return dense;
}

BprLossGrad bpr_pair_loss(double score_pos, double score_neg) {
    const double diff = score_pos - score_neg;
    BprLossGrad out{};
    if (diff >= 0.0) {
        const double e = std::exp(-diff);
        out.loss = std::log1p(e);
        out.d_diff = 1.0 / (1.0 + e) - 1.0;
    } else {
        const double e = std::exp(diff);
        out.loss = -diff + std::log1p(e);
        out.d_diff = e / (1.0 + e) - 1.0;
    }
    return out;
}

BatchGradients batch_gradients(const TripletBatch& batch,
                               const std::vector<BehaviorRepresentation>& representations,
                               const Model& model) {
    const int k = batch.behavior_id;
    const auto& rep = representations[static_cast<std::size_t>(k)];
    const Matrix& scoring = rep.scoring_matrix();
    const std::int64_t d = model.config().embedding_dim;
    const std::int64_t num_users = model.num_users();
    const Aggregator aggregator = model.config().aggregator;
    const bool enhanced = rep.enhanced.has_value();
    const int rich = model.rich_source_of(k);
    const bool route_rich = enhanced && rich >= 0 && !model.config().stop_gradient;

    BatchGradients out;
    out.branches.reserve(route_rich ? 2 : 1);
    out.branches.emplace_back(k, d);
    if (route_rich) {
        out.branches.emplace_back(rich, d);
    }
    GradientAccumulator& own = out.branches[0];
    GradientAccumulator* rich_branch = route_rich ? &out.branches[1] : nullptr;

    // Factor applied to the scoring-row gradient on its way into a branch:
    // 1 for an unenhanced behavior, 1/2 per branch under mean; concat uses
    // column routing instead.
    const double branch_factor = (enhanced && aggregator == Aggregator::kMean) ? 0.5 : 1.0;
    const std::int64_t rich_col0 = (enhanced && aggregator == Aggregator::kConcat) ? d : 0;

    for (const auto& t : batch.triplets) {
        const std::int64_t u = t.user;
        const std::int64_t pos = num_users + t.pos_item;
        const std::int64_t neg = num_users + t.neg_item;
        const auto user_row = scoring.row(u);
        const auto pos_row = scoring.row(pos);
        const auto neg_row = scoring.row(neg);

        const auto [loss, g] = bpr_pair_loss(dot(user_row, pos_row), dot(user_row, neg_row));
        out.loss_sum += loss;

        auto& own_u = own.row(u);
        auto& own_pos = own.row(pos);
        auto& own_neg = own.row(neg);
        for (std::int64_t c = 0; c < d; ++c) {
            const auto cc = static_cast<std::size_t>(c);
            own_u[cc] += branch_factor * g * (pos_row[cc] - neg_row[cc]);
            own_pos[cc] += branch_factor * g * user_row[cc];
            own_neg[cc] -= branch_factor * g * user_row[cc];
        }
        if (rich_branch != nullptr) {
            auto& rich_u = rich_branch->row(u);
            auto& rich_pos = rich_branch->row(pos);
            auto& rich_neg = rich_branch->row(neg);
            for (std::int64_t c = 0; c < d; ++c) {
                const auto cc = static_cast<std::size_t>(c);
                const auto sc = static_cast<std::size_t>(rich_col0 + c);
                rich_u[cc] += branch_factor * g * (pos_row[sc] - neg_row[sc]);
                rich_pos[cc] += branch_factor * g * user_row[sc];
                rich_neg[cc] -= branch_factor * g * user_row[sc];
            }
        }
    }
    out.triplet_count = static_cast<std::int64_t>(batch.triplets.size());
    return out;
}

Matrix backprop_to_base(const GradientAccumulator& branch_gradients,
                        const NormalizedGraph& graph, std::int64_t num_layers,
                        int threads) {
    Matrix hop = branch_gradients.to_dense(graph.num_nodes());
    Matrix total = hop;
    for (std::int64_t l = 0; l < num_layers; ++l) {
        hop = spmm(graph, hop, threads);
        total.add_scaled(hop, 1.0);
    }
    const double weight = 1.0 / static_cast<double>(num_layers + 1);
    for (double& v : total.data()) {
        v *= weight;
    }
    return total;
}

namespace {

std::vector<Matrix> pullback_to_tables(const BatchGradients& gradients, const Model& model,
                                       int threads) {
    const auto mode = model.config().base_embedding_mode;
    const std::size_t num_tables =
        mode == BaseEmbeddingMode::kShared ? 1
                                           : static_cast<std::size_t>(model.num_behaviors());
    std::vector<Matrix> per_table(num_tables,
                                  Matrix(model.num_nodes(), model.config().embedding_dim));
    for (const auto& branch : gradients.branches) {
        Matrix pulled = backprop_to_base(branch, model.graph(branch.behavior_tag()),
                                         model.config().num_layers, threads);
        const std::size_t table =
            mode == BaseEmbeddingMode::kShared ? 0
                                               : static_cast<std::size_t>(branch.behavior_tag());
        per_table[table].add_scaled(pulled, 1.0);
    }
    return per_table;
}

}  // namespace

std::vector<Matrix> behavior_base_gradient(const TripletBatch& batch,
                                           const std::vector<BehaviorRepresentation>& representations,
                                           const Model& model, int threads) {
    return pullback_to_tables(batch_gradients(batch, representations, model), model, threads);
}

void adam_step(EmbeddingTable& table, const Matrix& base_gradient,
               const TrainConfig& config) {
    if (!table.values.same_shape(base_gradient)) {
        throw ConfigError("adam_step: gradient shape does not match the table");
    }
    table.step += 1;
    const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(table.step));
    const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(table.step));

    auto& values = table.values.data();
    auto& first = table.first_moment.data();
    auto& second = table.second_moment.data();
    const auto& grad = base_gradient.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
        double g = grad[i];
        if (config.l2_coefficient > 0.0) {
            g += config.l2_coefficient * values[i];
        }
        if (!std::isfinite(g)) {
            throw NumericalError("adam_step: non-finite gradient at step " +
                                 std::to_string(table.step));
        }
        first[i] = config.beta1 * first[i] + (1.0 - config.beta1) * g;
        second[i] = config.beta2 * second[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = first[i] / bias1;
        const double v_hat = second[i] / bias2;
        values[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
}

std::string HistoryRecord::to_json_line() const {
    nlohmann::json line;
    line["epoch"] = epoch;
    nlohmann::json losses = nlohmann::json::object();
    for (const auto& [name, value] : mean_loss) {
        losses[name] = value;
    }
    line["loss"] = losses;
    if (recall) line["recall"] = *recall;
    if (ndcg) line["ndcg"] = *ndcg;
    if (wall_time_s) line["wall_time_s"] = *wall_time_s;
    return line.dump();
}

void write_history(const std::vector<HistoryRecord>& history,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    for (const auto& record : history) {
        out << record.to_json_line() << '\n';
    }
}

Trainer::Trainer(const Dataset& dataset, ModelConfig model_config, TrainConfig train_config,
                 EvalConfig eval_config)
    : dataset_(train_config.validation_fraction > 0.0
                   ? carve_validation(dataset, train_config.validation_fraction,
                                      train_config.seed)
                   : dataset),
      model_(dataset_, std::move(model_config)),
      train_config_(train_config),
      eval_config_(eval_config) {
    train_config_.validate();
    eval_config_.validate();
    pacing_behavior_ = dataset_.richest_behavior();
    if (dataset_.train[static_cast<std::size_t>(pacing_behavior_)].num_pairs() == 0) {
        throw DataError("Trainer: no behavior has training interactions");
    }
}

EpochStats Trainer::train_epoch(ModelParameters& params, RngStream& rng,
                                std::int64_t epoch_index) {
    const int num_behaviors = model_.num_behaviors();
    const std::int64_t batch_size = train_config_.batch_size;
    const auto& pacing_set = dataset_.train[static_cast<std::size_t>(pacing_behavior_)];
    const std::int64_t pacing_n = pacing_set.num_pairs();
    const std::int64_t steps = (pacing_n + batch_size - 1) / batch_size;

    auto permutation = pacing_set.pairs();
    rng.shuffle(permutation);

    std::vector<std::vector<UserItemPair>> behavior_pairs(
        static_cast<std::size_t>(num_behaviors));
    for (int k = 0; k < num_behaviors; ++k) {
        if (k != pacing_behavior_) {
            behavior_pairs[static_cast<std::size_t>(k)] =
                dataset_.train[static_cast<std::size_t>(k)].pairs();
        }
    }

    std::vector<double> loss_sums(static_cast<std::size_t>(num_behaviors), 0.0);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(num_behaviors), 0);

    for (std::int64_t step = 0; step < steps; ++step) {
        const std::int64_t lo = step * batch_size;
        const std::int64_t hi = std::min(pacing_n, lo + batch_size);
        const std::int64_t step_batch = hi - lo;

        // Batches assembled in behavior order; the pacing behavior walks its
        // epoch permutation, the rest resample with replacement at the same
        // per-step size.
        std::vector<TripletBatch> batches;
        batches.reserve(static_cast<std::size_t>(num_behaviors));
        for (int k = 0; k < num_behaviors; ++k) {
            const auto& train_k = dataset_.train[static_cast<std::size_t>(k)];
            if (train_k.num_pairs() == 0) {
                if (epoch_index == 1 && step == 0) {
                    std::cerr << "warning: behavior '"
                              << dataset_.behavior_names[static_cast<std::size_t>(k)]
                              << "' has no training pairs, skipped\n";
                }
                continue;
            }
            TripletBatch batch;
            batch.behavior_id = k;
            batch.triplets.reserve(static_cast<std::size_t>(step_batch));
            if (k == pacing_behavior_) {
                for (std::int64_t idx = lo; idx < hi; ++idx) {
                    const auto& [u, i] = permutation[static_cast<std::size_t>(idx)];
                    batch.triplets.push_back({u, i, sample_negative(train_k, u, rng)});
                }
            } else {
                const auto& pairs = behavior_pairs[static_cast<std::size_t>(k)];
                for (std::int64_t n = 0; n < step_batch; ++n) {
                    const auto& [u, i] =
                        pairs[static_cast<std::size_t>(rng.next_index(train_k.num_pairs()))];
                    batch.triplets.push_back({u, i, sample_negative(train_k, u, rng)});
                }
            }
            batches.push_back(std::move(batch));
        }

        const auto representations = model_.forward(params, train_config_.threads);

        const std::size_t num_tables = params.tables.size();
        std::vector<Matrix> combined(num_tables,
                                     Matrix(model_.num_nodes(), model_.config().embedding_dim));
        for (const auto& batch : batches) {
            auto gradients = batch_gradients(batch, representations, model_);
            for (const auto& branch : gradients.branches) {
                if (!branch.all_finite()) {
                    throw NumericalError(
                        "train_epoch: non-finite gradient for behavior '" +
                        dataset_.behavior_names[static_cast<std::size_t>(batch.behavior_id)] +
                        "' at epoch " + std::to_string(epoch_index) + ", step " +
                        std::to_string(step));
                }
            }
            auto per_table = pullback_to_tables(gradients, model_, train_config_.threads);
            for (std::size_t t = 0; t < num_tables; ++t) {
                combined[t].add_scaled(per_table[t], 1.0);
            }
            loss_sums[static_cast<std::size_t>(batch.behavior_id)] += gradients.loss_sum;
            counts[static_cast<std::size_t>(batch.behavior_id)] += gradients.triplet_count;
        }
        for (std::size_t t = 0; t < num_tables; ++t) {
            adam_step(params.tables[t], combined[t], train_config_);
        }
    }

    EpochStats stats;
    stats.epoch = epoch_index;
    stats.mean_loss.resize(static_cast<std::size_t>(num_behaviors), 0.0);
    stats.triplet_counts = counts;
    for (int k = 0; k < num_behaviors; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        if (counts[kk] > 0) {
            stats.mean_loss[kk] = loss_sums[kk] / static_cast<double>(counts[kk]);
        }
    }
    return stats;
}

FitResult Trainer::fit() {
    ModelParameters params = init_parameters(model_.config(), model_.num_users(),
                                             model_.num_items(), model_.num_behaviors());
    FitResult result;
    result.best_params = params;
    result.best_epoch = 0;
    if (train_config_.max_epochs == 0) {
        return result;
    }

    RngStream rng = RngStream::derive(train_config_.seed, "sampling");
    std::int64_t evals_without_improvement = 0;
    bool best_from_eval = false;

    for (std::int64_t epoch = 1; epoch <= train_config_.max_epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const EpochStats stats = train_epoch(params, rng, epoch);

        HistoryRecord record;
        record.epoch = epoch;
        for (int k = 0; k < model_.num_behaviors(); ++k) {
            record.mean_loss.emplace_back(dataset_.behavior_names[static_cast<std::size_t>(k)],
                                          stats.mean_loss[static_cast<std::size_t>(k)]);
        }

        bool stop = false;
        if (epoch % train_config_.eval_every == 0) {
            const auto representations = model_.forward(params, train_config_.threads);
            const MetricsReport report = evaluate(representations, dataset_, eval_config_);
            record.recall = report.recall_at_k;
            record.ndcg = report.ndcg_at_k;
            if (report.recall_at_k > result.best_metric) {
                result.best_metric = report.recall_at_k;
                result.best_params = params;
                result.best_epoch = epoch;
                best_from_eval = true;
                evals_without_improvement = 0;
            } else {
                ++evals_without_improvement;
                if (train_config_.early_stop_patience > 0 &&
                    evals_without_improvement >= train_config_.early_stop_patience) {
                    stop = true;
                }
            }
        }
        if (train_config_.record_timing) {
            record.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        result.history.push_back(std::move(record));
        if (stop) break;
    }

    if (!best_from_eval) {
        // Never evaluated: the final state is the checkpoint.
        result.best_params = params;
        result.best_epoch = train_config_.max_epochs;
    }
    return result;
}

}  // namespace imgcf
