#pragma once

// Standalone matrix-factorization BPR trainer with dense Adam, written
// directly against the update equations. Serves as the degeneration
// reference: with one behavior, no propagation and no enhancement, the full
// model must reproduce this loop bit for bit when fed the same batches.

#include <cmath>
#include <cstdint>
#include <vector>

#include "imgcf/matrix.hpp"
#include "imgcf/trainer.hpp"

namespace imgcf::testing {

class MfBprReference {
public:
    MfBprReference(Matrix initial_table, std::int64_t num_users)
        : table_(std::move(initial_table)),
          first_moment_(table_.rows(), table_.cols()),
          second_moment_(table_.rows(), table_.cols()),
          num_users_(num_users) {}

    const Matrix& table() const { return table_; }

    // One step on a batch of (user, pos_item, neg_item) triplets; returns
    // the mean BPR loss of the batch.
    double train_step(const std::vector<Triplet>& batch, const TrainConfig& config) {
        const std::int64_t d = table_.cols();
        Matrix gradient(table_.rows(), d);
        double loss_sum = 0.0;
        for (const auto& t : batch) {
            const std::int64_t u = t.user;
            const std::int64_t pos = num_users_ + t.pos_item;
            const std::int64_t neg = num_users_ + t.neg_item;
            double score_pos = 0.0;
            double score_neg = 0.0;
            for (std::int64_t c = 0; c < d; ++c) {
                score_pos += table_(u, c) * table_(pos, c);
                score_neg += table_(u, c) * table_(neg, c);
            }
            const double diff = score_pos - score_neg;
            double loss = 0.0;
            double slope = 0.0;
            if (diff >= 0.0) {
                const double e = std::exp(-diff);
                loss = std::log1p(e);
                slope = 1.0 / (1.0 + e) - 1.0;
            } else {
                const double e = std::exp(diff);
                loss = -diff + std::log1p(e);
                slope = e / (1.0 + e) - 1.0;
            }
            loss_sum += loss;
            for (std::int64_t c = 0; c < d; ++c) {
                gradient(u, c) += slope * (table_(pos, c) - table_(neg, c));
                gradient(pos, c) += slope * table_(u, c);
                gradient(neg, c) -= slope * table_(u, c);
            }
        }

        step_ += 1;
        const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_));
        const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_));
        for (std::size_t i = 0; i < table_.data().size(); ++i) {
            double g = gradient.data()[i];
            if (config.l2_coefficient > 0.0) {
                g += config.l2_coefficient * table_.data()[i];
            }
            auto& m = first_moment_.data()[i];
            auto& v = second_moment_.data()[i];
            m = config.beta1 * m + (1.0 - config.beta1) * g;
            v = config.beta2 * v + (1.0 - config.beta2) * g * g;
            table_.data()[i] -= config.learning_rate * (m / bias1) /
                                (std::sqrt(v / bias2) + config.epsilon);
        }
        return loss_sum / static_cast<double>(batch.size());
    }

private:
    Matrix table_;
    Matrix first_moment_;
    Matrix second_moment_;
    std::int64_t num_users_ = 0;
    std::int64_t step_ = 0;
};

}  // namespace imgcf::testing
