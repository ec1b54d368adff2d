#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "ccr/common.hpp"
#include "ccr/learner.hpp"

namespace ccr {

enum class LrSchedule { constant, cosine };

struct MlpConfig {
    int hidden_width = 0;  // 0: 100 * d
    double l2_penalty = 1e-3;
    int max_epochs = 200;
    double validation_fraction = 0.1;
    double learning_rate = 1e-3;
    int batch_size = 200;
    int patience = 10;
    double tolerance = 1e-4;
    LrSchedule schedule = LrSchedule::constant;
    /// Standardize inputs (and regression targets) before training; undone at prediction.
    bool standardize = true;
    std::uint64_t seed = 0;

    void validate() const;
    Eigen::Index resolved_width(Eigen::Index d) const { return hidden_width > 0 ? hidden_width : 100 * d; }
};

nlohmann::json to_json(const MlpConfig& cfg);
/// Overrides the fields of `base` that are present in j.
MlpConfig mlp_config_from_json(const nlohmann::json& j, MlpConfig base = {});

struct AdamState {
    explicit AdamState(std::size_t size = 0) : first_moment(size, 0.0), second_moment(size, 0.0) {}

    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One bias-corrected Adam step: params -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_update(AdamState& state, std::span<double> params, std::span<const double> grads, double lr);

enum class OutputLoss { cross_entropy, squared };

struct NetworkShape {
    Eigen::Index inputs = 0;
    Eigen::Index hidden = 0;
    Eigen::Index outputs = 0;

    std::size_t param_count() const {
        return static_cast<std::size_t>(hidden * inputs + hidden + outputs * hidden + outputs);
    }
};

/// One hidden ReLU layer with a linear output layer. Parameters live in one
/// flat array: W1 (hidden x inputs), b1, W2 (outputs x hidden), b2, matrices
/// column-major.
class Network {
public:
    Network() = default;
    Network(NetworkShape shape, std::vector<double> params);

    /// Uniform +-sqrt(6 / (fan_in + fan_out)) per layer, biases included.
    static Network glorot(NetworkShape shape, std::mt19937_64& rng);

    const NetworkShape& shape() const { return shape_; }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& params() { return params_; }

    /// Output-layer values (logits or regression outputs), one row per input row.
    Matrix forward(const Matrix& x) const;

private:
    NetworkShape shape_;
    std::vector<double> params_;
};

/// Mean data loss over the rows of x plus (l2 / (2 * penalty_rows)) * |W|^2
/// (weights only). Targets are one-hot rows for cross_entropy and an N x 1
/// column for squared (loss 0.5 * residual^2). Writes the gradient into grad
/// when it is non-empty.
double loss_and_gradient(const NetworkShape& shape, std::span<const double> params, const Matrix& x,
                         const Matrix& targets, OutputLoss loss, double l2, double penalty_rows,
                         std::span<double> grad);

/// Row-wise softmax, shifted by the row maximum.
Matrix softmax(const Matrix& logits);
Vector softmax(const Vector& logits);

/// Per-column affine normalization applied before the network.
struct Standardizer {
    Vector mean;
    Vector scale;

    static Standardizer fit(const Matrix& x, bool enabled);
    Matrix apply(const Matrix& x) const;
};

struct FitReport {
    int epochs_run = 0;
    int best_epoch = -1;
    bool early_stopped = false;
    bool used_holdout = false;
    double initial_loss = 0.0;  // full-batch training objective before the first step
    double final_loss = 0.0;    // same objective for the returned parameters
};

class MlpClassifier final : public SoftClassifier {
public:
    MlpClassifier(Network net, Standardizer input, MlpConfig cfg);

    Eigen::Index num_classes() const override { return net_.shape().outputs; }
    Eigen::Index dim() const override { return net_.shape().inputs; }
    using SoftClassifier::predict_proba;
    Matrix predict_proba(const Matrix& x) const override;
    Matrix logits(const Matrix& x) const;
    nlohmann::json to_json() const override;
    static std::shared_ptr<MlpClassifier> from_json(const nlohmann::json& j);

    const Network& network() const { return net_; }
    const MlpConfig& config() const { return cfg_; }

private:
    Network net_;
    Standardizer input_;
    MlpConfig cfg_;
};

class MlpRegressor final : public Regressor {
public:
    MlpRegressor(Network net, Standardizer input, double target_mean, double target_scale, MlpConfig cfg);

    Eigen::Index dim() const override { return net_.shape().inputs; }
    using Regressor::predict;
    Vector predict(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    static std::shared_ptr<MlpRegressor> from_json(const nlohmann::json& j);

    const Network& network() const { return net_; }

private:
    Network net_;
    Standardizer input_;
    double target_mean_;
    double target_scale_;
    MlpConfig cfg_;
};

/// Softmax network trained on cross-entropy. Labels must cover 0..L-1 with L >= 2.
std::shared_ptr<MlpClassifier> fit_classifier(const Matrix& x, const Labels& labels, const MlpConfig& cfg,
                                              FitReport* report = nullptr);
/// Linear-output network trained on squared error. Needs N >= 2.
std::shared_ptr<MlpRegressor> fit_regressor(const Matrix& x, const Vector& y, const MlpConfig& cfg,
                                            FitReport* report = nullptr);

}  // namespace ccr
