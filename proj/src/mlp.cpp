#include "ccr/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ccr/serialize.hpp"

namespace ccr {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;

struct Views {
    ConstMap w1;
    ConstVecMap b1;
    ConstMap w2;
    ConstVecMap b2;
};

Views views(const NetworkShape& s, const double* p) {
    const double* b1 = p + s.hidden * s.inputs;
    const double* w2 = b1 + s.hidden;
    const double* b2 = w2 + s.outputs * s.hidden;
    return {ConstMap(p, s.hidden, s.inputs), ConstVecMap(b1, s.hidden), ConstMap(w2, s.outputs, s.hidden),
            ConstVecMap(b2, s.outputs)};
}

const char* schedule_name(LrSchedule s) { return s == LrSchedule::cosine ? "cosine" : "constant"; }

LrSchedule parse_schedule(const std::string& s) {
    if (s == "constant") return LrSchedule::constant;
    if (s == "cosine") return LrSchedule::cosine;
    throw ConfigError("unknown learning-rate schedule '" + s + "'");
}

struct TrainResult {
    Network net;
    FitReport report;
};

// Shared Adam/mini-batch/early-stopping loop for both network flavours.
TrainResult train(const Matrix& x, const Matrix& targets, OutputLoss loss, const MlpConfig& cfg) {
    const Eigen::Index n = x.rows();
    NetworkShape shape{x.cols(), cfg.resolved_width(x.cols()), targets.cols()};
    std::mt19937_64 rng(cfg.seed);
    Network net = Network::glorot(shape, rng);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    auto n_val = static_cast<Eigen::Index>(std::llround(cfg.validation_fraction * static_cast<double>(n)));
    if (cfg.validation_fraction > 0.0 && (n_val < 1 || n - n_val < 1)) {
        warn("too few rows (" + std::to_string(n) + ") for a validation holdout; training on all rows");
        n_val = 0;
    }
    std::vector<Eigen::Index> val(order.begin(), order.begin() + n_val);
    std::vector<Eigen::Index> fit(order.begin() + n_val, order.end());
    const Matrix x_fit = x(fit, Eigen::all);
    const Matrix t_fit = targets(fit, Eigen::all);
    const Matrix x_val = x(val, Eigen::all);
    const Matrix t_val = targets(val, Eigen::all);

    TrainResult out;
    out.report.used_holdout = n_val > 0;
    const auto fit_rows = static_cast<double>(fit.size());
    out.report.initial_loss =
        loss_and_gradient(shape, net.params(), x_fit, t_fit, loss, cfg.l2_penalty, fit_rows, {});

    AdamState adam(shape.param_count());
    std::vector<double> grad(shape.param_count());
    std::vector<double> best_params;
    double best_val = std::numeric_limits<double>::infinity();
    int stale = 0;
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<Eigen::Index> idx = fit;
    int epoch = 0;
    for (; epoch < cfg.max_epochs; ++epoch) {
        double lr = cfg.learning_rate;
        if (cfg.schedule == LrSchedule::cosine) {
            lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / cfg.max_epochs));
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t start = 0; start < idx.size(); start += batch) {
            std::vector<Eigen::Index> rows(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                           idx.begin() + static_cast<std::ptrdiff_t>(std::min(idx.size(), start + batch)));
            const Matrix xb = x(rows, Eigen::all);
            const Matrix tb = targets(rows, Eigen::all);
            loss_and_gradient(shape, net.params(), xb, tb, loss, cfg.l2_penalty, static_cast<double>(rows.size()),
                              grad);
            adam_update(adam, net.params(), grad, lr);
        }
        if (n_val == 0) continue;
        double v = loss_and_gradient(shape, net.params(), x_val, t_val, loss, 0.0, 1.0, {});
        if (v < best_val - cfg.tolerance) {
            best_val = v;
            best_params = net.params();
            out.report.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            out.report.early_stopped = true;
            ++epoch;
            break;
        }
    }
    out.report.epochs_run = epoch;
    if (!best_params.empty()) net.params() = std::move(best_params);
    out.report.final_loss = loss_and_gradient(shape, net.params(), x_fit, t_fit, loss, cfg.l2_penalty, fit_rows, {});
    out.net = std::move(net);
    return out;
}

nlohmann::json shape_json(const NetworkShape& s) {
    return {{"inputs", s.inputs}, {"hidden", s.hidden}, {"outputs", s.outputs}};
}

Network network_from_json(const nlohmann::json& j) {
    NetworkShape s{j.at("shape").at("inputs").get<Eigen::Index>(), j.at("shape").at("hidden").get<Eigen::Index>(),
                   j.at("shape").at("outputs").get<Eigen::Index>()};
    return Network(s, j.at("params").get<std::vector<double>>());
}

}  // namespace

void MlpConfig::validate() const {
    if (hidden_width < 0) throw ConfigError("hidden_width must be >= 1 (or 0 for 100*d)");
    if (!(l2_penalty >= 0.0)) throw ConfigError("l2_penalty must be >= 0");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("validation_fraction must lie in [0, 1)");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
}

nlohmann::json to_json(const MlpConfig& c) {
    return {{"hidden_width", c.hidden_width},     {"l2_penalty", c.l2_penalty},
            {"max_epochs", c.max_epochs},         {"validation_fraction", c.validation_fraction},
            {"learning_rate", c.learning_rate},   {"batch_size", c.batch_size},
            {"patience", c.patience},             {"tolerance", c.tolerance},
            {"schedule", schedule_name(c.schedule)}, {"standardize", c.standardize},
            {"seed", c.seed}};
}

MlpConfig mlp_config_from_json(const nlohmann::json& j, MlpConfig c) {
    if (!j.is_object()) throw ConfigError("MLP config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "hidden_width") c.hidden_width = value.get<int>();
        else if (key == "l2_penalty") c.l2_penalty = value.get<double>();
        else if (key == "max_epochs") c.max_epochs = value.get<int>();
        else if (key == "validation_fraction") c.validation_fraction = value.get<double>();
        else if (key == "learning_rate") c.learning_rate = value.get<double>();
        else if (key == "batch_size") c.batch_size = value.get<int>();
        else if (key == "patience") c.patience = value.get<int>();
        else if (key == "tolerance") c.tolerance = value.get<double>();
        else if (key == "schedule") c.schedule = parse_schedule(value.get<std::string>());
        else if (key == "standardize") c.standardize = value.get<bool>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else throw ConfigError("unknown MLP config key '" + key + "'");
    }
    c.validate();
    return c;
}

void adam_update(AdamState& s, std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != grads.size() || params.size() != s.first_moment.size() ||
        params.size() != s.second_moment.size()) {
        throw ConfigError("adam_update: parameter, gradient and state sizes differ (" +
                          std::to_string(params.size()) + ", " + std::to_string(grads.size()) + ", " +
                          std::to_string(s.first_moment.size()) + ")");
    }
    ++s.step_count;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step_count));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        s.first_moment[i] = s.beta1 * s.first_moment[i] + (1.0 - s.beta1) * g;
        s.second_moment[i] = s.beta2 * s.second_moment[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = s.first_moment[i] / c1;
        const double v_hat = s.second_moment[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + s.epsilon);
    }
}

Network::Network(NetworkShape shape, std::vector<double> params) : shape_(shape), params_(std::move(params)) {
    if (shape_.inputs < 1 || shape_.hidden < 1 || shape_.outputs < 1) throw ConfigError("network layers must be non-empty");
    if (params_.size() != shape_.param_count()) {
        throw DataError("network expects " + std::to_string(shape_.param_count()) + " parameters, got " +
                        std::to_string(params_.size()));
    }
}

Network Network::glorot(NetworkShape s, std::mt19937_64& rng) {
    std::vector<double> p(s.param_count());
    const double a1 = std::sqrt(6.0 / static_cast<double>(s.inputs + s.hidden));
    const double a2 = std::sqrt(6.0 / static_cast<double>(s.hidden + s.outputs));
    const auto layer1 = static_cast<std::size_t>(s.hidden * s.inputs + s.hidden);
    std::uniform_real_distribution<double> u1(-a1, a1);
    std::uniform_real_distribution<double> u2(-a2, a2);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i < layer1 ? u1(rng) : u2(rng);
    return Network(s, std::move(p));
}

Matrix Network::forward(const Matrix& x) const {
    Views v = views(shape_, params_.data());
    Matrix z = ((x * v.w1.transpose()).rowwise() + v.b1.transpose()).cwiseMax(0.0);
    return (z * v.w2.transpose()).rowwise() + v.b2.transpose();
}

double loss_and_gradient(const NetworkShape& s, std::span<const double> params, const Matrix& x,
                         const Matrix& targets, OutputLoss loss, double l2, double penalty_rows,
                         std::span<double> grad) {
    if (params.size() != s.param_count()) throw ConfigError("parameter count does not match network shape");
    if (x.cols() != s.inputs || targets.cols() != s.outputs || targets.rows() != x.rows()) {
        throw ConfigError("input/target shapes do not match network shape");
    }
    if (!grad.empty() && grad.size() != params.size()) throw ConfigError("gradient buffer has the wrong size");
    const double n = static_cast<double>(x.rows());
    Views v = views(s, params.data());
    Matrix a = (x * v.w1.transpose()).rowwise() + v.b1.transpose();
    Matrix z = a.cwiseMax(0.0);
    Matrix out = (z * v.w2.transpose()).rowwise() + v.b2.transpose();

    double value = 0.0;
    Matrix g;  // d loss / d out
    if (loss == OutputLoss::cross_entropy) {
        Vector mx = out.rowwise().maxCoeff();
        Matrix shifted = out.colwise() - mx;
        Vector lse = shifted.array().exp().rowwise().sum().log();
        Matrix log_p = shifted.colwise() - lse;
        value = -(targets.array() * log_p.array()).sum() / n;
        if (!grad.empty()) g = (log_p.array().exp().matrix() - targets) / n;
    } else {
        Matrix r = out - targets;
        value = 0.5 * r.squaredNorm() / n;
        if (!grad.empty()) g = r / n;
    }
    const double pen = l2 / penalty_rows;
    value += 0.5 * pen * (v.w1.squaredNorm() + v.w2.squaredNorm());
    if (grad.empty()) return value;

    double* gp = grad.data();
    Eigen::Map<Matrix> g_w1(gp, s.hidden, s.inputs);
    Eigen::Map<Vector> g_b1(gp + s.hidden * s.inputs, s.hidden);
    Eigen::Map<Matrix> g_w2(gp + s.hidden * s.inputs + s.hidden, s.outputs, s.hidden);
    Eigen::Map<Vector> g_b2(gp + s.hidden * s.inputs + s.hidden + s.outputs * s.hidden, s.outputs);
    g_w2.noalias() = g.transpose() * z;
    g_w2 += pen * v.w2;
    g_b2 = g.colwise().sum().transpose();
    Matrix gz = (g * v.w2).cwiseProduct((a.array() > 0.0).cast<double>().matrix());
    g_w1.noalias() = gz.transpose() * x;
    g_w1 += pen * v.w1;
    g_b1 = gz.colwise().sum().transpose();
    return value;
}

Matrix softmax(const Matrix& logits) {
    Matrix e = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
    return e.array().colwise() / e.rowwise().sum().array();
}

Vector softmax(const Vector& logits) {
    Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
    return e / e.sum();
}

Standardizer Standardizer::fit(const Matrix& x, bool enabled) {
    Standardizer s;
    if (!enabled) {
        s.mean = Vector::Zero(x.cols());
        s.scale = Vector::Ones(x.cols());
        return s;
    }
    s.mean = x.colwise().mean().transpose();
    s.scale = ((x.rowwise() - s.mean.transpose()).array().square().colwise().mean().sqrt()).matrix().transpose();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
        if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

MlpClassifier::MlpClassifier(Network net, Standardizer input, MlpConfig cfg)
    : net_(std::move(net)), input_(std::move(input)), cfg_(cfg) {}

Matrix MlpClassifier::logits(const Matrix& x) const {
    check_input(x);
    return net_.forward(input_.apply(x));
}

Matrix MlpClassifier::predict_proba(const Matrix& x) const { return softmax(logits(x)); }

nlohmann::json MlpClassifier::to_json() const {
    return {{"kind", "mlp_classifier"},
            {"format_version", 1},
            {"config", ccr::to_json(cfg_)},
            {"shape", shape_json(net_.shape())},
            {"num_classes", net_.shape().outputs},
            {"input_mean", vector_to_json(input_.mean)},
            {"input_scale", vector_to_json(input_.scale)},
            {"params", net_.params()}};
}

std::shared_ptr<MlpClassifier> MlpClassifier::from_json(const nlohmann::json& j) {
    check_document(j, "mlp_classifier", 1);
    Standardizer s{vector_from_json(j.at("input_mean")), vector_from_json(j.at("input_scale"))};
    return std::make_shared<MlpClassifier>(network_from_json(j), std::move(s), mlp_config_from_json(j.at("config")));
}

MlpRegressor::MlpRegressor(Network net, Standardizer input, double target_mean, double target_scale, MlpConfig cfg)
    : net_(std::move(net)), input_(std::move(input)), target_mean_(target_mean), target_scale_(target_scale),
      cfg_(cfg) {}

Vector MlpRegressor::predict(const Matrix& x) const {
    check_input(x);
    return (net_.forward(input_.apply(x)).col(0).array() * target_scale_ + target_mean_).matrix();
}

nlohmann::json MlpRegressor::to_json() const {
    return {{"kind", "mlp_regressor"},
            {"format_version", 1},
            {"config", ccr::to_json(cfg_)},
            {"shape", shape_json(net_.shape())},
            {"input_mean", vector_to_json(input_.mean)},
            {"input_scale", vector_to_json(input_.scale)},
            {"target_mean", target_mean_},
            {"target_scale", target_scale_},
            {"params", net_.params()}};
}

std::shared_ptr<MlpRegressor> MlpRegressor::from_json(const nlohmann::json& j) {
    check_document(j, "mlp_regressor", 1);
    Standardizer s{vector_from_json(j.at("input_mean")), vector_from_json(j.at("input_scale"))};
    return std::make_shared<MlpRegressor>(network_from_json(j), std::move(s), j.at("target_mean").get<double>(),
                                          j.at("target_scale").get<double>(), mlp_config_from_json(j.at("config")));
}

std::shared_ptr<MlpClassifier> fit_classifier(const Matrix& x, const Labels& labels, const MlpConfig& cfg,
                                              FitReport* report) {
    cfg.validate();
    if (x.rows() < 1 || x.cols() < 1) throw DataError("classifier needs a non-empty input matrix");
    if (!x.allFinite()) throw DataError("classifier input contains non-finite values");
    const Eigen::Index classes = validate_labels(labels, x.rows());

    Matrix onehot = Matrix::Zero(x.rows(), classes);
    for (Eigen::Index i = 0; i < x.rows(); ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;
    Standardizer s = Standardizer::fit(x, cfg.standardize);
    TrainResult r = train(s.apply(x), onehot, OutputLoss::cross_entropy, cfg);
    if (report) *report = r.report;
    return std::make_shared<MlpClassifier>(std::move(r.net), std::move(s), cfg);
}

std::shared_ptr<MlpRegressor> fit_regressor(const Matrix& x, const Vector& y, const MlpConfig& cfg,
                                            FitReport* report) {
    cfg.validate();
    if (x.rows() < 2) throw DataError("regressor needs at least 2 rows, got " + std::to_string(x.rows()));
    if (x.rows() != y.size()) {
        throw DataError("regressor got " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) +
                        " targets");
    }
    if (!x.allFinite() || !y.allFinite()) throw DataError("regressor data contains non-finite values");
    Standardizer s = Standardizer::fit(x, cfg.standardize);
    double mean = 0.0;
    double scale = 1.0;
    if (cfg.standardize) {
        mean = y.mean();
        scale = std::sqrt((y.array() - mean).square().mean());
        if (!(scale > 1e-12)) scale = 1.0;
    }
    Matrix t = ((y.array() - mean) / scale).matrix();
    TrainResult r = train(s.apply(x), t, OutputLoss::squared, cfg);
    if (report) *report = r.report;
    return std::make_shared<MlpRegressor>(std::move(r.net), std::move(s), mean, scale, cfg);
}

}  // namespace ccr
