#include "ccr/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace ccr {

double f1(double x) { return x >= 1.0 ? x : 0.0; }

double f2(double x) { return x < 0.0 ? x + 1.0 : x; }

double f3(double x) {
    if (x <= 4.0) return std::exp(-x * x / 20.0);
    if (x <= 6.0) return 1.0;
    if (x <= 8.0) return -1.0;
    return 0.0;
}

double f4(double x1, double x2) { return f3(x1) * f3(x2); }

double chi(const Vector& x, const CriticalGradientConfig& cfg) {
    if (!cfg.crit_model) throw ConfigError("critical-gradient model is not set");
    if (!(cfg.S > 0.0)) throw ConfigError("S must be positive");
    if (cfg.g_index < 0 || cfg.g_index >= x.size()) throw DataError("input vector has no gradient slot");
    const double g = x(cfg.g_index);
    const double g_crit = cfg.crit_model(x);
    if (g_crit == 0.0) throw DataError("critical gradient is zero");
    if (std::abs(g / g_crit) - 1.0 < 0.0) return 0.0;
    return cfg.S * std::pow(g - g_crit, cfg.alpha);
}

namespace standin {

namespace {

// Slot ranges and warping exponents for n_e, T_e, T_i, q, s_hat, Z_eff, g, R n'/n.
constexpr std::array<double, 8> kLo{1.0, 0.5, 0.5, 1.0, 0.0, 1.0, 0.0, 0.0};
constexpr std::array<double, 8> kHi{10.0, 10.0, 10.0, 5.0, 3.0, 3.0, 12.0, 6.0};
constexpr std::array<double, 8> kPow{1.0, 1.5, 1.5, 1.2, 1.0, 2.0, 1.2, 1.3};
constexpr double kMajorRadius = 3.0;

}  // namespace

Matrix mixing_matrix(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix a(8, kPrimitiveDim);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = std::pow(u(rng), 3.0);
    }
    for (Eigen::Index j = 0; j < 8; ++j) {
        a(j, j) += 2.0;
        a(j, 8 + j) += 1.0;
    }
    return a.array().colwise() / a.rowwise().sum().array();
}

Matrix manifold_map(const Matrix& omega, std::uint64_t seed) {
    if (omega.cols() != kPrimitiveDim) throw DataError("primitive draws must have 17 columns");
    const Matrix mixed = omega * mixing_matrix(seed).transpose();
    Matrix x(omega.rows(), kInputDim);
    for (Eigen::Index i = 0; i < omega.rows(); ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            const auto c = static_cast<Eigen::Index>(j);
            double u = std::clamp((mixed(i, c) - 0.5) * 2.2 + 0.5, 0.0, 1.0);
            x(i, c) = kLo[j] + (kHi[j] - kLo[j]) * std::pow(u, kPow[j]);
        }
        x(i, 8) = x(i, 6) * x(i, 2) / kMajorRadius;
        x(i, 9) = x(i, 7) * x(i, 0) / kMajorRadius;
    }
    return x;
}

double critical_gradient(const Vector& x, const Params& p) {
    if (x.size() != kInputDim) throw DataError("stand-in critical gradient needs 10 inputs");
    const double te = x(1), ti = x(2), q = x(3), shear = x(4), z = x(5), gn = x(7);
    const double a = 0.671 + 0.570 * shear - 0.189 * gn;
    const double base = a * a + 0.335 * gn + 0.12;
    double gc = 2.46 * std::pow(1.0 + 2.78 / (q * q), 0.26) * std::pow(z / 2.0, 0.7) * std::pow(te / ti, 0.52) *
                std::sqrt(base);
    gc = std::max(gc, 0.8 * gn);
    if (gn * shear > p.regime_threshold) gc += p.regime_jump;
    return gc;
}

}  // namespace standin

CriticalGradientConfig standin_critical_gradient_config(const standin::Params& p) {
    CriticalGradientConfig cfg;
    cfg.crit_model = [p](const Vector& x) { return standin::critical_gradient(x, p); };
    return cfg;
}

namespace {

std::vector<BenchmarkProblem> make_problems() {
    std::vector<BenchmarkProblem> all(5);
    auto& p1 = all[0];
    p1.id = 1;
    p1.name = "f1";
    p1.lower = Vector::Constant(1, 0.0);
    p1.upper = Vector::Constant(1, 2.0);
    p1.evaluate = [](const Vector& x) { return f1(x(0)); };
    p1.breakpoints = {1.0};
    p1.recommended_L = 2;

    auto& p2 = all[1];
    p2.id = 2;
    p2.name = "f2";
    p2.lower = Vector::Constant(1, -1.0);
    p2.upper = Vector::Constant(1, 1.0);
    p2.evaluate = [](const Vector& x) { return f2(x(0)); };
    p2.breakpoints = {0.0};
    p2.recommended_L = 2;

    auto& p3 = all[2];
    p3.id = 3;
    p3.name = "f3";
    p3.lower = Vector::Constant(1, -4.0);
    p3.upper = Vector::Constant(1, 10.0);
    p3.evaluate = [](const Vector& x) { return f3(x(0)); };
    p3.breakpoints = {4.0, 6.0, 8.0};
    p3.recommended_L = 4;
    p3.classifier = p3.regressor = LearnerKind::forest;
    p3.default_mode = SamplingMode::grid;
    p3.score_on_training = true;

    auto& p4 = all[3];
    p4.id = 4;
    p4.name = "f4";
    p4.dim = 2;
    p4.lower = Vector::Constant(2, -4.0);
    p4.upper = Vector::Constant(2, 10.0);
    p4.evaluate = [](const Vector& x) { return f4(x(0), x(1)); };
    p4.breakpoints = {4.0, 6.0, 8.0};
    p4.recommended_L = 10;
    p4.classifier = p4.regressor = LearnerKind::forest;
    p4.default_mode = SamplingMode::grid;
    p4.score_on_training = true;

    auto& p5 = all[4];
    p5.id = 5;
    p5.name = "chi";
    p5.dim = standin::kInputDim;
    p5.lower = Vector::Zero(standin::kPrimitiveDim);
    p5.upper = Vector::Ones(standin::kPrimitiveDim);
    auto cfg = standin_critical_gradient_config();
    p5.evaluate = [cfg](const Vector& x) { return chi(x, cfg); };
    p5.recommended_L = 4;
    return all;
}

}  // namespace

const BenchmarkProblem& benchmark_problem(int id) {
    static const std::vector<BenchmarkProblem> problems = make_problems();
    if (id < 1 || id > static_cast<int>(problems.size())) {
        throw ConfigError("unknown benchmark example " + std::to_string(id) + " (expected 1..5)");
    }
    return problems[static_cast<std::size_t>(id - 1)];
}

std::vector<double> grid_axis(double lo, double hi, Eigen::Index n) {
    if (n < 1) throw ConfigError("grid needs at least one point per axis");
    // Spacing divides 2 so that breakpoints an even distance from lo fall on
    // cell boundaries. When n cells overrun the interval, the overrun is split
    // between both ends.
    const double span = hi - lo;
    const auto k = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(2.0 * static_cast<double>(n) / span)));
    const double h = 2.0 / static_cast<double>(k);
    const auto cells = static_cast<Eigen::Index>(std::llround(span / h));
    const Eigen::Index shift = std::max<Eigen::Index>(0, n - cells) / 2;
    std::vector<double> axis(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        axis[static_cast<std::size_t>(i)] = lo + (static_cast<double>(i - shift) + 0.5) * h;
    }
    return axis;
}

Dataset sample_inputs(const BenchmarkProblem& problem, Eigen::Index n, std::uint64_t seed,
                      std::optional<SamplingMode> mode) {
    if (n < 1) throw ConfigError("sample size must be at least 1");
    const SamplingMode m = mode.value_or(problem.default_mode);
    Matrix x;
    if (m == SamplingMode::grid) {
        if (problem.dim > 2 || problem.id == 5) throw ConfigError("grid sampling supports d <= 2 only");
        Eigen::Index per_axis = n;
        if (problem.dim == 2) {
            per_axis = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
            if (per_axis * per_axis != n) throw ConfigError("2-D grid needs a perfect-square sample size");
        }
        x.resize(n, problem.dim);
        std::vector<std::vector<double>> axes;
        for (Eigen::Index j = 0; j < problem.dim; ++j) axes.push_back(grid_axis(problem.lower(j), problem.upper(j), per_axis));
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index rem = i;
            for (Eigen::Index j = problem.dim - 1; j >= 0; --j) {
                x(i, j) = axes[static_cast<std::size_t>(j)][static_cast<std::size_t>(rem % per_axis)];
                rem /= per_axis;
            }
        }
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Matrix cube(n, problem.lower.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < cube.cols(); ++j) {
                cube(i, j) = problem.lower(j) + (problem.upper(j) - problem.lower(j)) * u(rng);
            }
        }
        x = problem.id == 5 ? standin::manifold_map(cube, CriticalGradientConfig{}.primitive_seed) : std::move(cube);
    }
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = problem.evaluate(x.row(i).transpose());
    return Dataset(std::move(x), std::move(y));
}

CcrConfig recommended_config(const BenchmarkProblem& problem, std::uint64_t seed) {
    CcrConfig c;
    c.seed = seed;
    c.clusters = problem.recommended_L;
    c.classifier_kind = problem.classifier;
    c.regressor_kind = problem.regressor;
    for (MlpConfig* m : {&c.classifier_mlp, &c.regressor_mlp}) {
        m->learning_rate = 0.01;
        m->batch_size = problem.id == 5 ? 200 : 32;
        m->schedule = LrSchedule::cosine;
    }
    // The classifier trains on every row: a holdout leaves gaps next to the jump.
    c.classifier_mlp.validation_fraction = 0.0;
    // The 1-D targets are noise free and per-class sets are small: train longer
    // and on every row instead of stopping on a handful of held-out points.
    if (problem.id <= 2) {
        c.classifier_mlp.max_epochs = c.regressor_mlp.max_epochs = 1000;
        c.regressor_mlp.validation_fraction = 0.0;
    }
    return c;
}

MlpConfig direct_regressor_config(const BenchmarkProblem& problem, std::uint64_t seed) {
    MlpConfig m = recommended_config(problem, seed).regressor_mlp;
    m.seed = seed;
    return m;
}

}  // namespace ccr
