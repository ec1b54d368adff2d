#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccr/dataset.hpp"
#include "ccr/pipeline.hpp"

namespace ccr {

double f1(double x);
double f2(double x);
double f3(double x);
double f4(double x1, double x2);

using CriticalGradientModel = std::function<double(const Vector&)>;

/// chi = S * (g - g_crit)^alpha * H(|g / g_crit| - 1) with g = x[g_index].
struct CriticalGradientConfig {
    double S = 1.0;
    double alpha = 1.0;
    CriticalGradientModel crit_model;
    Eigen::Index g_index = 6;
    /// Seed of the primitive-to-input map used when sampling.
    std::uint64_t primitive_seed = 17;
};

double chi(const Vector& x, const CriticalGradientConfig& cfg);

/// Synthetic stand-in for the 10-input transport benchmark. It is NOT a
/// physical model: it only mimics the structure (a threshold that depends
/// nonlinearly on the other inputs, with a jump between two regimes).
///
/// Input slots: 0 n_e, 1 T_e, 2 T_i, 3 q, 4 s_hat, 5 Z_eff, 6 g = R T'/T,
/// 7 R n'/n, 8 g * T_i / R, 9 (R n'/n) * n_e / R, with R = 3.
namespace standin {

constexpr Eigen::Index kPrimitiveDim = 17;
constexpr Eigen::Index kInputDim = 10;

struct Params {
    /// Threshold offset added in the high-density-gradient regime.
    double regime_jump = 10.0;
    /// Regime switch where (R n'/n) * s_hat exceeds this value.
    double regime_threshold = 3.0;
};

/// 8 x 17 row-stochastic mixing matrix with dominant own coordinates.
Matrix mixing_matrix(std::uint64_t seed);
/// Maps primitive draws omega in [0,1]^17 (one per row) onto x in R^10.
Matrix manifold_map(const Matrix& omega, std::uint64_t seed);
double critical_gradient(const Vector& x, const Params& p = {});

}  // namespace standin

CriticalGradientConfig standin_critical_gradient_config(const standin::Params& p = {});

enum class SamplingMode { random, grid };

struct BenchmarkProblem {
    int id = 0;
    std::string name;
    Eigen::Index dim = 1;
    /// Hypercube bounds; for example 5 these bound the primitive space.
    Vector lower;
    Vector upper;
    std::function<double(const Vector&)> evaluate;
    /// Locations of jumps in each coordinate (grid alignment, f3/f4 only).
    std::vector<double> breakpoints;
    std::optional<int> recommended_L;
    LearnerKind classifier = LearnerKind::mlp;
    LearnerKind regressor = LearnerKind::mlp;
    SamplingMode default_mode = SamplingMode::random;
    /// Metrics reported on training data (grid examples) rather than a test split.
    bool score_on_training = false;
};

/// Problems 1..5.
const BenchmarkProblem& benchmark_problem(int id);

/// Draws n labelled rows. Random mode samples the hypercube uniformly (or the
/// primitive cube for example 5). Grid mode (d <= 2) places cell-centred
/// points with spacing h = 2/k so every breakpoint lies on a cell boundary;
/// for d = 2, n must be a perfect square.
Dataset sample_inputs(const BenchmarkProblem& problem, Eigen::Index n, std::uint64_t seed,
                      std::optional<SamplingMode> mode = std::nullopt);

/// Grid coordinates along one axis used by sample_inputs.
std::vector<double> grid_axis(double lo, double hi, Eigen::Index n);

/// Learner settings used for the benchmark runs.
CcrConfig recommended_config(const BenchmarkProblem& problem, std::uint64_t seed);
/// Settings for a single direct MLP regression on the same problem.
MlpConfig direct_regressor_config(const BenchmarkProblem& problem, std::uint64_t seed);

}  // namespace ccr
