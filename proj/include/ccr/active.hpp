#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ccr/dataset.hpp"
#include "ccr/hull.hpp"
#include "ccr/learner.hpp"
#include "ccr/pipeline.hpp"

namespace ccr {

enum class ScoreKind { uncertainty, entropy, margin };

ScoreKind parse_score_kind(std::string_view name);
const char* to_string(ScoreKind kind);

struct AcquisitionScore {
    ScoreKind kind;
    double value;
};

/// uncertainty = max_l p_l, entropy = -sum p_l ln p_l, margin = p_(1) - p_(2).
double score_value(const Vector& proba, ScoreKind kind);
/// Sort key where smaller means more informative (entropy is negated).
double priority(const Vector& proba, ScoreKind kind);
AcquisitionScore score(const SoftClassifier& classifier, const Vector& x, ScoreKind kind);

struct Reservoir {
    Reservoir() = default;
    explicit Reservoir(Matrix points) : candidates(std::move(points)), consumed(static_cast<std::size_t>(candidates.rows()), false) {}

    Matrix candidates;
    std::vector<bool> consumed;

    Eigen::Index remaining() const;
};

/// The `batch` most informative unconsumed candidates (ties to the lowest
/// index), which are then marked consumed. Returns reservoir row indices.
std::vector<Eigen::Index> select_from_reservoir(const SoftClassifier& classifier, Reservoir& reservoir,
                                                Eigen::Index batch, ScoreKind kind);

struct HullSearchOptions {
    int starts = 8;
    int max_sweeps = 200;
    ScoreKind kind = ScoreKind::uncertainty;
};

/// Multi-start coordinate descent on the score over the hull; moves that leave
/// the hull are rejected. Returns the best point found.
Vector select_in_hull(const SoftClassifier& classifier, const HullDomain& domain, std::uint64_t seed,
                      const HullSearchOptions& opts = {});

struct BoundaryPairSet {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    int k = 1;
};

/// Pairs (i, j), i < j, where j is among the k nearest neighbours of i or
/// vice versa, and the two carry different hard labels.
BoundaryPairSet boundary_pairs(const SoftClassifier& classifier, const Matrix& data, int k);

/// For every boundary pair, the minimizer of max-probability on the segment
/// between its endpoints (golden-section search, 31 evaluations), kept if it
/// lies in the hull. One row per kept point; empty when no pairs exist.
Matrix select_boundary_pairs(const SoftClassifier& classifier, const Matrix& data, int k, const HullDomain& domain);

enum class PerturbKind { uniform_box, gaussian, local_covariance };

PerturbKind parse_perturb_kind(std::string_view name);

struct PerturbKernel {
    PerturbKind kind = PerturbKind::gaussian;
    /// Half-width of the box, or standard deviation of the isotropic Gaussian.
    double width = 0.05;
    int samples_per_center = 10;
    /// Neighbours used for the local covariance.
    int neighbors = 10;
};

/// n draws per center, centre-major order. local_covariance uses the sample
/// covariance of each center's nearest neighbours in `reference`.
Matrix perturb_candidates(const PerturbKernel& kernel, const Matrix& centers, std::uint64_t seed,
                          const Matrix& reference = Matrix());

enum class Strategy { reservoir, hull, boundary, perturb };

Strategy parse_strategy(std::string_view name);
const char* to_string(Strategy s);

/// Labels one point; throwing marks the point as failed (skipped and logged).
using Oracle = std::function<double(const Vector&)>;

struct ActiveConfig {
    Strategy strategy = Strategy::reservoir;
    ScoreKind score = ScoreKind::uncertainty;
    CcrConfig ccr;
    /// Candidate pool for the reservoir strategy.
    Matrix reservoir;
    HullSearchOptions hull;
    int neighbors = 5;
    PerturbKernel kernel;
    /// The boundary strategy switches to the hull search on every n-th batch.
    int regenerate_every = 5;
    /// Fixed evaluation set for the history; training data when absent.
    std::optional<Dataset> test;
    std::uint64_t seed = 0;
};

struct HistoryEntry {
    int step = 0;
    Eigen::Index n_train = 0;
    std::optional<double> l2;
    std::optional<double> r2;
    double rmse = 0.0;
    std::string strategy;
    Eigen::Index points_added = 0;
};

nlohmann::json to_json(const HistoryEntry& e);
std::string history_jsonl(const std::vector<HistoryEntry>& history);

struct ActiveResult {
    CcrModel model;
    Dataset train;
    std::vector<HistoryEntry> history;
    /// Reservoir rows consumed, in selection order (reservoir strategy).
    std::vector<Eigen::Index> reservoir_indices;
    Eigen::Index oracle_failures = 0;
};

/// Fits on `initial`, then repeatedly acquires up to `refit_every` points,
/// labels them and refits. History holds the initial fit plus one entry per
/// completed block of refit_every proposals, i.e. floor(budget/refit_every)+1
/// entries; a trailing partial block is labelled and returned in `train` but
/// not refitted.
ActiveResult active_loop(const Oracle& oracle, const Dataset& initial, const ActiveConfig& cfg, int budget,
                         int refit_every);

/// Online-learning gate: true when the classifier is confident at x
/// (max probability >= threshold), i.e. no refit is needed.
bool fits_confidently(const SoftClassifier& classifier, const Vector& x, double threshold = 0.9);

}  // namespace ccr
