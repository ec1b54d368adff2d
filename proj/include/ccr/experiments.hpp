#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "ccr/active.hpp"
#include "ccr/benchmarks.hpp"
#include "ccr/mlp.hpp"
#include "ccr/pipeline.hpp"

namespace ccr {

/// Sample sizes of the benchmark protocol for one example.
struct ExampleProtocol {
    Eigen::Index train_size = 0;
    /// Zero for grid examples, which are scored on their training data.
    Eigen::Index test_size = 0;
};

ExampleProtocol example_protocol(int id);

struct ExampleRun {
    int id = 0;
    std::uint64_t seed = 0;
    Dataset train;
    /// Scoring set: held-out draws, or the training grid.
    Dataset test;
    CcrModel model;
    Metrics metrics;
    std::shared_ptr<const MlpRegressor> direct;
    std::optional<Metrics> direct_metrics;
    double seconds = 0.0;
};

/// Draws data for example `id`, fits CCR with the recommended configuration
/// and scores it. With `with_direct`, also fits a single MLP regressor on the
/// same training data.
ExampleRun run_example(int id, std::uint64_t seed, bool with_direct = false);

struct ActivePassiveOptions {
    Eigen::Index reservoir_size = 1000;
    Eigen::Index initial_size = 20;
    int budget = 150;
    int refit_every = 10;
    Eigen::Index test_size = 500;
    ScoreKind score = ScoreKind::uncertainty;
    LearnerKind classifier = LearnerKind::mlp;
};

struct ActivePassiveRun {
    std::uint64_t seed = 0;
    /// RMSE of the final active model.
    double active_rmse = 0.0;
    /// Lowest RMSE over the active refits, all of which use at most
    /// initial_size + budget labels.
    double attained_rmse = 0.0;
    double passive_rmse = 0.0;
    Eigen::Index active_labeled = 0;
    Eigen::Index passive_labeled = 0;
    std::vector<HistoryEntry> history;
    double seconds = 0.0;
};

/// Active reservoir selection on f2 against a model fit on the whole labelled
/// reservoir. Both are scored by RMSE on the same held-out draws.
ActivePassiveRun run_active_vs_passive(std::uint64_t seed, const ActivePassiveOptions& opts = {});

}  // namespace ccr
