#include "ccr/experiments.hpp"

#include <algorithm>
#include <chrono>

namespace ccr {

namespace {

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ExampleProtocol example_protocol(int id) {
    switch (id) {
        case 1:
        case 2: return {500, 500};
        case 3: return {2000, 0};
        case 4: return {64 * 64, 0};
        case 5: return {20000, 500};
        default: break;
    }
    benchmark_problem(id);  // throws with the standard message
    return {};
}

ExampleRun run_example(int id, std::uint64_t seed, bool with_direct) {
    const auto start = std::chrono::steady_clock::now();
    const BenchmarkProblem& problem = benchmark_problem(id);
    const ExampleProtocol protocol = example_protocol(id);
    ExampleRun run;
    run.id = id;
    run.seed = seed;
    run.train = sample_inputs(problem, protocol.train_size, derive_seed(seed, 1));
    run.test = problem.score_on_training ? run.train
                                         : sample_inputs(problem, protocol.test_size, derive_seed(seed, 2),
                                                         SamplingMode::random);
    run.model = ccr_fit(run.train, recommended_config(problem, seed));
    run.metrics = evaluate(run.model, run.test);
    if (with_direct) {
        run.direct = fit_regressor(run.train.inputs(), run.train.outputs(),
                                   direct_regressor_config(problem, derive_seed(seed, 3)));
        run.direct_metrics = score_predictions(run.test.outputs(), run.direct->predict(run.test.inputs()));
    }
    run.seconds = elapsed(start);
    return run;
}

ActivePassiveRun run_active_vs_passive(std::uint64_t seed, const ActivePassiveOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const BenchmarkProblem& problem = benchmark_problem(2);
    const Dataset pool = sample_inputs(problem, opts.reservoir_size, derive_seed(seed, 1), SamplingMode::random);
    const Dataset test = sample_inputs(problem, opts.test_size, derive_seed(seed, 2), SamplingMode::random);
    const Dataset initial = sample_inputs(problem, opts.initial_size, derive_seed(seed, 3), SamplingMode::random);
    CcrConfig ccr = recommended_config(problem, seed);
    ccr.classifier_kind = opts.classifier;

    ActivePassiveRun run;
    run.seed = seed;
    const CcrModel passive = ccr_fit(pool, ccr);
    run.passive_rmse = score_predictions(test.outputs(), passive.predict(test.inputs())).rmse;
    run.passive_labeled = pool.size();

    ActiveConfig cfg;
    cfg.strategy = Strategy::reservoir;
    cfg.score = opts.score;
    cfg.ccr = ccr;
    cfg.reservoir = pool.inputs();
    cfg.test = test;
    cfg.seed = derive_seed(seed, 4);
    const ActiveResult active = active_loop([&](const Vector& x) { return problem.evaluate(x); }, initial, cfg,
                                            opts.budget, opts.refit_every);
    run.active_rmse = score_predictions(test.outputs(), active.model.predict(test.inputs())).rmse;
    run.active_labeled = active.train.size();
    run.history = active.history;
    run.attained_rmse = run.active_rmse;
    for (const auto& h : run.history) run.attained_rmse = std::min(run.attained_rmse, h.rmse);
    run.seconds = elapsed(start);
    return run;
}

}  // namespace ccr
