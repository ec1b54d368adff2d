#include <doctest.h>

#include <random>

#include "ccr/benchmarks.hpp"
#include "ccr/mlp.hpp"
#include "ccr/pipeline.hpp"
#include "support.hpp"

using namespace ccr;

namespace {

Dataset f1_data(Eigen::Index n, std::uint64_t seed) { return sample_inputs(benchmark_problem(1), n, seed); }

Dataset f2_data(Eigen::Index n, std::uint64_t seed) { return sample_inputs(benchmark_problem(2), n, seed); }

CcrConfig forest_config(int L, std::uint64_t seed) {
    CcrConfig c;
    c.clusters = L;
    c.classifier_kind = c.regressor_kind = LearnerKind::forest;
    c.classifier_forest.num_trees = c.regressor_forest.num_trees = 30;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("L = 1 reduces to plain regression") {
    std::mt19937_64 rng(1);
    Matrix x = test::uniform_matrix(80, 1, rng);
    Vector y = x.col(0).array().sin();
    CcrConfig c = forest_config(1, 2);
    CcrModel m = ccr_fit(Dataset(x, y), c);
    CHECK(m.num_classes() == 1);
    Matrix q = test::uniform_matrix(20, 1, rng);
    CHECK(m.classify(q) == Labels(20, 0));
    CHECK((m.predict(q) - m.regressors[0]->predict(q)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("f1 with L = 2 recovers both branches away from the jump") {
    test::WarningSink quiet;
    const auto& problem = benchmark_problem(1);
    CcrConfig c = recommended_config(problem, 3);
    CcrModel m = ccr_fit(f1_data(200, 3), c);
    CHECK(m.num_classes() == 2);
    Vector xs = Vector::LinSpaced(400, 0.0, 2.0);
    int checked = 0;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        if (std::abs(xs(i) - 1.0) < 0.05) continue;
        const double pred = m.predict(Matrix(xs.segment(i, 1)))(0);
        INFO("x = " << xs(i));
        CHECK(std::abs(pred - f1(xs(i))) < 0.05);
        ++checked;
    }
    CHECK(checked > 350);
}

TEST_CASE("composition identity, determinism, row order") {
    test::WarningSink quiet;
    Dataset d = f2_data(120, 4);
    CcrModel m = ccr_fit(d, forest_config(2, 4));
    std::mt19937_64 rng(2);
    Matrix q = test::uniform_matrix(50, 1, rng, -1, 1);
    Labels l = m.classify(q);
    Vector p = m.predict(q);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        REQUIRE(p(i) == m.regressors[static_cast<std::size_t>(l[static_cast<std::size_t>(i)])]->predict(
                            Vector(q.row(i).transpose())));
    }
    CHECK(m.predict(q) == p);
    Matrix reversed = q.colwise().reverse();
    CHECK(m.predict(reversed) == Vector(p.reverse()));
    CHECK(ccr_predict(m, q) == p);
    CHECK_THROWS_AS(m.predict(Matrix::Zero(2, 2)), DataError);
}

TEST_CASE("oracle dispatch equals classified dispatch when training accuracy is perfect") {
    Dataset d = f2_data(150, 5);
    CcrModel m = ccr_fit(d, forest_config(2, 5));
    REQUIRE(m.classify(d.inputs()) == m.cluster.labels);
    const double classified = (m.predict(d.inputs()) - d.outputs()).squaredNorm();
    const double oracle = (m.predict_with_labels(d.inputs(), m.cluster.labels) - d.outputs()).squaredNorm();
    CHECK(oracle <= classified + 1e-9);
    CHECK(evaluate(m, d).misclassification_rate == 0.0);
}

TEST_CASE("CCR training R2 beats a single regressor on f2-style data, averaged over 5 seeds") {
    test::WarningSink quiet;
    const auto& problem = benchmark_problem(2);
    double ccr_sum = 0.0, plain_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Dataset d = f2_data(200, seed);
        CcrModel m = ccr_fit(d, recommended_config(problem, seed));
        ccr_sum += *evaluate(m, d).r2;
        auto plain = fit_regressor(d.inputs(), d.outputs(), direct_regressor_config(problem, seed));
        plain_sum += *score_predictions(d.outputs(), plain->predict(d.inputs())).r2;
    }
    CHECK(ccr_sum >= plain_sum);
}

TEST_CASE("metrics") {
    Vector y(4);
    y << 1, 2, 3, 4;
    Metrics perfect = score_predictions(y, y);
    CHECK(*perfect.l2 == 1.0);
    CHECK(*perfect.r2 == 1.0);
    CHECK(perfect.rmse == 0.0);
    Metrics mean = score_predictions(y, Vector::Constant(4, y.mean()));
    CHECK(*mean.r2 == 0.0);

    Vector p(4);
    p << 1.5, 1.0, 3.5, 4.0;
    Metrics a = score_predictions(y, p);
    CHECK(*a.l2 == doctest::Approx(1.0 - std::sqrt(1.5 / 30.0)));
    CHECK(*a.r2 == doctest::Approx(1.0 - 1.5 / 5.0));
    Vector yp(4), pp(4);
    yp << 3, 1, 4, 2;
    pp << 3.5, 1.5, 4.0, 1.0;
    Metrics b = score_predictions(yp, pp);
    CHECK(*b.l2 == doctest::Approx(*a.l2).epsilon(1e-12));
    CHECK(*b.r2 == doctest::Approx(*a.r2).epsilon(1e-12));
    CHECK(*a.r2 <= 1.0);

    CHECK_FALSE(score_predictions(Vector::Zero(3), Vector::Ones(3)).l2.has_value());
    CHECK_FALSE(score_predictions(Vector::Ones(3), Vector::Ones(3)).r2.has_value());
    CHECK_THROWS_AS(score_predictions(Vector::Ones(3), Vector::Ones(2)), DataError);
    CHECK(metrics_table("t", a).find("L2") != std::string::npos);
}

TEST_CASE("preconditions") {
    CHECK_THROWS_AS(ccr_fit(f2_data(9, 1), forest_config(2, 1)), DataError);
    CHECK_THROWS_AS(ccr_fit(f2_data(11, 1), forest_config(6, 1)), DataError);
    CcrConfig bad;
    bad.clusters = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.clusters = 2;
    bad.amplification_cluster = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("elbow selection inside the pipeline") {
    Dataset d = f1_data(150, 6);
    CcrConfig c = forest_config(2, 6);
    c.clusters.reset();
    CcrModel m = ccr_fit(d, c);
    REQUIRE(m.elbow.has_value());
    CHECK(m.num_classes() == m.elbow->chosen_L);
    CHECK(m.num_classes() >= 2);
}

TEST_CASE("model json round trip") {
    test::WarningSink quiet;
    Dataset d = f2_data(100, 7);
    CcrConfig c = recommended_config(benchmark_problem(2), 7);
    c.classifier_mlp.max_epochs = c.regressor_mlp.max_epochs = 20;
    for (CcrConfig cfg : {c, forest_config(2, 7)}) {
        CcrModel m = ccr_fit(d, cfg);
        auto dir = test::temp_dir("model");
        save_model(m, dir / "m.json");
        CcrModel back = load_model(dir / "m.json");
        CHECK(back.predict(d.inputs()) == m.predict(d.inputs()));
        CHECK(to_json(back.config) == to_json(m.config));
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("config json") {
    CcrConfig c = ccr_config_from_json({{"clusters", 3}, {"classifier", "forest"}});
    CHECK(*c.clusters == 3);
    CHECK(c.classifier_kind == LearnerKind::forest);
    CHECK_THROWS_AS(ccr_config_from_json({{"nope", 1}}), ConfigError);
    CcrConfig back = ccr_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
}
