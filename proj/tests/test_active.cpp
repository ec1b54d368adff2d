#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ccr/active.hpp"
#include "ccr/benchmarks.hpp"
#include "support.hpp"

using namespace ccr;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Reservoir whose row i has first coordinate i, paired with a TableClassifier.
Matrix index_points(Eigen::Index n) { return Vector::LinSpaced(n, 0.0, static_cast<double>(n - 1)); }

Matrix random_simplex_rows(Eigen::Index n, Eigen::Index L, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    Matrix p(n, L);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index l = 0; l < L; ++l) p(i, l) = e(rng);
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

CcrConfig small_forest_config() {
    CcrConfig c;
    c.clusters = 2;
    c.classifier_kind = c.regressor_kind = LearnerKind::forest;
    c.classifier_forest.num_trees = c.regressor_forest.num_trees = 20;
    return c;
}

double f2_oracle(const Vector& x) { return f2(x(0)); }

}  // namespace

TEST_CASE("score examples") {
    const Vector p = vec({0.5, 0.3, 0.2});
    CHECK(score_value(p, ScoreKind::uncertainty) == 0.5);
    CHECK(score_value(p, ScoreKind::margin) == doctest::Approx(0.2));
    CHECK(score_value(p, ScoreKind::entropy) ==
          doctest::Approx(-(0.5 * std::log(0.5) + 0.3 * std::log(0.3) + 0.2 * std::log(0.2))));
    CHECK(score_value(vec({1.0, 0.0}), ScoreKind::entropy) == 0.0);
    CHECK(priority(p, ScoreKind::entropy) == -score_value(p, ScoreKind::entropy));
    CHECK(parse_score_kind("margin") == ScoreKind::margin);
    CHECK_THROWS_AS(parse_score_kind("gini"), ConfigError);
    CHECK_THROWS_AS(parse_strategy("random"), ConfigError);
    CHECK_THROWS_AS(parse_perturb_kind("cauchy"), ConfigError);
}

TEST_CASE("entropy is maximal at the uniform distribution") {
    std::mt19937_64 rng(3);
    for (Eigen::Index L = 2; L <= 6; ++L) {
        const double top = std::log(static_cast<double>(L));
        CHECK(score_value(Vector::Constant(L, 1.0 / static_cast<double>(L)), ScoreKind::entropy) ==
              doctest::Approx(top));
        Matrix p = random_simplex_rows(200, L, rng);
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            REQUIRE(score_value(p.row(i).transpose(), ScoreKind::entropy) <= top + 1e-12);
        }
    }
}

TEST_CASE("reservoir example") {
    Matrix table(3, 2);
    table << 0.9, 0.1, 0.51, 0.49, 0.99, 0.01;
    test::TableClassifier clf(table);
    Reservoir r(index_points(3));
    CHECK(select_from_reservoir(clf, r, 1, ScoreKind::uncertainty) == std::vector<Eigen::Index>{1});
    CHECK(r.consumed == std::vector<bool>{false, true, false});
    CHECK(r.remaining() == 2);
    CHECK(select_from_reservoir(clf, r, 2, ScoreKind::uncertainty) == std::vector<Eigen::Index>{0, 2});
    CHECK(r.remaining() == 0);
    CHECK_THROWS_AS(select_from_reservoir(clf, r, 1, ScoreKind::uncertainty), ConfigError);

    Reservoir full(index_points(3));
    auto all = select_from_reservoir(clf, full, 3, ScoreKind::margin);
    CHECK(std::set<Eigen::Index>(all.begin(), all.end()).size() == 3);
    Reservoir small(index_points(3));
    CHECK_THROWS_AS(select_from_reservoir(clf, small, 4, ScoreKind::margin), ConfigError);
}

TEST_CASE("ties go to the lowest index") {
    Matrix table = Matrix::Constant(5, 2, 0.5);
    test::TableClassifier clf(table);
    Reservoir r(index_points(5));
    CHECK(select_from_reservoir(clf, r, 2, ScoreKind::entropy) == std::vector<Eigen::Index>{0, 1});
}

TEST_CASE("property: reservoir selection equals an exhaustive scan") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(1, 1000)(rng);
        const Eigen::Index L = std::uniform_int_distribution<Eigen::Index>(2, 5)(rng);
        const Eigen::Index batch = std::uniform_int_distribution<Eigen::Index>(1, n)(rng);
        const auto kind = static_cast<ScoreKind>(trial % 3);
        Matrix table = random_simplex_rows(n, L, rng);
        test::TableClassifier clf(table);
        Reservoir r(index_points(n));
        auto got = select_from_reservoir(clf, r, batch, kind);

        std::vector<double> key(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            Vector p = table.row(i).transpose();
            std::sort(p.data(), p.data() + L, std::greater<>());
            double k = 0;
            if (kind == ScoreKind::uncertainty) k = p(0);
            if (kind == ScoreKind::margin) k = p(0) - p(1);
            if (kind == ScoreKind::entropy) {
                for (Eigen::Index l = 0; l < L; ++l) k += p(l) * std::log(p(l));
            }
            key[static_cast<std::size_t>(i)] = k;
        }
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
            return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
        });
        std::set<Eigen::Index> expected(order.begin(), order.begin() + batch);
        const double cut = key[static_cast<std::size_t>(order[static_cast<std::size_t>(batch - 1)])];
        // Keys within rounding of the cut may legitimately swap places.
        for (Eigen::Index i : got) {
            if (!expected.count(i)) REQUIRE(std::abs(key[static_cast<std::size_t>(i)] - cut) < 1e-12);
        }
        REQUIRE(static_cast<Eigen::Index>(std::set<Eigen::Index>(got.begin(), got.end()).size()) == batch);
        REQUIRE(r.remaining() == n - batch);
    }
}

TEST_CASE("property: margin and uncertainty pick the same points for two classes") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(1, 300)(rng);
        const Eigen::Index batch = std::uniform_int_distribution<Eigen::Index>(1, n)(rng);
        Matrix table = random_simplex_rows(n, 2, rng);
        test::TableClassifier clf(table);
        Reservoir a(index_points(n)), b(index_points(n));
        auto u = select_from_reservoir(clf, a, batch, ScoreKind::uncertainty);
        auto m = select_from_reservoir(clf, b, batch, ScoreKind::margin);
        REQUIRE(std::set<Eigen::Index>(u.begin(), u.end()) == std::set<Eigen::Index>(m.begin(), m.end()));
    }
}

TEST_CASE("hull search finds the logistic boundary") {
    Matrix square(4, 2);
    square << 0, 0, 1, 0, 0, 1, 1, 1;
    HullDomain domain(square);
    test::LogisticClassifier clf(vec({20.0, 0.0}), -10.0);
    Vector z = select_in_hull(clf, domain, 1);
    CHECK(domain.contains(z));
    CHECK(clf.predict_proba(z).maxCoeff() <= 0.55);
    CHECK(select_in_hull(clf, domain, 1) == z);

    ConstantClassifier constant(2, 3, 1);
    Vector c = select_in_hull(constant, domain, 2);
    CHECK(domain.contains(c));
    CHECK(score_value(constant.predict_proba(c), ScoreKind::uncertainty) == 1.0);
    HullSearchOptions none;
    none.starts = 0;
    CHECK_THROWS_AS(select_in_hull(clf, domain, 1, none), ConfigError);
}

TEST_CASE("property: hull search output is contained") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 1 + trial % 4;
        HullDomain domain(test::uniform_matrix(d + 3, d, rng, -1, 1));
        Vector a = test::uniform_matrix(d, 1, rng, -5, 5).col(0);
        test::LogisticClassifier clf(a, 0.3);
        HullSearchOptions opts;
        opts.starts = 3;
        opts.kind = static_cast<ScoreKind>(trial % 3);
        REQUIRE(domain.contains(select_in_hull(clf, domain, static_cast<std::uint64_t>(trial), opts)));
    }
}

TEST_CASE("boundary pairs") {
    Matrix two(2, 1);
    two << -1, 1;
    test::LogisticClassifier clf(vec({1.0}), 0.0);
    auto pairs = boundary_pairs(clf, two, 1);
    REQUIRE(pairs.pairs.size() == 1);
    CHECK(pairs.pairs[0] == std::pair<Eigen::Index, Eigen::Index>{0, 1});
    HullDomain domain(two);
    Matrix z = select_boundary_pairs(clf, two, 1, domain);
    REQUIRE(z.rows() == 1);
    const double at_z = clf.predict_proba(Vector(z.row(0).transpose())).maxCoeff();
    CHECK(at_z < clf.predict_proba(vec({-1.0})).maxCoeff());
    CHECK(at_z < clf.predict_proba(vec({1.0})).maxCoeff());
    CHECK(std::abs(z(0, 0)) < 1e-3);

    Matrix same(3, 1);
    same << 1, 2, 3;
    CHECK(boundary_pairs(clf, same, 2).pairs.empty());
    CHECK(select_boundary_pairs(clf, same, 2, HullDomain(same)).rows() == 0);
    CHECK_THROWS_AS(boundary_pairs(clf, same, 0), ConfigError);

    Matrix mixed(7, 1);
    mixed << -3, -2, -1, 1, 2, 3, 4;
    CHECK(boundary_pairs(clf, mixed, 6).pairs.size() == 3 * 4);
}

TEST_CASE("perturbation kernels") {
    std::mt19937_64 rng(14);
    Matrix centers = test::uniform_matrix(4, 3, rng);
    for (auto kind : {PerturbKind::uniform_box, PerturbKind::gaussian, PerturbKind::local_covariance}) {
        PerturbKernel k;
        k.kind = kind;
        k.samples_per_center = 5;
        k.width = 0.0;
        Matrix ref = test::uniform_matrix(40, 3, rng);
        Matrix zero = perturb_candidates(k, centers, 1, ref);
        REQUIRE(zero.rows() == 20);
        // The local kernel takes its spread from the neighbours, not from width.
        if (kind != PerturbKind::local_covariance) {
            for (Eigen::Index i = 0; i < zero.rows(); ++i) CHECK(zero.row(i) == centers.row(i / 5));
        }
        k.width = 0.1;
        Matrix a = perturb_candidates(k, centers, 2, ref);
        CHECK(a == perturb_candidates(k, centers, 2, ref));
        CHECK(a != perturb_candidates(k, centers, 3, ref));
        if (kind == PerturbKind::uniform_box) {
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                CHECK((a.row(i) - centers.row(i / 5)).cwiseAbs().maxCoeff() <= 0.1);
            }
        }
    }
    PerturbKernel bad;
    bad.samples_per_center = 0;
    CHECK_THROWS_AS(perturb_candidates(bad, centers, 1), ConfigError);
}

TEST_CASE("degenerate local covariance falls back with a warning") {
    test::WarningSink sink;
    PerturbKernel k;
    k.kind = PerturbKind::local_covariance;
    k.neighbors = 3;
    Matrix flat = Matrix::Zero(6, 2);
    flat.col(0) = Vector::LinSpaced(6, 0, 1);
    Matrix out = perturb_candidates(k, flat.topRows(1), 1, flat);
    CHECK(out.allFinite());
    CHECK_FALSE(sink.messages.empty());
}

TEST_CASE("active loop bookkeeping") {
    test::WarningSink quiet;
    Dataset initial = sample_inputs(benchmark_problem(2), 20, 1, SamplingMode::random);
    Dataset pool = sample_inputs(benchmark_problem(2), 60, 2, SamplingMode::random);
    ActiveConfig cfg;
    cfg.ccr = small_forest_config();
    cfg.reservoir = pool.inputs();

    auto zero = active_loop(f2_oracle, initial, cfg, 0, 10);
    CHECK(zero.history.size() == 1);
    CHECK(zero.train.size() == 20);

    auto r = active_loop(f2_oracle, initial, cfg, 25, 10);
    CHECK(r.history.size() == 3);
    CHECK(r.train.size() == 45);
    CHECK(r.history.back().n_train == 40);
    CHECK(r.reservoir_indices.size() == 25);
    CHECK(std::set<Eigen::Index>(r.reservoir_indices.begin(), r.reservoir_indices.end()).size() == 25);
    for (std::size_t i = 0; i < r.reservoir_indices.size(); ++i) {
        CHECK(r.train.inputs().row(20 + static_cast<Eigen::Index>(i)) == pool.inputs().row(r.reservoir_indices[i]));
    }
    auto again = active_loop(f2_oracle, initial, cfg, 25, 10);
    CHECK(again.reservoir_indices == r.reservoir_indices);

    auto drained = active_loop(f2_oracle, initial, cfg, 100, 20);
    CHECK(drained.train.size() == 80);
    CHECK_THROWS_AS(active_loop(f2_oracle, initial, cfg, -1, 10), ConfigError);
    CHECK_THROWS_AS(active_loop(f2_oracle, initial, cfg, 10, 0), ConfigError);

    int calls = 0;
    auto flaky = [&](const Vector& x) {
        if (++calls % 3 == 0) throw std::runtime_error("no label");
        return f2(x(0));
    };
    auto f = active_loop(flaky, initial, cfg, 9, 9);
    CHECK(f.oracle_failures == 3);
    CHECK(f.train.size() == 26);
    CHECK(f.history.back().points_added == 6);
}

TEST_CASE("property: active strategy outputs stay in the hull of the initial data") {
    test::WarningSink quiet;
    std::mt19937_64 rng(15);
    Matrix x = test::uniform_matrix(30, 2, rng, -1, 1);
    Vector y(30);
    auto oracle = [](const Vector& p) { return p(0) + p(1) > 0 ? 1.0 + p(0) : p(1); };
    for (Eigen::Index i = 0; i < 30; ++i) y(i) = oracle(x.row(i).transpose());
    Dataset initial(x, y);
    HullDomain domain(x);
    for (auto s : {Strategy::hull, Strategy::boundary, Strategy::perturb}) {
        ActiveConfig cfg;
        cfg.strategy = s;
        cfg.ccr = small_forest_config();
        cfg.hull.starts = 2;
        cfg.regenerate_every = 2;
        auto r = active_loop(oracle, initial, cfg, 12, 4);
        INFO(to_string(s));
        CHECK(r.history.size() == 4);
        CHECK(r.train.size() == 42);
        for (Eigen::Index i = 30; i < r.train.size(); ++i) REQUIRE(domain.contains(r.train.inputs().row(i).transpose()));
    }
}

TEST_CASE("online gate") {
    test::LogisticClassifier clf(vec({1.0}), 0.0);
    CHECK(fits_confidently(clf, vec({5.0})));
    CHECK_FALSE(fits_confidently(clf, vec({0.0})));
    CHECK(fits_confidently(clf, vec({0.0}), 0.5));
}

TEST_CASE("history json lines") {
    HistoryEntry e{2, 40, 0.9, std::nullopt, 0.1, "reservoir", 10};
    auto j = to_json(e);
    CHECK(j["step"] == 2);
    CHECK(j["r2"].is_null());
    std::string lines = history_jsonl({e, e});
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 2);
}
