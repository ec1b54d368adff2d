#include <doctest.h>

#include <random>

#include "ccr/kmeans.hpp"
#include "support.hpp"

using namespace ccr;

namespace {

Matrix column(std::initializer_list<double> v) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

// Minimum SSE over every assignment of the points to two non-empty groups.
double brute_force_two_means(const std::vector<double>& p) {
    const std::size_t n = p.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        double sse = 0.0;
        for (int side = 0; side < 2; ++side) {
            double sum = 0.0;
            int count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
                    sum += p[i];
                    ++count;
                }
            }
            const double mean = sum / count;
            for (std::size_t i = 0; i < n; ++i) {
                if (((mask >> i) & 1u) == static_cast<unsigned>(side)) sse += (p[i] - mean) * (p[i] - mean);
            }
        }
        best = std::min(best, sse);
    }
    return best;
}

}  // namespace

TEST_CASE("two separated pairs") {
    ClusterModel m = kmeans_fit(column({0, 1, 10, 11}), 2, {.seed = 4});
    std::vector<double> c{m.centroids(0, 0), m.centroids(1, 0)};
    std::sort(c.begin(), c.end());
    CHECK(c[0] == doctest::Approx(0.5));
    CHECK(c[1] == doctest::Approx(10.5));
    CHECK(m.inertia == doctest::Approx(1.0));
}

TEST_CASE("identical points and L = N") {
    ClusterModel one = kmeans_fit(column({3, 3, 3}), 1);
    CHECK(one.centroids(0, 0) == 3.0);
    CHECK(one.inertia == 0.0);
    ClusterModel all = kmeans_fit(column({1, 5, 2, 9}), 4);
    CHECK(all.inertia == 0.0);
}

TEST_CASE("kmeans argument errors") {
    CHECK_THROWS_AS(kmeans_fit(column({1, 2}), 3), ConfigError);
    CHECK_THROWS_AS(kmeans_fit(column({1, 2}), 0), ConfigError);
    Matrix bad = column({1, 2});
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(kmeans_fit(bad, 1), DataError);
}

TEST_CASE("assign_labels nearest with ties to the lowest index") {
    ClusterModel m;
    m.centroids = column({0, 10});
    Labels l = assign_labels(m, column({4, 6, 5, 0}));
    CHECK(l == Labels{0, 1, 0, 0});
    CHECK_THROWS_AS(assign_labels(m, Matrix::Zero(1, 2)), DataError);
}

TEST_CASE("fit invariants: labels, inertia, determinism") {
    std::mt19937_64 rng(9);
    Matrix p = test::uniform_matrix(200, 3, rng);
    ClusterModel a = kmeans_fit(p, 5, {.seed = 1});
    ClusterModel b = kmeans_fit(p, 5, {.seed = 1});
    CHECK(a.centroids == b.centroids);
    CHECK(assign_labels(a, p) == a.labels);
    CHECK(inertia(p, a.centroids, a.labels) == doctest::Approx(a.inertia).epsilon(1e-9));
}

TEST_CASE("property: brute-force optimality on all 4-point 1-D instances, monotone trace") {
    // Every multiset of four values from an integer grid.
    int checked = 0;
    for (int a = 0; a <= 8; ++a) {
        for (int b = a; b <= 8; ++b) {
            for (int c = b; c <= 8; ++c) {
                for (int d = c; d <= 8; ++d) {
                    std::vector<double> pts{double(a), double(b), double(c), double(d)};
                    ClusterModel m = kmeans_fit(column({pts[0], pts[1], pts[2], pts[3]}), 2, {.seed = 17});
                    REQUIRE(m.inertia == doctest::Approx(brute_force_two_means(pts)).epsilon(1e-9).scale(1.0));
                    for (std::size_t t = 1; t < m.inertia_trace.size(); ++t) {
                        REQUIRE(m.inertia_trace[t] <= m.inertia_trace[t - 1] + 1e-12);
                    }
                    ++checked;
                }
            }
        }
    }
    CHECK(checked == 495);
}

TEST_CASE("property: Lloyd never increases inertia on random data") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix p = test::uniform_matrix(60, 2, rng);
        ClusterModel m = kmeans_fit(p, 1 + trial % 6, {.restarts = 2, .seed = static_cast<std::uint64_t>(trial)});
        for (std::size_t t = 1; t < m.inertia_trace.size(); ++t) {
            REQUIRE(m.inertia_trace[t] <= m.inertia_trace[t - 1] * (1 + 1e-12));
        }
    }
}

TEST_CASE("nested start never increases inertia") {
    std::mt19937_64 rng(2);
    Matrix p = test::uniform_matrix(100, 2, rng);
    ClusterModel m3 = kmeans_fit(p, 3, {.seed = 5});
    Matrix init(4, 2);
    init << m3.centroids, p.row(0);
    ClusterModel m4 = kmeans_fit_from(p, init);
    CHECK(m4.inertia <= m3.inertia + 1e-12);
}

TEST_CASE("elbow: two separated blobs") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> eps(0.0, 0.01);
    Matrix p(40, 1);
    for (Eigen::Index i = 0; i < 40; ++i) p(i, 0) = (i < 20 ? 0.0 : 100.0) + eps(rng);
    ElbowReport r = elbow_select(p, 6, {.seed = 3});
    CHECK(r.chosen_L == 2);
    CHECK(r.clear_elbow);
    CHECK(r.candidate_L.size() == 6);
    for (std::size_t i = 1; i < r.inertias.size(); ++i) CHECK(r.inertias[i] <= r.inertias[i - 1] + 1e-12);
    CHECK(elbow_csv(r).rfind("L,inertia\n", 0) == 0);
}

TEST_CASE("elbow: single tight blob has no clear elbow") {
    // Isotropic 10-D blob: each extra centroid removes only a sliver of inertia.
    std::mt19937_64 rng(8);
    std::normal_distribution<double> eps(0.0, 1.0);
    Matrix p(200, 10);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = eps(rng);
    ElbowReport r = elbow_select(p, 8, {.seed = 3});
    CHECK_FALSE(r.clear_elbow);
}

TEST_CASE("elbow needs L_max >= 3") { CHECK_THROWS_AS(elbow_select(column({1, 2, 3, 4}), 2), ConfigError); }

TEST_CASE("cluster model json round trip") {
    ClusterModel m = kmeans_fit(column({0, 1, 10, 11}), 2);
    ClusterModel back = cluster_model_from_json(to_json(m));
    CHECK(back.centroids == m.centroids);
    CHECK(back.inertia == m.inertia);
}
