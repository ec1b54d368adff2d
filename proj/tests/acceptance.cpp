// Acceptance runner: one PASS/FAIL line per criterion; exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "ccr/benchmarks.hpp"
#include "ccr/experiments.hpp"

using namespace ccr;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(precision);
    os << v;
    return os.str();
}

std::string join(const std::vector<double>& v, int precision = 4) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(x, precision);
    return s;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

double value_or_nan(const std::optional<double>& v) { return v.value_or(std::nan("")); }

// Max |error| of `predict` on a dense grid of [-1, 1], restricted by `keep`.
double band_error(const std::function<Vector(const Matrix&)>& predict, const std::function<bool(double)>& keep) {
    const Vector xs = Vector::LinSpaced(4001, -1.0, 1.0);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        if (keep(xs(i))) rows.push_back(i);
    }
    Matrix x = xs(rows);
    const Vector p = predict(x);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) worst = std::max(worst, std::abs(p(i) - f2(x(i, 0))));
    return worst;
}

Outcome one_d_example(int id, double& worst_seconds, std::vector<ExampleRun>* keep) {
    std::vector<double> l2, r2;
    worst_seconds = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ExampleRun run = run_example(id, seed, id == 2);
        l2.push_back(value_or_nan(run.metrics.l2));
        r2.push_back(value_or_nan(run.metrics.r2));
        worst_seconds = std::max(worst_seconds, run.seconds);
        if (keep) keep->push_back(std::move(run));
    }
    const double ml2 = median(l2), mr2 = median(r2);
    Outcome o;
    o.pass = ml2 >= 0.97 && mr2 >= 0.97 && worst_seconds < 60.0;
    o.detail = "median L2 " + fmt(ml2) + " R2 " + fmt(mr2) + " (L2 per seed " + join(l2) + "; R2 per seed " +
               join(r2) + "), slowest run " + fmt(worst_seconds, 1) + " s";
    return o;
}

void criterion_1() {
    double secs = 0.0;
    report(1, "f1, MLP learners, L=2, 500/500 points, median of 5 seeds: L2, R2 >= 0.97, < 60 s",
           one_d_example(1, secs, nullptr));
}

void criterion_2() {
    double secs = 0.0;
    std::vector<ExampleRun> runs;
    Outcome o = one_d_example(2, secs, &runs);
    std::vector<double> direct_band, ccr_outside, direct_l2;
    for (const auto& run : runs) {
        direct_band.push_back(band_error([&](const Matrix& x) { return run.direct->predict(x); },
                                         [](double x) { return std::abs(x) <= 0.05; }));
        ccr_outside.push_back(band_error([&](const Matrix& x) { return run.model.predict(x); },
                                         [](double x) { return std::abs(x) > 0.02; }));
        direct_l2.push_back(value_or_nan(run.direct_metrics->l2));
    }
    const double db = median(direct_band), co = median(ccr_outside);
    const bool smear = db > 0.2 && co < 0.1;
    o.pass = o.pass && smear;
    o.detail += "; direct MLP max error in |x|<=0.05: median " + fmt(db) + " (" + join(direct_band) +
                "); CCR max error for |x|>0.02: median " + fmt(co) + " (" + join(ccr_outside) + "); direct L2 " +
                join(direct_l2);
    report(2, "f2, same protocol, L2, R2 >= 0.97; direct MLP band error > 0.2 and CCR error < 0.1 off the band", o);
}

void criterion_3() {
    ExampleRun run = run_example(3, 0);
    const double l2 = value_or_nan(run.metrics.l2), r2 = value_or_nan(run.metrics.r2);
    Outcome o;
    o.pass = l2 >= 0.98 && r2 >= 0.98 && run.seconds < 120.0;
    o.detail = "training L2 " + fmt(l2) + " R2 " + fmt(r2) + ", " + fmt(run.seconds, 1) + " s";
    report(3, "f3, forest learners, 2000-point grid: training L2, R2 >= 0.98, < 120 s", o);
}

// Jump of f4 across the line x_axis = b at the point where the other coordinate is t.
double f4_jump(double b, double t) {
    const double step = std::abs(f3(b + 1e-12) - f3(b));
    return step * std::abs(f3(t));
}

void criterion_4() {
    ExampleRun run = run_example(4, 0);
    const double l2 = value_or_nan(run.metrics.l2), r2 = value_or_nan(run.metrics.r2);
    // Neighbouring grid points on either side of a discontinuity line must not
    // share a cluster where the jump exceeds 0.5.
    const Matrix& x = run.train.inputs();
    const Labels& lab = run.model.cluster.labels;
    const auto& breaks = benchmark_problem(4).breakpoints;
    const Eigen::Index n = 64;
    Eigen::Index crossings = 0, violations = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index a = i * n + j;
            for (Eigen::Index b : {i * n + j + 1, (i + 1) * n + j}) {
                if ((b == i * n + j + 1 && j + 1 >= n) || (b == (i + 1) * n + j && i + 1 >= n)) continue;
                for (Eigen::Index axis = 0; axis < 2; ++axis) {
                    const double lo = std::min(x(a, axis), x(b, axis)), hi = std::max(x(a, axis), x(b, axis));
                    for (double br : breaks) {
                        if (!(lo < br && br < hi)) continue;
                        const double other = x(a, 1 - axis);
                        if (f4_jump(br, other) <= 0.5) continue;
                        ++crossings;
                        if (lab[static_cast<std::size_t>(a)] == lab[static_cast<std::size_t>(b)]) ++violations;
                    }
                }
            }
        }
    }
    Outcome o;
    o.pass = l2 >= 0.98 && r2 >= 0.98 && violations == 0 && crossings > 0;
    o.detail = "training L2 " + fmt(l2) + " R2 " + fmt(r2) + ", L=" + std::to_string(run.model.num_classes()) + ", " +
               std::to_string(violations) + " of " + std::to_string(crossings) +
               " neighbour pairs across a jump > 0.5 share a cluster, " + fmt(run.seconds, 1) + " s";
    report(4, "f4, forest learners, L=10, 64x64 grid: training L2, R2 >= 0.98; no cluster spans a jump > 0.5", o);
}

void criterion_5() {
    std::vector<double> ccr_r2, direct_r2, margin;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        ExampleRun run = run_example(5, seed, true);
        ccr_r2.push_back(value_or_nan(run.metrics.r2));
        direct_r2.push_back(value_or_nan(run.direct_metrics->r2));
        margin.push_back(ccr_r2.back() - direct_r2.back());
        worst = std::max(worst, run.seconds);
        std::cout << "      seed " << seed << ": CCR R2 " << fmt(ccr_r2.back()) << ", direct R2 "
                  << fmt(direct_r2.back()) << ", " << fmt(run.seconds, 1) << " s" << std::endl;
    }
    const double mr2 = median(ccr_r2), mm = median(margin);
    Outcome o;
    o.pass = mr2 >= 0.90 && mm >= 0.02 && worst < 900.0;
    o.detail = "median CCR R2 " + fmt(mr2) + " (" + join(ccr_r2) + "), direct " + join(direct_r2) +
               ", median margin " + fmt(mm) + ", slowest run " + fmt(worst, 1) + " s";
    report(5, "transport stand-in, d=10, 20000/500: CCR R2 >= 0.90 and >= direct MLP + 0.02, median of 3, < 15 min",
           o);
}

void criterion_6() {
    std::vector<double> attained, final_rmse, passive;
    double worst = 0.0;
    Eigen::Index most_labels = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ActivePassiveRun run = run_active_vs_passive(seed);
        attained.push_back(run.attained_rmse);
        final_rmse.push_back(run.active_rmse);
        passive.push_back(run.passive_rmse);
        most_labels = std::max(most_labels, run.active_labeled);
        worst = std::max(worst, run.seconds);
    }
    const double ma = median(attained), mp = median(passive), mf = median(final_rmse);
    Outcome o;
    o.pass = ma <= mp && most_labels <= 200 && worst < 300.0;
    o.detail = "median RMSE reached by active refits " + fmt(ma, 5) + " (" + join(attained, 5) + ") vs passive " +
               fmt(mp, 5) + " (" + join(passive, 5) + "); final active model " + fmt(mf, 5) + " (" +
               join(final_rmse, 5) + "); at most " + std::to_string(most_labels) + " labels vs 1000; slowest " +
               fmt(worst, 1) + " s";
    report(6, "f2 reservoir of 1000, uncertainty sampling: active RMSE <= passive RMSE with <= 200 labels, median of 5",
           o);
}

void criterion_7() {
    const std::vector<std::string> suites = {
        "property: Lloyd never increases inertia on random data",
        "property: brute-force optimality on all 4-point 1-D instances, monotone trace",
        "property: analytic gradients match central differences on 20 random networks",
        "property: softmax lies on the simplex for 1000 random logits",
        "property: containment matches barycentric brute force on random simplices, d <= 4",
        "property: reservoir selection equals an exhaustive scan",
        "property: active strategy outputs stay in the hull of the initial data",
        "property: hull search output is contained",
        "property: scaling round trip within 1e-12 and monotone",
    };
    int passed = 0;
    for (const auto& s : suites) {
        const std::string cmd = std::string(UNIT_TESTS_PATH) + " --test-case=\"" + s + "\" > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
        std::cout << "      " << (ok ? "ok    " : "FAILED") << " " << s << std::endl;
        passed += ok;
    }
    Outcome o;
    o.pass = passed == static_cast<int>(suites.size());
    o.detail = std::to_string(passed) + " of " + std::to_string(suites.size()) + " property suites pass";
    report(7, "property suites", o);
}

}  // namespace

int main(int argc, char** argv) {
    set_warning_handler([](const std::string&) {});
    const std::vector<std::function<void()>> all = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                    criterion_5, criterion_6, criterion_7};
    std::set<int> chosen;
    for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
    for (int id = 1; id <= static_cast<int>(all.size()); ++id) {
        if (!chosen.empty() && !chosen.count(id)) continue;
        try {
            all[static_cast<std::size_t>(id - 1)]();
        } catch (const std::exception& e) {
            report(id, "criterion", {false, std::string("error: ") + e.what()});
        }
    }
    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}
