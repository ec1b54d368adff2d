#include "ccr/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <iomanip>

#include "ccr/serialize.hpp"

namespace ccr {

namespace {

void check_points(const Matrix& points) {
    if (points.rows() < 1 || points.cols() < 1) throw DataError("k-means needs a non-empty point matrix");
    if (!points.allFinite()) throw DataError("k-means input contains non-finite values");
}

// Nearest centroid per row (ties to the lowest index); returns the inertia and
// fills the per-point squared distance.
double assign(const Matrix& points, const Matrix& centroids, Labels& labels, Vector& dist) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    labels.resize(static_cast<std::size_t>(n));
    dist.resize(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_l = 0;
        for (Eigen::Index l = 0; l < k; ++l) {
            double d2 = (points.row(i) - centroids.row(l)).squaredNorm();
            if (d2 < best) {
                best = d2;
                best_l = static_cast<int>(l);
            }
        }
        labels[static_cast<std::size_t>(i)] = best_l;
        dist(i) = best;
        total += best;
    }
    return total;
}

ClusterModel lloyd(const Matrix& points, Matrix centroids, int max_iter) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    ClusterModel out;
    Labels labels(static_cast<std::size_t>(n), -1);
    Labels next;
    Vector dist;
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
        double total = assign(points, centroids, next, dist);
        out.inertia_trace.push_back(total);
        bool changed = next != labels;
        labels.swap(next);
        if (!changed) {
            converged = true;
            break;
        }

        Matrix sums = Matrix::Zero(k, points.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        std::vector<bool> taken(static_cast<std::size_t>(n), false);
        for (Eigen::Index l = 0; l < k; ++l) {
            if (counts[static_cast<std::size_t>(l)] > 0) {
                centroids.row(l) = sums.row(l) / static_cast<double>(counts[static_cast<std::size_t>(l)]);
                continue;
            }
            // Empty cluster: move it onto the point farthest from its centroid.
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                if (far < 0 || dist(i) > dist(far)) far = i;
            }
            if (far < 0) far = 0;
            taken[static_cast<std::size_t>(far)] = true;
            centroids.row(l) = points.row(far);
        }
    }
    out.iterations = converged ? it + 1 : it;
    if (!converged) {
        // Ran out of iterations right after an update; make labels consistent.
        out.inertia_trace.push_back(assign(points, centroids, labels, dist));
    }
    out.inertia = out.inertia_trace.back();
    out.centroids = std::move(centroids);
    out.labels = std::move(labels);
    return out;
}

Matrix farthest_point_seeds(const Matrix& points, Eigen::Index k, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    Matrix c(k, points.cols());
    c.row(0) = points.row(pick(rng));
    Vector nearest = (points.rowwise() - c.row(0)).rowwise().squaredNorm();
    for (Eigen::Index l = 1; l < k; ++l) {
        Eigen::Index far = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
            if (nearest(i) > nearest(far)) far = i;
        }
        c.row(l) = points.row(far);
        nearest = nearest.cwiseMin((points.rowwise() - c.row(l)).rowwise().squaredNorm());
    }
    return c;
}

}  // namespace

ClusterModel kmeans_fit(const Matrix& points, Eigen::Index clusters, const KMeansOptions& opts) {
    check_points(points);
    if (clusters < 1) throw ConfigError("number of clusters must be at least 1");
    if (clusters > points.rows()) {
        throw ConfigError("number of clusters (" + std::to_string(clusters) + ") exceeds number of points (" +
                          std::to_string(points.rows()) + ")");
    }
    if (opts.restarts < 1) throw ConfigError("k-means restarts must be at least 1");
    if (opts.max_iter < 1) throw ConfigError("k-means max_iter must be at least 1");

    std::vector<ClusterModel> runs(static_cast<std::size_t>(opts.restarts));
    parallel_for(
        runs.size(),
        [&](std::size_t r) {
            std::mt19937_64 rng(derive_seed(opts.seed, r));
            runs[r] = lloyd(points, farthest_point_seeds(points, clusters, rng), opts.max_iter);
        },
        opts.threads);
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].inertia < runs[best].inertia) best = r;
    }
    return std::move(runs[best]);
}

ClusterModel kmeans_fit_from(const Matrix& points, const Matrix& initial, int max_iter) {
    check_points(points);
    if (initial.rows() < 1 || initial.cols() != points.cols()) {
        throw ConfigError("initial centroids must have " + std::to_string(points.cols()) + " columns");
    }
    if (initial.rows() > points.rows()) throw ConfigError("number of clusters exceeds number of points");
    if (max_iter < 1) throw ConfigError("k-means max_iter must be at least 1");
    return lloyd(points, initial, max_iter);
}

Labels assign_labels(const ClusterModel& model, const Matrix& points) {
    if (points.cols() != model.dim()) {
        throw DataError("point dimension " + std::to_string(points.cols()) + " does not match centroid dimension " +
                        std::to_string(model.dim()));
    }
    Labels labels;
    Vector dist;
    assign(points, model.centroids, labels, dist);
    return labels;
}

double inertia(const Matrix& points, const Matrix& centroids, const Labels& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        total += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return total;
}

ElbowReport elbow_select(const Matrix& points, int L_max, const KMeansOptions& opts) {
    check_points(points);
    if (L_max < 3) throw ConfigError("elbow selection needs L_max >= 3 (second difference undefined)");
    if (L_max > points.rows()) {
        throw ConfigError("L_max (" + std::to_string(L_max) + ") exceeds number of points (" +
                          std::to_string(points.rows()) + ")");
    }
    ElbowReport report;
    ClusterModel prev;
    for (int L = 1; L <= L_max; ++L) {
        KMeansOptions o = opts;
        o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(L));
        ClusterModel fit = kmeans_fit(points, L, o);
        if (L > 1) {
            Vector nearest = Vector::Constant(points.rows(), std::numeric_limits<double>::infinity());
            for (Eigen::Index l = 0; l < prev.centroids.rows(); ++l) {
                nearest = nearest.cwiseMin((points.rowwise() - prev.centroids.row(l)).rowwise().squaredNorm());
            }
            Eigen::Index far = 0;
            nearest.maxCoeff(&far);
            Matrix init(L, points.cols());
            init.topRows(L - 1) = prev.centroids;
            init.row(L - 1) = points.row(far);
            ClusterModel nested = kmeans_fit_from(points, init, opts.max_iter);
            if (nested.inertia < fit.inertia) fit = std::move(nested);
        }
        report.candidate_L.push_back(L);
        report.inertias.push_back(fit.inertia);
        prev = std::move(fit);
    }
    const auto& I = report.inertias;
    double best = -std::numeric_limits<double>::infinity();
    for (int L = 2; L <= L_max - 1; ++L) {
        auto i = static_cast<std::size_t>(L - 1);
        double sd = (I[i - 1] - I[i]) - (I[i] - I[i + 1]);
        report.second_differences.push_back(sd);
        if (sd > best) {
            best = sd;
            report.chosen_L = L;
        }
    }
    report.clear_elbow = I[0] > 0.0 && best >= 0.05 * I[0];
    return report;
}

nlohmann::json to_json(const ElbowReport& report) {
    return {{"candidate_L", report.candidate_L},
            {"inertias", report.inertias},
            {"second_differences", report.second_differences},
            {"chosen_L", report.chosen_L},
            {"clear_elbow", report.clear_elbow}};
}

std::string elbow_csv(const ElbowReport& report) {
    std::ostringstream os;
    os << "L,inertia\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.candidate_L.size(); ++i) {
        os << report.candidate_L[i] << ',' << report.inertias[i] << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const ClusterModel& model) {
    return {{"centroids", matrix_to_json(model.centroids)},
            {"inertia", model.inertia},
            {"iterations", model.iterations}};
}

ClusterModel cluster_model_from_json(const nlohmann::json& j) {
    ClusterModel m;
    m.centroids = matrix_from_json(j.at("centroids"));
    m.inertia = j.at("inertia").get<double>();
    m.iterations = j.value("iterations", 0);
    return m;
}

}  // namespace ccr
