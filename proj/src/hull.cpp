#include "ccr/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ccr {

namespace {

constexpr double kPivotEps = 1e-11;

// Phase-1 simplex with Bland's rule on [A | I | b]; returns the minimal sum
// of artificial variables.
double phase_one(Matrix a, Vector b) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b(i) < 0.0) {
            a.row(i) *= -1.0;
            b(i) = -b(i);
        }
    }
    const Eigen::Index cols = n + m + 1;
    const Eigen::Index rhs = cols - 1;
    Matrix t = Matrix::Zero(m + 1, cols);
    t.topLeftCorner(m, n) = a;
    t.block(0, n, m, m).setIdentity();
    t.col(rhs).head(m) = b;
    t.row(m) = -t.topRows(m).colwise().sum();
    t.block(m, n, 1, m).setZero();
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    std::iota(basis.begin(), basis.end(), n);

    const long cap = 50 * (m + n) + 100;
    for (long iter = 0;; ++iter) {
        if (iter >= cap) throw HullSolverError("hull containment LP did not terminate");
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            if (t(m, j) < -kPivotEps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best_ratio = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) <= kPivotEps) continue;
            double ratio = t(i, rhs) / t(i, enter);
            if (leave < 0 || ratio < best_ratio ||
                (ratio == best_ratio && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave < 0) throw HullSolverError("hull containment LP is unbounded (numerical failure)");
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
        }
        basis[static_cast<std::size_t>(leave)] = enter;
    }
    return -t(m, rhs);
}

}  // namespace

HullDomain::HullDomain(Matrix vertices) : vertices_(std::move(vertices)) {
    if (vertices_.rows() < 1 || vertices_.cols() < 1) throw ConfigError("hull needs at least one vertex");
    if (!vertices_.allFinite()) throw DataError("hull vertices contain non-finite values");
    lower_ = vertices_.colwise().minCoeff().transpose();
    upper_ = vertices_.colwise().maxCoeff().transpose();
    center_ = vertices_.colwise().mean().transpose();
    normalized_ = vertices_.rowwise() - center_.transpose();
    scale_ = normalized_.cwiseAbs().maxCoeff();
    if (!(scale_ > 0.0)) scale_ = 1.0;
    normalized_ /= scale_;
}

bool HullDomain::contains(const Vector& z) const {
    if (z.size() != dim()) {
        throw DataError("hull point has d=" + std::to_string(z.size()) + ", hull has d=" + std::to_string(dim()));
    }
    if (!z.allFinite()) return false;
    const double slack = kTolerance * scale_;
    for (Eigen::Index j = 0; j < dim(); ++j) {
        if (z(j) < lower_(j) - slack || z(j) > upper_(j) + slack) return false;
    }
    const Eigen::Index m = dim() + 1;
    Matrix a(m, vertices_.rows());
    a.topRows(dim()) = normalized_.transpose();
    a.row(dim()).setOnes();
    Vector b(m);
    b.head(dim()) = (z - center_) / scale_;
    b(dim()) = 1.0;
    return phase_one(std::move(a), std::move(b)) <= kTolerance;
}

Vector HullDomain::random_interior_point(std::mt19937_64& rng) const {
    const Eigen::Index m = vertices_.rows();
    const Eigen::Index k = std::min<Eigen::Index>(m, dim() + 1);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, m - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    std::exponential_distribution<double> expo(1.0);
    Vector w(k);
    for (Eigen::Index i = 0; i < k; ++i) w(i) = expo(rng);
    w /= w.sum();
    Vector z = Vector::Zero(dim());
    for (Eigen::Index i = 0; i < k; ++i) z += w(i) * vertices_.row(idx[static_cast<std::size_t>(i)]).transpose();
    return z;
}

bool hull_contains(const HullDomain& domain, const Vector& z) { return domain.contains(z); }

}  // namespace ccr
