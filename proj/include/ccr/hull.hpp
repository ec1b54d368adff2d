#pragma once

#include <random>

#include "ccr/common.hpp"

namespace ccr {

/// The LP solver hit its iteration cap; containment is undecided.
class HullSolverError : public Error {
public:
    using Error::Error;
};

/// Convex hull of a finite vertex set, queried through an LP feasibility
/// problem (sum lambda_i v_i = z, sum lambda_i = 1, lambda >= 0) instead of
/// facet enumeration. Degenerate (lower-dimensional) hulls are fine.
class HullDomain {
public:
    static constexpr double kTolerance = 1e-8;

    HullDomain() = default;
    explicit HullDomain(Matrix vertices);

    const Matrix& vertices() const { return vertices_; }
    Eigen::Index dim() const { return vertices_.cols(); }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

    /// Throws HullSolverError if the simplex fails to terminate.
    bool contains(const Vector& z) const;

    /// Dirichlet(1) combination of min(M, d+1) distinct random vertices.
    Vector random_interior_point(std::mt19937_64& rng) const;

private:
    Matrix vertices_;
    Vector lower_;
    Vector upper_;
    // Vertices shifted by center_ and divided by scale_ for conditioning.
    Vector center_;
    double scale_ = 1.0;
    Matrix normalized_;
};

/// Free-function form of HullDomain::contains.
bool hull_contains(const HullDomain& domain, const Vector& z);

}  // namespace ccr
