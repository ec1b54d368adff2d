#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ccr/common.hpp"
#include "ccr/learner.hpp"

namespace ccr::test {

/// Two-class classifier whose first-class probability is a logistic function
/// of a*x + b.
class LogisticClassifier final : public SoftClassifier {
public:
    LogisticClassifier(Vector a, double b) : a_(std::move(a)), b_(b) {}

    Eigen::Index num_classes() const override { return 2; }
    Eigen::Index dim() const override { return a_.size(); }
    using SoftClassifier::predict_proba;
    Matrix predict_proba(const Matrix& x) const override {
        check_input(x);
        Matrix p(x.rows(), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double t = x.row(i).dot(a_) + b_;
            p(i, 0) = 1.0 / (1.0 + std::exp(-t));
            p(i, 1) = 1.0 - p(i, 0);
        }
        return p;
    }
    nlohmann::json to_json() const override { return {{"kind", "test_logistic"}}; }

private:
    Vector a_;
    double b_;
};

/// Returns a preset probability row for each reservoir row, looked up by the
/// first coordinate (which the tests set to the row index).
class TableClassifier final : public SoftClassifier {
public:
    explicit TableClassifier(Matrix table, Eigen::Index dim = 1) : table_(std::move(table)), dim_(dim) {}

    Eigen::Index num_classes() const override { return table_.cols(); }
    Eigen::Index dim() const override { return dim_; }
    using SoftClassifier::predict_proba;
    Matrix predict_proba(const Matrix& x) const override {
        Matrix p(x.rows(), table_.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) p.row(i) = table_.row(static_cast<Eigen::Index>(std::llround(x(i, 0))));
        return p;
    }
    nlohmann::json to_json() const override { return {{"kind", "test_table"}}; }

private:
    Matrix table_;
    Eigen::Index dim_;
};

/// Collects warnings for the lifetime of the object.
class WarningSink {
public:
    WarningSink() {
        previous_ = set_warning_handler([this](const std::string& m) { messages.push_back(m); });
    }
    ~WarningSink() { set_warning_handler(previous_); }

    std::vector<std::string> messages;

private:
    WarningHandler previous_;
};

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ccr_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = 0.0,
                             double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

}  // namespace ccr::test
