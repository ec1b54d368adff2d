#pragma once

#include <memory>
#include <string_view>

#include <json.hpp>

#include "ccr/common.hpp"

namespace ccr {

enum class LearnerKind { mlp, forest };

LearnerKind parse_learner_kind(std::string_view name);
const char* to_string(LearnerKind kind);

/// Probabilistic classifier g: R^d -> L-simplex. Implementations are immutable
/// after fitting and safe to call concurrently.
class SoftClassifier {
public:
    virtual ~SoftClassifier() = default;

    virtual Eigen::Index num_classes() const = 0;
    virtual Eigen::Index dim() const = 0;
    /// One probability row per input row.
    virtual Matrix predict_proba(const Matrix& x) const = 0;
    virtual nlohmann::json to_json() const = 0;

    Vector predict_proba(const Vector& x) const;
    /// argmax of predict_proba per row, ties to the lowest index.
    Labels classify(const Matrix& x) const;
    int classify(const Vector& x) const;

protected:
    void check_input(const Matrix& x) const;
};

class Regressor {
public:
    virtual ~Regressor() = default;

    virtual Eigen::Index dim() const = 0;
    virtual Vector predict(const Matrix& x) const = 0;
    virtual nlohmann::json to_json() const = 0;

    double predict(const Vector& x) const;

protected:
    void check_input(const Matrix& x) const;
};

using ClassifierPtr = std::shared_ptr<const SoftClassifier>;
using RegressorPtr = std::shared_ptr<const Regressor>;

/// Checks that labels has `rows` entries covering 0..L-1 with L >= 2, and
/// returns L.
Eigen::Index validate_labels(const Labels& labels, Eigen::Index rows);

/// Argmax with ties to the lowest index.
int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Always predicts one class with probability 1.
class ConstantClassifier final : public SoftClassifier {
public:
    ConstantClassifier(Eigen::Index dim, Eigen::Index num_classes, int label);

    Eigen::Index num_classes() const override { return classes_; }
    Eigen::Index dim() const override { return dim_; }
    using SoftClassifier::predict_proba;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json to_json() const override;

private:
    Eigen::Index dim_;
    Eigen::Index classes_;
    int label_;
};

class ConstantRegressor final : public Regressor {
public:
    ConstantRegressor(Eigen::Index dim, double value);

    Eigen::Index dim() const override { return dim_; }
    double value() const { return value_; }
    using Regressor::predict;
    Vector predict(const Matrix& x) const override;
    nlohmann::json to_json() const override;

private:
    Eigen::Index dim_;
    double value_;
};

/// Rebuilds a classifier or regressor from its to_json() document.
ClassifierPtr classifier_from_json(const nlohmann::json& j);
RegressorPtr regressor_from_json(const nlohmann::json& j);

}  // namespace ccr
