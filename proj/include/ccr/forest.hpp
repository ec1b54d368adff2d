#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "ccr/common.hpp"
#include "ccr/learner.hpp"

namespace ccr {

struct ForestConfig {
    int num_trees = 100;
    int features_per_split = 0;  // 0: ceil(d / 3)
    int min_leaf = 1;
    /// Draw a bootstrap resample per tree. Disabling it is a test hook.
    bool bootstrap = true;
    std::uint64_t seed = 0;
    int threads = 0;

    void validate() const;
    Eigen::Index resolved_features(Eigen::Index d) const;
};

nlohmann::json to_json(const ForestConfig& cfg);
ForestConfig forest_config_from_json(const nlohmann::json& j, ForestConfig base = {});

/// Axis-aligned binary tree stored as parallel node arrays. A node with
/// feature < 0 is a leaf. `values` holds `width` entries per node.
struct Tree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> values;
    int width = 1;

    std::size_t node_count() const { return feature.size(); }
    /// Leaf values reached by x (x[feature] <= threshold goes left).
    const double* leaf(const double* x, Eigen::Index stride) const;

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);
};

/// Mean of per-tree leaf class frequencies.
class ForestClassifier final : public SoftClassifier {
public:
    ForestClassifier(std::vector<Tree> trees, Eigen::Index dim, Eigen::Index num_classes, ForestConfig cfg);

    Eigen::Index num_classes() const override { return classes_; }
    Eigen::Index dim() const override { return dim_; }
    using SoftClassifier::predict_proba;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    static std::shared_ptr<ForestClassifier> from_json(const nlohmann::json& j);

    const std::vector<Tree>& trees() const { return trees_; }

private:
    std::vector<Tree> trees_;
    Eigen::Index dim_;
    Eigen::Index classes_;
    ForestConfig cfg_;
};

/// Mean of per-tree leaf means.
class ForestRegressor final : public Regressor {
public:
    ForestRegressor(std::vector<Tree> trees, Eigen::Index dim, ForestConfig cfg);

    Eigen::Index dim() const override { return dim_; }
    using Regressor::predict;
    Vector predict(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    static std::shared_ptr<ForestRegressor> from_json(const nlohmann::json& j);

    const std::vector<Tree>& trees() const { return trees_; }

private:
    std::vector<Tree> trees_;
    Eigen::Index dim_;
    ForestConfig cfg_;
};

/// CART trees split by Gini impurity. Labels must cover 0..L-1 with L >= 2.
std::shared_ptr<ForestClassifier> fit_forest_classifier(const Matrix& x, const Labels& labels,
                                                        const ForestConfig& cfg);
/// CART trees split by variance reduction. Needs N >= 2.
std::shared_ptr<ForestRegressor> fit_forest_regressor(const Matrix& x, const Vector& y, const ForestConfig& cfg);

}  // namespace ccr
