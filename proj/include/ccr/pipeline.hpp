#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccr/dataset.hpp"
#include "ccr/forest.hpp"
#include "ccr/kmeans.hpp"
#include "ccr/learner.hpp"
#include "ccr/mlp.hpp"

namespace ccr {

struct CcrConfig {
    /// Output amplification C for the clustering scale; unset means 10 * d.
    std::optional<double> amplification_cluster;
    /// Number of clusters; unset means elbow selection over 1..elbow_max.
    std::optional<int> clusters;
    int elbow_max = 10;
    LearnerKind classifier_kind = LearnerKind::mlp;
    LearnerKind regressor_kind = LearnerKind::mlp;
    MlpConfig classifier_mlp;
    MlpConfig regressor_mlp;
    ForestConfig classifier_forest;
    ForestConfig regressor_forest;
    KMeansOptions kmeans;
    /// Base seed; every sub-model derives its own seed from it.
    std::uint64_t seed = 0;
    int threads = 0;

    void validate() const;
};

nlohmann::json to_json(const CcrConfig& cfg);
/// Overrides the fields of `base` present in j. Unknown keys are errors.
CcrConfig ccr_config_from_json(const nlohmann::json& j, CcrConfig base = {});

/// Scaler + cluster model + classifier + one regressor per class. The
/// classifier sees scaled inputs; regressors see raw inputs.
struct CcrModel {
    ScalingTransform scaler;
    ClusterModel cluster;
    ClassifierPtr classifier;
    std::vector<RegressorPtr> regressors;
    CcrConfig config;
    std::optional<ElbowReport> elbow;
    /// Training rows dispatched to each class.
    std::vector<Eigen::Index> class_sizes;

    Eigen::Index dim() const { return scaler.dim(); }
    Eigen::Index num_classes() const { return static_cast<Eigen::Index>(regressors.size()); }

    Matrix predict_proba(const Matrix& x) const;
    Labels classify(const Matrix& x) const;
    Vector predict(const Matrix& x) const;
    /// Dispatch by given labels instead of the classifier.
    Vector predict_with_labels(const Matrix& x, const Labels& labels) const;
    /// Cluster labels of (x, y) pairs under the fitted scaler and centroids.
    Labels cluster_labels(const Dataset& data) const;
};

/// Classifier adapter on raw inputs: scales x, then calls the CCR classifier.
class ScaledClassifier final : public SoftClassifier {
public:
    ScaledClassifier(ScalingTransform scaler, ClassifierPtr inner);

    Eigen::Index num_classes() const override { return inner_->num_classes(); }
    Eigen::Index dim() const override { return scaler_.dim(); }
    using SoftClassifier::predict_proba;
    Matrix predict_proba(const Matrix& x) const override;
    nlohmann::json to_json() const override;

private:
    ScalingTransform scaler_;
    ClassifierPtr inner_;
};

ClassifierPtr raw_input_classifier(const CcrModel& model);

CcrModel ccr_fit(const Dataset& data, const CcrConfig& cfg);
Vector ccr_predict(const CcrModel& model, const Matrix& x);

struct Metrics {
    std::optional<double> l2;
    std::optional<double> r2;
    double rmse = 0.0;
    double max_abs_error = 0.0;
    Eigen::Index n = 0;
    /// Test rows dispatched to each class.
    std::vector<Eigen::Index> per_class_counts;
    /// Fraction of rows whose classifier label differs from their cluster label.
    double misclassification_rate = 0.0;
};

/// L2 = 1 - sqrt(SSE / sum y^2), R2 = 1 - SSE / sum (y - mean)^2; undefined
/// values are left empty.
Metrics score_predictions(const Vector& y_true, const Vector& y_pred);
Metrics evaluate(const CcrModel& model, const Dataset& test);

nlohmann::json to_json(const Metrics& m);
/// Aligned two-line table (name, N, L2, R2, RMSE).
std::string metrics_table(const std::string& name, const Metrics& m);

nlohmann::json to_json(const CcrModel& model);
CcrModel ccr_model_from_json(const nlohmann::json& j);
void save_model(const CcrModel& model, const std::filesystem::path& path);
CcrModel load_model(const std::filesystem::path& path);

}  // namespace ccr
