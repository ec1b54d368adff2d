#include "ccr/learner.hpp"

#include <algorithm>
#include <cmath>

#include "ccr/forest.hpp"
#include "ccr/mlp.hpp"
#include "ccr/serialize.hpp"

namespace ccr {

LearnerKind parse_learner_kind(std::string_view name) {
    if (name == "mlp") return LearnerKind::mlp;
    if (name == "forest") return LearnerKind::forest;
    throw ConfigError("unknown learner kind '" + std::string(name) + "' (expected mlp or forest)");
}

const char* to_string(LearnerKind kind) { return kind == LearnerKind::mlp ? "mlp" : "forest"; }

void SoftClassifier::check_input(const Matrix& x) const {
    if (x.cols() != dim()) {
        throw DataError("classifier expects d=" + std::to_string(dim()) + ", got " + std::to_string(x.cols()));
    }
    if (!x.allFinite()) throw DataError("classifier input contains non-finite values");
}

Vector SoftClassifier::predict_proba(const Vector& x) const {
    return predict_proba(Matrix(x.transpose())).row(0).transpose();
}

Labels SoftClassifier::classify(const Matrix& x) const {
    Matrix p = predict_proba(x);
    Labels out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax(p.row(i));
    return out;
}

int SoftClassifier::classify(const Vector& x) const { return classify(Matrix(x.transpose()))[0]; }

void Regressor::check_input(const Matrix& x) const {
    if (x.cols() != dim()) {
        throw DataError("regressor expects d=" + std::to_string(dim()) + ", got " + std::to_string(x.cols()));
    }
    if (!x.allFinite()) throw DataError("regressor input contains non-finite values");
}

double Regressor::predict(const Vector& x) const { return predict(Matrix(x.transpose()))(0); }

Eigen::Index validate_labels(const Labels& labels, Eigen::Index rows) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        throw DataError("got " + std::to_string(rows) + " rows but " + std::to_string(labels.size()) + " labels");
    }
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw DataError("negative class label");
        max_label = std::max(max_label, l);
    }
    const Eigen::Index classes = max_label + 1;
    if (classes < 2) throw DataError("class count < 2");
    std::vector<bool> seen(static_cast<std::size_t>(classes), false);
    for (int l : labels) seen[static_cast<std::size_t>(l)] = true;
    for (Eigen::Index l = 0; l < classes; ++l) {
        if (!seen[static_cast<std::size_t>(l)]) throw DataError("class " + std::to_string(l) + " is absent from labels");
    }
    return classes;
}

int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    int best = 0;
    for (Eigen::Index c = 1; c < row.size(); ++c) {
        if (row(c) > row(best)) best = static_cast<int>(c);
    }
    return best;
}

ConstantClassifier::ConstantClassifier(Eigen::Index dim, Eigen::Index num_classes, int label)
    : dim_(dim), classes_(num_classes), label_(label) {
    if (dim < 1 || num_classes < 1 || label < 0 || label >= num_classes) {
        throw ConfigError("invalid constant classifier");
    }
}

Matrix ConstantClassifier::predict_proba(const Matrix& x) const {
    check_input(x);
    Matrix p = Matrix::Zero(x.rows(), classes_);
    p.col(label_).setOnes();
    return p;
}

nlohmann::json ConstantClassifier::to_json() const {
    return {{"kind", "constant_classifier"}, {"format_version", 1}, {"dim", dim_},
            {"num_classes", classes_},      {"label", label_}};
}

ConstantRegressor::ConstantRegressor(Eigen::Index dim, double value) : dim_(dim), value_(value) {
    if (dim < 1 || !std::isfinite(value)) throw ConfigError("invalid constant regressor");
}

Vector ConstantRegressor::predict(const Matrix& x) const {
    check_input(x);
    return Vector::Constant(x.rows(), value_);
}

nlohmann::json ConstantRegressor::to_json() const {
    return {{"kind", "constant_regressor"}, {"format_version", 1}, {"dim", dim_}, {"value", value_}};
}

ClassifierPtr classifier_from_json(const nlohmann::json& j) {
    const std::string kind = j.value("kind", std::string());
    if (kind == "mlp_classifier") return MlpClassifier::from_json(j);
    if (kind == "forest_classifier") return ForestClassifier::from_json(j);
    if (kind == "constant_classifier") {
        check_document(j, kind, 1);
        return std::make_shared<ConstantClassifier>(j.at("dim").get<Eigen::Index>(),
                                                    j.at("num_classes").get<Eigen::Index>(), j.at("label").get<int>());
    }
    throw DataError("unknown classifier kind '" + kind + "'");
}

RegressorPtr regressor_from_json(const nlohmann::json& j) {
    const std::string kind = j.value("kind", std::string());
    if (kind == "mlp_regressor") return MlpRegressor::from_json(j);
    if (kind == "forest_regressor") return ForestRegressor::from_json(j);
    if (kind == "constant_regressor") {
        check_document(j, kind, 1);
        return std::make_shared<ConstantRegressor>(j.at("dim").get<Eigen::Index>(), j.at("value").get<double>());
    }
    throw DataError("unknown regressor kind '" + kind + "'");
}

}  // namespace ccr
