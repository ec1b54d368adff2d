#include "ccr/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ccr/serialize.hpp"

namespace ccr {

namespace {

// Seed streams for the sub-models of one fit.
constexpr std::uint64_t kClusterStream = 1;
constexpr std::uint64_t kClassifierStream = 2;
constexpr std::uint64_t kRegressorStream = 100;

std::vector<std::vector<Eigen::Index>> group_rows(const Labels& labels, Eigen::Index classes) {
    std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        rows[static_cast<std::size_t>(labels[i])].push_back(static_cast<Eigen::Index>(i));
    }
    return rows;
}

nlohmann::json kmeans_json(const KMeansOptions& o) {
    return {{"restarts", o.restarts}, {"max_iter", o.max_iter}};
}

}  // namespace

void CcrConfig::validate() const {
    if (amplification_cluster && !(*amplification_cluster >= 1.0 && std::isfinite(*amplification_cluster))) {
        throw ConfigError("cluster amplification must be a finite number >= 1");
    }
    if (clusters && *clusters < 1) throw ConfigError("number of clusters must be >= 1");
    if (elbow_max < 3) throw ConfigError("elbow_max must be >= 3");
    if (kmeans.restarts < 1 || kmeans.max_iter < 1) throw ConfigError("k-means restarts and max_iter must be >= 1");
    classifier_mlp.validate();
    regressor_mlp.validate();
    classifier_forest.validate();
    regressor_forest.validate();
}

nlohmann::json to_json(const CcrConfig& c) {
    nlohmann::json j;
    j["amplification_cluster"] = c.amplification_cluster ? nlohmann::json(*c.amplification_cluster) : nlohmann::json();
    j["clusters"] = c.clusters ? nlohmann::json(*c.clusters) : nlohmann::json();
    j["elbow_max"] = c.elbow_max;
    j["classifier"] = to_string(c.classifier_kind);
    j["regressor"] = to_string(c.regressor_kind);
    j["classifier_mlp"] = to_json(c.classifier_mlp);
    j["regressor_mlp"] = to_json(c.regressor_mlp);
    j["classifier_forest"] = to_json(c.classifier_forest);
    j["regressor_forest"] = to_json(c.regressor_forest);
    j["kmeans"] = kmeans_json(c.kmeans);
    j["seed"] = c.seed;
    return j;
}

CcrConfig ccr_config_from_json(const nlohmann::json& j, CcrConfig c) {
    if (!j.is_object()) throw ConfigError("CCR config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "amplification_cluster") {
            c.amplification_cluster = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
        } else if (key == "clusters") {
            c.clusters = value.is_null() ? std::nullopt : std::optional<int>(value.get<int>());
        } else if (key == "elbow_max") {
            c.elbow_max = value.get<int>();
        } else if (key == "classifier") {
            c.classifier_kind = parse_learner_kind(value.get<std::string>());
        } else if (key == "regressor") {
            c.regressor_kind = parse_learner_kind(value.get<std::string>());
        } else if (key == "classifier_mlp") {
            c.classifier_mlp = mlp_config_from_json(value, c.classifier_mlp);
        } else if (key == "regressor_mlp") {
            c.regressor_mlp = mlp_config_from_json(value, c.regressor_mlp);
        } else if (key == "classifier_forest") {
            c.classifier_forest = forest_config_from_json(value, c.classifier_forest);
        } else if (key == "regressor_forest") {
            c.regressor_forest = forest_config_from_json(value, c.regressor_forest);
        } else if (key == "kmeans") {
            c.kmeans.restarts = value.value("restarts", c.kmeans.restarts);
            c.kmeans.max_iter = value.value("max_iter", c.kmeans.max_iter);
        } else if (key == "seed") {
            c.seed = value.get<std::uint64_t>();
        } else if (key == "threads") {
            c.threads = value.get<int>();
        } else {
            throw ConfigError("unknown CCR config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

Matrix CcrModel::predict_proba(const Matrix& x) const {
    return classifier->predict_proba(scaler.scale_inputs(x));
}

Labels CcrModel::classify(const Matrix& x) const { return classifier->classify(scaler.scale_inputs(x)); }

Vector CcrModel::predict(const Matrix& x) const { return predict_with_labels(x, classify(x)); }

Vector CcrModel::predict_with_labels(const Matrix& x, const Labels& labels) const {
    if (x.cols() != dim()) {
        throw DataError("model expects d=" + std::to_string(dim()) + ", got " + std::to_string(x.cols()));
    }
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw DataError("one label per row required");
    Vector out(x.rows());
    auto groups = group_rows(labels, num_classes());
    for (std::size_t l = 0; l < groups.size(); ++l) {
        if (groups[l].empty()) continue;
        Vector part = regressors[l]->predict(Matrix(x(groups[l], Eigen::all)));
        for (std::size_t k = 0; k < groups[l].size(); ++k) out(groups[l][k]) = part(static_cast<Eigen::Index>(k));
    }
    return out;
}

Labels CcrModel::cluster_labels(const Dataset& data) const { return assign_labels(cluster, scaler.joint(data)); }

ScaledClassifier::ScaledClassifier(ScalingTransform scaler, ClassifierPtr inner)
    : scaler_(std::move(scaler)), inner_(std::move(inner)) {}

Matrix ScaledClassifier::predict_proba(const Matrix& x) const {
    check_input(x);
    return inner_->predict_proba(scaler_.scale_inputs(x));
}

nlohmann::json ScaledClassifier::to_json() const {
    return {{"kind", "scaled_classifier"}, {"scaler", ccr::to_json(scaler_)}, {"inner", inner_->to_json()}};
}

ClassifierPtr raw_input_classifier(const CcrModel& model) {
    return std::make_shared<ScaledClassifier>(model.scaler, model.classifier);
}

CcrModel ccr_fit(const Dataset& data, const CcrConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw DataError("cannot fit on an empty dataset");
    const Eigen::Index n = data.size();
    const Eigen::Index d = data.dim();
    if (n < 10) throw DataError("CCR needs at least 10 training rows, got " + std::to_string(n));

    CcrModel model;
    model.config = cfg;
    model.scaler = fit_scaling(data, cfg.amplification_cluster.value_or(10.0 * static_cast<double>(d)));

    // (I) cluster the joint scaled points.
    const Matrix z = model.scaler.joint(data);
    KMeansOptions km = cfg.kmeans;
    km.seed = derive_seed(cfg.seed, kClusterStream);
    km.threads = cfg.threads;
    Eigen::Index L = 0;
    if (cfg.clusters) {
        L = *cfg.clusters;
    } else {
        model.elbow = elbow_select(z, static_cast<int>(std::min<Eigen::Index>(cfg.elbow_max, n)), km);
        L = model.elbow->clear_elbow ? model.elbow->chosen_L : 1;
        if (!model.elbow->clear_elbow) warn("no clear elbow in the inertia curve; using a single cluster");
    }
    if (n < 2 * L) {
        throw DataError("CCR needs N >= 2L training rows (N=" + std::to_string(n) + ", L=" + std::to_string(L) + ")");
    }
    model.cluster = kmeans_fit(z, L, km);

    // (II) classify scaled inputs onto cluster labels; y is not used here.
    const Matrix xs = model.scaler.scale_inputs(data.inputs());
    if (L == 1) {
        model.classifier = std::make_shared<ConstantClassifier>(d, 1, 0);
    } else if (cfg.classifier_kind == LearnerKind::mlp) {
        MlpConfig c = cfg.classifier_mlp;
        c.seed = derive_seed(cfg.seed, kClassifierStream);
        model.classifier = fit_classifier(xs, model.cluster.labels, c);
    } else {
        ForestConfig c = cfg.classifier_forest;
        c.seed = derive_seed(cfg.seed, kClassifierStream);
        c.threads = cfg.threads;
        model.classifier = fit_forest_classifier(xs, model.cluster.labels, c);
    }

    // (III) one regressor per class, on raw x and y, over the rows the
    // classifier assigns to that class.
    const Labels dispatched = model.classifier->classify(xs);
    const auto groups = group_rows(dispatched, L);
    model.regressors.resize(static_cast<std::size_t>(L));
    model.class_sizes.resize(static_cast<std::size_t>(L));
    const double global_mean = data.outputs().mean();
    parallel_for(
        static_cast<std::size_t>(L),
        [&](std::size_t l) {
            const auto& rows = groups[l];
            model.class_sizes[l] = static_cast<Eigen::Index>(rows.size());
            const std::uint64_t seed = derive_seed(cfg.seed, kRegressorStream + l);
            if (rows.size() < 2) {
                double value = rows.empty() ? global_mean : data.outputs()(rows[0]);
                warn("class " + std::to_string(l) + " has " + std::to_string(rows.size()) +
                     " training rows; using a constant regressor");
                model.regressors[l] = std::make_shared<ConstantRegressor>(d, value);
                return;
            }
            const Matrix x = data.inputs()(rows, Eigen::all);
            const Vector y = data.outputs()(rows);
            if (cfg.regressor_kind == LearnerKind::mlp) {
                MlpConfig c = cfg.regressor_mlp;
                c.seed = seed;
                model.regressors[l] = fit_regressor(x, y, c);
            } else {
                ForestConfig c = cfg.regressor_forest;
                c.seed = seed;
                c.threads = L > 1 ? 1 : cfg.threads;
                model.regressors[l] = fit_forest_regressor(x, y, c);
            }
        },
        cfg.threads);
    return model;
}

Vector ccr_predict(const CcrModel& model, const Matrix& x) { return model.predict(x); }

Metrics score_predictions(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() < 1) throw DataError("cannot score an empty set");
    if (y_true.size() != y_pred.size()) throw DataError("prediction and truth lengths differ");
    Metrics m;
    m.n = y_true.size();
    const Vector r = y_pred - y_true;
    const double sse = r.squaredNorm();
    const double sum_sq = y_true.squaredNorm();
    const double var = (y_true.array() - y_true.mean()).square().sum();
    if (sum_sq > 0.0) m.l2 = 1.0 - std::sqrt(sse / sum_sq);
    if (var > 0.0) m.r2 = 1.0 - sse / var;
    m.rmse = std::sqrt(sse / static_cast<double>(m.n));
    m.max_abs_error = r.cwiseAbs().maxCoeff();
    return m;
}

Metrics evaluate(const CcrModel& model, const Dataset& test) {
    if (test.empty()) throw DataError("test set is empty");
    const Labels labels = model.classify(test.inputs());
    Metrics m = score_predictions(test.outputs(), model.predict_with_labels(test.inputs(), labels));
    m.per_class_counts.assign(static_cast<std::size_t>(model.num_classes()), 0);
    for (int l : labels) ++m.per_class_counts[static_cast<std::size_t>(l)];
    const Labels truth = model.cluster_labels(test);
    Eigen::Index wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) wrong += labels[i] != truth[i];
    m.misclassification_rate = static_cast<double>(wrong) / static_cast<double>(labels.size());
    return m;
}

nlohmann::json to_json(const Metrics& m) {
    return {{"n", m.n},
            {"l2", m.l2 ? nlohmann::json(*m.l2) : nlohmann::json()},
            {"r2", m.r2 ? nlohmann::json(*m.r2) : nlohmann::json()},
            {"rmse", m.rmse},
            {"max_abs_error", m.max_abs_error},
            {"per_class_counts", m.per_class_counts},
            {"misclassification_rate", m.misclassification_rate}};
}

std::string metrics_table(const std::string& name, const Metrics& m) {
    auto cell = [](const std::optional<double>& v) {
        std::ostringstream os;
        if (v) os << std::fixed << std::setprecision(4) << *v;
        else os << "n/a";
        return os.str();
    };
    std::ostringstream os;
    os << std::left << std::setw(16) << "name" << std::right << std::setw(8) << "N" << std::setw(10) << "L2"
       << std::setw(10) << "R2" << std::setw(12) << "RMSE" << '\n';
    os << std::left << std::setw(16) << name << std::right << std::setw(8) << m.n << std::setw(10) << cell(m.l2)
       << std::setw(10) << cell(m.r2) << std::setw(12) << std::setprecision(4) << std::scientific << m.rmse << '\n';
    return os.str();
}

nlohmann::json to_json(const CcrModel& model) {
    nlohmann::json j;
    j["kind"] = "ccr_model";
    j["format_version"] = 1;
    j["config"] = to_json(model.config);
    j["scaler"] = to_json(model.scaler);
    j["cluster"] = to_json(model.cluster);
    j["classifier"] = model.classifier->to_json();
    j["regressors"] = nlohmann::json::array();
    for (const auto& r : model.regressors) j["regressors"].push_back(r->to_json());
    j["class_sizes"] = model.class_sizes;
    if (model.elbow) j["elbow"] = to_json(*model.elbow);
    return j;
}

CcrModel ccr_model_from_json(const nlohmann::json& j) {
    check_document(j, "ccr_model", 1);
    CcrModel m;
    try {
        m.config = ccr_config_from_json(j.at("config"));
        m.scaler = scaling_from_json(j.at("scaler"));
        m.cluster = cluster_model_from_json(j.at("cluster"));
        m.classifier = classifier_from_json(j.at("classifier"));
        for (const auto& r : j.at("regressors")) m.regressors.push_back(regressor_from_json(r));
        m.class_sizes = j.value("class_sizes", std::vector<Eigen::Index>{});
        if (j.contains("elbow")) {
            const auto& e = j.at("elbow");
            ElbowReport rep;
            rep.candidate_L = e.at("candidate_L").get<std::vector<int>>();
            rep.inertias = e.at("inertias").get<std::vector<double>>();
            rep.second_differences = e.at("second_differences").get<std::vector<double>>();
            rep.chosen_L = e.at("chosen_L").get<int>();
            rep.clear_elbow = e.at("clear_elbow").get<bool>();
            m.elbow = rep;
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model document: ") + e.what());
    }
    if (m.classifier->num_classes() != m.num_classes()) {
        throw DataError("model has " + std::to_string(m.num_classes()) + " regressors but the classifier has " +
                        std::to_string(m.classifier->num_classes()) + " classes");
    }
    if (m.classifier->dim() != m.dim()) throw DataError("classifier dimension does not match the scaler");
    for (const auto& r : m.regressors) {
        if (r->dim() != m.dim()) throw DataError("regressor dimension does not match the scaler");
    }
    return m;
}

void save_model(const CcrModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file " + path.string());
    out << to_json(model).dump() << '\n';
}

CcrModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    return ccr_model_from_json(j);
}

}  // namespace ccr
