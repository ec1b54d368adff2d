#include "ccr/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ccr/serialize.hpp"

namespace ccr {

namespace {

struct Task {
    int node;
    std::size_t begin;
    std::size_t end;
};

// Grows one CART tree over the (possibly repeated) row indices in `rows`.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const int* labels, const double* y, int classes, Eigen::Index mtry, int min_leaf,
                std::uint64_t seed)
        : x_(x), labels_(labels), y_(y), classes_(classes), mtry_(mtry), min_leaf_(min_leaf), rng_(seed) {
        tree_.width = labels_ ? classes_ : 1;
    }

    Tree build(std::vector<Eigen::Index> rows) {
        rows_ = std::move(rows);
        features_.resize(static_cast<std::size_t>(x_.cols()));
        std::iota(features_.begin(), features_.end(), 0);
        std::vector<Task> stack{{new_node(0, rows_.size()), 0, rows_.size()}};
        while (!stack.empty()) {
            Task t = stack.back();
            stack.pop_back();
            split_node(t, stack);
        }
        return std::move(tree_);
    }

private:
    int new_node(std::size_t begin, std::size_t end) {
        int id = static_cast<int>(tree_.feature.size());
        tree_.feature.push_back(-1);
        tree_.threshold.push_back(0.0);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        const double n = static_cast<double>(end - begin);
        if (labels_) {
            std::vector<double> freq(static_cast<std::size_t>(classes_), 0.0);
            for (std::size_t k = begin; k < end; ++k) freq[static_cast<std::size_t>(labels_[rows_[k]])] += 1.0;
            for (double f : freq) tree_.values.push_back(f / n);
        } else {
            double sum = 0.0;
            for (std::size_t k = begin; k < end; ++k) sum += y_[rows_[k]];
            tree_.values.push_back(sum / n);
        }
        return id;
    }

    bool pure(std::size_t begin, std::size_t end) const {
        for (std::size_t k = begin + 1; k < end; ++k) {
            if (labels_ ? labels_[rows_[k]] != labels_[rows_[begin]] : y_[rows_[k]] != y_[rows_[begin]]) return false;
        }
        return true;
    }

    void split_node(const Task& t, std::vector<Task>& stack) {
        const std::size_t n = t.end - t.begin;
        if (n < 2 * static_cast<std::size_t>(min_leaf_) || pure(t.begin, t.end)) return;

        // Candidate features in a fresh random order; constant ones do not
        // count towards the mtry budget.
        int best_feature = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        double best_threshold = 0.0;
        Eigen::Index evaluated = 0;
        std::vector<std::pair<double, Eigen::Index>> sorted(n);
        for (std::size_t f = 0; f < features_.size() && evaluated < mtry_; ++f) {
            std::uniform_int_distribution<std::size_t> pick(f, features_.size() - 1);
            std::swap(features_[f], features_[pick(rng_)]);
            const int feat = features_[f];
            for (std::size_t k = 0; k < n; ++k) {
                Eigen::Index r = rows_[t.begin + k];
                sorted[k] = {x_(r, feat), r};
            }
            std::sort(sorted.begin(), sorted.end());
            if (sorted.front().first == sorted.back().first) continue;
            ++evaluated;
            double score = 0.0;
            std::size_t pos = 0;
            if (scan(sorted, score, pos) && score > best_score) {
                best_score = score;
                best_feature = feat;
                const double lo = sorted[pos - 1].first;
                const double hi = sorted[pos].first;
                best_threshold = 0.5 * (lo + hi);
                if (!(best_threshold < hi)) best_threshold = lo;
            }
        }
        if (best_feature < 0) return;

        auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                  rows_.begin() + static_cast<std::ptrdiff_t>(t.end),
                                  [&](Eigen::Index r) { return x_(r, best_feature) <= best_threshold; });
        const auto split = static_cast<std::size_t>(mid - rows_.begin());
        const int left = new_node(t.begin, split);
        const int right = new_node(split, t.end);
        auto node = static_cast<std::size_t>(t.node);
        tree_.feature[node] = best_feature;
        tree_.threshold[node] = best_threshold;
        tree_.left[node] = left;
        tree_.right[node] = right;
        stack.push_back({right, split, t.end});
        stack.push_back({left, t.begin, split});
    }

    // Best split position over sorted values. The score is the impurity proxy
    // to maximize: sum_c n_c^2 / n per side for Gini, sum^2 / n per side for
    // variance. Returns false when no position respects min_leaf.
    bool scan(const std::vector<std::pair<double, Eigen::Index>>& sorted, double& best, std::size_t& best_pos) const {
        const std::size_t n = sorted.size();
        const auto leaf = static_cast<std::size_t>(min_leaf_);
        bool found = false;
        if (labels_) {
            std::vector<double> left(static_cast<std::size_t>(classes_), 0.0);
            std::vector<double> right(static_cast<std::size_t>(classes_), 0.0);
            for (const auto& s : sorted) right[static_cast<std::size_t>(labels_[s.second])] += 1.0;
            double left_sq = 0.0;
            double right_sq = 0.0;
            for (double c : right) right_sq += c * c;
            for (std::size_t i = 1; i < n; ++i) {
                const auto c = static_cast<std::size_t>(labels_[sorted[i - 1].second]);
                left_sq += 2.0 * left[c] + 1.0;
                right_sq -= 2.0 * right[c] - 1.0;
                left[c] += 1.0;
                right[c] -= 1.0;
                if (i < leaf || n - i < leaf || sorted[i - 1].first == sorted[i].first) continue;
                double score = left_sq / static_cast<double>(i) + right_sq / static_cast<double>(n - i);
                if (!found || score > best) {
                    best = score;
                    best_pos = i;
                    found = true;
                }
            }
        } else {
            double total = 0.0;
            for (const auto& s : sorted) total += y_[s.second];
            double left_sum = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                left_sum += y_[sorted[i - 1].second];
                if (i < leaf || n - i < leaf || sorted[i - 1].first == sorted[i].first) continue;
                double right_sum = total - left_sum;
                double score = left_sum * left_sum / static_cast<double>(i) +
                               right_sum * right_sum / static_cast<double>(n - i);
                if (!found || score > best) {
                    best = score;
                    best_pos = i;
                    found = true;
                }
            }
        }
        return found;
    }

    const Matrix& x_;
    const int* labels_;
    const double* y_;
    int classes_;
    Eigen::Index mtry_;
    int min_leaf_;
    std::mt19937_64 rng_;
    std::vector<Eigen::Index> rows_;
    std::vector<int> features_;
    Tree tree_;
};

std::vector<Tree> grow(const Matrix& x, const int* labels, const double* y, int classes, const ForestConfig& cfg) {
    const Eigen::Index n = x.rows();
    const Eigen::Index mtry = cfg.resolved_features(x.cols());
    std::vector<Tree> trees(static_cast<std::size_t>(cfg.num_trees));
    parallel_for(
        trees.size(),
        [&](std::size_t t) {
            const std::uint64_t seed = derive_seed(cfg.seed, t);
            std::mt19937_64 rng(seed);
            std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
            if (cfg.bootstrap) {
                std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
                for (auto& r : rows) r = pick(rng);
            } else {
                std::iota(rows.begin(), rows.end(), Eigen::Index{0});
            }
            TreeBuilder b(x, labels, y, classes, mtry, cfg.min_leaf, rng());
            trees[t] = b.build(std::move(rows));
        },
        cfg.threads);
    return trees;
}

void check_forest_input(const Matrix& x) {
    if (x.rows() < 1 || x.cols() < 1) throw DataError("forest needs a non-empty input matrix");
    if (!x.allFinite()) throw DataError("forest input contains non-finite values");
}

std::vector<Tree> trees_from_json(const nlohmann::json& j) {
    std::vector<Tree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(Tree::from_json(t));
    return trees;
}

nlohmann::json trees_to_json(const std::vector<Tree>& trees) {
    auto arr = nlohmann::json::array();
    for (const auto& t : trees) arr.push_back(t.to_json());
    return arr;
}

}  // namespace

void ForestConfig::validate() const {
    if (num_trees < 1) throw ConfigError("num_trees must be >= 1");
    if (features_per_split < 0) throw ConfigError("features_per_split must be >= 1 (or 0 for ceil(d/3))");
    if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
}

Eigen::Index ForestConfig::resolved_features(Eigen::Index d) const {
    if (features_per_split == 0) return (d + 2) / 3;
    if (features_per_split > d) {
        throw ConfigError("features_per_split (" + std::to_string(features_per_split) + ") exceeds d=" +
                          std::to_string(d));
    }
    return features_per_split;
}

nlohmann::json to_json(const ForestConfig& c) {
    return {{"num_trees", c.num_trees},
            {"features_per_split", c.features_per_split},
            {"min_leaf", c.min_leaf},
            {"bootstrap", c.bootstrap},
            {"seed", c.seed}};
}

ForestConfig forest_config_from_json(const nlohmann::json& j, ForestConfig c) {
    if (!j.is_object()) throw ConfigError("forest config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "num_trees") c.num_trees = value.get<int>();
        else if (key == "features_per_split") c.features_per_split = value.get<int>();
        else if (key == "min_leaf") c.min_leaf = value.get<int>();
        else if (key == "bootstrap") c.bootstrap = value.get<bool>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "threads") c.threads = value.get<int>();
        else throw ConfigError("unknown forest config key '" + key + "'");
    }
    c.validate();
    return c;
}

const double* Tree::leaf(const double* x, Eigen::Index stride) const {
    std::size_t node = 0;
    while (feature[node] >= 0) {
        node = static_cast<std::size_t>(x[feature[node] * stride] <= threshold[node] ? left[node] : right[node]);
    }
    return values.data() + node * static_cast<std::size_t>(width);
}

nlohmann::json Tree::to_json() const {
    return {{"feature", feature}, {"threshold", threshold}, {"left", left},
            {"right", right},     {"values", values},       {"width", width}};
}

Tree Tree::from_json(const nlohmann::json& j) {
    Tree t;
    t.feature = j.at("feature").get<std::vector<int>>();
    t.threshold = j.at("threshold").get<std::vector<double>>();
    t.left = j.at("left").get<std::vector<int>>();
    t.right = j.at("right").get<std::vector<int>>();
    t.values = j.at("values").get<std::vector<double>>();
    t.width = j.at("width").get<int>();
    const std::size_t n = t.feature.size();
    if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
        t.values.size() != n * static_cast<std::size_t>(t.width)) {
        throw DataError("malformed tree node arrays");
    }
    return t;
}

ForestClassifier::ForestClassifier(std::vector<Tree> trees, Eigen::Index dim, Eigen::Index num_classes,
                                   ForestConfig cfg)
    : trees_(std::move(trees)), dim_(dim), classes_(num_classes), cfg_(cfg) {}

Matrix ForestClassifier::predict_proba(const Matrix& x) const {
    check_input(x);
    Matrix p = Matrix::Zero(x.rows(), classes_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (const auto& t : trees_) {
            const double* v = t.leaf(&x(i, 0), x.rows());
            for (Eigen::Index c = 0; c < classes_; ++c) p(i, c) += v[c];
        }
    }
    return p / static_cast<double>(trees_.size());
}

nlohmann::json ForestClassifier::to_json() const {
    return {{"kind", "forest_classifier"}, {"format_version", 1},   {"config", ccr::to_json(cfg_)},
            {"dim", dim_},                 {"num_classes", classes_}, {"trees", trees_to_json(trees_)}};
}

std::shared_ptr<ForestClassifier> ForestClassifier::from_json(const nlohmann::json& j) {
    check_document(j, "forest_classifier", 1);
    return std::make_shared<ForestClassifier>(trees_from_json(j), j.at("dim").get<Eigen::Index>(),
                                              j.at("num_classes").get<Eigen::Index>(),
                                              forest_config_from_json(j.at("config")));
}

ForestRegressor::ForestRegressor(std::vector<Tree> trees, Eigen::Index dim, ForestConfig cfg)
    : trees_(std::move(trees)), dim_(dim), cfg_(cfg) {}

Vector ForestRegressor::predict(const Matrix& x) const {
    check_input(x);
    Vector out = Vector::Zero(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (const auto& t : trees_) out(i) += *t.leaf(&x(i, 0), x.rows());
    }
    return out / static_cast<double>(trees_.size());
}

nlohmann::json ForestRegressor::to_json() const {
    return {{"kind", "forest_regressor"}, {"format_version", 1}, {"config", ccr::to_json(cfg_)},
            {"dim", dim_},                {"trees", trees_to_json(trees_)}};
}

std::shared_ptr<ForestRegressor> ForestRegressor::from_json(const nlohmann::json& j) {
    check_document(j, "forest_regressor", 1);
    return std::make_shared<ForestRegressor>(trees_from_json(j), j.at("dim").get<Eigen::Index>(),
                                             forest_config_from_json(j.at("config")));
}

std::shared_ptr<ForestClassifier> fit_forest_classifier(const Matrix& x, const Labels& labels,
                                                        const ForestConfig& cfg) {
    cfg.validate();
    check_forest_input(x);
    const Eigen::Index classes = validate_labels(labels, x.rows());
    auto trees = grow(x, labels.data(), nullptr, static_cast<int>(classes), cfg);
    return std::make_shared<ForestClassifier>(std::move(trees), x.cols(), classes, cfg);
}

std::shared_ptr<ForestRegressor> fit_forest_regressor(const Matrix& x, const Vector& y, const ForestConfig& cfg) {
    cfg.validate();
    check_forest_input(x);
    if (x.rows() < 2) throw DataError("regressor needs at least 2 rows, got " + std::to_string(x.rows()));
    if (x.rows() != y.size()) {
        throw DataError("regressor got " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) +
                        " targets");
    }
    if (!y.allFinite()) throw DataError("regressor targets contain non-finite values");
    auto trees = grow(x, nullptr, y.data(), 1, cfg);
    return std::make_shared<ForestRegressor>(std::move(trees), x.cols(), cfg);
}

}  // namespace ccr
