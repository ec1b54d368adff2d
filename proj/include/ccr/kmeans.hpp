#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccr/common.hpp"

namespace ccr {

struct KMeansOptions {
    int restarts = 8;
    int max_iter = 300;
    std::uint64_t seed = 0;
    int threads = 0;  // 0: default_threads()
};

/// Result of a K-means fit. `labels` and `inertia_trace` describe the
/// training run; `centroids` alone define the label function.
struct ClusterModel {
    Matrix centroids;  // L x m
    double inertia = 0.0;
    Labels labels;
    /// Inertia measured after each assignment step of the winning restart.
    std::vector<double> inertia_trace;
    int iterations = 0;

    Eigen::Index num_clusters() const { return centroids.rows(); }
    Eigen::Index dim() const { return centroids.cols(); }
};

/// Lloyd's algorithm, best of `restarts` runs by inertia. Each run seeds one
/// centroid uniformly at random and the rest by greedy farthest point.
ClusterModel kmeans_fit(const Matrix& points, Eigen::Index clusters, const KMeansOptions& opts = {});

/// Lloyd's algorithm from the given initial centroids (single run).
ClusterModel kmeans_fit_from(const Matrix& points, const Matrix& initial, int max_iter = 300);

/// Nearest centroid per row; ties go to the lowest index.
Labels assign_labels(const ClusterModel& model, const Matrix& points);

/// Sum of squared distances from each point to the centroid it is labelled with.
double inertia(const Matrix& points, const Matrix& centroids, const Labels& labels);

struct ElbowReport {
    std::vector<int> candidate_L;
    std::vector<double> inertias;
    /// Second difference at L = 2..L_max-1, aligned with candidate_L[1..].
    std::vector<double> second_differences;
    int chosen_L = 1;
    /// False when the largest second difference is below 5% of I(1).
    bool clear_elbow = false;
};

/// Fits L = 1..L_max and picks the L with the largest second difference of
/// inertia. Runs for L > 1 also try the L-1 centroids plus the farthest point
/// as a start, so the inertia curve is non-increasing.
ElbowReport elbow_select(const Matrix& points, int L_max, const KMeansOptions& opts = {});

nlohmann::json to_json(const ElbowReport& report);
/// "L,inertia" rows.
std::string elbow_csv(const ElbowReport& report);

nlohmann::json to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

}  // namespace ccr
