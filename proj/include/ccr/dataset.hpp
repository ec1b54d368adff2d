#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "ccr/common.hpp"

namespace ccr {

/// N input/output pairs with x in R^d and scalar y.
///
/// The constructor enforces the container invariants: at least one row, d >= 1,
/// matching row counts, every entry finite. A default-constructed Dataset is
/// empty and only useful as a placeholder.
class Dataset {
public:
    Dataset() = default;
    Dataset(Matrix inputs, Vector outputs);

    const Matrix& inputs() const { return inputs_; }
    const Vector& outputs() const { return outputs_; }
    Eigen::Index size() const { return inputs_.rows(); }
    Eigen::Index dim() const { return inputs_.cols(); }
    bool empty() const { return inputs_.rows() == 0; }

    /// Rows selected by index, in the given order.
    Dataset subset(const std::vector<Eigen::Index>& rows) const;

private:
    Matrix inputs_;
    Vector outputs_;
};

enum class DataFormat { csv, json };

DataFormat parse_data_format(std::string_view name);
/// Picks csv/json from the file extension (defaults to csv).
DataFormat format_from_extension(const std::filesystem::path& path);

/// Parses CSV text whose rows hold d inputs followed by y. A leading row
/// containing any non-numeric token is treated as a header.
Dataset parse_csv(std::string_view text);
/// Parses {"inputs": [[...], ...], "outputs": [...]}.
Dataset parse_json(const nlohmann::json& doc);

Dataset load_dataset(const std::filesystem::path& path, DataFormat format);
void save_dataset(const Dataset& data, const std::filesystem::path& path, DataFormat format);

/// Reads a CSV of inputs only (d columns) or inputs plus y (d+1 columns, y
/// ignored). Used for prediction requests.
Matrix load_inputs(const std::filesystem::path& path, Eigen::Index dim);

/// Per-coordinate min/range affine map. Inputs map onto [0,1], the output onto
/// [0, amplification] over the fitting data; points outside the fitting range
/// extrapolate linearly.
class ScalingTransform {
public:
    ScalingTransform() = default;
    ScalingTransform(Vector x_min, Vector x_range, double y_min, double y_range, double amplification);

    const Vector& x_min() const { return x_min_; }
    const Vector& x_range() const { return x_range_; }
    double y_min() const { return y_min_; }
    double y_range() const { return y_range_; }
    double amplification() const { return amplification_; }
    Eigen::Index dim() const { return x_min_.size(); }

    Matrix scale_inputs(const Matrix& x) const;
    Vector scale_input(const Vector& x) const;
    Vector scale_outputs(const Vector& y) const;
    Matrix unscale_inputs(const Matrix& x_scaled) const;
    Vector unscale_outputs(const Vector& y_scaled) const;

    /// Joint points z = (x~, y~), one row per sample, for clustering.
    Matrix joint(const Dataset& data) const;

private:
    void check_dim(Eigen::Index d) const;

    Vector x_min_;
    Vector x_range_;
    double y_min_ = 0.0;
    double y_range_ = 1.0;
    double amplification_ = 1.0;
};

ScalingTransform fit_scaling(const Dataset& data, double amplification);
/// Scales the inputs, and the output too when scale_output is set.
Dataset apply_scaling(const ScalingTransform& t, const Dataset& data, bool scale_output);
/// Exact inverse of apply_scaling.
Dataset invert_scaling(const ScalingTransform& t, const Dataset& data, bool scale_output);

nlohmann::json to_json(const ScalingTransform& t);
ScalingTransform scaling_from_json(const nlohmann::json& j);

struct SplitSpec {
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

/// Seeded random partition into (train, test); test size is round(N * fraction).
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

}  // namespace ccr
