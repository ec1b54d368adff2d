#include "ccr/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace ccr {

namespace {

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_number(std::string_view token, double& value) {
    if (token.empty()) return false;
    std::string buf(token);
    char* end = nullptr;
    errno = 0;
    value = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size();
}

std::string format_value(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

Dataset::Dataset(Matrix inputs, Vector outputs) : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
    if (inputs_.rows() < 1) throw DataError("dataset must contain at least one row");
    if (inputs_.cols() < 1) throw DataError("dataset input dimension must be at least 1");
    if (inputs_.rows() != outputs_.size()) {
        throw DataError("dataset has " + std::to_string(inputs_.rows()) + " input rows but " +
                        std::to_string(outputs_.size()) + " outputs");
    }
    for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
        for (Eigen::Index j = 0; j < inputs_.cols(); ++j) {
            if (!std::isfinite(inputs_(i, j))) {
                throw DataError("non-finite input at row " + std::to_string(i + 1) + ", column " +
                                std::to_string(j + 1));
            }
        }
        if (!std::isfinite(outputs_(i))) throw DataError("non-finite output at row " + std::to_string(i + 1));
    }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Matrix x(static_cast<Eigen::Index>(rows.size()), dim());
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        x.row(static_cast<Eigen::Index>(k)) = inputs_.row(rows[k]);
        y(static_cast<Eigen::Index>(k)) = outputs_(rows[k]);
    }
    return Dataset(std::move(x), std::move(y));
}

DataFormat parse_data_format(std::string_view name) {
    if (name == "csv") return DataFormat::csv;
    if (name == "json") return DataFormat::json;
    throw ConfigError("unknown data format '" + std::string(name) + "' (expected csv or json)");
}

DataFormat format_from_extension(const std::filesystem::path& path) {
    return path.extension() == ".json" ? DataFormat::json : DataFormat::csv;
}

Dataset parse_csv(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::size_t columns = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_content_line = true;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;

        auto fields = split_fields(line);
        std::vector<double> values(fields.size());
        std::size_t bad = fields.size();
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (!parse_number(fields[j], values[j])) {
                bad = j;
                break;
            }
        }
        if (first_content_line) {
            first_content_line = false;
            if (bad != fields.size()) {
                columns = fields.size();
                continue;  // header row
            }
        }
        if (bad != fields.size()) {
            throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(fields[bad]) +
                            "' in column " + std::to_string(bad + 1) + " as a number");
        }
        if (columns == 0) columns = fields.size();
        if (fields.size() != columns) {
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                            " columns, found " + std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (!std::isfinite(values[j])) {
                throw DataError("line " + std::to_string(line_no) + " (row " + std::to_string(rows.size() + 1) +
                                "), column " + std::to_string(j + 1) + ": non-finite value '" +
                                std::string(fields[j]) + "'");
            }
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw DataError("no data rows");
    if (columns < 2) throw DataError("need at least 2 columns (inputs followed by y), found " + std::to_string(columns));

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(columns - 1);
    Matrix x(n, d);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        y(i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
    }
    return Dataset(std::move(x), std::move(y));
}

Dataset parse_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("inputs") || !doc.contains("outputs")) {
        throw DataError("JSON dataset must be an object with \"inputs\" and \"outputs\"");
    }
    const auto& in = doc.at("inputs");
    const auto& out = doc.at("outputs");
    if (!in.is_array() || !out.is_array()) throw DataError("\"inputs\" and \"outputs\" must be arrays");
    if (in.empty()) throw DataError("no data rows");
    if (in.size() != out.size()) {
        throw DataError("JSON dataset has " + std::to_string(in.size()) + " input rows but " +
                        std::to_string(out.size()) + " outputs");
    }
    const std::size_t d = in.at(0).is_array() ? in.at(0).size() : 0;
    Matrix x(static_cast<Eigen::Index>(in.size()), static_cast<Eigen::Index>(d));
    Vector y(static_cast<Eigen::Index>(in.size()));
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto& row = in[i];
        if (!row.is_array() || row.size() != d) {
            throw DataError("inputs row " + std::to_string(i + 1) + ": expected " + std::to_string(d) + " values");
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (!row[j].is_number()) {
                throw DataError("inputs row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1) +
                                ": not a number");
            }
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
        if (!out[i].is_number()) throw DataError("outputs entry " + std::to_string(i + 1) + ": not a number");
        y(static_cast<Eigen::Index>(i)) = out[i].get<double>();
    }
    return Dataset(std::move(x), std::move(y));
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        if (format == DataFormat::csv) return parse_csv(buf.str());
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(buf.str());
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(std::string("invalid JSON: ") + e.what());
        }
        return parse_json(doc);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, DataFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset file " + path.string());
    if (format == DataFormat::csv) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
        out << "y\n";
        for (Eigen::Index i = 0; i < data.size(); ++i) {
            for (Eigen::Index j = 0; j < data.dim(); ++j) out << format_value(data.inputs()(i, j)) << ',';
            out << format_value(data.outputs()(i)) << '\n';
        }
        return;
    }
    nlohmann::json doc;
    doc["inputs"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < data.dim(); ++j) row.push_back(data.inputs()(i, j));
        doc["inputs"].push_back(std::move(row));
    }
    doc["outputs"] = std::vector<double>(data.outputs().data(), data.outputs().data() + data.size());
    out << doc.dump() << '\n';
}

Matrix load_inputs(const std::filesystem::path& path, Eigen::Index dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    // Reuse the dataset parser by appending a dummy y column when only inputs are given.
    std::string text = buf.str();
    std::string first;
    {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (!trim(line).empty()) {
                first = std::string(trim(line));
                break;
            }
        }
    }
    if (first.empty()) throw DataError(path.string() + ": no data rows");
    const auto cols = static_cast<Eigen::Index>(split_fields(first).size());
    if (cols == dim + 1) return parse_csv(text).inputs();
    if (cols != dim) {
        throw DataError(path.string() + ": expected " + std::to_string(dim) + " or " + std::to_string(dim + 1) +
                        " columns, found " + std::to_string(cols));
    }
    std::string padded;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        auto t = trim(line);
        if (t.empty()) continue;
        padded.append(t);
        padded.append(",0\n");
    }
    try {
        return parse_csv(padded).inputs();
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

ScalingTransform::ScalingTransform(Vector x_min, Vector x_range, double y_min, double y_range, double amplification)
    : x_min_(std::move(x_min)), x_range_(std::move(x_range)), y_min_(y_min), y_range_(y_range),
      amplification_(amplification) {
    if (x_min_.size() != x_range_.size() || x_min_.size() < 1) throw ConfigError("scaling transform shape mismatch");
    for (Eigen::Index j = 0; j < x_range_.size(); ++j) {
        if (!(x_range_(j) > 0.0)) throw ConfigError("scaling range must be positive in dimension " + std::to_string(j + 1));
    }
    if (!(y_range_ > 0.0)) throw ConfigError("scaling output range must be positive");
    if (!(amplification_ > 0.0)) throw ConfigError("amplification must be positive");
}

void ScalingTransform::check_dim(Eigen::Index d) const {
    if (d != dim()) {
        throw DataError("dimension mismatch: transform has d=" + std::to_string(dim()) + ", data has d=" +
                        std::to_string(d));
    }
}

Matrix ScalingTransform::scale_inputs(const Matrix& x) const {
    check_dim(x.cols());
    return (x.rowwise() - x_min_.transpose()).array().rowwise() / x_range_.transpose().array();
}

Vector ScalingTransform::scale_input(const Vector& x) const {
    check_dim(x.size());
    return ((x - x_min_).array() / x_range_.array()).matrix();
}

Vector ScalingTransform::scale_outputs(const Vector& y) const {
    return (amplification_ * (y.array() - y_min_) / y_range_).matrix();
}

Matrix ScalingTransform::unscale_inputs(const Matrix& x_scaled) const {
    check_dim(x_scaled.cols());
    Matrix x = x_scaled.array().rowwise() * x_range_.transpose().array();
    return x.rowwise() + x_min_.transpose();
}

Vector ScalingTransform::unscale_outputs(const Vector& y_scaled) const {
    return (y_scaled.array() * (y_range_ / amplification_) + y_min_).matrix();
}

Matrix ScalingTransform::joint(const Dataset& data) const {
    Matrix z(data.size(), data.dim() + 1);
    z.leftCols(data.dim()) = scale_inputs(data.inputs());
    z.col(data.dim()) = scale_outputs(data.outputs());
    return z;
}

ScalingTransform fit_scaling(const Dataset& data, double amplification) {
    if (data.empty()) throw DataError("cannot fit scaling on an empty dataset");
    if (!(amplification > 0.0) || !std::isfinite(amplification)) {
        throw ConfigError("amplification must be a positive finite number");
    }
    Vector lo = data.inputs().colwise().minCoeff();
    Vector hi = data.inputs().colwise().maxCoeff();
    Vector range = hi - lo;
    for (Eigen::Index j = 0; j < range.size(); ++j) {
        if (!(range(j) > 0.0)) {
            throw DataError("input dimension " + std::to_string(j + 1) + " has zero spread (constant coordinate)");
        }
    }
    double y_lo = data.outputs().minCoeff();
    double y_hi = data.outputs().maxCoeff();
    if (!(y_hi > y_lo)) throw DataError("output has zero spread (constant y)");
    return ScalingTransform(std::move(lo), std::move(range), y_lo, y_hi - y_lo, amplification);
}

Dataset apply_scaling(const ScalingTransform& t, const Dataset& data, bool scale_output) {
    Matrix x = t.scale_inputs(data.inputs());
    Vector y = scale_output ? t.scale_outputs(data.outputs()) : data.outputs();
    return Dataset(std::move(x), std::move(y));
}

Dataset invert_scaling(const ScalingTransform& t, const Dataset& data, bool scale_output) {
    Matrix x = t.unscale_inputs(data.inputs());
    Vector y = scale_output ? t.unscale_outputs(data.outputs()) : data.outputs();
    return Dataset(std::move(x), std::move(y));
}

nlohmann::json to_json(const ScalingTransform& t) {
    nlohmann::json j;
    j["x_min"] = std::vector<double>(t.x_min().data(), t.x_min().data() + t.dim());
    j["x_range"] = std::vector<double>(t.x_range().data(), t.x_range().data() + t.dim());
    j["y_min"] = t.y_min();
    j["y_range"] = t.y_range();
    j["amplification"] = t.amplification();
    return j;
}

ScalingTransform scaling_from_json(const nlohmann::json& j) {
    auto lo = j.at("x_min").get<std::vector<double>>();
    auto range = j.at("x_range").get<std::vector<double>>();
    return ScalingTransform(Eigen::Map<Vector>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                            Eigen::Map<Vector>(range.data(), static_cast<Eigen::Index>(range.size())),
                            j.at("y_min").get<double>(), j.at("y_range").get<double>(),
                            j.at("amplification").get<double>());
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw ConfigError("test fraction must lie in (0, 1)");
    }
    const auto n = data.size();
    const auto n_test = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * spec.test_fraction));
    if (n_test < 1 || n_test > n - 1) {
        throw ConfigError("test fraction " + std::to_string(spec.test_fraction) + " leaves an empty side for N=" +
                          std::to_string(n));
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Eigen::Index> test(order.begin(), order.begin() + n_test);
    std::vector<Eigen::Index> train(order.begin() + n_test, order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {data.subset(train), data.subset(test)};
}

}  // namespace ccr
