#include "ccr/serialize.hpp"

namespace ccr {

nlohmann::json matrix_to_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DataError("expected a matrix (array of rows)");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DataError("ragged matrix rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j) {
    auto values = j.get<std::vector<double>>();
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void check_document(const nlohmann::json& j, const std::string& kind, int version) {
    if (!j.is_object() || j.value("kind", std::string()) != kind) {
        throw DataError("expected a serialized " + kind);
    }
    int v = j.value("format_version", -1);
    if (v != version) {
        throw DataError("unsupported " + kind + " format version " + std::to_string(v) + " (expected " +
                        std::to_string(version) + ")");
    }
}

}  // namespace ccr
