#pragma once

#include <json.hpp>

#include "ccr/common.hpp"

namespace ccr {

/// Matrices are stored as an array of rows.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

/// Throws DataError unless j["format_version"] equals `version` and j["kind"] equals `kind`.
void check_document(const nlohmann::json& j, const std::string& kind, int version);

}  // namespace ccr
