#pragma once

#include <string>

#include <json.hpp>

#include "anop/operator.hpp"

namespace anop {

/// Operator file format. Throws Error(SchemaError) with a field path.
OperatorExpr operator_from_json(const nlohmann::json& j);
OperatorExpr parse_operator(const std::string& text);
OperatorExpr load_operator(const std::string& path);

/// Canonical JSON: l2 diagonal blocks as "banded", finite diagonal blocks as
/// "dense", everything else as "finite_rank".
nlohmann::json operator_to_json(const OperatorExpr& a);
std::string serialize_operator(const OperatorExpr& a);

nlohmann::json vector_to_json(const VectorExpr& x);
VectorExpr vector_from_json(const nlohmann::json& j, std::size_t components);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json matrix_to_json(const CMatrix& m);

} // namespace anop
