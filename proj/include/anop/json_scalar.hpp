#pragma once

#include <json.hpp>

#include "anop/scalar.hpp"

namespace anop {

/// Complex literal [re, im]. Exact parts are written as integers or "p/q"
/// strings, float parts as JSON floating-point numbers.
nlohmann::json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const nlohmann::json& j, const std::string& where);

/// Real number for reports: exact values as "p/q" strings when not integral.
nlohmann::json rational_to_json(const Rational& q);

} // namespace anop
