#pragma once

namespace anop {

inline constexpr const char* kToolName = "anop";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace anop
