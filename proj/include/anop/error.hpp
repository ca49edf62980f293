#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anop {

enum class ErrorCode {
    ShapeMismatch,
    NSmallerThanBand,
    SchemaError,
    NotSelfAdjoint,
    UncertifiedTail,
    NotPositive,
    FiniteComponent,
    NotAN,
    StarParanormalRefuted,
    StructureViolation,
    NotInvertible,
    InfiniteH2,
    HypothesisFailed,
    MstarInfinite,
    NotNormAttaining,
    BadParams,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view error_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NSmallerThanBand: return "NSmallerThanBand";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorCode::UncertifiedTail: return "UncertifiedTail";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::FiniteComponent: return "FiniteComponent";
    case ErrorCode::NotAN: return "NotAN";
    case ErrorCode::StarParanormalRefuted: return "StarParanormalRefuted";
    case ErrorCode::StructureViolation: return "StructureViolation";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::InfiniteH2: return "InfiniteH2";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::MstarInfinite: return "MstarInfinite";
    case ErrorCode::NotNormAttaining: return "NotNormAttaining";
    case ErrorCode::BadParams: return "BadParams";
    }
    return "Unknown";
}

} // namespace anop
