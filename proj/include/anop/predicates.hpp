#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "anop/operator.hpp"
#include "anop/spectral.hpp"
#include "anop/subspace.hpp"

namespace anop {

enum class VerdictStatus { Proven, Refuted, Numerical, Undetermined };
std::string status_name(VerdictStatus s);

struct PredicateOptions {
    double tol = 1e-10;
    std::size_t trunc = 256;
    std::size_t samples = 100000;
    std::uint64_t seed = 42;
    std::size_t k_grid = 64;

    SpectralOptions spectral() const { return {tol, trunc, 8}; }
    nlohmann::json to_json() const;
};

struct PredicateVerdict {
    std::string predicate;
    VerdictStatus status = VerdictStatus::Undetermined;
    std::optional<VectorExpr> witness;
    nlohmann::json evidence = nlohmann::json::object();
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// T*T = TT*; Refuted with a vector x where ||Tx|| != ||T*x||.
PredicateVerdict is_normal(const OperatorExpr& t, const PredicateOptions& opt);
/// TT* <= T*T; Refuted with x such that ||T*x|| > ||Tx||.
PredicateVerdict hyponormal_check(const OperatorExpr& t, const PredicateOptions& opt);
/// Refuter only: ||Tx||^2 <= ||T^2 x|| ||x|| on random rational vectors.
PredicateVerdict paranormal_refute(const OperatorExpr& t, const PredicateOptions& opt);
/// Sampling stage alone for ||T*x||^2 <= ||T^2 x|| ||x||: Refuted or Numerical.
PredicateVerdict star_paranormal_refute(const OperatorExpr& t, const PredicateOptions& opt);
/// ||T*x||^2 <= ||T^2 x|| ||x||: hyponormality, then sampling, then k-grid sections.
PredicateVerdict star_paranormal_check(const OperatorExpr& t, const PredicateOptions& opt);
/// Attainment of ||T||; evidence carries the attaining subspace N(T*T - ||T||^2).
PredicateVerdict norm_attaining_check(const OperatorExpr& t, const PredicateOptions& opt);
/// Absolutely norm attaining: ess spectrum of T*T a point and finitely many
/// spectral points below it.
PredicateVerdict an_check(const OperatorExpr& t, const PredicateOptions& opt);

struct NormSubspaces {
    SpectralPoint norm;
    Subspace m;      // N(T*T - ||T||^2)
    Subspace m_star; // M intersected with N(TT* - ||T||^2)
};
/// Throws NotNormAttaining when ||T|| is not attained.
NormSubspaces compute_M_and_Mstar(const OperatorExpr& t, const PredicateOptions& opt);

/// Re-evaluates a Refuted verdict's witness against the defining inequality
/// (exactly when the operator and witness are exact).
bool witness_violates(const std::string& predicate, const OperatorExpr& t, const VectorExpr& x, double tol);

/// Dispatch by CLI name: normal, hyponormal, paranormal, star-paranormal,
/// norm-attaining, an.
PredicateVerdict run_predicate(const std::string& name, const OperatorExpr& t, const PredicateOptions& opt);

} // namespace anop
