#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "anop/operator.hpp"
#include "anop/predicates.hpp"
#include "anop/spectral.hpp"
#include "anop/subspace.hpp"

namespace anop {

/// T maps m into m. Refuted with a basis vector of m whose image leaves m.
PredicateVerdict invariance_check(const OperatorExpr& t, const Subspace& m, double tol);
/// m is invariant under T and T*.
PredicateVerdict reducing_check(const OperatorExpr& t, const Subspace& m, double tol);

/// Restriction of T to an eigenspace N(|T| - lambda) as a matrix in an
/// orthonormal basis of that space, divided by lambda.
struct PeeledLevel {
    SpectralPoint lambda;
    Subspace eigenspace;
    Matrix unitary;
    double unitary_residual = 0.0;
};

/// Eigenvalue delta of |T| below m_e with the map T / delta from N(|T| - delta)
/// to N(|T*| - delta). `reducing` is set when the two spaces coincide.
struct BelowLevel {
    SpectralPoint delta;
    Subspace eigenspace;
    Matrix unitary;
    double unitary_residual = 0.0;
    bool reducing = false;
};

/// Tail isometry S = T / m_e on H2, kept as a restriction of T: its matrix
/// on the part of H2 inside `region` (rows and columns in the H2 basis).
struct TailIsometry {
    Layout region;
    Matrix corner;
    nlohmann::json to_json() const;
};

struct DecompositionCertificate {
    std::vector<PeeledLevel> peeled; // lambda strictly decreasing, all > m_e
    SpectralPoint m_e;
    Subspace h2;
    TailIsometry s;
    Subspace h3;
    Matrix a; // H3 -> H2, rows: H2 basis inside s.region
    Matrix b; // H3 -> H3
    std::vector<BelowLevel> below;
    double s_star_a_norm = 0.0;
    double reconstruction_residual = 0.0;
    std::size_t reconstruction_size = 0;
    double projector_residual = 0.0;
    /// Number of peeled levels; `truncated` when the budget cut an infinite set.
    std::size_t cardinality = 0;
    bool truncated = false;
    Tier tier = Tier::Exact;
    std::vector<std::string> notes;

    nlohmann::json to_json() const;
};

struct DecomposeOptions {
    PredicateOptions predicate;
    std::size_t max_peel = 64;
    /// Run the AN and star-paranormal prechecks.
    bool prechecks = true;
};

/// Spectral peeling into the unitary levels, the tail isometry with its
/// coupling A and the finite block B.
DecompositionCertificate peel_decompose(const OperatorExpr& t, const DecomposeOptions& opt);

struct UPlusDView {
    std::vector<std::pair<SpectralPoint, Matrix>> u_part;
    SpectralPoint m_e;
    TailIsometry s;
    Matrix a;
    Matrix b;
    nlohmann::json to_json() const;
};
UPlusDView u_plus_d_view(const DecompositionCertificate& c);

/// Inverse of T = [[a, b], [0, c]] with c finite. a is a single-component
/// operator; the rows of b index its first coordinates.
struct BlockInverse {
    OperatorExpr t;
    OperatorExpr inverse;
    OperatorExpr a_inv;
    Matrix upper; // -a^{-1} b c^{-1}
    Matrix c_inv;
    double left_residual = 0.0;  // ||T^{-1} T - I||
    double right_residual = 0.0; // ||T T^{-1} - I||
    bool exact = false;
    nlohmann::json to_json() const;
};
OperatorExpr block_upper(const OperatorExpr& a, const Matrix& b, const Matrix& c);
BlockInverse block_upper_inverse(const OperatorExpr& a, const Matrix& b, const Matrix& c, const PredicateOptions& opt);
BlockInverse block_upper_inverse(const Matrix& a, const Matrix& b, const Matrix& c, const PredicateOptions& opt);

/// For invertible [[a, b], [0, c]] with a a multiple of an isometry and
/// a* b = 0: b must vanish.
PredicateVerdict coupling_vanishes(const OperatorExpr& a, const Matrix& b, const Matrix& c, const PredicateOptions& opt);

enum class NormalityRoute { InvertiblePath, KernelDimPath, WeylPath, NotApplicable, RefutedNormality };
std::string route_name(NormalityRoute r);

struct NormalityCertificate {
    NormalityRoute route = NormalityRoute::NotApplicable;
    bool normal = false;
    nlohmann::json details = nlohmann::json::object();
    /// Bound on ||TT* - T*T||; exactly zero when the commutator vanishes structurally.
    double commutator_bound = 0.0;
    bool commutator_exact_zero = false;
    std::optional<DecompositionCertificate> decomposition;
    nlohmann::json to_json() const;
};
NormalityCertificate certify_normal(const OperatorExpr& t, const DecomposeOptions& opt);

/// M* = M when M* is finite-dimensional; throws MstarInfinite otherwise.
PredicateVerdict m_star_equals_m_check(const OperatorExpr& t, const DecomposeOptions& opt);

} // namespace anop
