#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "anop/operator.hpp"
#include "anop/subspace.hpp"

namespace anop {

enum class Tier { Exact, Numerical };
std::string tier_name(Tier t);

/// Real spectral value; `exact` is set when the value is a known rational.
struct SpectralPoint {
    double value = 0.0;
    std::optional<Rational> exact;

    static SpectralPoint of(const Rational& q) { return {q.get_d(), q}; }
    static SpectralPoint approx(double v) { return {v, std::nullopt}; }
    /// Exact when s is exact and real.
    static SpectralPoint from(const Scalar& s);
    /// Exact comparison when both are exact, otherwise |a - b| <= tol.
    bool same(const SpectralPoint& o, double tol) const;
    nlohmann::json to_json() const;
};

/// Square root of a nonnegative point; exact when the rational is a perfect square.
SpectralPoint sqrt_point(const SpectralPoint& p);

struct EssentialSpectrum {
    std::vector<SpectralPoint> points; // ascending
    std::vector<std::pair<double, double>> intervals;

    bool empty() const { return points.empty() && intervals.empty(); }
    bool exact() const;
    SpectralPoint lo() const;
    SpectralPoint hi() const;
    /// Single point (exactly), or total diameter <= tol on float data.
    bool singleton(double tol) const;
    double distance(double x) const;
    nlohmann::json to_json() const;
};

struct Symbol {
    std::map<long, Scalar> coeffs; // offset -> diagonal limit
    Complex at(double theta) const;
    bool constant() const;
    nlohmann::json to_json() const;
};

/// One eigenvalue with its eigenspace. multiplicity is empty for infinite
/// multiplicity (the eigenspace then has a tail).
struct EigenClass {
    SpectralPoint value;
    std::optional<std::size_t> multiplicity;
    Subspace eigenspace;
};

/// Infinite family of simple eigenvalues d(r), r >= start, coming from a
/// non-constant diagonal tail on one l2 component.
struct TailSequence {
    std::size_t component = 0;
    std::size_t start = 0;
    RulePtr rule;
    Monotone monotone = Monotone::None;
    /// Values are square roots of the rule's entries (modulus summaries).
    bool root = false;
    nlohmann::json to_json() const;
};

struct SpectralSummary {
    EssentialSpectrum ess;
    std::vector<EigenClass> discrete; // finite multiplicity, not in ess, descending
    std::vector<EigenClass> at_ess;   // eigenvalues lying in ess (e.g. infinite multiplicity)
    std::vector<TailSequence> sequences;
    SpectralPoint norm;
    SpectralPoint m;
    SpectralPoint m_e;
    Tier tier = Tier::Exact;
    /// Numerical tier: section size per l2 component and the distance from
    /// ess below which eigenvalues are not resolved.
    std::size_t truncation = 0;
    double resolution = 0.0;

    nlohmann::json to_json(bool with_vectors = false) const;
};

/// Hermitian eigenproblem; throws NotSelfAdjoint when ||m - m*|| > tol * max(1, ||m||).
Eigenpairs sym_eigen(const CMatrix& m, double tol);
/// Same, exploiting block-diagonal structure (connected components of the
/// sparsity graph are solved independently).
Eigenpairs sym_eigen_blocks(const CMatrix& m, double tol);

Symbol symbol(const OperatorExpr& a, std::size_t component);
/// [min, max] of a real symbol over the circle (sampling plus Newton refinement).
std::pair<double, double> symbol_range(const Symbol& s, double tol);

/// Throws NotSelfAdjoint unless a = a* (exactly on exact data).
void require_self_adjoint(const OperatorExpr& a, double tol);

EssentialSpectrum essential_spectrum(const OperatorExpr& a, double tol);

struct SpectralOptions {
    double tol = 1e-10;
    std::size_t trunc = 256;
    /// Number of tail-sequence values listed explicitly.
    std::size_t listed_tail_values = 8;
};

SpectralSummary positive_spectral_summary(const OperatorExpr& p, const SpectralOptions& opt);
SpectralSummary modulus_summary(const OperatorExpr& t, const SpectralOptions& opt);

/// N(p - value I) for self-adjoint p in diagonal-tail form (exact when possible).
Subspace eigenspace(const OperatorExpr& p, const SpectralPoint& value, const SpectralOptions& opt);

struct DiagonalizationPair {
    SpectralPoint beta;
    Subspace vectors; // finite span, or cofinite for the infinite-multiplicity class
};
struct DiagonalizationResult {
    std::vector<DiagonalizationPair> pairs; // descending
    std::optional<SpectralPoint> limit_point;
    std::optional<SpectralPoint> infinite_multiplicity_value;
    /// Checks of the four listed properties of positive AN operators.
    std::vector<std::pair<std::string, bool>> clauses;
    std::vector<std::string> notes;
    nlohmann::json to_json() const;
};
DiagonalizationResult positive_an_diagonalize(const OperatorExpr& p, const SpectralOptions& opt);

/// Dimension of a kernel: finite count, or infinite / undetermined.
struct KernelDim {
    enum class Kind { Finite, Infinite, Undetermined } kind = Kind::Finite;
    std::size_t value = 0;
    nlohmann::json to_json() const;
    friend bool operator==(const KernelDim& a, const KernelDim& b)
    {
        return a.kind == b.kind && (a.kind != Kind::Finite || a.value == b.value);
    }
};
struct KernelDims {
    KernelDim of_t;
    KernelDim of_t_star;
    Tier tier = Tier::Exact;
    nlohmann::json to_json() const;
};
KernelDims kernel_dims(const OperatorExpr& t, const SpectralOptions& opt);

/// Structure of a self-adjoint operator beyond its corner: every l2 block has
/// finitely supported off-diagonals, so the corner region reduces the operator
/// and the rest acts diagonally by the offset-0 tail.
struct TailForm {
    bool diagonal_tail = false;
    bool constant = false; // diagonal_tail and every offset-0 tail constant
    std::vector<std::size_t> extents;
    std::vector<std::optional<DiagonalSeq>> main; // offset-0 diagonal per l2 component
};
TailForm tail_form(const OperatorExpr& p);

/// Eigen-decomposition of the corner block of an operator in diagonal-tail form.
std::vector<EigenClass> corner_classes(const OperatorExpr& p, const Layout& region, double tol);

} // namespace anop
