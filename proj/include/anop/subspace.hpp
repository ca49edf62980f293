#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "anop/operator.hpp"

namespace anop {

enum class SubspaceKind { Zero, FiniteSpan, Cofinite, Full };

/// Closed subspace of the form  span{e_k : k >= tail_c} (per l2 component c
/// that has a tail)  plus a finite set of extra vectors supported below the
/// tails. Extras are kept mutually orthogonal: exact and unnormalized when
/// every input is exact, orthonormal doubles otherwise.
class Subspace {
public:
    Subspace() = default;
    static Subspace zero(std::vector<Space> spaces);
    static Subspace full(std::vector<Space> spaces);
    /// Span of the given tails and vectors. Coordinates of the vectors that
    /// fall in a tail are dropped; tol is the pivot threshold for float data.
    static Subspace span(std::vector<Space> spaces, std::vector<std::optional<std::size_t>> tails,
                         const std::vector<VectorExpr>& vectors, double tol);

    const std::vector<Space>& spaces() const { return spaces_; }
    const std::vector<std::optional<std::size_t>>& tails() const { return tails_; }
    const std::vector<VectorExpr>& extras() const { return extras_; }

    SubspaceKind kind() const;
    bool exact() const;
    /// Finite dimension, or nullopt when some component has a tail.
    std::optional<std::size_t> dim() const;
    /// Per-component extent covering every extra and every tail start.
    std::vector<std::size_t> extents() const;

    /// Orthogonal projection (finitely supported in, finitely supported out).
    VectorExpr project(const VectorExpr& v) const;
    bool contains(const VectorExpr& v, double tol) const;
    bool contains(const Subspace& other, double tol) const;

    /// Basis of the part of the subspace inside a region: tail coordinates
    /// below the region's extent followed by the extras.
    std::vector<Vec> basis_in(const Layout& layout) const;
    /// Orthonormal (float) version of basis_in.
    CMatrix orthonormal_basis_in(const Layout& layout, double tol) const;

    nlohmann::json to_json() const;

private:
    void canonicalize(double tol);

    std::vector<Space> spaces_;
    std::vector<std::optional<std::size_t>> tails_;
    std::vector<VectorExpr> extras_;
};

bool same_subspace(const Subspace& a, const Subspace& b, double tol);
Subspace intersect(const Subspace& a, const Subspace& b, double tol);
/// Orthogonal complement of the sum of the given subspaces inside the region
/// (finite-dimensional result).
Subspace complement_in(const std::vector<Subspace>& parts, const Layout& region, double tol);
/// Component-wise maximum of extents.
std::vector<std::size_t> max_extents(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

std::string subspace_kind_name(SubspaceKind k);

} // namespace anop
