#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "anop/linalg.hpp"
#include "anop/rule.hpp"
#include "anop/scalar.hpp"

namespace anop {

enum class SpaceKind { L2, Finite };

struct Space {
    SpaceKind kind = SpaceKind::L2;
    std::size_t dim = 0; // finite components only

    static Space l2() { return {SpaceKind::L2, 0}; }
    static Space finite(std::size_t n) { return {SpaceKind::Finite, n}; }
    bool is_l2() const { return kind == SpaceKind::L2; }
    friend bool operator==(const Space& a, const Space& b) { return a.kind == b.kind && a.dim == b.dim; }
};

/// One diagonal of a banded block: an explicit prefix followed by a tail rule.
/// entry(i) = prefix[i] for i < prefix length, tail->at(i) afterwards.
/// The prefix is always long enough to cover indices where the tail is undefined.
class DiagonalSeq {
public:
    DiagonalSeq();
    explicit DiagonalSeq(const Scalar& constant);
    DiagonalSeq(std::vector<Scalar> prefix, RulePtr tail);

    const std::vector<Scalar>& prefix() const { return prefix_; }
    const RulePtr& tail() const { return tail_; }
    Scalar entry(std::size_t i) const;
    Scalar limit() const { return tail_->limit(); }

    /// Eventually constant with exact prefix and limit.
    bool exact() const;
    bool asymptotic() const { return !tail_->is_const(); }
    bool is_zero() const;
    /// Decay certificate of the tail beyond the prefix, if any.
    std::optional<DecayBound> decay() const { return tail_->decay(); }
    /// sup_i |entry(i)|, or +inf when the tail is uncertified.
    double sup_bound() const;
    /// sup_{i >= from} |entry(i)|, or +inf when uncertified.
    double sup_bound_from(std::size_t from) const;

    DiagonalSeq conj() const;
    DiagonalSeq scaled(const Scalar& s) const;
    /// Same sequence with entry i increased by v.
    DiagonalSeq with_added(std::size_t i, const Scalar& v) const;

    friend DiagonalSeq operator+(const DiagonalSeq& a, const DiagonalSeq& b);
    friend bool operator==(const DiagonalSeq& a, const DiagonalSeq& b);

private:
    void canonicalize();

    std::vector<Scalar> prefix_;
    RulePtr tail_;
};

/// Banded block on an l2 component; offset = row - column.
/// entry(r, c) = diagonals[r - c].entry(min(r, c)).
struct BandedBlock {
    std::map<long, DiagonalSeq> diagonals;

    Scalar entry(std::size_t r, std::size_t c) const;
    std::size_t bandwidth() const;
    /// Smallest n such that every diagonal is in its tail at min(r, c) >= n - |offset|.
    std::size_t corner() const;
    bool empty() const { return diagonals.empty(); }
    void add(long offset, const DiagonalSeq& d);
    friend bool operator==(const BandedBlock& a, const BandedBlock& b) { return a.diagonals == b.diagonals; }
};

using SparseEntries = std::map<std::pair<std::size_t, std::size_t>, Scalar>;

struct Block {
    BandedBlock banded;
    SparseEntries sparse;

    bool empty() const { return banded.empty() && sparse.empty(); }
    friend bool operator==(const Block& a, const Block& b) { return a.banded == b.banded && a.sparse == b.sparse; }
};

/// Finitely supported vector over the component list of an operator.
struct VectorExpr {
    std::vector<std::map<std::size_t, Scalar>> parts;

    VectorExpr() = default;
    explicit VectorExpr(std::size_t components) : parts(components) {}
    static VectorExpr basis(std::size_t components, std::size_t comp, std::size_t index);

    void set(std::size_t comp, std::size_t index, const Scalar& v);
    Scalar get(std::size_t comp, std::size_t index) const;
    bool exact() const;
    bool is_zero() const;
    /// Drops explicit zeros.
    void prune();

    VectorExpr scaled(const Scalar& s) const;
    friend VectorExpr operator+(const VectorExpr& a, const VectorExpr& b);
    friend VectorExpr operator-(const VectorExpr& a, const VectorExpr& b);
    friend bool operator==(const VectorExpr& a, const VectorExpr& b);
};

/// <x, y> = sum x_i conj(y_i).
Scalar inner(const VectorExpr& x, const VectorExpr& y);
Scalar norm2(const VectorExpr& x);

/// Block operator over l2 / C^n components. l2 diagonal positions carry a
/// banded block (finitely supported entries there are folded into diagonal
/// prefixes); every other position is a finitely supported entry list.
class OperatorExpr {
public:
    OperatorExpr() = default;
    explicit OperatorExpr(std::vector<Space> spaces);

    const std::vector<Space>& spaces() const { return spaces_; }
    std::size_t components() const { return spaces_.size(); }
    const Block& block(std::size_t i, std::size_t j) const { return blocks_[i * spaces_.size() + j]; }

    /// Replaces the banded part of l2 diagonal block (i, i).
    void set_banded(std::size_t i, BandedBlock b);
    void add_diagonal(std::size_t i, long offset, const DiagonalSeq& d);
    void add_entry(std::size_t bi, std::size_t bj, std::size_t r, std::size_t c, const Scalar& v);

    Scalar entry(std::size_t bi, std::size_t r, std::size_t bj, std::size_t c) const;

    bool exact() const;
    bool asymptotic() const;
    /// Max bandwidth over banded blocks.
    std::size_t bandwidth() const;
    /// Per-component extent beyond which only banded tails act.
    std::vector<std::size_t> corners() const;

    friend bool operator==(const OperatorExpr& a, const OperatorExpr& b)
    {
        return a.spaces_ == b.spaces_ && a.blocks_ == b.blocks_;
    }

private:
    friend OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b);
    friend OperatorExpr combine(const std::vector<std::pair<Scalar, OperatorExpr>>& terms);
    friend OperatorExpr adjoint(const OperatorExpr& a);

    Block& block_mut(std::size_t i, std::size_t j) { return blocks_[i * spaces_.size() + j]; }
    void check_index(std::size_t bi, std::size_t r) const;
    void canonicalize();

    std::vector<Space> spaces_;
    std::vector<Block> blocks_;
};

OperatorExpr combine(const std::vector<std::pair<Scalar, OperatorExpr>>& terms);
OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b);
OperatorExpr adjoint(const OperatorExpr& a);
VectorExpr apply(const OperatorExpr& a, const VectorExpr& x);

OperatorExpr operator+(const OperatorExpr& a, const OperatorExpr& b);
OperatorExpr operator-(const OperatorExpr& a, const OperatorExpr& b);
OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);
OperatorExpr scaled(const OperatorExpr& a, const Scalar& s);

OperatorExpr zero_operator(std::vector<Space> spaces);
OperatorExpr identity_operator(std::vector<Space> spaces);
/// Single l2 component.
OperatorExpr right_shift();
/// Single l2 component with diagonal entries followed by a constant limit.
OperatorExpr diagonal_operator(std::vector<Scalar> entries, const Scalar& limit);
/// Dense matrix on C^n.
OperatorExpr finite_operator(const Matrix& m);
OperatorExpr direct_sum(const OperatorExpr& a, const OperatorExpr& b);

/// Coordinate layout of a truncation: n coordinates per l2 component and the
/// full dimension of each finite component, concatenated in component order.
struct Layout {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> sizes;
    std::size_t total = 0;

    static Layout make(const std::vector<Space>& spaces, std::size_t n);
    /// Per-component extents (l2 components take ext[i], finite their dim).
    static Layout make(const std::vector<Space>& spaces, const std::vector<std::size_t>& ext);
    std::vector<Scalar> flatten(const VectorExpr& x) const;
    VectorExpr unflatten(const std::vector<Scalar>& v) const;
    VectorExpr unflatten(const CVec& v) const;
    std::pair<std::size_t, std::size_t> locate(std::size_t flat) const;
};

struct Truncation {
    Layout layout;
    Matrix matrix;
    /// Bound on the norm of the coupling between the section and its
    /// complement, ||P a (I-P)|| + ||(I-P) a P||; +inf when uncertified.
    double tail_bound = 0.0;
};

Truncation truncate(const OperatorExpr& a, std::size_t n);
/// Compression onto a per-component region (no band check).
Truncation compress(const OperatorExpr& a, const Layout& layout);

} // namespace anop
