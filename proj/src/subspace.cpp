#include "anop/subspace.hpp"

#include <algorithm>
#include <cmath>

#include "anop/error.hpp"
#include "anop/serialize.hpp"

namespace anop {

namespace {

double vnorm(const VectorExpr& v)
{
    return std::sqrt(std::max(0.0, norm2(v).real()));
}

VectorExpr to_float(const VectorExpr& v)
{
    VectorExpr out(v.parts.size());
    for (std::size_t c = 0; c < v.parts.size(); ++c) {
        for (const auto& [i, s] : v.parts[c]) out.parts[c][i] = Scalar::floating(s.value());
    }
    return out;
}

/// Gram-Schmidt over finitely supported vectors. Exact input gives an exact
/// orthogonal (unnormalized) basis; float input an orthonormal one.
std::vector<VectorExpr> orthogonal_basis(const std::vector<VectorExpr>& vs, bool exact, double tol)
{
    std::vector<VectorExpr> out;
    std::vector<Scalar> norms;
    for (const auto& a : vs) {
        VectorExpr v = exact ? a : to_float(a);
        const double n0 = exact ? 0.0 : vnorm(v);
        const int passes = exact ? 1 : 2;
        for (int pass = 0; pass < passes; ++pass) {
            for (std::size_t j = 0; j < out.size(); ++j) {
                const Scalar coef = inner(v, out[j]) / norms[j];
                if (!coef.is_zero()) v = v - out[j].scaled(coef);
            }
        }
        if (exact) {
            v.prune();
            if (v.is_zero()) continue;
            norms.push_back(norm2(v));
        } else {
            const double n = vnorm(v);
            if (n <= tol * std::max(1.0, n0)) continue;
            v = v.scaled(Scalar::floating(1.0 / n));
            norms.push_back(Scalar::floating(1.0));
        }
        out.push_back(std::move(v));
    }
    return out;
}

bool all_exact(const std::vector<VectorExpr>& vs)
{
    return std::all_of(vs.begin(), vs.end(), [](const VectorExpr& v) { return v.exact(); });
}

} // namespace

Subspace Subspace::zero(std::vector<Space> spaces)
{
    Subspace s;
    s.tails_.assign(spaces.size(), std::nullopt);
    s.spaces_ = std::move(spaces);
    return s;
}

Subspace Subspace::full(std::vector<Space> spaces)
{
    std::vector<std::optional<std::size_t>> tails(spaces.size());
    std::vector<VectorExpr> vs;
    for (std::size_t c = 0; c < spaces.size(); ++c) {
        if (spaces[c].is_l2()) {
            tails[c] = 0;
        } else {
            for (std::size_t i = 0; i < spaces[c].dim; ++i) vs.push_back(VectorExpr::basis(spaces.size(), c, i));
        }
    }
    return span(std::move(spaces), std::move(tails), vs, 0.0);
}

Subspace Subspace::span(std::vector<Space> spaces, std::vector<std::optional<std::size_t>> tails,
                        const std::vector<VectorExpr>& vectors, double tol)
{
    Subspace s;
    if (tails.size() != spaces.size()) throw Error(ErrorCode::ShapeMismatch, "one tail entry per component");
    for (std::size_t c = 0; c < spaces.size(); ++c) {
        if (tails[c] && !spaces[c].is_l2()) throw Error(ErrorCode::ShapeMismatch, "tails exist only on l2 components");
    }
    std::vector<VectorExpr> stripped;
    for (const auto& v : vectors) {
        if (v.parts.size() != spaces.size()) throw Error(ErrorCode::ShapeMismatch, "vector has wrong component count");
        VectorExpr w = v;
        for (std::size_t c = 0; c < spaces.size(); ++c) {
            if (!tails[c]) continue;
            auto& p = w.parts[c];
            p.erase(p.lower_bound(*tails[c]), p.end());
        }
        w.prune();
        if (!w.is_zero()) stripped.push_back(std::move(w));
    }
    s.spaces_ = std::move(spaces);
    s.tails_ = std::move(tails);
    s.extras_ = orthogonal_basis(stripped, all_exact(stripped), tol);
    s.canonicalize(tol);
    return s;
}

void Subspace::canonicalize(double tol)
{
    const bool ex = exact();
    for (std::size_t c = 0; c < spaces_.size(); ++c) {
        if (!tails_[c]) continue;
        while (*tails_[c] > 0) {
            const std::size_t k = *tails_[c] - 1;
            const VectorExpr e = VectorExpr::basis(spaces_.size(), c, k);
            // Only the extras can contain e_k here.
            VectorExpr r = e - project(e);
            const bool inside = ex ? r.is_zero() : vnorm(r) <= std::max(tol, 1e-12);
            if (!inside) break;
            std::vector<VectorExpr> reduced;
            for (auto v : extras_) {
                v.parts[c].erase(k);
                v.prune();
                if (!v.is_zero()) reduced.push_back(std::move(v));
            }
            extras_ = orthogonal_basis(reduced, ex, std::max(tol, 1e-12));
            tails_[c] = k;
        }
    }
}

SubspaceKind Subspace::kind() const
{
    bool any_tail = false, all_full_tails = true;
    std::size_t finite_dims = 0;
    for (std::size_t c = 0; c < spaces_.size(); ++c) {
        if (spaces_[c].is_l2()) {
            any_tail = any_tail || tails_[c].has_value();
            all_full_tails = all_full_tails && tails_[c] && *tails_[c] == 0;
        } else {
            finite_dims += spaces_[c].dim;
        }
    }
    if (all_full_tails && extras_.size() == finite_dims) return SubspaceKind::Full;
    if (any_tail) return SubspaceKind::Cofinite;
    return extras_.empty() ? SubspaceKind::Zero : SubspaceKind::FiniteSpan;
}

bool Subspace::exact() const
{
    return all_exact(extras_);
}

std::optional<std::size_t> Subspace::dim() const
{
    for (const auto& t : tails_) {
        if (t) return std::nullopt;
    }
    return extras_.size();
}

std::vector<std::size_t> Subspace::extents() const
{
    std::vector<std::size_t> out(spaces_.size(), 0);
    for (std::size_t c = 0; c < spaces_.size(); ++c) {
        if (!spaces_[c].is_l2()) {
            out[c] = spaces_[c].dim;
            continue;
        }
        if (tails_[c]) out[c] = *tails_[c];
        for (const auto& v : extras_) {
            if (!v.parts[c].empty()) out[c] = std::max(out[c], v.parts[c].rbegin()->first + 1);
        }
    }
    return out;
}

VectorExpr Subspace::project(const VectorExpr& v) const
{
    VectorExpr low = v;
    VectorExpr out(spaces_.size());
    for (std::size_t c = 0; c < spaces_.size(); ++c) {
        if (!tails_[c]) continue;
        auto& p = low.parts[c];
        for (auto it = p.lower_bound(*tails_[c]); it != p.end(); ++it) out.parts[c][it->first] = it->second;
        p.erase(p.lower_bound(*tails_[c]), p.end());
    }
    for (const auto& b : extras_) {
        const Scalar coef = inner(low, b) / norm2(b);
        if (!coef.is_zero()) out = out + b.scaled(coef);
    }
    out.prune();
    return out;
}

bool Subspace::contains(const VectorExpr& v, double tol) const
{
    const VectorExpr r = v - project(v);
    if (exact() && v.exact()) return r.is_zero();
    return vnorm(r) <= tol * std::max(1.0, vnorm(v));
}

bool Subspace::contains(const Subspace& other, double tol) const
{
    for (std::size_t c = 0; c < spaces_.size(); ++c) {
        if (!other.tails_[c]) continue;
        if (!tails_[c]) return false;
        for (std::size_t k = *other.tails_[c]; k < *tails_[c]; ++k) {
            if (!contains(VectorExpr::basis(spaces_.size(), c, k), tol)) return false;
        }
    }
    for (const auto& v : other.extras_) {
        if (!contains(v, tol)) return false;
    }
    return true;
}

std::vector<Vec> Subspace::basis_in(const Layout& layout) const
{
    std::vector<Vec> out;
    for (std::size_t c = 0; c < spaces_.size(); ++c) {
        if (!tails_[c]) continue;
        for (std::size_t k = *tails_[c]; k < layout.sizes[c]; ++k) {
            Vec v(layout.total);
            v[layout.offsets[c] + k] = Scalar(1);
            out.push_back(std::move(v));
        }
    }
    for (const auto& e : extras_) out.push_back(layout.flatten(e));
    return out;
}

CMatrix Subspace::orthonormal_basis_in(const Layout& layout, double tol) const
{
    std::vector<CVec> cols;
    for (const auto& v : basis_in(layout)) cols.push_back(to_complex(v));
    CMatrix q = orthonormalize(cols, tol);
    if (q.rows() == 0) q = CMatrix(layout.total, 0);
    return q;
}

nlohmann::json Subspace::to_json() const
{
    nlohmann::json tails = nlohmann::json::array();
    for (std::size_t c = 0; c < tails_.size(); ++c) {
        if (tails_[c]) tails.push_back({{"component", c}, {"start", *tails_[c]}});
    }
    nlohmann::json basis = nlohmann::json::array();
    for (const auto& v : extras_) basis.push_back(vector_to_json(v));
    const auto d = dim();
    return {{"kind", subspace_kind_name(kind())},
            {"dim", d ? nlohmann::json(*d) : nlohmann::json("infinite")},
            {"tails", tails},
            {"basis", basis}};
}

bool same_subspace(const Subspace& a, const Subspace& b, double tol)
{
    return a.contains(b, tol) && b.contains(a, tol);
}

std::vector<std::size_t> max_extents(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b)
{
    std::vector<std::size_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
    return out;
}

Subspace intersect(const Subspace& a, const Subspace& b, double tol)
{
    if (!(a.spaces() == b.spaces())) throw Error(ErrorCode::ShapeMismatch, "intersect: space lists differ");
    const std::size_t n = a.spaces().size();
    std::vector<std::optional<std::size_t>> tails(n);
    for (std::size_t c = 0; c < n; ++c) {
        if (a.tails()[c] && b.tails()[c]) tails[c] = std::max(*a.tails()[c], *b.tails()[c]);
    }
    const Layout region = Layout::make(a.spaces(), max_extents(a.extents(), b.extents()));
    const auto ba = a.basis_in(region);
    const auto bb = b.basis_in(region);
    if (ba.empty() || bb.empty()) return Subspace::span(a.spaces(), tails, {}, tol);
    Matrix m(region.total, ba.size() + bb.size());
    for (std::size_t j = 0; j < ba.size(); ++j) {
        for (std::size_t r = 0; r < region.total; ++r) m(r, j) = ba[j][r];
    }
    for (std::size_t j = 0; j < bb.size(); ++j) {
        for (std::size_t r = 0; r < region.total; ++r) m(r, ba.size() + j) = -bb[j][r];
    }
    std::vector<VectorExpr> common;
    for (const auto& coef : kernel(m, tol)) {
        Vec w(region.total);
        for (std::size_t j = 0; j < ba.size(); ++j) {
            if (coef[j].is_zero()) continue;
            for (std::size_t r = 0; r < region.total; ++r) {
                if (!ba[j][r].is_zero()) w[r] += coef[j] * ba[j][r];
            }
        }
        common.push_back(region.unflatten(w));
    }
    return Subspace::span(a.spaces(), tails, common, tol);
}

Subspace complement_in(const std::vector<Subspace>& parts, const Layout& region, double tol)
{
    if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "complement_in needs at least one subspace");
    const auto& spaces = parts.front().spaces();
    std::vector<Vec> rows;
    for (const auto& p : parts) {
        for (auto& v : p.basis_in(region)) rows.push_back(std::move(v));
    }
    std::vector<VectorExpr> out;
    if (rows.empty()) {
        for (std::size_t i = 0; i < region.total; ++i) {
            Vec e(region.total);
            e[i] = Scalar(1);
            out.push_back(region.unflatten(e));
        }
    } else {
        Matrix m(rows.size(), region.total);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < region.total; ++c) m(r, c) = rows[r][c].conj();
        }
        for (const auto& k : kernel(m, tol)) out.push_back(region.unflatten(k));
    }
    return Subspace::span(spaces, std::vector<std::optional<std::size_t>>(spaces.size()), out, tol);
}

std::string subspace_kind_name(SubspaceKind k)
{
    switch (k) {
    case SubspaceKind::Zero: return "zero";
    case SubspaceKind::FiniteSpan: return "finite_span";
    case SubspaceKind::Cofinite: return "cofinite";
    case SubspaceKind::Full: return "full";
    }
    return "unknown";
}

} // namespace anop
