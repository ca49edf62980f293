#include "anop/decomposition.hpp"

#include <algorithm>
#include <cmath>

#include "anop/error.hpp"
#include "anop/json_scalar.hpp"
#include "anop/serialize.hpp"

namespace anop {

namespace {

double subspace_tol(const Subspace& a, const Subspace& b, double tol)
{
    return a.exact() && b.exact() ? 0.0 : std::max(tol, 1e-10);
}

Scalar point_scalar(const SpectralPoint& p)
{
    return p.exact ? Scalar(*p.exact) : Scalar::floating(p.value);
}

/// |v| for an exact vector when its squared norm is a perfect square.
Scalar vector_norm(const VectorExpr& v)
{
    const Scalar n2 = norm2(v);
    if (n2.exact()) {
        Rational r;
        if (exact_sqrt(n2.re_q(), r)) return Scalar(r);
    }
    return Scalar::floating(std::sqrt(std::max(0.0, n2.real())));
}

double vector_length(const VectorExpr& v)
{
    return std::sqrt(std::max(0.0, norm2(v).real()));
}

/// Matrix of T / divisor from span(from) to span(to), both orthogonal
/// families, in the normalized bases.
Matrix map_matrix(const OperatorExpr& t, const std::vector<VectorExpr>& from, const std::vector<VectorExpr>& to,
                  const Scalar& divisor)
{
    std::vector<Scalar> to_norms;
    for (const auto& v : to) to_norms.push_back(vector_norm(v));
    Matrix m(to.size(), from.size());
    for (std::size_t j = 0; j < from.size(); ++j) {
        const VectorExpr image = apply(t, from[j]);
        const Scalar scale = vector_norm(from[j]) * divisor;
        for (std::size_t i = 0; i < to.size(); ++i) m(i, j) = inner(image, to[i]) / (to_norms[i] * scale);
    }
    return m;
}

/// max(||U*U - I||, ||UU* - I||) entrywise; exact zero on exact unitaries.
double unitary_residual(const Matrix& u)
{
    const Matrix uu = adjoint(u) * u;
    const Matrix vv = u * adjoint(u);
    if (all_exact(u)) {
        if (is_zero(uu - Matrix::identity(u.cols())) && is_zero(vv - Matrix::identity(u.rows()))) return 0.0;
    }
    return std::max(max_abs(to_complex(uu - Matrix::identity(u.cols()))),
                    max_abs(to_complex(vv - Matrix::identity(u.rows()))));
}

double matrix_norm(const Matrix& m)
{
    if (m.empty()) return 0.0;
    if (all_exact(m) && is_zero(m)) return 0.0;
    return spectral_norm(to_complex(m));
}

CMatrix add(const CMatrix& a, const CMatrix& b)
{
    CMatrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
    }
    return out;
}

CMatrix times(const CMatrix& a, Complex s)
{
    CMatrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) *= s;
    }
    return out;
}

/// Normalized columns of the given vectors inside a layout.
CMatrix normalized_columns(const Layout& layout, const std::vector<VectorExpr>& vs)
{
    CMatrix q(layout.total, vs.size());
    for (std::size_t j = 0; j < vs.size(); ++j) {
        const CVec c = to_complex(layout.flatten(vs[j]));
        const double n = norm(c);
        for (std::size_t i = 0; i < layout.total; ++i) q(i, j) = n > 0 ? c[i] / n : Complex(0.0);
    }
    return q;
}

CMatrix hstack(const std::vector<CMatrix>& parts, std::size_t rows)
{
    std::size_t cols = 0;
    for (const auto& p : parts) cols += p.cols();
    CMatrix out(rows, cols);
    std::size_t at = 0;
    for (const auto& p : parts) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            for (std::size_t i = 0; i < rows; ++i) out(i, at + j) = p(i, j);
        }
        at += p.cols();
    }
    return out;
}

std::vector<std::size_t> support_extents(const std::vector<VectorExpr>& vs, std::size_t comps)
{
    std::vector<std::size_t> ext(comps, 0);
    for (const auto& v : vs) {
        for (std::size_t c = 0; c < comps; ++c) {
            if (!v.parts[c].empty()) ext[c] = std::max(ext[c], v.parts[c].rbegin()->first + 1);
        }
    }
    return ext;
}

std::vector<VectorExpr> unflatten_all(const Layout& layout, const std::vector<Vec>& vs)
{
    std::vector<VectorExpr> out;
    for (const auto& v : vs) out.push_back(layout.unflatten(v));
    return out;
}

/// Residual of a vector outside m: exact zero test or relative norm.
bool leaves(const Subspace& m, const VectorExpr& y, bool exact, double tol, double& residual)
{
    const VectorExpr r = y - m.project(y);
    if (exact) {
        residual = r.is_zero() ? 0.0 : vector_length(r);
        return !r.is_zero();
    }
    residual = vector_length(r);
    return residual > tol * std::max(1.0, vector_length(y));
}

/// Scalar s with p = s I (structurally, or within tol on the section for float data).
std::optional<Scalar> identity_factor(const OperatorExpr& p, double tol)
{
    const std::size_t nc = p.components();
    if (nc == 0) return std::nullopt;
    const Scalar s = p.entry(0, 0, 0, 0);
    const OperatorExpr d = p - scaled(identity_operator(p.spaces()), s);
    if (d == zero_operator(p.spaces())) return s;
    if (d.exact()) return std::nullopt;
    std::size_t n = 1;
    for (auto c : d.corners()) n = std::max(n, c);
    const Truncation tr = truncate(d, n + d.bandwidth() + 2);
    if (max_abs(to_complex(tr.matrix)) <= tol) return s;
    return std::nullopt;
}

/// max |R - I| over a section covering the corner, or exact zero.
double identity_residual(const OperatorExpr& r)
{
    const OperatorExpr d = r - identity_operator(r.spaces());
    if (d == zero_operator(r.spaces())) return 0.0;
    std::size_t n = 1;
    for (auto c : d.corners()) n = std::max(n, c);
    const Truncation tr = truncate(d, n + d.bandwidth() + 2);
    return max_abs(to_complex(tr.matrix));
}

void run_prechecks(const OperatorExpr& t, const PredicateOptions& opt)
{
    const PredicateVerdict an = an_check(t, opt);
    if (an.status == VerdictStatus::Refuted) throw Error(ErrorCode::NotAN, an.evidence.value("rule", std::string("not AN")));
    const PredicateVerdict sp = star_paranormal_check(t, opt);
    if (sp.status == VerdictStatus::Refuted) throw Error(ErrorCode::StarParanormalRefuted, "a sampled vector violates ||T*x||^2 <= ||T^2 x|| ||x||");
}

} // namespace

PredicateVerdict invariance_check(const OperatorExpr& t, const Subspace& m, double tol)
{
    PredicateVerdict v;
    v.predicate = "invariant";
    v.params = {{"tol", tol}};
    if (t.spaces() != m.spaces()) throw Error(ErrorCode::ShapeMismatch, "subspace and operator live on different spaces");
    const bool exact = t.exact() && m.exact();
    const auto kind = m.kind();
    if (kind == SubspaceKind::Zero || kind == SubspaceKind::Full) {
        v.status = VerdictStatus::Proven;
        v.evidence["rule"] = "trivial subspace";
        return v;
    }
    std::vector<VectorExpr> probes = m.extras();
    const auto corners = t.corners();
    const std::size_t bw = t.bandwidth();
    for (std::size_t c = 0; c < m.spaces().size(); ++c) {
        if (!m.tails()[c]) continue;
        const std::size_t s = *m.tails()[c];
        // Beyond this index T e_k only reaches tail coordinates of the same component.
        const std::size_t until = std::max(s, corners[c]) + bw + 1;
        for (std::size_t k = s; k < until; ++k) probes.push_back(VectorExpr::basis(m.spaces().size(), c, k));
    }
    double worst = 0.0;
    for (const auto& x : probes) {
        double residual = 0.0;
        if (leaves(m, apply(t, x), exact, tol, residual)) {
            v.status = VerdictStatus::Refuted;
            v.witness = x;
            v.evidence["rule"] = "T x leaves the subspace";
            v.evidence["residual"] = residual;
            return v;
        }
        worst = std::max(worst, residual);
    }
    v.evidence["probes"] = probes.size();
    v.evidence["max_residual"] = worst;
    v.evidence["rule"] = "(I - P) T P vanishes on every probe";
    v.status = exact ? VerdictStatus::Proven : VerdictStatus::Numerical;
    return v;
}

PredicateVerdict reducing_check(const OperatorExpr& t, const Subspace& m, double tol)
{
    const PredicateVerdict a = invariance_check(t, m, tol);
    const PredicateVerdict b = invariance_check(adjoint(t), m, tol);
    PredicateVerdict v;
    v.predicate = "reducing";
    v.params = a.params;
    v.evidence["t_invariant"] = status_name(a.status);
    v.evidence["t_star_invariant"] = status_name(b.status);
    if (a.status == VerdictStatus::Refuted || b.status == VerdictStatus::Refuted) {
        const PredicateVerdict& bad = a.status == VerdictStatus::Refuted ? a : b;
        v.status = VerdictStatus::Refuted;
        v.witness = bad.witness;
        v.evidence["failing_operator"] = a.status == VerdictStatus::Refuted ? "T" : "T*";
        return v;
    }
    v.status = a.status == VerdictStatus::Proven && b.status == VerdictStatus::Proven ? VerdictStatus::Proven : VerdictStatus::Numerical;
    return v;
}

nlohmann::json TailIsometry::to_json() const
{
    return {{"region", region.sizes}, {"corner", matrix_to_json(corner)}};
}

nlohmann::json DecompositionCertificate::to_json() const
{
    nlohmann::json p = nlohmann::json::array();
    for (const auto& l : peeled) {
        p.push_back({{"lambda", l.lambda.to_json()},
                     {"multiplicity", l.unitary.rows()},
                     {"eigenspace", l.eigenspace.to_json()},
                     {"unitary", matrix_to_json(l.unitary)},
                     {"unitary_residual", l.unitary_residual}});
    }
    nlohmann::json b_list = nlohmann::json::array();
    for (const auto& l : below) {
        b_list.push_back({{"delta", l.delta.to_json()},
                          {"eigenspace", l.eigenspace.to_json()},
                          {"unitary", matrix_to_json(l.unitary)},
                          {"unitary_residual", l.unitary_residual},
                          {"reducing", l.reducing}});
    }
    nlohmann::json card = truncated ? nlohmann::json("truncated at " + std::to_string(cardinality)) : nlohmann::json(cardinality);
    return {{"peeled", p},
            {"tail", {{"m_e", m_e.to_json()}, {"h2", h2.to_json()}, {"s", s.to_json()}, {"a", matrix_to_json(a)}, {"b", matrix_to_json(b)}}},
            {"h3", h3.to_json()},
            {"below", b_list},
            {"s_star_a_norm", s_star_a_norm},
            {"reconstruction", {{"residual", reconstruction_residual}, {"size", reconstruction_size}}},
            {"projector_residual", projector_residual},
            {"cardinality", card},
            {"tier", tier_name(tier)},
            {"notes", notes}};
}

DecompositionCertificate peel_decompose(const OperatorExpr& t, const DecomposeOptions& opt)
{
    const double tol = opt.predicate.tol;
    if (opt.prechecks) run_prechecks(t, opt.predicate);
    SpectralOptions so = opt.predicate.spectral();
    so.listed_tail_values = std::max<std::size_t>(so.listed_tail_values, opt.max_peel + 1);

    const auto& spaces = t.spaces();
    const std::size_t nc = spaces.size();
    const OperatorExpr p = adjoint(t) * t;
    const OperatorExpr q = t * adjoint(t);
    const SpectralSummary sum = positive_spectral_summary(p, so);

    DecompositionCertificate cert;
    SpectralPoint me2 = sum.m_e;
    if (sum.ess.empty()) {
        me2 = SpectralPoint::of(Rational(0));
        cert.notes.push_back("no essential spectrum: m_e taken as 0");
    }
    cert.m_e = sqrt_point(me2);
    const double scale = std::max(1.0, sum.norm.value);
    auto above = [&](const SpectralPoint& x) { return !x.same(me2, tol * scale) && x.value > me2.value; };

    for (const auto& seq : sum.sequences) {
        if (seq.monotone != Monotone::Increasing) {
            cert.truncated = true;
            cert.notes.push_back("eigenvalues accumulate at m_e from above; peeling is budgeted");
        }
    }

    // Levels above m_e, descending.
    for (const auto& c : sum.discrete) {
        if (!above(c.value)) continue;
        if (cert.peeled.size() >= opt.max_peel) {
            cert.truncated = true;
            break;
        }
        const Subspace f = eigenspace(q, c.value, so);
        if (!same_subspace(c.eigenspace, f, subspace_tol(c.eigenspace, f, tol))) {
            throw Error(ErrorCode::StructureViolation,
                        "N(|T| - l) != N(|T*| - l) at l^2 = " + c.value.to_json().dump());
        }
        if (!c.eigenspace.dim()) throw Error(ErrorCode::StructureViolation, "eigenspace above m_e is infinite-dimensional");
        PeeledLevel level;
        level.lambda = sqrt_point(c.value);
        level.eigenspace = c.eigenspace;
        level.unitary = map_matrix(t, c.eigenspace.extras(), c.eigenspace.extras(), point_scalar(level.lambda));
        level.unitary_residual = unitary_residual(level.unitary);
        if (level.unitary_residual > std::max(tol, 1e-12) * 10) {
            throw Error(ErrorCode::StructureViolation, "restriction of T / l to its eigenspace is not unitary");
        }
        cert.peeled.push_back(std::move(level));
    }
    cert.cardinality = cert.peeled.size();
    if (cert.truncated && !cert.peeled.empty()) {
        for (const auto& c : sum.discrete) {
            if (!above(c.value) || c.value.value >= cert.peeled.back().lambda.value * cert.peeled.back().lambda.value - tol * scale) continue;
            const double gap = std::sqrt(c.value.value) - std::sqrt(std::max(0.0, me2.value));
            cert.notes.push_back("first unpeeled level exceeds m_e by " + std::to_string(gap));
            break;
        }
    }

    cert.h2 = eigenspace(q, me2, so);

    std::vector<Subspace> parts;
    std::vector<std::size_t> ext(nc, 0);
    for (const auto& l : cert.peeled) {
        parts.push_back(l.eigenspace);
        ext = max_extents(ext, l.eigenspace.extents());
    }
    parts.push_back(cert.h2);
    ext = max_extents(ext, cert.h2.extents());
    std::vector<bool> cut(nc, false);
    for (std::size_t c = 0; c < nc; ++c) {
        if (!spaces[c].is_l2()) continue;
        bool covered = false;
        for (const auto& s : parts) covered = covered || s.tails()[c].has_value();
        if (!covered) {
            cut[c] = true;
            if (!cert.truncated) throw Error(ErrorCode::StructureViolation, "H3 is not finite-dimensional on component " + std::to_string(c));
            ext[c] = std::max(ext[c], t.corners()[c] + opt.max_peel);
            cert.notes.push_back("component " + std::to_string(c) + " is cut at the peeling budget");
        }
    }
    const Layout region = Layout::make(spaces, ext);
    const bool exact_parts = std::all_of(parts.begin(), parts.end(), [](const Subspace& s) { return s.exact(); });
    cert.h3 = complement_in(parts, region, exact_parts ? 0.0 : std::max(tol, 1e-12));
    const std::vector<VectorExpr>& h3 = cert.h3.extras();

    // H2 rows: everything T H3 and the peeled levels reach.
    std::vector<VectorExpr> images;
    for (const auto& h : h3) images.push_back(apply(t, h));
    std::vector<std::size_t> ext2 = max_extents(ext, support_extents(images, nc));
    for (std::size_t c = 0; c < nc; ++c) {
        if (spaces[c].is_l2()) ext2[c] = std::max<std::size_t>(ext2[c], 1);
    }
    const Layout region2 = Layout::make(spaces, ext2);
    const std::vector<VectorExpr> h2_basis = unflatten_all(region2, cert.h2.basis_in(region2));

    const Scalar me = point_scalar(cert.m_e);
    cert.a = map_matrix(t, h3, h2_basis, Scalar(1));
    cert.b = map_matrix(t, h3, h3, Scalar(1));
    cert.s.region = region2;
    if (me.is_zero()) {
        cert.s.corner = Matrix(h2_basis.size(), h2_basis.size());
        cert.notes.push_back("m_e = 0: the tail isometry is not determined by T");
    } else {
        cert.s.corner = map_matrix(t, h2_basis, h2_basis, me);
    }

    // S*A: project T* applied to the H2 part of T h back onto H2.
    if (!me.is_zero()) {
        const OperatorExpr ts = adjoint(t);
        bool zero = true;
        double acc = 0.0;
        for (const auto& h : h3) {
            const VectorExpr a = cert.h2.project(apply(t, h));
            const VectorExpr w = cert.h2.project(apply(ts, a));
            if (w.is_zero()) continue;
            zero = false;
            acc += norm2(w).real() / norm2(h).real();
        }
        cert.s_star_a_norm = zero ? 0.0 : std::sqrt(acc) / cert.m_e.value;
    }

    // Eigenvalues of |T| below m_e.
    for (const auto& c : sum.discrete) {
        if (above(c.value) || c.value.same(me2, tol * scale)) continue;
        BelowLevel level;
        level.delta = sqrt_point(c.value);
        level.eigenspace = c.eigenspace;
        const Subspace f = eigenspace(q, c.value, so);
        level.reducing = same_subspace(c.eigenspace, f, subspace_tol(c.eigenspace, f, tol));
        const bool zero = c.value.exact ? c.value.exact->get_d() == 0.0 && sgn(*c.value.exact) == 0 : c.value.value <= tol;
        if (zero) {
            const std::size_t d = c.eigenspace.extras().size();
            level.unitary = Matrix::identity(d);
            if (!level.reducing) cert.notes.push_back("kernel of T differs from kernel of T*");
        } else {
            level.unitary = map_matrix(t, c.eigenspace.extras(), f.extras(), point_scalar(level.delta));
            level.unitary_residual = unitary_residual(level.unitary);
        }
        cert.below.push_back(std::move(level));
    }

    // Reconstruction and projector checks on a section four times the corner.
    std::vector<std::size_t> ext4(nc, 0);
    // A component cut at the budget keeps its region: the unpeeled remainder is not represented.
    for (std::size_t c = 0; c < nc; ++c) ext4[c] = cut[c] ? ext[c] : 4 * std::max<std::size_t>(ext2[c], 1);
    const Layout big = Layout::make(spaces, ext4);
    const CMatrix tc = to_complex(compress(t, big).matrix);
    CMatrix rec(big.total, big.total);
    std::vector<CMatrix> blocks;
    for (const auto& l : cert.peeled) {
        const CMatrix u = normalized_columns(big, l.eigenspace.extras());
        rec = add(rec, times(u * to_complex(l.unitary) * adjoint(u), Complex(l.lambda.value)));
        blocks.push_back(u);
    }
    const CMatrix q2 = cert.h2.orthonormal_basis_in(big, 1e-12);
    const CMatrix p2 = q2 * adjoint(q2);
    rec = add(rec, p2 * tc * p2);
    const CMatrix q3 = normalized_columns(big, h3);
    const CMatrix a_cols = normalized_columns(big, h2_basis) * to_complex(cert.a);
    rec = add(rec, a_cols * adjoint(q3));
    rec = add(rec, q3 * to_complex(cert.b) * adjoint(q3));
    cert.reconstruction_residual = max_abs(tc - rec);
    cert.reconstruction_size = big.total;
    blocks.push_back(q2);
    blocks.push_back(q3);
    const CMatrix all = hstack(blocks, big.total);
    const CMatrix id_cols = to_complex(Matrix::identity(all.cols()));
    const CMatrix id_rows = to_complex(Matrix::identity(big.total));
    cert.projector_residual = std::max(max_abs(adjoint(all) * all - id_cols), max_abs(all * adjoint(all) - id_rows));

    // The tier covers the peeled levels, m_e and the three subspaces; the
    // below-list may still carry irrational values.
    bool exact = !cert.truncated && me2.exact && cert.h2.exact() && cert.h3.exact();
    for (const auto& l : cert.peeled) exact = exact && l.lambda.exact.has_value() && l.eigenspace.exact();
    cert.tier = exact ? Tier::Exact : Tier::Numerical;
    for (const auto& l : cert.below) {
        if (!l.delta.exact) {
            cert.notes.push_back("eigenvalues below m_e are reported in floating point");
            break;
        }
    }

    if (cert.s_star_a_norm > std::max(tol, 1e-12) * scale) {
        throw Error(ErrorCode::StructureViolation, "S*A != 0 in the tail block");
    }
    if (cert.reconstruction_residual > 1e-8 * scale) cert.notes.push_back("reconstruction residual exceeds 1e-8");
    return cert;
}

nlohmann::json UPlusDView::to_json() const
{
    nlohmann::json u = nlohmann::json::array();
    for (const auto& [l, m] : u_part) u.push_back({{"lambda", l.to_json()}, {"unitary", matrix_to_json(m)}});
    return {{"u", u}, {"d", {{"m_e", m_e.to_json()}, {"s", s.to_json()}, {"a", matrix_to_json(a)}, {"b", matrix_to_json(b)}}}};
}

UPlusDView u_plus_d_view(const DecompositionCertificate& c)
{
    UPlusDView v;
    for (const auto& l : c.peeled) v.u_part.emplace_back(l.lambda, l.unitary);
    for (const auto& l : c.below) v.u_part.emplace_back(l.delta, l.unitary);
    v.m_e = c.m_e;
    v.s = c.s;
    v.a = c.a;
    v.b = c.b;
    return v;
}

OperatorExpr block_upper(const OperatorExpr& a, const Matrix& b, const Matrix& c)
{
    if (a.components() != 1) throw Error(ErrorCode::BadParams, "the (1,1) block must act on a single component");
    if (c.rows() != c.cols()) throw Error(ErrorCode::ShapeMismatch, "the (2,2) block must be square");
    if (b.cols() != c.rows()) throw Error(ErrorCode::ShapeMismatch, "coupling columns must match the (2,2) block");
    const Space s = a.spaces()[0];
    if (!s.is_l2() && b.rows() > s.dim) throw Error(ErrorCode::ShapeMismatch, "coupling has more rows than the (1,1) block");
    if (c.rows() == 0) return a;
    OperatorExpr t = direct_sum(a, finite_operator(c));
    for (std::size_t r = 0; r < b.rows(); ++r) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            if (!b(r, j).is_zero()) t.add_entry(0, 1, r, j, b(r, j));
        }
    }
    return t;
}

nlohmann::json BlockInverse::to_json() const
{
    return {{"a_inverse", operator_to_json(a_inv)},
            {"upper", matrix_to_json(upper)},
            {"c_inverse", matrix_to_json(c_inv)},
            {"left_residual", left_residual},
            {"right_residual", right_residual},
            {"exact", exact}};
}

BlockInverse block_upper_inverse(const OperatorExpr& a, const Matrix& b, const Matrix& c, const PredicateOptions& opt)
{
    const double tol = opt.tol;
    BlockInverse out;
    out.t = block_upper(a, b, c);
    const SpectralOptions so = opt.spectral();
    const SpectralSummary mt = modulus_summary(out.t, so);
    const SpectralSummary ms = modulus_summary(adjoint(out.t), so);
    if (mt.m.value <= tol || ms.m.value <= tol) {
        throw Error(ErrorCode::NotInvertible, "m(|T|) = " + std::to_string(mt.m.value) + ", m(|T*|) = " + std::to_string(ms.m.value));
    }

    if (a.spaces()[0].is_l2()) {
        const auto f = identity_factor(adjoint(a) * a, tol);
        const auto g = identity_factor(a * adjoint(a), tol);
        if (!f || !g || *f != *g) throw Error(ErrorCode::BadParams, "an l2 (1,1) block must be a multiple of a unitary");
        out.a_inv = scaled(adjoint(a), Scalar(1) / *f);
    } else {
        const Truncation ta = compress(a, Layout::make(a.spaces(), 0));
        const auto inv = inverse(ta.matrix, tol);
        if (!inv) throw Error(ErrorCode::NotInvertible, "the (1,1) block is singular");
        out.a_inv = finite_operator(*inv);
    }
    if (c.rows() > 0) {
        const auto inv = inverse(c, tol);
        if (!inv) throw Error(ErrorCode::NotInvertible, "the (2,2) block is singular");
        out.c_inv = *inv;
    }

    // Columns of -a^{-1} b c^{-1}.
    const Matrix bc = c.rows() > 0 ? b * out.c_inv : Matrix(b.rows(), 0);
    std::vector<VectorExpr> cols;
    std::size_t rows = a.spaces()[0].is_l2() ? 0 : a.spaces()[0].dim;
    for (std::size_t j = 0; j < bc.cols(); ++j) {
        VectorExpr v(1);
        for (std::size_t r = 0; r < bc.rows(); ++r) v.set(0, r, bc(r, j));
        VectorExpr w = apply(out.a_inv, v).scaled(Scalar(-1));
        w.prune();
        if (!w.parts[0].empty()) rows = std::max(rows, w.parts[0].rbegin()->first + 1);
        cols.push_back(std::move(w));
    }
    out.upper = Matrix(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (const auto& [r, x] : cols[j].parts[0]) out.upper(r, j) = x;
    }
    out.inverse = block_upper(out.a_inv, out.upper, out.c_inv);
    out.left_residual = identity_residual(out.inverse * out.t);
    out.right_residual = identity_residual(out.t * out.inverse);
    out.exact = out.t.exact() && out.inverse.exact();
    return out;
}

BlockInverse block_upper_inverse(const Matrix& a, const Matrix& b, const Matrix& c, const PredicateOptions& opt)
{
    return block_upper_inverse(finite_operator(a), b, c, opt);
}

PredicateVerdict coupling_vanishes(const OperatorExpr& a, const Matrix& b, const Matrix& c, const PredicateOptions& opt)
{
    PredicateVerdict v;
    v.predicate = "coupling-vanishes";
    v.params = opt.to_json();
    const BlockInverse inv = block_upper_inverse(a, b, c, opt);
    const auto f = identity_factor(adjoint(a) * a, opt.tol);
    if (!f) throw Error(ErrorCode::HypothesisFailed, "the (1,1) block is not a multiple of an isometry");
    const OperatorExpr as = adjoint(a);
    bool exact = a.exact() && all_exact(b);
    double worst = 0.0;
    for (std::size_t j = 0; j < b.cols(); ++j) {
        VectorExpr x(1);
        for (std::size_t r = 0; r < b.rows(); ++r) x.set(0, r, b(r, j));
        VectorExpr y = apply(as, x);
        y.prune();
        if (exact ? !y.is_zero() : vector_length(y) > opt.tol) throw Error(ErrorCode::HypothesisFailed, "a* b != 0");
        worst = std::max(worst, vector_length(y));
    }
    v.evidence["isometry_factor"] = scalar_to_json(*f);
    v.evidence["a_star_b"] = worst;
    v.evidence["inverse"] = {{"left_residual", inv.left_residual}, {"right_residual", inv.right_residual}};
    const double bn = matrix_norm(b);
    v.evidence["b_norm"] = bn;
    if (bn > opt.tol) throw Error(ErrorCode::StructureViolation, "nonzero coupling on an invertible block operator");
    v.status = exact ? VerdictStatus::Proven : VerdictStatus::Numerical;
    v.evidence["rule"] = "invertible with isometric (1,1) block and a* b = 0 forces b = 0";
    return v;
}

std::string route_name(NormalityRoute r)
{
    switch (r) {
    case NormalityRoute::InvertiblePath: return "InvertiblePath";
    case NormalityRoute::KernelDimPath: return "KernelDimPath";
    case NormalityRoute::WeylPath: return "WeylPath";
    case NormalityRoute::NotApplicable: return "NotApplicable";
    case NormalityRoute::RefutedNormality: return "RefutedNormality";
    }
    return "NotApplicable";
}

nlohmann::json NormalityCertificate::to_json() const
{
    nlohmann::json j = {{"route", route_name(route)},
                        {"normal", normal},
                        {"details", details},
                        {"commutator_bound", commutator_bound},
                        {"commutator_exact_zero", commutator_exact_zero}};
    if (decomposition) j["decomposition"] = decomposition->to_json();
    return j;
}

NormalityCertificate certify_normal(const OperatorExpr& t, const DecomposeOptions& opt)
{
    const PredicateOptions& po = opt.predicate;
    const double tol = po.tol;
    NormalityCertificate out;
    if (opt.prechecks) {
        const PredicateVerdict an = an_check(t, po);
        const PredicateVerdict sp = star_paranormal_check(t, po);
        out.details["an"] = status_name(an.status);
        out.details["star_paranormal"] = status_name(sp.status);
        if (an.status == VerdictStatus::Refuted || sp.status == VerdictStatus::Refuted) {
            const PredicateVerdict nv = is_normal(t, po);
            if (nv.status != VerdictStatus::Refuted) {
                if (an.status == VerdictStatus::Refuted) throw Error(ErrorCode::NotAN, an.evidence.value("rule", std::string("not AN")));
                throw Error(ErrorCode::StarParanormalRefuted, "a sampled vector violates ||T*x||^2 <= ||T^2 x|| ||x||");
            }
            out.route = NormalityRoute::RefutedNormality;
            out.details["normal_witness"] = vector_to_json(*nv.witness);
            return out;
        }
    }

    const SpectralOptions so = po.spectral();
    const SpectralSummary mt = modulus_summary(t, so);
    const SpectralSummary ms = modulus_summary(adjoint(t), so);
    out.details["m"] = mt.m.to_json();
    out.details["m_adjoint"] = ms.m.to_json();
    out.details["m_e"] = mt.m_e.to_json();
    out.details["m_e_adjoint"] = ms.m_e.to_json();

    if (mt.m.value > tol && ms.m.value > tol) {
        out.route = NormalityRoute::InvertiblePath;
    } else {
        const KernelDims kd = kernel_dims(t, so);
        out.details["kernel_dims"] = kd.to_json();
        const bool finite_equal = kd.of_t.kind == KernelDim::Kind::Finite && kd.of_t == kd.of_t_star;
        const bool fredholm = !mt.ess.empty() && mt.m_e.value > tol && ms.m_e.value > tol;
        if (finite_equal && fredholm) {
            out.route = NormalityRoute::KernelDimPath;
        } else if (kd.of_t.kind == KernelDim::Kind::Undetermined && fredholm) {
            const Subspace n = eigenspace(adjoint(t) * t, SpectralPoint::of(Rational(0)), so);
            const Subspace ns = eigenspace(t * adjoint(t), SpectralPoint::of(Rational(0)), so);
            if (n.dim() && ns.dim() && *n.dim() == *ns.dim()) {
                out.route = NormalityRoute::WeylPath;
                out.details["weyl_kernel_dims"] = {*n.dim(), *ns.dim()};
            }
        }
        if (out.route == NormalityRoute::NotApplicable) {
            out.details["reason"] = fredholm ? "kernel dimensions differ" : "0 lies in the essential spectrum of |T| or |T*|";
            out.details["is_normal"] = status_name(is_normal(t, po).status);
            return out;
        }
        // The kernel must reduce T so that the rest is the invertible part.
        const Subspace n = eigenspace(adjoint(t) * t, SpectralPoint::of(Rational(0)), so);
        const PredicateVerdict red = reducing_check(t, n, tol);
        out.details["kernel_reducing"] = status_name(red.status);
        if (red.status == VerdictStatus::Refuted) throw Error(ErrorCode::StructureViolation, "N(T) does not reduce T");
    }

    DecomposeOptions dopt = opt;
    dopt.prechecks = false;
    DecompositionCertificate cert = peel_decompose(t, dopt);
    const double a_norm = matrix_norm(cert.a);
    out.details["a_norm"] = a_norm;
    out.details["s_star_a_norm"] = cert.s_star_a_norm;
    if (a_norm > tol * std::max(1.0, mt.norm.value)) {
        throw Error(ErrorCode::StructureViolation, "tail coupling A is nonzero on an operator with invertible part");
    }

    const PredicateVerdict nv = is_normal(t, po);
    out.details["is_normal"] = status_name(nv.status);
    if (nv.status == VerdictStatus::Refuted) {
        throw Error(ErrorCode::StructureViolation, "a route claimed normality but ||Tx|| != ||T*x|| at " + vector_to_json(*nv.witness).dump());
    }
    out.normal = true;
    const OperatorExpr d = adjoint(t) * t - t * adjoint(t);
    if (d == zero_operator(t.spaces())) {
        out.commutator_exact_zero = true;
        out.commutator_bound = 0.0;
    } else {
        std::size_t n = std::max<std::size_t>(po.trunc, 1);
        for (auto c : d.corners()) n = std::max(n, c + d.bandwidth() + 1);
        const Truncation tr = truncate(d, n);
        out.commutator_bound = spectral_norm(to_complex(tr.matrix)) + tr.tail_bound;
    }
    out.decomposition = std::move(cert);
    return out;
}

PredicateVerdict m_star_equals_m_check(const OperatorExpr& t, const DecomposeOptions& opt)
{
    const PredicateOptions& po = opt.predicate;
    if (opt.prechecks) run_prechecks(t, po);
    PredicateVerdict v;
    v.predicate = "m-star-equals-m";
    v.params = po.to_json();
    const NormSubspaces ns = compute_M_and_Mstar(t, po);
    v.evidence["m"] = ns.m.to_json();
    v.evidence["m_star"] = ns.m_star.to_json();
    if (!ns.m_star.dim()) throw Error(ErrorCode::MstarInfinite, "M* is infinite-dimensional");
    if (!same_subspace(ns.m, ns.m_star, subspace_tol(ns.m, ns.m_star, po.tol))) {
        throw Error(ErrorCode::StructureViolation, "M* != M with M* finite-dimensional");
    }
    v.status = ns.m.exact() && ns.m_star.exact() && t.exact() ? VerdictStatus::Proven : VerdictStatus::Numerical;
    v.evidence["rule"] = "mutual containment of M and M*";
    return v;
}

} // namespace anop
