#include "anop/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "anop/error.hpp"
#include "anop/json_scalar.hpp"
#include "anop/serialize.hpp"

namespace anop {

namespace {

using Rng = std::mt19937_64;

PredicateVerdict make_verdict(const std::string& name, const PredicateOptions& opt)
{
    PredicateVerdict v;
    v.predicate = name;
    v.params = opt.to_json();
    return v;
}

Scalar sq_norm(const VectorExpr& v)
{
    return norm2(v);
}

/// Compares two nonnegative real scalars: exact when both are exact,
/// otherwise a > b by more than tol * max(1, a).
bool exceeds(const Scalar& a, const Scalar& b, double tol)
{
    if (a.exact() && b.exact()) return compare_real(a, b) > 0;
    return a.real() - b.real() > tol * std::max(1.0, std::fabs(a.real()));
}

/// Vector x with x* H x != 0 for a nonzero Hermitian H: a basis vector, or
/// e_i + e_j, or e_i + i e_j.
Vec nonzero_form_vector(const Matrix& h, double thr)
{
    const std::size_t n = h.rows();
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (h(i, i).abs() > thr) {
            x[i] = Scalar(1);
            return x;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Scalar hij = h(i, j);
            if (hij.abs() <= thr) continue;
            x[i] = Scalar(1);
            x[j] = std::fabs(hij.real()) > thr ? Scalar(1) : Scalar(Rational(0), Rational(1));
            return x;
        }
    }
    return {};
}

/// Indices of rows/columns of h that carry a nonzero entry.
std::vector<std::size_t> active_indices(const Matrix& h)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t j = 0; j < h.cols(); ++j) {
            if (!h(i, j).is_zero()) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

Matrix submatrix(const Matrix& h, const std::vector<std::size_t>& idx)
{
    Matrix out(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = 0; b < idx.size(); ++b) out(a, b) = h(idx[a], idx[b]);
    }
    return out;
}

nlohmann::json coordinates_json(const Layout& layout, const std::vector<std::size_t>& idx)
{
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i : idx) {
        const auto [c, k] = layout.locate(i);
        out.push_back({{"component", c}, {"index", k}});
    }
    return out;
}

VectorExpr float_vector(const CMatrix& vecs, std::size_t col, const Layout& layout)
{
    CVec v(vecs.rows());
    for (std::size_t r = 0; r < v.size(); ++r) v[r] = vecs(r, col);
    VectorExpr x = layout.unflatten(v);
    x.prune();
    return x;
}

/// Rational approximation of a float vector (denominators up to 10^6).
VectorExpr rationalized(const VectorExpr& v)
{
    VectorExpr out(v.parts.size());
    for (std::size_t c = 0; c < v.parts.size(); ++c) {
        for (const auto& [i, s] : v.parts[c]) {
            out.set(c, i, s.exact() ? s : Scalar(rationalize(s.real(), 1000000), rationalize(s.imag(), 1000000)));
        }
    }
    out.prune();
    return out;
}

std::size_t section_size(const OperatorExpr& a, std::size_t trunc)
{
    std::size_t n = std::max<std::size_t>(trunc, std::max<std::size_t>(a.bandwidth(), 1));
    for (std::size_t e : a.corners()) n = std::max(n, e + a.bandwidth() + 1);
    return n;
}

// ------------------------------------------------------------ sampling

struct Gauss {
    mpz_class re, im;
};

/// Dense section of T large enough that T x, T* x and T^2 x are exact for
/// every x supported in the sampling region. Exact operators are scaled to
/// Gaussian-integer matrices (both inequalities are homogeneous in T).
class SampleEngine {
public:
    explicit SampleEngine(const OperatorExpr& t)
    {
        const auto& spaces = t.spaces();
        const std::size_t w = std::max<std::size_t>(t.bandwidth(), 1);
        const auto corners = t.corners();
        std::vector<std::size_t> ext(spaces.size(), 0);
        std::size_t n = 1;
        for (std::size_t c = 0; c < spaces.size(); ++c) {
            if (!spaces[c].is_l2()) continue;
            ext[c] = corners[c] + w;
            n = std::max(n, corners[c] + 3 * w + 1);
        }
        region_ = Layout::make(spaces, ext);
        const Truncation sec = truncate(t, std::max(n, t.bandwidth()));
        section_ = sec.layout;
        const Matrix& m = sec.matrix;
        const std::size_t N = m.rows();
        exact_ = all_exact(m);
        cols_.assign(N, {});
        adj_cols_.assign(N, {});
        fcols_.assign(N, {});
        fadj_cols_.assign(N, {});
        mpz_class lcm = 1;
        if (exact_) {
            for (std::size_t r = 0; r < N; ++r) {
                for (std::size_t c = 0; c < N; ++c) {
                    const Scalar& s = m(r, c);
                    if (s.is_zero()) continue;
                    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), s.re_q().get_den_mpz_t());
                    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), s.im_q().get_den_mpz_t());
                }
            }
        }
        for (std::size_t r = 0; r < N; ++r) {
            for (std::size_t c = 0; c < N; ++c) {
                const Scalar& s = m(r, c);
                if (s.is_zero()) continue;
                if (!s.is_real()) complex_ = true;
                if (exact_) {
                    const Rational re = s.re_q() * lcm;
                    const Rational im = s.im_q() * lcm;
                    cols_[c].push_back({r, {re.get_num(), im.get_num()}});
                    adj_cols_[r].push_back({c, {re.get_num(), -im.get_num()}});
                } else {
                    fcols_[c].push_back({r, s.value()});
                    fadj_cols_[r].push_back({c, std::conj(s.value())});
                }
            }
        }
        // Region coordinates inside the section layout.
        for (std::size_t i = 0; i < region_.total; ++i) {
            const auto [c, k] = region_.locate(i);
            embed_.push_back(section_.offsets[c] + k);
        }
    }

    const Layout& region() const { return region_; }
    bool complex_entries() const { return complex_; }
    bool exact() const { return exact_; }

    /// True when x violates the inequality; lhs uses T* (star) or T.
    bool violates(const std::vector<std::pair<std::size_t, Gauss>>& x, bool star, double tol)
    {
        if (exact_) return violates_exact(x, star);
        std::vector<std::pair<std::size_t, Complex>> fx;
        for (const auto& [i, g] : x) fx.push_back({i, Complex(g.re.get_d(), g.im.get_d())});
        return violates_float(fx, star, tol);
    }

    VectorExpr to_vector(const std::vector<std::pair<std::size_t, Gauss>>& x) const
    {
        Vec v(region_.total);
        for (const auto& [i, g] : x) v[i] = Scalar(Rational(g.re), Rational(g.im));
        VectorExpr out = region_.unflatten(v);
        out.prune();
        return out;
    }

private:
    using GCol = std::vector<std::pair<std::size_t, Gauss>>;
    using FCol = std::vector<std::pair<std::size_t, Complex>>;

    static void mul_add(Gauss& acc, const Gauss& a, const Gauss& x)
    {
        acc.re += a.re * x.re - a.im * x.im;
        acc.im += a.re * x.im + a.im * x.re;
    }

    std::vector<Gauss> apply_exact(const std::vector<GCol>& cols, const std::vector<std::pair<std::size_t, Gauss>>& x) const
    {
        std::vector<Gauss> y(cols.size());
        for (const auto& [j, xj] : x) {
            for (const auto& [r, a] : cols[j]) mul_add(y[r], a, xj);
        }
        return y;
    }

    static mpz_class sq(const std::vector<Gauss>& v)
    {
        mpz_class s = 0;
        for (const auto& g : v) s += g.re * g.re + g.im * g.im;
        return s;
    }

    static std::vector<std::pair<std::size_t, Gauss>> sparse(const std::vector<Gauss>& v)
    {
        std::vector<std::pair<std::size_t, Gauss>> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (sgn(v[i].re) != 0 || sgn(v[i].im) != 0) out.push_back({i, v[i]});
        }
        return out;
    }

    bool violates_exact(const std::vector<std::pair<std::size_t, Gauss>>& xr, bool star) const
    {
        std::vector<std::pair<std::size_t, Gauss>> x;
        mpz_class xx = 0;
        for (const auto& [i, g] : xr) {
            x.push_back({embed_[i], g});
            xx += g.re * g.re + g.im * g.im;
        }
        const std::vector<Gauss> tx = apply_exact(cols_, x);
        const std::vector<Gauss> ttx = apply_exact(cols_, sparse(tx));
        const mpz_class lhs2 = star ? sq(apply_exact(adj_cols_, x)) : sq(tx);
        return lhs2 * lhs2 > sq(ttx) * xx;
    }

    std::vector<Complex> apply_float(const std::vector<FCol>& cols, const std::vector<std::pair<std::size_t, Complex>>& x) const
    {
        std::vector<Complex> y(cols.size());
        for (const auto& [j, xj] : x) {
            for (const auto& [r, a] : cols[j]) y[r] += a * xj;
        }
        return y;
    }

    bool violates_float(const std::vector<std::pair<std::size_t, Complex>>& xr, bool star, double tol) const
    {
        std::vector<std::pair<std::size_t, Complex>> x;
        double xx = 0.0;
        for (const auto& [i, v] : xr) {
            x.push_back({embed_[i], v});
            xx += std::norm(v);
        }
        const std::vector<Complex> tx = apply_float(fcols_, x);
        std::vector<std::pair<std::size_t, Complex>> txs;
        double txx = 0.0;
        for (std::size_t i = 0; i < tx.size(); ++i) {
            if (tx[i] != 0.0) txs.push_back({i, tx[i]});
            txx += std::norm(tx[i]);
        }
        double ttxx = 0.0;
        for (const auto& v : apply_float(fcols_, txs)) ttxx += std::norm(v);
        double lhs2 = txx;
        if (star) {
            lhs2 = 0.0;
            for (const auto& v : apply_float(fadj_cols_, x)) lhs2 += std::norm(v);
        }
        const double lhs = lhs2 * lhs2;
        return lhs - ttxx * xx > tol * std::max(1.0, lhs);
    }

    Layout region_;
    Layout section_;
    bool exact_ = true;
    bool complex_ = false;
    std::vector<std::size_t> embed_;
    std::vector<GCol> cols_, adj_cols_;
    std::vector<FCol> fcols_, fadj_cols_;
};

/// Basis vectors of the sampling region, then random integer-grid vectors
/// with supports of size at most 12.
PredicateVerdict sample_search(const std::string& name, const OperatorExpr& t, bool star, const PredicateOptions& opt)
{
    PredicateVerdict v = make_verdict(name, opt);
    SampleEngine eng(t);
    const std::size_t R = eng.region().total;
    std::size_t tested = 0;
    auto finish = [&](const std::vector<std::pair<std::size_t, Gauss>>& x, const std::string& how) {
        v.status = VerdictStatus::Refuted;
        v.witness = eng.to_vector(x);
        v.evidence["rule"] = how;
        v.evidence["vectors_tested"] = tested;
        v.evidence["exact"] = eng.exact();
        return v;
    };
    for (std::size_t i = 0; i < R; ++i) {
        ++tested;
        std::vector<std::pair<std::size_t, Gauss>> x{{i, Gauss{1, 0}}};
        if (eng.violates(x, star, opt.tol)) return finish(x, "basis vector violates the inequality");
    }
    Rng rng(opt.seed);
    const bool cplx = eng.complex_entries();
    for (std::size_t s = 0; s < opt.samples && R > 0; ++s) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng() % std::min<std::size_t>(12, R));
        std::vector<std::pair<std::size_t, Gauss>> x;
        for (std::size_t a = 0; a < k; ++a) {
            const std::size_t i = static_cast<std::size_t>(rng() % R);
            Gauss g{static_cast<long>(rng() % 7) - 3, 0};
            if (cplx && rng() % 2 == 0) g.im = static_cast<long>(rng() % 7) - 3;
            if (sgn(g.re) == 0 && sgn(g.im) == 0) continue;
            auto it = std::find_if(x.begin(), x.end(), [&](const auto& p) { return p.first == i; });
            if (it == x.end()) x.push_back({i, g});
        }
        if (x.empty()) continue;
        std::sort(x.begin(), x.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        ++tested;
        if (eng.violates(x, star, opt.tol)) return finish(x, "random vector violates the inequality");
    }
    v.status = VerdictStatus::Numerical;
    v.evidence["rule"] = "no witness among sampled vectors";
    v.evidence["vectors_tested"] = tested;
    v.evidence["seed"] = opt.seed;
    v.evidence["region"] = eng.region().sizes;
    return v;
}

// ---------------------------------------------------------- commutators

OperatorExpr self_commutator(const OperatorExpr& t)
{
    const OperatorExpr ts = adjoint(t);
    return ts * t - t * ts;
}

struct SignResult {
    enum class Kind { Nonnegative, Negative, Unknown } kind = Kind::Unknown;
    std::size_t index = 0; // first negative entry
    std::size_t checked_to = 0;
};

/// Sign of a real offset-0 tail beyond `from`: structural when the rule
/// carries a sign, otherwise a scan over [from, from + count).
SignResult tail_sign(const DiagonalSeq& d, std::size_t from, std::size_t count, double tol)
{
    SignResult out;
    if (!d.asymptotic()) {
        const Scalar lim = d.limit();
        out.index = from;
        if (lim.exact()) {
            out.kind = lim.sign() < 0 ? SignResult::Kind::Negative : SignResult::Kind::Nonnegative;
        } else if (lim.real() < -tol) {
            out.kind = SignResult::Kind::Negative;
        }
        return out;
    }
    const TailSign s = d.tail()->sign();
    if (s == TailSign::Positive) {
        out.kind = SignResult::Kind::Nonnegative;
        return out;
    }
    for (std::size_t r = from; r < from + count; ++r) {
        const Scalar v = d.entry(r);
        if (v.exact() ? v.sign() < 0 : v.real() < -tol) {
            out.kind = SignResult::Kind::Negative;
            out.index = r;
            return out;
        }
    }
    out.checked_to = from + count;
    return out;
}

} // namespace

std::string status_name(VerdictStatus s)
{
    switch (s) {
    case VerdictStatus::Proven: return "Proven";
    case VerdictStatus::Refuted: return "Refuted";
    case VerdictStatus::Numerical: return "Numerical";
    case VerdictStatus::Undetermined: break;
    }
    return "Undetermined";
}

nlohmann::json PredicateOptions::to_json() const
{
    return {{"tol", tol}, {"trunc", trunc}, {"samples", samples}, {"seed", seed}, {"k_grid", k_grid}};
}

nlohmann::json PredicateVerdict::to_json() const
{
    return {{"predicate", predicate},
            {"status", status_name(status)},
            {"witness", witness ? vector_to_json(*witness) : nlohmann::json(nullptr)},
            {"evidence", evidence},
            {"params", params}};
}

bool witness_violates(const std::string& predicate, const OperatorExpr& t, const VectorExpr& x, double tol)
{
    if (x.is_zero()) return false;
    const VectorExpr tx = apply(t, x);
    if (predicate == "paranormal" || predicate == "star-paranormal") {
        const Scalar lhs2 = predicate == "paranormal" ? sq_norm(tx) : sq_norm(apply(adjoint(t), x));
        const Scalar rhs = sq_norm(apply(t, tx)) * sq_norm(x);
        return exceeds(lhs2 * lhs2, rhs, tol);
    }
    const Scalar a = sq_norm(tx);
    const Scalar b = sq_norm(apply(adjoint(t), x));
    if (predicate == "hyponormal") return exceeds(b, a, tol);
    if (predicate == "normal") return exceeds(a, b, tol) || exceeds(b, a, tol);
    throw Error(ErrorCode::BadParams, "no witness check for predicate '" + predicate + "'");
}

PredicateVerdict is_normal(const OperatorExpr& t, const PredicateOptions& opt)
{
    PredicateVerdict v = make_verdict("normal", opt);
    const OperatorExpr d = self_commutator(t);
    if (d == zero_operator(t.spaces())) {
        v.status = t.exact() ? VerdictStatus::Proven : VerdictStatus::Numerical;
        v.evidence["rule"] = "T*T - TT* vanishes identically";
        return v;
    }
    const TailForm form = tail_form(d);
    const Layout region = form.diagonal_tail ? Layout::make(t.spaces(), form.extents) : Layout::make(t.spaces(), section_size(d, opt.trunc));
    const Truncation sec = compress(d, region);
    const double scale = std::max(1.0, max_abs(to_complex(sec.matrix)));
    const bool exact = all_exact(sec.matrix);
    const double thr = exact ? 0.0 : opt.tol * scale;
    v.evidence["region"] = region.sizes;
    Vec x = nonzero_form_vector(sec.matrix, thr);
    if (x.empty() && form.diagonal_tail) {
        for (std::size_t c = 0; c < t.components() && x.empty(); ++c) {
            if (!form.main[c] || !form.main[c]->asymptotic()) continue;
            for (std::size_t r = form.extents[c]; r < form.extents[c] + opt.trunc; ++r) {
                if (form.main[c]->entry(r).abs() > thr) {
                    v.status = VerdictStatus::Refuted;
                    v.witness = VectorExpr::basis(t.components(), c, r);
                    v.evidence["rule"] = "nonzero diagonal of T*T - TT* beyond the corner";
                    return v;
                }
            }
        }
    }
    if (x.empty()) {
        v.status = VerdictStatus::Numerical;
        v.evidence["rule"] = "commutator vanishes on the inspected section";
        return v;
    }
    v.status = VerdictStatus::Refuted;
    v.witness = region.unflatten(x);
    v.witness->prune();
    v.evidence["rule"] = "x with <(T*T - TT*)x, x> != 0";
    v.evidence["form"] = scalar_to_json(inner(region.flatten(*v.witness), sec.matrix * region.flatten(*v.witness)));
    return v;
}

PredicateVerdict hyponormal_check(const OperatorExpr& t, const PredicateOptions& opt)
{
    PredicateVerdict v = make_verdict("hyponormal", opt);
    const OperatorExpr d = self_commutator(t);
    const TailForm form = tail_form(d);
    const Layout region = form.diagonal_tail ? Layout::make(t.spaces(), form.extents) : Layout::make(t.spaces(), section_size(d, opt.trunc));
    const Truncation sec = compress(d, region);
    const Matrix& h = sec.matrix;
    const std::vector<std::size_t> active = active_indices(h);
    v.evidence["corner_region"] = region.sizes;
    v.evidence["active_coordinates"] = coordinates_json(region, active);
    v.evidence["corner_matrix"] = matrix_to_json(submatrix(h, active));
    v.evidence["diagonal_tail"] = form.diagonal_tail;

    if (!all_exact(h)) {
        const CMatrix ch = to_complex(h);
        const double scale = std::max(1.0, max_abs(ch));
        if (h.rows() > 0) {
            const Eigenpairs e = sym_eigen_blocks(ch, opt.tol);
            if (e.values.back() < -opt.tol * scale) {
                VectorExpr x = float_vector(e.vectors, e.values.size() - 1, region);
                v.status = VerdictStatus::Refuted;
                v.witness = x;
                v.evidence["rule"] = "negative eigenvalue of T*T - TT* on the corner";
                v.evidence["min_eigenvalue"] = e.values.back();
                return v;
            }
            v.evidence["min_eigenvalue"] = e.values.back();
        }
        v.status = VerdictStatus::Numerical;
        v.evidence["rule"] = "float corner nonnegative within tolerance";
        return v;
    }

    const PsdDecision dec = decide_psd(h);
    if (!dec.psd) {
        v.status = VerdictStatus::Refuted;
        v.witness = region.unflatten(dec.witness);
        v.witness->prune();
        v.evidence["rule"] = "exact LDL* of T*T - TT* on the corner finds a negative direction";
        v.evidence["witness_form"] = scalar_to_json(dec.witness_form);
        return v;
    }
    v.evidence["corner_psd"] = true;
    if (!form.diagonal_tail) {
        v.status = VerdictStatus::Numerical;
        v.evidence["rule"] = "section of T*T - TT* is PSD; the operator has off-diagonal tails";
        v.evidence["section"] = region.sizes;
        return v;
    }
    bool scanned = false;
    for (std::size_t c = 0; c < t.components(); ++c) {
        if (!t.spaces()[c].is_l2()) continue;
        const DiagonalSeq main = form.main[c] ? *form.main[c] : DiagonalSeq();
        const SignResult s = tail_sign(main, form.extents[c], opt.trunc, opt.tol);
        if (s.kind == SignResult::Kind::Negative) {
            v.status = VerdictStatus::Refuted;
            v.witness = VectorExpr::basis(t.components(), c, s.index);
            v.evidence["rule"] = "negative diagonal of T*T - TT* beyond the corner";
            return v;
        }
        if (s.kind == SignResult::Kind::Unknown) {
            scanned = true;
            v.evidence["tail_scanned_to"] = s.checked_to;
        }
    }
    if (scanned) {
        v.status = VerdictStatus::Numerical;
        v.evidence["rule"] = "corner PSD exactly; diagonal tail nonnegative on the scanned range";
        return v;
    }
    v.status = VerdictStatus::Proven;
    v.evidence["rule"] = "exact LDL* of T*T - TT* on the reducing corner, nonnegative diagonal tail";
    return v;
}

PredicateVerdict paranormal_refute(const OperatorExpr& t, const PredicateOptions& opt)
{
    if (opt.samples < 1) throw Error(ErrorCode::BadParams, "samples must be at least 1");
    return sample_search("paranormal", t, false, opt);
}

PredicateVerdict star_paranormal_refute(const OperatorExpr& t, const PredicateOptions& opt)
{
    return sample_search("star-paranormal", t, true, opt);
}

PredicateVerdict star_paranormal_check(const OperatorExpr& t, const PredicateOptions& opt)
{
    PredicateVerdict v = make_verdict("star-paranormal", opt);
    const PredicateVerdict hypo = hyponormal_check(t, opt);
    if (hypo.status == VerdictStatus::Proven) {
        v.status = VerdictStatus::Proven;
        v.evidence["rule"] = "hyponormal operators are *-paranormal";
        v.evidence["stage"] = 1;
        v.evidence["hyponormal"] = hypo.evidence;
        return v;
    }
    PredicateVerdict s = star_paranormal_refute(t, opt);
    if (s.status == VerdictStatus::Refuted) {
        s.evidence["stage"] = 2;
        return s;
    }
    v.evidence["stage"] = 3;
    v.evidence["sampling"] = s.evidence;

    // Sections of M(k) = T*^2 T^2 - 2k TT* + k^2 I on a geometric k-grid.
    const std::size_t n = section_size(t, opt.trunc);
    const OperatorExpr ts = adjoint(t);
    const OperatorExpr t2 = t * t;
    const CMatrix a = to_complex(truncate(adjoint(t2) * t2, n).matrix);
    const CMatrix b = to_complex(truncate(t * ts, n).matrix);
    const Truncation tsec = truncate(t, n);
    const double tnorm = spectral_norm(to_complex(tsec.matrix)) + tsec.tail_bound;
    const double kmax = 2.0 * tnorm * tnorm;
    const std::size_t grid = std::max<std::size_t>(opt.k_grid, 2);
    std::vector<double> ks;
    for (std::size_t j = 0; j < grid; ++j) ks.push_back(kmax * std::pow(1e-6, static_cast<double>(j) / static_cast<double>(grid - 1)));
    v.evidence["section"] = n;
    v.evidence["k_max"] = kmax;
    v.evidence["k_min"] = ks.back();
    v.evidence["k_points"] = grid;
    if (!std::isfinite(kmax) || kmax == 0.0) {
        v.status = VerdictStatus::Numerical;
        v.evidence["rule"] = kmax == 0.0 ? "T vanishes on the section" : "no finite norm bound for the k-grid";
        return v;
    }
    for (double k : ks) {
        CMatrix m(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.rows(); ++i) {
            for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j) - 2.0 * k * b(i, j);
            m(i, i) += k * k;
        }
        const double scale = std::max(1.0, max_abs(m));
        if (cholesky_succeeds(m, opt.tol * scale)) continue;
        const Eigenpairs e = jacobi_eigen(m);
        const VectorExpr x = rationalized(float_vector(e.vectors, e.values.size() - 1, tsec.layout));
        if (witness_violates("star-paranormal", t, x, opt.tol)) {
            v.status = VerdictStatus::Refuted;
            v.witness = x;
            v.evidence["rule"] = "lowest eigenvector of a section of M(k) violates the inequality";
            v.evidence["k"] = k;
            return v;
        }
        v.status = VerdictStatus::Numerical;
        v.evidence["rule"] = "a section of M(k) is not PSD but its eigenvector does not re-check";
        v.evidence["k"] = k;
        v.evidence["min_eigenvalue"] = e.values.back();
        return v;
    }
    v.status = VerdictStatus::Numerical;
    v.evidence["rule"] = "no sampled witness; every section of M(k) on the grid is PSD";
    return v;
}

PredicateVerdict norm_attaining_check(const OperatorExpr& t, const PredicateOptions& opt)
{
    PredicateVerdict v = make_verdict("norm-attaining", opt);
    const OperatorExpr p = adjoint(t) * t;
    const SpectralSummary s = positive_spectral_summary(p, opt.spectral());
    v.evidence["norm"] = sqrt_point(s.norm).to_json();
    v.evidence["norm_squared"] = s.norm.to_json();
    v.evidence["tier"] = tier_name(s.tier);
    const EigenClass* top = nullptr;
    for (const auto* list : {&s.discrete, &s.at_ess}) {
        for (const auto& c : *list) {
            if (c.value.same(s.norm, opt.tol * std::max(1.0, s.norm.value))) top = &c;
        }
    }
    if (top == nullptr) {
        v.status = s.tier == Tier::Exact ? VerdictStatus::Numerical : VerdictStatus::Undetermined;
        v.evidence["attained"] = false;
        v.evidence["rule"] = "||T||^2 is not an eigenvalue of T*T";
        return v;
    }
    v.evidence["attained"] = true;
    v.evidence["attaining_subspace"] = top->eigenspace.to_json();
    v.evidence["rule"] = "||T||^2 is an eigenvalue of T*T";
    v.status = s.tier == Tier::Exact ? VerdictStatus::Proven : VerdictStatus::Numerical;
    return v;
}

PredicateVerdict an_check(const OperatorExpr& t, const PredicateOptions& opt)
{
    PredicateVerdict v = make_verdict("an", opt);
    SpectralSummary s;
    try {
        s = positive_spectral_summary(adjoint(t) * t, opt.spectral());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::UncertifiedTail) throw;
        v.status = VerdictStatus::Undetermined;
        v.evidence["rule"] = e.what();
        return v;
    }
    v.evidence["ess"] = s.ess.to_json();
    v.evidence["m"] = s.m.to_json();
    v.evidence["m_e"] = s.m_e.to_json();
    v.evidence["tier"] = tier_name(s.tier);
    if (s.ess.empty()) {
        v.evidence["rule"] = "finite-dimensional space: every restriction attains its norm";
        v.status = s.tier == Tier::Exact ? VerdictStatus::Proven : VerdictStatus::Numerical;
        return v;
    }
    if (!s.ess.singleton(opt.tol)) {
        v.status = VerdictStatus::Refuted;
        v.evidence["rule"] = "essential spectrum of T*T is not a single point";
        return v;
    }
    for (const auto& q : s.sequences) {
        if (q.monotone == Monotone::Increasing) {
            v.status = VerdictStatus::Refuted;
            v.evidence["rule"] = "infinitely many eigenvalues of T*T increase to the essential minimum";
            v.evidence["sequence"] = q.to_json();
            return v;
        }
        if (q.monotone != Monotone::Decreasing) {
            v.status = VerdictStatus::Undetermined;
            v.evidence["rule"] = "tail eigenvalues without certified monotonicity";
            return v;
        }
    }
    std::size_t below = 0;
    for (const auto& c : s.discrete) {
        if (c.value.value < s.m_e.value && !c.value.same(s.m_e, opt.tol)) ++below;
    }
    v.evidence["eigenvalues_below_m_e"] = below;
    v.evidence["rule"] = "single essential point and finitely many eigenvalues below it";
    v.status = s.tier == Tier::Exact ? VerdictStatus::Proven : VerdictStatus::Numerical;
    return v;
}

NormSubspaces compute_M_and_Mstar(const OperatorExpr& t, const PredicateOptions& opt)
{
    const PredicateVerdict na = norm_attaining_check(t, opt);
    if (!na.evidence.value("attained", false)) throw Error(ErrorCode::NotNormAttaining, "the norm of T is not attained");
    const SpectralOptions so = opt.spectral();
    const SpectralSummary s = positive_spectral_summary(adjoint(t) * t, so);
    NormSubspaces out;
    out.norm = sqrt_point(s.norm);
    out.m = eigenspace(adjoint(t) * t, s.norm, so);
    const Subspace n_star = eigenspace(t * adjoint(t), s.norm, so);
    out.m_star = intersect(out.m, n_star, s.tier == Tier::Exact && out.m.exact() && n_star.exact() ? 0.0 : 1e-10);
    return out;
}

PredicateVerdict run_predicate(const std::string& name, const OperatorExpr& t, const PredicateOptions& opt)
{
    if (name == "normal") return is_normal(t, opt);
    if (name == "hyponormal") return hyponormal_check(t, opt);
    if (name == "paranormal") return paranormal_refute(t, opt);
    if (name == "star-paranormal") return star_paranormal_check(t, opt);
    if (name == "norm-attaining") return norm_attaining_check(t, opt);
    if (name == "an") return an_check(t, opt);
    throw Error(ErrorCode::BadParams, "unknown predicate '" + name + "'");
}

} // namespace anop
