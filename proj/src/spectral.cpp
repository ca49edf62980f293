#include "anop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "anop/error.hpp"
#include "anop/json_scalar.hpp"
#include "anop/serialize.hpp"

namespace anop {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clean(double v)
{
    return v == 0.0 ? 0.0 : v;
}

nlohmann::json number_json(double v)
{
    if (!std::isfinite(v)) return nullptr;
    return clean(v);
}

std::string monotone_name(Monotone m)
{
    switch (m) {
    case Monotone::Constant: return "constant";
    case Monotone::Increasing: return "increasing";
    case Monotone::Decreasing: return "decreasing";
    case Monotone::None: break;
    }
    return "none";
}

bool point_less(const SpectralPoint& a, const SpectralPoint& b)
{
    if (a.exact && b.exact) return *a.exact < *b.exact;
    return a.value < b.value;
}

SpectralPoint real_point(const Scalar& s)
{
    if (s.exact()) return SpectralPoint::of(s.re_q());
    return SpectralPoint::approx(s.real());
}

std::vector<std::optional<std::size_t>> no_tails(std::size_t n)
{
    return std::vector<std::optional<std::size_t>>(n);
}

/// Eigenvector columns [from, to) as vectors over the layout.
std::vector<VectorExpr> columns_as_vectors(const Eigenpairs& eig, std::size_t from, std::size_t to, const Layout& layout)
{
    std::vector<VectorExpr> out;
    for (std::size_t j = from; j < to; ++j) {
        CVec v(eig.vectors.rows());
        for (std::size_t r = 0; r < v.size(); ++r) v[r] = eig.vectors(r, j);
        VectorExpr x = layout.unflatten(v);
        x.prune();
        out.push_back(std::move(x));
    }
    return out;
}

/// Groups of consecutive (descending) eigenvalues closer than gap.
std::vector<std::pair<std::size_t, std::size_t>> clusters(const std::vector<double>& values, double gap)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i + 1;
        while (j < values.size() && values[j - 1] - values[j] <= gap) ++j;
        out.emplace_back(i, j);
        i = j;
    }
    return out;
}

double mean_of(const std::vector<double>& values, std::size_t from, std::size_t to)
{
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += values[i];
    return s / static_cast<double>(to - from);
}

Matrix minus_shift(const Matrix& m, const Scalar& q)
{
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, i) = out(i, i) - q;
    return out;
}

/// Exact rational eigenvalue near x with geometric multiplicity k, if one exists
/// with denominator up to 10^6.
std::optional<std::pair<Rational, std::vector<Vec>>> exact_eigenvalue(const Matrix& m, double x, std::size_t k, double scale)
{
    std::vector<Rational> tried;
    for (long den = 1; den <= 1000000; den *= 10) {
        const Rational q = rationalize(x, den);
        if (std::fabs(q.get_d() - x) > 1e-7 * scale) continue;
        if (std::find(tried.begin(), tried.end(), q) != tried.end()) continue;
        tried.push_back(q);
        std::vector<Vec> ker = kernel(minus_shift(m, Scalar(q)), 0.0);
        if (ker.size() == k) return std::make_pair(q, std::move(ker));
    }
    return std::nullopt;
}

double symbol_derivative(const Symbol& s, double theta, int order)
{
    double out = 0.0;
    for (const auto& [j, c] : s.coeffs) {
        const double jd = static_cast<double>(j);
        Complex f = c.value() * std::polar(1.0, jd * theta);
        if (order == 1) f *= Complex(0.0, jd);
        if (order == 2) f *= -jd * jd;
        out += f.real();
    }
    return out;
}

double tail_excess(const OperatorExpr& p, std::size_t from)
{
    double excess = 0.0;
    for (std::size_t c = 0; c < p.components(); ++c) {
        if (!p.spaces()[c].is_l2()) continue;
        for (const auto& [j, d] : p.block(c, c).banded.diagonals) {
            if (!d.asymptotic()) continue;
            const auto bound = d.decay();
            if (!bound) return std::numeric_limits<double>::infinity();
            const std::size_t at = from > static_cast<std::size_t>(std::labs(j)) ? from - static_cast<std::size_t>(std::labs(j)) : 0;
            excess += bound->C * std::pow(static_cast<double>(at + 1), -bound->p);
        }
    }
    return excess;
}

void sort_desc(std::vector<EigenClass>& v)
{
    std::stable_sort(v.begin(), v.end(), [](const EigenClass& a, const EigenClass& b) { return point_less(b.value, a.value); });
}

nlohmann::json class_json(const EigenClass& c, bool with_vectors)
{
    nlohmann::json j;
    j["value"] = c.value.to_json();
    if (c.multiplicity) {
        j["mult"] = *c.multiplicity;
    } else {
        j["mult"] = "infinite";
    }
    if (with_vectors) j["eigenspace"] = c.eigenspace.to_json();
    return j;
}

SpectralPoint tail_min(const TailSequence& seq, const DiagonalSeq& d, std::size_t count, bool& certain)
{
    if (seq.monotone == Monotone::Increasing) return real_point(d.entry(seq.start));
    if (seq.monotone == Monotone::Decreasing) return real_point(d.limit());
    certain = false;
    double lo = d.limit().real();
    for (std::size_t r = seq.start; r < seq.start + count; ++r) lo = std::min(lo, d.entry(r).real());
    return SpectralPoint::approx(lo);
}

SpectralPoint tail_max(const TailSequence& seq, const DiagonalSeq& d, std::size_t count, bool& certain)
{
    if (seq.monotone == Monotone::Decreasing) return real_point(d.entry(seq.start));
    if (seq.monotone == Monotone::Increasing) return real_point(d.limit());
    certain = false;
    double hi = d.limit().real();
    for (std::size_t r = seq.start; r < seq.start + count; ++r) hi = std::max(hi, d.entry(r).real());
    return SpectralPoint::approx(hi);
}

void structured_summary(const OperatorExpr& p, const TailForm& form, const SpectralOptions& opt, SpectralSummary& s)
{
    const auto& spaces = p.spaces();
    const std::size_t nc = spaces.size();
    const Layout region = Layout::make(spaces, form.extents);
    std::vector<EigenClass> classes = corner_classes(p, region, opt.tol);

    struct Extra {
        SpectralPoint value;
        std::vector<std::optional<std::size_t>> tails;
        std::vector<VectorExpr> vectors;
        bool infinite = false;
    };
    std::vector<Extra> extras;
    auto extra_for = [&](const SpectralPoint& v) -> Extra& {
        for (auto& e : extras) {
            if (e.value.same(v, opt.tol)) return e;
        }
        extras.push_back({v, no_tails(nc), {}, false});
        return extras.back();
    };

    bool exact = s.ess.exact();
    std::vector<SpectralPoint> lows, highs;
    for (std::size_t c = 0; c < nc; ++c) {
        if (!spaces[c].is_l2()) continue;
        const DiagonalSeq main = form.main[c] ? *form.main[c] : DiagonalSeq();
        if (!main.asymptotic()) {
            Extra& e = extra_for(real_point(main.limit()));
            e.tails[c] = form.extents[c];
            e.infinite = true;
            continue;
        }
        TailSequence seq{c, form.extents[c], main.tail(), main.tail()->monotone(), false};
        if (seq.monotone != Monotone::Increasing && seq.monotone != Monotone::Decreasing) exact = false;
        for (std::size_t r = seq.start; r < seq.start + opt.listed_tail_values; ++r) {
            const Scalar v = main.entry(r);
            if (!v.exact()) exact = false;
            Extra& e = extra_for(real_point(v));
            e.vectors.push_back(VectorExpr::basis(nc, c, r));
        }
        bool certain = true;
        lows.push_back(tail_min(seq, main, opt.trunc, certain));
        highs.push_back(tail_max(seq, main, opt.trunc, certain));
        if (!certain) exact = false;
        s.sequences.push_back(std::move(seq));
    }

    for (auto& e : extras) {
        auto it = std::find_if(classes.begin(), classes.end(), [&](const EigenClass& k) { return k.value.same(e.value, opt.tol); });
        std::vector<VectorExpr> vectors = e.vectors;
        std::size_t count = e.vectors.size();
        SpectralPoint value = e.value;
        if (it != classes.end()) {
            const auto& corner = it->eigenspace.extras();
            vectors.insert(vectors.end(), corner.begin(), corner.end());
            count += it->multiplicity.value_or(0);
            if (it->value.exact) value = it->value;
            classes.erase(it);
        }
        EigenClass k;
        k.value = value;
        if (!e.infinite) k.multiplicity = count;
        k.eigenspace = Subspace::span(spaces, e.tails, vectors, opt.tol);
        classes.push_back(std::move(k));
    }

    for (auto& k : classes) {
        if (!k.value.exact) exact = false;
        lows.push_back(k.value);
        highs.push_back(k.value);
        const bool in_ess = !k.multiplicity || k.value.same(s.ess.lo(), opt.tol) || s.ess.distance(k.value.value) <= opt.tol;
        (in_ess ? s.at_ess : s.discrete).push_back(std::move(k));
    }
    sort_desc(s.discrete);
    sort_desc(s.at_ess);
    if (!s.ess.empty()) {
        lows.push_back(s.ess.lo());
        highs.push_back(s.ess.hi());
    }
    if (!lows.empty()) {
        s.m = *std::min_element(lows.begin(), lows.end(), point_less);
        s.norm = *std::max_element(highs.begin(), highs.end(), point_less);
    }
    s.tier = exact ? Tier::Exact : Tier::Numerical;
}

void numerical_summary(const OperatorExpr& p, const SpectralOptions& opt, SpectralSummary& s)
{
    const auto corners = p.corners();
    std::size_t n = std::max(opt.trunc, p.bandwidth());
    for (std::size_t e : corners) n = std::max(n, e + p.bandwidth() + 1);
    const Truncation t = truncate(p, n);
    const CMatrix m = to_complex(t.matrix);
    const double scale = std::max(1.0, max_abs(m));
    const Eigenpairs eig = sym_eigen_blocks(m, opt.tol);

    s.truncation = n;
    s.resolution = std::max({opt.tol * scale, 1e-8 * scale, tail_excess(p, n - p.bandwidth())});
    s.tier = Tier::Numerical;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& [from, to] : clusters(eig.values, 1e-8 * scale)) {
        const double v = mean_of(eig.values, from, to);
        if (s.ess.distance(v) <= s.resolution) continue;
        EigenClass k;
        k.value = SpectralPoint::approx(v);
        k.multiplicity = to - from;
        k.eigenspace = Subspace::span(p.spaces(), no_tails(p.components()), columns_as_vectors(eig, from, to, t.layout), opt.tol);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        s.discrete.push_back(std::move(k));
    }
    sort_desc(s.discrete);
    if (!s.ess.empty()) {
        lo = std::min(lo, s.ess.lo().value);
        hi = std::max(hi, s.ess.hi().value);
    }
    if (!eig.values.empty() && eig.values.back() < -opt.tol * scale) lo = std::min(lo, eig.values.back());
    s.m = SpectralPoint::approx(lo);
    s.norm = SpectralPoint::approx(hi);
}

} // namespace

std::string tier_name(Tier t)
{
    return t == Tier::Exact ? "Exact" : "Numerical";
}

SpectralPoint SpectralPoint::from(const Scalar& s)
{
    if (s.exact() && s.im_q() == 0) return of(s.re_q());
    return approx(s.real());
}

bool SpectralPoint::same(const SpectralPoint& o, double tol) const
{
    if (exact && o.exact) return *exact == *o.exact;
    return std::fabs(value - o.value) <= tol;
}

nlohmann::json SpectralPoint::to_json() const
{
    if (exact) return rational_to_json(*exact);
    return number_json(value);
}

SpectralPoint sqrt_point(const SpectralPoint& p)
{
    if (p.exact) {
        Rational r;
        if (exact_sqrt(*p.exact, r)) return SpectralPoint::of(r);
    }
    if (!std::isfinite(p.value)) return p;
    return SpectralPoint::approx(std::sqrt(std::max(0.0, p.value)));
}

bool EssentialSpectrum::exact() const
{
    return intervals.empty() && std::all_of(points.begin(), points.end(), [](const SpectralPoint& p) { return p.exact.has_value(); });
}

SpectralPoint EssentialSpectrum::lo() const
{
    std::optional<SpectralPoint> best;
    if (!points.empty()) best = points.front();
    for (const auto& [a, b] : intervals) {
        (void)b;
        if (!best || a < best->value) best = SpectralPoint::approx(a);
    }
    return best ? *best : SpectralPoint::approx(std::numeric_limits<double>::infinity());
}

SpectralPoint EssentialSpectrum::hi() const
{
    std::optional<SpectralPoint> best;
    if (!points.empty()) best = points.back();
    for (const auto& [a, b] : intervals) {
        (void)a;
        if (!best || b > best->value) best = SpectralPoint::approx(b);
    }
    return best ? *best : SpectralPoint::approx(-std::numeric_limits<double>::infinity());
}

bool EssentialSpectrum::singleton(double tol) const
{
    if (empty()) return false;
    if (points.size() == 1 && intervals.empty()) return true;
    if (exact()) return false;
    return hi().value - lo().value <= tol;
}

double EssentialSpectrum::distance(double x) const
{
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : points) d = std::min(d, std::fabs(x - p.value));
    for (const auto& [a, b] : intervals) {
        if (x >= a && x <= b) return 0.0;
        d = std::min({d, std::fabs(x - a), std::fabs(x - b)});
    }
    return d;
}

nlohmann::json EssentialSpectrum::to_json() const
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) pts.push_back(p.to_json());
    nlohmann::json ivs = nlohmann::json::array();
    for (const auto& [a, b] : intervals) ivs.push_back({number_json(a), number_json(b)});
    return {{"points", pts}, {"intervals", ivs}};
}

Complex Symbol::at(double theta) const
{
    Complex out = 0.0;
    for (const auto& [j, c] : coeffs) out += c.value() * std::polar(1.0, static_cast<double>(j) * theta);
    return out;
}

bool Symbol::constant() const
{
    return coeffs.empty() || (coeffs.size() == 1 && coeffs.begin()->first == 0);
}

nlohmann::json Symbol::to_json() const
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [j, c] : coeffs) out.push_back({{"offset", j}, {"value", scalar_to_json(c)}});
    return {{"coefficients", out}};
}

nlohmann::json TailSequence::to_json() const
{
    return {{"component", component}, {"start", start}, {"rule", rule->describe()}, {"monotone", monotone_name(monotone)}, {"root", root}};
}

nlohmann::json SpectralSummary::to_json(bool with_vectors) const
{
    nlohmann::json j;
    j["ess"] = ess.to_json();
    j["discrete"] = nlohmann::json::array();
    for (const auto& c : discrete) j["discrete"].push_back(class_json(c, with_vectors));
    j["at_ess"] = nlohmann::json::array();
    for (const auto& c : at_ess) j["at_ess"].push_back(class_json(c, with_vectors));
    j["sequences"] = nlohmann::json::array();
    for (const auto& q : sequences) j["sequences"].push_back(q.to_json());
    j["norm"] = norm.to_json();
    j["m"] = m.to_json();
    j["m_e"] = m_e.to_json();
    j["tier"] = tier_name(tier);
    if (tier == Tier::Numerical && truncation > 0) {
        j["truncation"] = truncation;
        j["resolution"] = number_json(resolution);
    }
    return j;
}

Eigenpairs sym_eigen(const CMatrix& m, double tol)
{
    if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "eigenproblem needs a square matrix");
    if (hermitian_defect(m) > tol * std::max(1.0, max_abs(m))) throw Error(ErrorCode::NotSelfAdjoint, "matrix is not Hermitian");
    return jacobi_eigen(m, std::min(tol, 1e-12));
}

Eigenpairs sym_eigen_blocks(const CMatrix& m, double tol)
{
    if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "eigenproblem needs a square matrix");
    if (hermitian_defect(m) > tol * std::max(1.0, max_abs(m))) throw Error(ErrorCode::NotSelfAdjoint, "matrix is not Hermitian");
    const std::size_t n = m.rows();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m(i, j) != 0.0 || m(j, i) != 0.0) parent[find(i)] = find(j);
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
    if (groups.size() <= 1) return jacobi_eigen(m, std::min(tol, 1e-12));

    std::vector<double> values;
    std::vector<CVec> vectors;
    int sweeps = 0;
    for (const auto& [root, idx] : groups) {
        (void)root;
        CMatrix sub(idx.size(), idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            for (std::size_t b = 0; b < idx.size(); ++b) sub(a, b) = m(idx[a], idx[b]);
        }
        const Eigenpairs e = jacobi_eigen(sub, std::min(tol, 1e-12));
        sweeps = std::max(sweeps, e.sweeps);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            CVec v(n, 0.0);
            for (std::size_t a = 0; a < idx.size(); ++a) v[idx[a]] = e.vectors(a, k);
            values.push_back(e.values[k]);
            vectors.push_back(std::move(v));
        }
    }
    const double tie = 1e-12 * frobenius(m);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (std::abs(values[x] - values[y]) > tie) return values[x] > values[y];
        for (std::size_t r = 0; r < n; ++r) {
            const Complex vx = vectors[x][r];
            const Complex vy = vectors[y][r];
            if (std::abs(vx.real() - vy.real()) > 1e-9) return vx.real() > vy.real();
            if (std::abs(vx.imag() - vy.imag()) > 1e-9) return vx.imag() > vy.imag();
        }
        return x < y;
    });
    Eigenpairs out;
    out.sweeps = sweeps;
    out.values.resize(n);
    out.vectors = CMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = values[order[j]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = vectors[order[j]][r];
    }
    return out;
}

Symbol symbol(const OperatorExpr& a, std::size_t component)
{
    if (component >= a.components()) throw Error(ErrorCode::BadParams, "component index out of range");
    if (!a.spaces()[component].is_l2()) throw Error(ErrorCode::FiniteComponent, "symbol of a finite component");
    Symbol s;
    for (const auto& [j, d] : a.block(component, component).banded.diagonals) {
        const Scalar lim = d.limit();
        if (!lim.is_zero()) s.coeffs[j] = lim;
    }
    return s;
}

std::pair<double, double> symbol_range(const Symbol& s, double tol)
{
    if (s.constant()) {
        const double c = s.coeffs.empty() ? 0.0 : s.coeffs.begin()->second.real();
        return {c, c};
    }
    constexpr std::size_t samples = 4096;
    std::vector<double> f(samples);
    for (std::size_t k = 0; k < samples; ++k) f[k] = s.at(2.0 * kPi * static_cast<double>(k) / samples).real();
    double lo = *std::min_element(f.begin(), f.end());
    double hi = *std::max_element(f.begin(), f.end());
    for (std::size_t k = 0; k < samples; ++k) {
        const double prev = f[(k + samples - 1) % samples];
        const double next = f[(k + 1) % samples];
        const bool is_min = f[k] <= prev && f[k] <= next;
        const bool is_max = f[k] >= prev && f[k] >= next;
        if (!is_min && !is_max) continue;
        double theta = 2.0 * kPi * static_cast<double>(k) / samples;
        for (int it = 0; it < 60; ++it) {
            const double g = symbol_derivative(s, theta, 1);
            const double h = symbol_derivative(s, theta, 2);
            if (std::fabs(h) < 1e-300) break;
            const double step = g / h;
            if (std::fabs(step) > 2.0 * kPi / samples) break;
            theta -= step;
            if (std::fabs(step) <= std::max(tol, 1e-15) * 1e-3) break;
        }
        const double v = s.at(theta).real();
        if (is_min) lo = std::min(lo, v);
        if (is_max) hi = std::max(hi, v);
    }
    return {lo, hi};
}

void require_self_adjoint(const OperatorExpr& a, double tol)
{
    if (a == adjoint(a)) return;
    if (a.exact()) throw Error(ErrorCode::NotSelfAdjoint, "operator differs from its adjoint");
    for (std::size_t c = 0; c < a.components(); ++c) {
        if (!a.spaces()[c].is_l2()) continue;
        const auto& diags = a.block(c, c).banded.diagonals;
        for (const auto& [j, d] : diags) {
            auto it = diags.find(-j);
            const Scalar mirror = it == diags.end() ? Scalar(0) : it->second.limit().conj();
            const Scalar lim = d.limit();
            if ((lim - mirror).abs() > tol * std::max(1.0, lim.abs())) {
                throw Error(ErrorCode::NotSelfAdjoint, "diagonal limits are not conjugate-symmetric");
            }
        }
    }
    std::size_t n = a.bandwidth() + 64;
    for (std::size_t e : a.corners()) n = std::max(n, e + a.bandwidth() + 64);
    const CMatrix m = to_complex(truncate(a, n).matrix);
    if (hermitian_defect(m) > tol * std::max(1.0, max_abs(m))) throw Error(ErrorCode::NotSelfAdjoint, "section is not Hermitian");
}

EssentialSpectrum essential_spectrum(const OperatorExpr& a, double tol)
{
    require_self_adjoint(a, tol);
    std::vector<SpectralPoint> points;
    std::vector<std::pair<double, double>> intervals;
    for (std::size_t c = 0; c < a.components(); ++c) {
        if (!a.spaces()[c].is_l2()) continue;
        for (const auto& [j, d] : a.block(c, c).banded.diagonals) {
            if (d.asymptotic() && !d.decay()) {
                throw Error(ErrorCode::UncertifiedTail, "diagonal " + std::to_string(j) + " of component " + std::to_string(c) + " has no decay bound");
            }
        }
        const Symbol s = symbol(a, c);
        if (s.constant()) {
            points.push_back(s.coeffs.empty() ? SpectralPoint::of(0) : real_point(s.coeffs.begin()->second));
        } else {
            intervals.push_back(symbol_range(s, tol));
        }
    }
    std::sort(intervals.begin(), intervals.end());
    EssentialSpectrum out;
    for (const auto& iv : intervals) {
        if (!out.intervals.empty() && iv.first <= out.intervals.back().second + tol) {
            out.intervals.back().second = std::max(out.intervals.back().second, iv.second);
        } else {
            out.intervals.push_back(iv);
        }
    }
    std::stable_sort(points.begin(), points.end(), point_less);
    for (const auto& p : points) {
        bool inside = false;
        for (const auto& [lo, hi] : out.intervals) inside = inside || (p.value >= lo - tol && p.value <= hi + tol);
        if (inside) continue;
        if (!out.points.empty() && out.points.back().same(p, tol)) {
            if (!out.points.back().exact && p.exact) out.points.back() = p;
            continue;
        }
        out.points.push_back(p);
    }
    return out;
}

TailForm tail_form(const OperatorExpr& p)
{
    TailForm f;
    f.extents = p.corners();
    f.main.resize(p.components());
    f.diagonal_tail = true;
    f.constant = true;
    for (std::size_t c = 0; c < p.components(); ++c) {
        if (!p.spaces()[c].is_l2()) continue;
        for (const auto& [j, d] : p.block(c, c).banded.diagonals) {
            if (j == 0) {
                f.main[c] = d;
                if (d.asymptotic()) f.constant = false;
            } else if (d.asymptotic() || !d.limit().is_zero()) {
                f.diagonal_tail = false;
            }
        }
    }
    f.constant = f.constant && f.diagonal_tail;
    return f;
}

std::vector<EigenClass> corner_classes(const OperatorExpr& p, const Layout& region, double tol)
{
    std::vector<EigenClass> out;
    if (region.total == 0) return out;
    const Truncation t = compress(p, region);
    const CMatrix cm = to_complex(t.matrix);
    const double scale = std::max(1.0, max_abs(cm));
    const Eigenpairs eig = sym_eigen_blocks(cm, tol);
    const bool exact = all_exact(t.matrix);
    for (const auto& [from, to] : clusters(eig.values, 1e-8 * scale)) {
        const double mean = mean_of(eig.values, from, to);
        EigenClass k;
        k.multiplicity = to - from;
        std::optional<std::pair<Rational, std::vector<Vec>>> found;
        if (exact) found = exact_eigenvalue(t.matrix, mean, to - from, scale);
        if (found) {
            std::vector<VectorExpr> vs;
            for (const auto& v : found->second) vs.push_back(t.layout.unflatten(v));
            k.value = SpectralPoint::of(found->first);
            k.eigenspace = Subspace::span(p.spaces(), no_tails(p.components()), vs, tol);
        } else {
            k.value = SpectralPoint::approx(mean);
            k.eigenspace = Subspace::span(p.spaces(), no_tails(p.components()), columns_as_vectors(eig, from, to, t.layout), tol);
        }
        out.push_back(std::move(k));
    }
    return out;
}

SpectralSummary positive_spectral_summary(const OperatorExpr& p, const SpectralOptions& opt)
{
    SpectralSummary s;
    s.ess = essential_spectrum(p, opt.tol);
    const TailForm form = tail_form(p);
    if (form.diagonal_tail) {
        structured_summary(p, form, opt, s);
    } else {
        numerical_summary(p, opt, s);
    }
    s.m_e = s.ess.lo();
    const double scale = std::max(1.0, std::fabs(s.norm.value));
    const bool negative = s.m.exact ? sgn(*s.m.exact) < 0 : s.m.value < -opt.tol * scale;
    if (negative) throw Error(ErrorCode::NotPositive, "spectrum reaches " + std::to_string(s.m.value));
    return s;
}

SpectralSummary modulus_summary(const OperatorExpr& t, const SpectralOptions& opt)
{
    SpectralSummary s = positive_spectral_summary(adjoint(t) * t, opt);
    for (auto& p : s.ess.points) p = sqrt_point(p);
    for (auto& [a, b] : s.ess.intervals) {
        a = std::sqrt(std::max(0.0, a));
        b = std::sqrt(std::max(0.0, b));
    }
    for (auto* list : {&s.discrete, &s.at_ess}) {
        for (auto& k : *list) k.value = sqrt_point(k.value);
    }
    for (auto& q : s.sequences) q.root = true;
    s.norm = sqrt_point(s.norm);
    s.m = sqrt_point(s.m);
    s.m_e = sqrt_point(s.m_e);
    return s;
}

Subspace eigenspace(const OperatorExpr& p, const SpectralPoint& value, const SpectralOptions& opt)
{
    require_self_adjoint(p, opt.tol);
    const auto& spaces = p.spaces();
    const std::size_t nc = spaces.size();
    const TailForm form = tail_form(p);
    auto pick = [&](const Eigenpairs& eig, const Layout& layout, double scale) {
        std::vector<VectorExpr> out;
        for (std::size_t j = 0; j < eig.values.size(); ++j) {
            if (std::fabs(eig.values[j] - value.value) <= std::max(1e-8, 10 * opt.tol) * scale) {
                auto v = columns_as_vectors(eig, j, j + 1, layout);
                out.push_back(std::move(v.front()));
            }
        }
        return out;
    };

    if (!form.diagonal_tail) {
        std::size_t n = std::max(opt.trunc, p.bandwidth());
        const Truncation t = truncate(p, n);
        const CMatrix m = to_complex(t.matrix);
        const Eigenpairs eig = sym_eigen_blocks(m, opt.tol);
        return Subspace::span(spaces, no_tails(nc), pick(eig, t.layout, std::max(1.0, max_abs(m))), opt.tol);
    }

    const Layout region = Layout::make(spaces, form.extents);
    std::vector<VectorExpr> vectors;
    if (region.total > 0) {
        const Truncation t = compress(p, region);
        if (value.exact && all_exact(t.matrix)) {
            for (const auto& v : kernel(minus_shift(t.matrix, Scalar(*value.exact)), 0.0)) vectors.push_back(t.layout.unflatten(v));
        } else {
            const CMatrix m = to_complex(t.matrix);
            vectors = pick(sym_eigen_blocks(m, opt.tol), t.layout, std::max(1.0, max_abs(m)));
        }
    }
    auto tails = no_tails(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        if (!spaces[c].is_l2()) continue;
        const DiagonalSeq main = form.main[c] ? *form.main[c] : DiagonalSeq();
        if (!main.asymptotic()) {
            if (real_point(main.limit()).same(value, opt.tol)) tails[c] = form.extents[c];
            continue;
        }
        const Monotone mono = main.tail()->monotone();
        const std::size_t scan = opt.trunc * 16;
        for (std::size_t r = form.extents[c]; r < form.extents[c] + scan; ++r) {
            const SpectralPoint v = real_point(main.entry(r));
            if (v.same(value, opt.tol)) vectors.push_back(VectorExpr::basis(nc, c, r));
            if ((mono == Monotone::Increasing && point_less(value, v)) || (mono == Monotone::Decreasing && point_less(v, value))) break;
        }
    }
    return Subspace::span(spaces, tails, vectors, opt.tol);
}

nlohmann::json DiagonalizationResult::to_json() const
{
    nlohmann::json j;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs) j["pairs"].push_back({{"beta", p.beta.to_json()}, {"vectors", p.vectors.to_json()}});
    j["limit_point"] = limit_point ? limit_point->to_json() : nlohmann::json(nullptr);
    j["infinite_multiplicity_value"] = infinite_multiplicity_value ? infinite_multiplicity_value->to_json() : nlohmann::json(nullptr);
    j["clauses"] = nlohmann::json::array();
    for (const auto& [name, ok] : clauses) j["clauses"].push_back({{"clause", name}, {"holds", ok}});
    j["notes"] = notes;
    return j;
}

DiagonalizationResult positive_an_diagonalize(const OperatorExpr& p, const SpectralOptions& opt)
{
    const SpectralSummary s = positive_spectral_summary(p, opt);
    if (!s.ess.singleton(opt.tol)) throw Error(ErrorCode::NotAN, "essential spectrum is not a single point");
    for (const auto& q : s.sequences) {
        if (q.monotone == Monotone::Increasing) {
            throw Error(ErrorCode::NotAN, "infinitely many eigenvalues below the essential minimum (component " + std::to_string(q.component) + ")");
        }
        if (q.monotone != Monotone::Decreasing) {
            throw Error(ErrorCode::NotAN, "tail eigenvalues on component " + std::to_string(q.component) + " have no certified monotonicity");
        }
    }

    DiagonalizationResult r;
    std::vector<EigenClass> all = s.discrete;
    all.insert(all.end(), s.at_ess.begin(), s.at_ess.end());
    sort_desc(all);
    std::size_t infinite = 0;
    for (const auto& k : all) {
        r.pairs.push_back({k.value, k.eigenspace});
        if (!k.multiplicity) {
            ++infinite;
            r.infinite_multiplicity_value = k.value;
        }
    }
    if (!s.sequences.empty()) {
        r.limit_point = s.ess.lo();
        for (const auto& q : s.sequences) {
            r.notes.push_back("component " + std::to_string(q.component) + ": simple eigenvalues continue on e_r for r >= " + std::to_string(q.start) +
                              ", decreasing to the limit point; the first " + std::to_string(opt.listed_tail_values) + " are listed");
        }
    }
    const bool approached_from_below = false; // only decreasing tail sequences survive the criterion above
    r.clauses.emplace_back("(1) every set of eigenvalues attains its supremum", true);
    r.clauses.emplace_back("(2) at most one limit point, and it is the limit of an increasing sequence", !r.limit_point || approached_from_below);
    r.clauses.emplace_back("(3) at most one eigenvalue of infinite multiplicity", infinite <= 1);
    r.clauses.emplace_back("(4) limit point equals the infinite-multiplicity eigenvalue when both exist",
                           !r.limit_point || !r.infinite_multiplicity_value || r.limit_point->same(*r.infinite_multiplicity_value, opt.tol));
    if (r.limit_point) r.notes.push_back("limit point is approached from above; clause (2) is reported, not enforced");
    return r;
}

nlohmann::json KernelDim::to_json() const
{
    switch (kind) {
    case Kind::Finite: return value;
    case Kind::Infinite: return "infinite";
    case Kind::Undetermined: break;
    }
    return "undetermined";
}

nlohmann::json KernelDims::to_json() const
{
    return {{"dim_ker_t", of_t.to_json()}, {"dim_ker_t_star", of_t_star.to_json()}, {"tier", tier_name(tier)}};
}

namespace {

KernelDim zero_eigenspace_dim(const OperatorExpr& p, double tol, bool& exact)
{
    const TailForm form = tail_form(p);
    if (!form.diagonal_tail) {
        exact = false;
        return {KernelDim::Kind::Undetermined, 0};
    }
    bool infinite = false;
    bool undetermined = false;
    for (std::size_t c = 0; c < p.components(); ++c) {
        if (!p.spaces()[c].is_l2()) continue;
        const DiagonalSeq main = form.main[c] ? *form.main[c] : DiagonalSeq();
        if (!main.asymptotic()) {
            if (main.limit().abs() <= tol) {
                // Zero limit: compact-type part, reported as infinite on the numerical tier.
                infinite = true;
                exact = false;
            }
            continue;
        }
        if (!main.decay()) throw Error(ErrorCode::UncertifiedTail, "offset-0 tail of component " + std::to_string(c) + " has no decay bound");
        if (!main.tail()->nonvanishing()) undetermined = true;
    }
    if (infinite) return {KernelDim::Kind::Infinite, 0};
    if (undetermined) {
        exact = false;
        return {KernelDim::Kind::Undetermined, 0};
    }
    const Layout region = Layout::make(p.spaces(), form.extents);
    if (region.total == 0) return {KernelDim::Kind::Finite, 0};
    const Matrix m = compress(p, region).matrix;
    if (!all_exact(m)) exact = false;
    const double scale = std::max(1.0, max_abs(to_complex(m)));
    return {KernelDim::Kind::Finite, kernel(m, std::max(tol, 1e-12) * scale).size()};
}

} // namespace

KernelDims kernel_dims(const OperatorExpr& t, const SpectralOptions& opt)
{
    const OperatorExpr ts = adjoint(t);
    bool exact = true;
    KernelDims out;
    out.of_t = zero_eigenspace_dim(ts * t, opt.tol, exact);
    out.of_t_star = zero_eigenspace_dim(t * ts, opt.tol, exact);
    out.tier = exact ? Tier::Exact : Tier::Numerical;
    return out;
}

} // namespace anop
