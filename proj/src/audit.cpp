#include <functional>
#include <future>
#include <iomanip>
#include <random>
#include <sstream>

#include "anop/decomposition.hpp"
#include "anop/error.hpp"
#include "anop/gallery.hpp"
#include "anop/json_scalar.hpp"
#include "anop/linalg.hpp"
#include "anop/serialize.hpp"
#include "anop/spectral.hpp"

namespace anop {

namespace {

using Display = std::function<VectorExpr(const VectorExpr&)>;

constexpr std::size_t kVectors = 50;
constexpr std::size_t kExtent = 8;

std::optional<bool> agreement_of(bool computed_holds, bool claim_asserts)
{
    return computed_holds == claim_asserts;
}

std::vector<VectorExpr> random_vectors(const std::vector<Space>& spaces, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto pick = [&](long lo, long hi) { return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    std::vector<VectorExpr> out;
    for (std::size_t k = 0; k < kVectors; ++k) {
        VectorExpr x(spaces.size());
        for (std::size_t c = 0; c < spaces.size(); ++c) {
            const std::size_t len = spaces[c].is_l2() ? kExtent : spaces[c].dim;
            for (std::size_t i = 0; i < len; ++i) {
                Rational re(pick(-6, 6), pick(1, 4)), im(pick(-3, 3), pick(1, 4));
                re.canonicalize();
                im.canonicalize();
                x.set(c, i, Scalar(re, im));
            }
        }
        x.prune();
        out.push_back(std::move(x));
    }
    return out;
}

std::size_t agreeing(const OperatorExpr& op, const Display& shown, const std::vector<VectorExpr>& xs)
{
    std::size_t n = 0;
    for (const VectorExpr& x : xs) {
        VectorExpr a = apply(op, x), b = shown(x);
        a.prune();
        b.prune();
        if (a == b) ++n;
    }
    return n;
}

// Checks one displayed formula against both T*T and TT*.
AuditRecord display_record(const std::string& id, const std::string& claim, bool labelled_t_star_t, const OperatorExpr& t,
                           const Display& shown, std::uint64_t seed)
{
    const std::vector<VectorExpr> xs = random_vectors(t.spaces(), seed);
    const std::size_t tst = agreeing(adjoint(t) * t, shown, xs);
    const std::size_t ttst = agreeing(t * adjoint(t), shown, xs);
    AuditRecord r;
    r.id = id;
    r.claim = claim;
    r.computed = {{"vectors", xs.size()},
                  {"seed", seed},
                  {"agrees_with_T*T", tst},
                  {"agrees_with_TT*", ttst},
                  {"matches_T*T", tst == xs.size()},
                  {"matches_TT*", ttst == xs.size()}};
    const bool label_holds = labelled_t_star_t ? tst == xs.size() : ttst == xs.size();
    r.agreement = label_holds;
    if (!label_holds) {
        if (tst == xs.size()) r.note = "the displayed map equals T*T";
        else if (ttst == xs.size()) r.note = "the displayed map equals TT*";
        else r.note = "the displayed map equals neither T*T nor TT*";
    }
    return r;
}

Scalar at(const VectorExpr& v, std::size_t c, std::size_t i) { return v.get(c, i); }

// Example 1 displays, coordinates ((x), (y)).
VectorExpr example1_first_display(const VectorExpr& v)
{
    VectorExpr o(2);
    for (const auto& [i, s] : v.parts[0]) o.set(0, i, s * Scalar(4));
    o.set(1, 0, at(v, 1, 0) * Scalar(2));
    o.set(1, 1, at(v, 1, 1));
    return o;
}

VectorExpr example1_second_display(const VectorExpr& v)
{
    VectorExpr o(2);
    for (const auto& [i, s] : v.parts[0]) {
        if (i > 0) o.set(0, i, s * Scalar(4));
    }
    o.set(0, 0, at(v, 1, 0) + at(v, 0, 0));
    o.set(1, 0, at(v, 0, 0) + at(v, 1, 0));
    o.set(1, 1, at(v, 1, 1));
    return o;
}

// Example 2 displays, coordinates ((x), (s)).
VectorExpr example2_tt_star_display(const VectorExpr& v)
{
    VectorExpr o(2);
    for (const auto& [i, s] : v.parts[0]) {
        const Rational w = i < 2 ? Rational(1) : Rational(1, static_cast<unsigned long>(i * i));
        o.set(0, i, s * Scalar(w));
    }
    o.parts[1] = v.parts[1];
    return o;
}

VectorExpr example2_t_star_t_display(const VectorExpr& v)
{
    VectorExpr o(2);
    for (const auto& [i, s] : v.parts[0]) o.set(0, i, s * Scalar(Rational(1, static_cast<unsigned long>((i + 1) * (i + 1)))));
    o.parts[1] = v.parts[1];
    return o;
}

std::vector<AuditRecord> example1_formulas(const PredicateOptions& opt)
{
    const OperatorExpr t = example1();
    return {display_record("example1.first-display", "T*T((x),(y)) = ((4x1, 4x2, ...), (2y1, y2))", true, t,
                           example1_first_display, opt.seed),
            display_record("example1.second-display", "T*T((x),(y)) = ((y1 + x1, 4x2, ...), (x1 + y1, y2))", true, t,
                           example1_second_display, opt.seed)};
}

// Matrix of first - second display on the section, restricted to the
// coordinates where it is nonzero.
std::pair<Matrix, nlohmann::json> display_commutator_corner(std::size_t extent)
{
    const Layout lay = Layout::make({Space::l2(), Space::finite(2)}, std::vector<std::size_t>{extent, 2});
    Matrix d(lay.total, lay.total);
    for (std::size_t j = 0; j < lay.total; ++j) {
        const auto [c, i] = lay.locate(j);
        const VectorExpr e = VectorExpr::basis(2, c, i);
        const std::vector<Scalar> col = lay.flatten(example1_first_display(e) - example1_second_display(e));
        for (std::size_t r = 0; r < lay.total; ++r) d(r, j) = col[r];
    }
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < lay.total; ++k) {
        bool nz = false;
        for (std::size_t m = 0; m < lay.total && !nz; ++m) nz = !d(k, m).is_zero() || !d(m, k).is_zero();
        if (nz) active.push_back(k);
    }
    Matrix corner(active.size(), active.size());
    nlohmann::json coords = nlohmann::json::array();
    for (std::size_t a = 0; a < active.size(); ++a) {
        for (std::size_t b = 0; b < active.size(); ++b) corner(a, b) = d(active[a], active[b]);
        const auto [c, i] = lay.locate(active[a]);
        coords.push_back({{"component", c}, {"index", i}});
    }
    return {corner, coords};
}

AuditRecord example1_hyponormality(const PredicateOptions& opt)
{
    AuditRecord r;
    r.id = "example1.hyponormality";
    r.claim = "T is not hyponormal";
    const auto [corner, coords] = display_commutator_corner(kExtent);
    const PsdDecision psd = decide_psd(corner);
    const PredicateVerdict v = hyponormal_check(example1(), opt);
    const nlohmann::json from_displays = matrix_to_json(corner);
    const nlohmann::json from_operator = v.evidence.value("corner_matrix", nlohmann::json());
    r.computed = {{"corner_from_displays", from_displays},
                  {"active_coordinates", coords},
                  {"corner_from_operator", from_operator},
                  {"corners_equal", from_displays == from_operator},
                  {"corner_psd", psd.psd},
                  {"hyponormal_status", status_name(v.status)}};
    r.artifacts = {{"verdict", v.to_json()}};
    if (!psd.psd) r.artifacts["psd_witness"] = scalar_to_json(psd.witness_form);
    if (v.status == VerdictStatus::Proven) r.agreement = false;
    else if (v.status == VerdictStatus::Refuted) r.agreement = true;
    r.note = "T*T - TT* computed from the displays";
    return r;
}

AuditRecord example1_coupling(const PredicateOptions& opt)
{
    AuditRecord r;
    r.id = "example1.coupling";
    r.claim = "T = [[2S, A], [0, B]] with S*A = 0";
    const std::vector<Space> sp{Space::l2(), Space::finite(2)};
    OperatorExpr shift(sp), a(sp), b(sp);
    shift.add_diagonal(0, 1, DiagonalSeq(Scalar(1)));
    a.add_entry(0, 1, 0, 0, Scalar(1));
    b.add_entry(1, 1, 0, 0, Scalar(1));
    b.add_entry(1, 1, 1, 1, Scalar(1));
    const OperatorExpr assembled = scaled(shift, Scalar(2)) + a + b;
    const OperatorExpr t = example1();

    const std::vector<VectorExpr> xs = random_vectors(sp, opt.seed);
    const bool same_operator = agreeing(assembled, [&](const VectorExpr& x) { return apply(t, x); }, xs) == xs.size();
    // A has rank at most 2 and lives on C^2, so S*A vanishes iff it kills both basis vectors.
    const OperatorExpr sa = adjoint(shift) * a;
    bool sa_zero = true;
    for (std::size_t i = 0; i < 2; ++i) sa_zero = sa_zero && apply(sa, VectorExpr::basis(2, 1, i)).is_zero();

    DecomposeOptions dopt;
    dopt.predicate = opt;
    const DecompositionCertificate cert = peel_decompose(t, dopt);
    const bool cert_zero = cert.tier == Tier::Exact ? cert.s_star_a_norm == 0.0 : cert.s_star_a_norm <= opt.tol;
    r.computed = {{"stated_blocks_reproduce_T", same_operator},
                  {"stated_s_star_a_zero", sa_zero},
                  {"s_star_a_norm", cert.s_star_a_norm},
                  {"certificate_tier", tier_name(cert.tier)},
                  {"m_e", cert.m_e.to_json()}};
    r.artifacts = {{"certificate", cert.to_json()}};
    r.agreement = same_operator && sa_zero && cert_zero;
    r.note = "checked for the stated blocks and for the computed decomposition";
    return r;
}

std::vector<AuditRecord> example2_records(const PredicateOptions& opt)
{
    const OperatorExpr t = example2();
    const OperatorExpr ts = adjoint(t);
    std::vector<AuditRecord> out;
    out.push_back(display_record("example2.tt-star-display", "TT*((x),(s)) = ((x1, x2, x3/4, x4/9, ...), (s))", false, t,
                                 example2_tt_star_display, opt.seed));
    out.push_back(display_record("example2.t-star-t-display", "T*T((x),(s)) = ((x1, x2/4, x3/9, ...), (s))", true, t,
                                 example2_t_star_t_display, opt.seed));

    {
        AuditRecord r;
        r.id = "example2.kernels";
        r.claim = "N(T) = {0} = N(T*)";
        const KernelDims k = kernel_dims(t, opt.spectral());
        r.computed = k.to_json();
        const KernelDim zero{KernelDim::Kind::Finite, 0};
        r.agreement = agreement_of(k.of_t == zero && k.of_t_star == zero, true);
        out.push_back(std::move(r));
    }
    {
        AuditRecord r;
        r.id = "example2.adjoint-hyponormal";
        r.claim = "T* is hyponormal";
        const PredicateVerdict h = hyponormal_check(ts, opt);
        const PredicateVerdict s = star_paranormal_refute(ts, opt);
        r.computed = {{"hyponormal_status", status_name(h.status)}, {"sampling_status", status_name(s.status)}};
        r.artifacts = {{"hyponormal", h.to_json()}, {"sampling", s.to_json()}};
        if (h.status == VerdictStatus::Refuted) r.agreement = false;
        else if (h.status == VerdictStatus::Proven || h.status == VerdictStatus::Numerical) r.agreement = s.status != VerdictStatus::Refuted;
        if (h.status == VerdictStatus::Numerical) r.note = "corner exact; commutator tail checked on a finite range";
        out.push_back(std::move(r));
    }
    {
        AuditRecord r;
        r.id = "example2.essential-spectrum";
        r.claim = "sigma_ess(TT*) = {0, 1}";
        const EssentialSpectrum e = essential_spectrum(t * ts, opt.tol);
        std::string listed;
        for (const SpectralPoint& q : e.points) listed += (listed.empty() ? "" : ", ") + (q.exact ? q.exact->get_str() : std::to_string(q.value));
        r.computed = {{"ess", e.to_json()}, {"exact", e.exact()}, {"points", "{" + listed + "}"}};
        const bool expected = e.exact() && e.intervals.empty() && e.points.size() == 2 && e.points[0].exact == Rational(0) &&
                              e.points[1].exact == Rational(1);
        r.agreement = expected;
        out.push_back(std::move(r));
    }
    {
        AuditRecord r;
        r.id = "example2.adjoint-an";
        r.claim = "T* is not absolutely norm attaining";
        const PredicateVerdict v = an_check(ts, opt);
        r.computed = {{"status", status_name(v.status)}};
        r.artifacts = {{"verdict", v.to_json()}};
        if (v.status == VerdictStatus::Refuted) r.agreement = true;
        else if (v.status == VerdictStatus::Proven) r.agreement = false;
        out.push_back(std::move(r));
    }
    return out;
}

// N(TT* - ||T||^2) computed on its own, then tested for containment in M.
AuditRecord m_star_spot_check(const std::string& name, const OperatorExpr& t, const PredicateOptions& opt)
{
    AuditRecord r;
    r.id = "mstar-in-m." + name;
    r.claim = "for *-paranormal T, M* is contained in M";
    const PredicateVerdict hyp = star_paranormal_check(t, opt);
    const NormSubspaces ns = compute_M_and_Mstar(t, opt);
    const SpectralPoint norm2 = positive_spectral_summary(adjoint(t) * t, opt.spectral()).norm;
    const Subspace m_star = eigenspace(t * adjoint(t), norm2, opt.spectral());
    const double tol = ns.m.exact() && m_star.exact() ? 0.0 : opt.tol;
    const bool contained = ns.m.contains(m_star, tol);
    r.computed = {{"star_paranormal_status", status_name(hyp.status)},
                  {"norm", ns.norm.to_json()},
                  {"m", ns.m.to_json()},
                  {"m_star", m_star.to_json()},
                  {"contained", contained}};
    if (hyp.status == VerdictStatus::Refuted) r.note = "hypothesis fails; containment not required";
    else r.agreement = contained;
    return r;
}

std::vector<AuditRecord> m_star_records(const PredicateOptions& opt)
{
    Matrix swap(2, 2);
    swap(0, 1) = Scalar(1);
    swap(1, 0) = Scalar(1);
    TheoremForm plain;
    plain.levels.emplace_back(Scalar(3), swap);
    plain.m_e = Scalar(2);
    TheoremForm coupled = plain;
    coupled.a = Matrix(1, 1);
    coupled.a(0, 0) = Scalar(1);
    coupled.b = Matrix(1, 1);
    coupled.b(0, 0) = Scalar(Rational(1, 2));

    std::vector<AuditRecord> out;
    out.push_back(m_star_spot_check("example1", example1(), opt));
    out.push_back(m_star_spot_check("scaled-shift", scaled_shift(Scalar(2)), opt));
    out.push_back(m_star_spot_check("example2-adjoint", adjoint(example2()), opt));
    out.push_back(m_star_spot_check("unitary-plus-shift", theorem_form(plain), opt));
    out.push_back(m_star_spot_check("unitary-plus-coupled-shift", theorem_form(coupled), opt));
    return out;
}

std::string agreement_text(const std::optional<bool>& a)
{
    if (!a) return "n/a";
    return *a ? "agree" : "DISAGREE";
}

std::string brief(const nlohmann::json& computed)
{
    std::string out;
    for (const auto& [k, v] : computed.items()) {
        if (!v.is_primitive()) continue;
        if (!out.empty()) out += ", ";
        out += k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
    }
    return out;
}

} // namespace

nlohmann::json AuditRecord::to_json() const
{
    return {{"id", id},
            {"claim", claim},
            {"computed", computed},
            {"agreement", agreement ? nlohmann::json(*agreement) : nlohmann::json()},
            {"artifacts", artifacts},
            {"note", note}};
}

const AuditRecord& AuditReport::record(const std::string& id) const
{
    for (const AuditRecord& r : records) {
        if (r.id == id) return r;
    }
    throw Error(ErrorCode::BadParams, "no audit record '" + id + "'");
}

nlohmann::json AuditReport::to_json() const
{
    nlohmann::json rs = nlohmann::json::array();
    for (const AuditRecord& r : records) rs.push_back(r.to_json());
    return {{"config", config.to_json()}, {"records", rs}};
}

std::string AuditReport::to_text() const
{
    std::size_t w_id = 2, w_claim = 5;
    for (const AuditRecord& r : records) {
        w_id = std::max(w_id, r.id.size());
        w_claim = std::max(w_claim, r.claim.size());
    }
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w_id)) << "id" << "  " << std::setw(static_cast<int>(w_claim)) << "claim"
       << "  " << std::setw(8) << "result" << "  computed\n";
    for (const AuditRecord& r : records) {
        os << std::setw(static_cast<int>(w_id)) << r.id << "  " << std::setw(static_cast<int>(w_claim)) << r.claim << "  "
           << std::setw(8) << agreement_text(r.agreement) << "  " << brief(r.computed);
        if (!r.note.empty()) os << " (" << r.note << ")";
        os << "\n";
    }
    return os.str();
}

AuditReport audit(const PredicateOptions& opt)
{
    using Group = std::function<std::vector<AuditRecord>()>;
    const std::vector<Group> groups{
        [&] { return example1_formulas(opt); },
        [&] { return std::vector<AuditRecord>{example1_hyponormality(opt)}; },
        [&] { return std::vector<AuditRecord>{example1_coupling(opt)}; },
        [&] { return example2_records(opt); },
        [&] { return m_star_records(opt); },
    };
    std::vector<std::future<std::vector<AuditRecord>>> running;
    for (const Group& g : groups) running.push_back(std::async(std::launch::async, g));
    AuditReport report;
    report.config = opt;
    for (auto& f : running) {
        for (AuditRecord& r : f.get()) report.records.push_back(std::move(r));
    }
    return report;
}

} // namespace anop
