#include <doctest.h>

#include <cmath>

#include "anop/error.hpp"
#include "anop/gallery.hpp"
#include "anop/spectral.hpp"
#include "support.hpp"

using namespace anop;
using anop::testing::Rng;
using anop::testing::small_scalar;
using anop::testing::uniform;

namespace {

const SpectralOptions kOpt{};

CMatrix random_hermitian(Rng& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = u(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            m(i, j) = Complex(u(rng), u(rng));
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

bool has_exact(const SpectralPoint& p, const Rational& q)
{
    return p.exact && *p.exact == q;
}

std::vector<Rational> exact_values(const std::vector<EigenClass>& cs)
{
    std::vector<Rational> out;
    for (const auto& c : cs) {
        REQUIRE(c.value.exact);
        out.push_back(*c.value.exact);
    }
    return out;
}

OperatorExpr rank_one(std::size_t i, const Scalar& v)
{
    OperatorExpr a({Space::l2()});
    a.add_entry(0, 0, i, i, v);
    return a;
}

/// Random exact operator whose off-diagonals are finitely supported, so that
/// a* a has a reducing corner.
OperatorExpr random_diagonal_tail(Rng& rng, const std::vector<Space>& spaces)
{
    OperatorExpr a(spaces);
    for (std::size_t c = 0; c < spaces.size(); ++c) {
        const std::size_t rows = spaces[c].is_l2() ? 4 : spaces[c].dim;
        if (spaces[c].is_l2()) a.add_diagonal(c, 0, DiagonalSeq(Scalar(uniform(rng, 1, 3))));
        for (std::size_t d = 0; d < spaces.size(); ++d) {
            const std::size_t cols = spaces[d].is_l2() ? 4 : spaces[d].dim;
            const long count = uniform(rng, 0, 3);
            for (long k = 0; k < count; ++k) {
                a.add_entry(c, d, static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(rows) - 1)),
                            static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(cols) - 1)), small_scalar(rng, false));
            }
        }
    }
    return a;
}

} // namespace

TEST_CASE("sym_eigen on small matrices")
{
    const Eigenpairs id = sym_eigen(CMatrix::identity(3), 1e-10);
    for (double v : id.values) CHECK(v == doctest::Approx(1.0));

    CMatrix swap(2, 2);
    swap(0, 1) = 1.0;
    swap(1, 0) = 1.0;
    const Eigenpairs e = sym_eigen(swap, 1e-10);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(-1.0));

    CMatrix bad(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(sym_eigen(bad, 1e-10), Error);
}

TEST_CASE("sym_eigen residuals and orthogonality on random Hermitian matrices")
{
    Rng rng(7);
    const double tol = 1e-10;
    for (std::size_t n : {1, 2, 5, 17, 40, 64}) {
        const CMatrix m = random_hermitian(rng, n);
        const Eigenpairs e = sym_eigen(m, tol);
        const double mnorm = spectral_norm(m);
        for (std::size_t j = 0; j < n; ++j) {
            const CVec v = e.vectors.column(j);
            CVec r = m * v;
            for (std::size_t i = 0; i < n; ++i) r[i] -= e.values[j] * v[i];
            CHECK(norm(r) <= 10 * tol * std::max(1.0, mnorm));
            for (std::size_t k = j + 1; k < n; ++k) CHECK(std::abs(inner(v, e.vectors.column(k))) <= 10 * tol);
            if (j > 0) CHECK(e.values[j - 1] >= e.values[j]);
        }
    }
}

TEST_CASE("block-split eigen solve matches the dense solve")
{
    Rng rng(11);
    CMatrix m(9, 9);
    const CMatrix a = random_hermitian(rng, 4);
    const CMatrix b = random_hermitian(rng, 3);
    const std::size_t ia[] = {0, 3, 5, 8};
    const std::size_t ib[] = {1, 2, 7};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) m(ia[i], ia[j]) = a(i, j);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) m(ib[i], ib[j]) = b(i, j);
    }
    m(4, 4) = 0.25;
    m(6, 6) = -3.0;
    const Eigenpairs dense = sym_eigen(m, 1e-10);
    const Eigenpairs split = sym_eigen_blocks(m, 1e-10);
    for (std::size_t j = 0; j < 9; ++j) {
        CHECK(split.values[j] == doctest::Approx(dense.values[j]).epsilon(1e-12));
        const CVec v = split.vectors.column(j);
        CVec r = m * v;
        for (std::size_t i = 0; i < 9; ++i) r[i] -= split.values[j] * v[i];
        CHECK(norm(r) <= 1e-9);
    }
}

TEST_CASE("corner of Example-1 T*T has eigenvalues 4, 2, 1")
{
    const OperatorExpr t = example1();
    const OperatorExpr p = adjoint(t) * t;
    const Truncation c = truncate(p, 2);
    const Eigenpairs e = sym_eigen(to_complex(c.matrix), 1e-10);
    std::vector<double> vals = e.values;
    REQUIRE(vals.size() == 4);
    CHECK(vals[0] == doctest::Approx(4));
    CHECK(vals[1] == doctest::Approx(4));
    CHECK(vals[2] == doctest::Approx(2));
    CHECK(vals[3] == doctest::Approx(1));
}

TEST_CASE("symbols")
{
    const Symbol s2 = symbol(scaled_shift(Scalar(2)), 0);
    REQUIRE(s2.coeffs.size() == 1);
    CHECK(s2.coeffs.at(1) == Scalar(2));
    for (double th : {0.0, 0.3, 1.7, 4.0}) {
        CHECK(std::abs(s2.at(th) - 2.0 * std::polar(1.0, th)) < 1e-14);
    }
    const Symbol j = symbol(jacobi(Scalar(0), Scalar(1)), 0);
    for (double th : {0.0, 0.3, 1.7, 4.0}) CHECK(std::abs(j.at(th) - 2.0 * std::cos(th)) < 1e-14);
    CHECK_FALSE(j.constant());

    const OperatorExpr t = scaled_shift(Scalar(2));
    const Symbol c = symbol(adjoint(t) * t, 0);
    CHECK(c.constant());
    CHECK(c.coeffs.at(0) == Scalar(4));

    try {
        symbol(example1(), 1);
        FAIL("expected FiniteComponent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FiniteComponent);
    }
}

TEST_CASE("symbol range matches dense sampling")
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        OperatorExpr a({Space::l2()});
        a.add_diagonal(0, 0, DiagonalSeq(Scalar::floating(uniform(rng, -3, 3))));
        for (long d = 1; d <= 3; ++d) {
            const Scalar v = Scalar::floating(uniform(rng, -4, 4) / 3.0, uniform(rng, -4, 4) / 5.0);
            a.add_diagonal(0, d, DiagonalSeq(v));
            a.add_diagonal(0, -d, DiagonalSeq(v.conj()));
        }
        const Symbol s = symbol(a, 0);
        const auto [lo, hi] = symbol_range(s, 1e-12);
        double dlo = 1e300, dhi = -1e300;
        for (int k = 0; k < 200000; ++k) {
            const double v = s.at(2 * M_PI * k / 200000.0).real();
            dlo = std::min(dlo, v);
            dhi = std::max(dhi, v);
        }
        CHECK(lo <= dlo + 1e-12);
        CHECK(hi >= dhi - 1e-12);
        CHECK(lo == doctest::Approx(dlo).epsilon(1e-8));
        CHECK(hi == doctest::Approx(dhi).epsilon(1e-8));
    }
}

TEST_CASE("essential spectra")
{
    const OperatorExpr p = identity_operator({Space::l2()}) - rank_one(0, Scalar(1));
    const EssentialSpectrum e1 = essential_spectrum(p, 1e-10);
    REQUIRE(e1.points.size() == 1);
    CHECK(has_exact(e1.points[0], 1));
    CHECK(e1.intervals.empty());

    const OperatorExpr t = example2();
    const EssentialSpectrum e2 = essential_spectrum(t * adjoint(t), 1e-10);
    REQUIRE(e2.points.size() == 2);
    CHECK(has_exact(e2.points[0], 0));
    CHECK(has_exact(e2.points[1], 1));
    CHECK(e2.exact());

    const EssentialSpectrum e3 = essential_spectrum(jacobi(Scalar(0), Scalar(1)), 1e-10);
    REQUIRE(e3.intervals.size() == 1);
    CHECK(e3.intervals[0].first == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(e3.intervals[0].second == doctest::Approx(2.0).epsilon(1e-12));

    try {
        essential_spectrum(right_shift(), 1e-10);
        FAIL("expected NotSelfAdjoint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotSelfAdjoint);
    }
}

TEST_CASE("essential spectrum is unchanged by finite-rank perturbations")
{
    Rng rng(19);
    for (int trial = 0; trial < 40; ++trial) {
        const auto spaces = testing::random_spaces(rng);
        const OperatorExpr a = testing::random_exact_operator(rng, spaces);
        const OperatorExpr h = a + adjoint(a);
        OperatorExpr k(spaces);
        for (int n = 0; n < 3; ++n) {
            const std::size_t c = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(spaces.size()) - 1));
            const std::size_t lim = spaces[c].is_l2() ? 6 : spaces[c].dim;
            k.add_entry(c, c, static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(lim) - 1)),
                        static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(lim) - 1)), small_scalar(rng));
        }
        const OperatorExpr hk = h + k + adjoint(k);
        const EssentialSpectrum e0 = essential_spectrum(h, 1e-10);
        const EssentialSpectrum e1 = essential_spectrum(hk, 1e-10);
        REQUIRE(e0.points.size() == e1.points.size());
        for (std::size_t i = 0; i < e0.points.size(); ++i) {
            CHECK(e0.points[i].exact == e1.points[i].exact);
        }
        REQUIRE(e0.intervals.size() == e1.intervals.size());
        for (std::size_t i = 0; i < e0.intervals.size(); ++i) {
            CHECK(e0.intervals[i].first == e1.intervals[i].first);
            CHECK(e0.intervals[i].second == e1.intervals[i].second);
        }
    }
}

TEST_CASE("summary of diag(5,3,2,2,...) against a dense section")
{
    const OperatorExpr p = diagonal_operator({Scalar(5), Scalar(3)}, Scalar(2));
    const SpectralSummary s = positive_spectral_summary(p, kOpt);
    CHECK(s.tier == Tier::Exact);
    REQUIRE(s.ess.points.size() == 1);
    CHECK(has_exact(s.ess.points[0], 2));
    CHECK(exact_values(s.discrete) == std::vector<Rational>{5, 3});
    CHECK(has_exact(s.m, 2));
    CHECK(has_exact(s.m_e, 2));
    CHECK(has_exact(s.norm, 5));

    const Eigenpairs oracle = jacobi_eigen(to_complex(truncate(p, 32).matrix));
    CHECK(oracle.values[0] == doctest::Approx(5));
    CHECK(oracle.values[1] == doctest::Approx(3));
    CHECK(oracle.values[2] == doctest::Approx(2));

    const SpectralSummary id = positive_spectral_summary(identity_operator({Space::l2()}), kOpt);
    CHECK(id.discrete.empty());
    CHECK(has_exact(id.m, 1));
    CHECK(has_exact(id.m_e, 1));
}

TEST_CASE("Example-1 T*T and modulus summaries")
{
    const OperatorExpr t = example1();
    const SpectralSummary s = positive_spectral_summary(adjoint(t) * t, kOpt);
    CHECK(s.tier == Tier::Exact);
    REQUIRE(s.ess.points.size() == 1);
    CHECK(has_exact(s.ess.points[0], 4));
    CHECK(exact_values(s.discrete) == std::vector<Rational>{2, 1});
    CHECK(has_exact(s.m, 1));
    CHECK(has_exact(s.m_e, 4));
    REQUIRE(s.at_ess.size() == 1);
    CHECK_FALSE(s.at_ess[0].multiplicity);

    const SpectralSummary m = modulus_summary(t, kOpt);
    REQUIRE(m.discrete.size() == 2);
    CHECK(m.discrete[0].value.value == doctest::Approx(std::sqrt(2.0)));
    CHECK_FALSE(m.discrete[0].value.exact);
    CHECK(has_exact(m.discrete[1].value, 1));
    CHECK(has_exact(m.norm, 2));
    CHECK(has_exact(m.m, 1));
    CHECK(has_exact(m.m_e, 2));
}

TEST_CASE("modulus of 2S and of zero")
{
    const SpectralSummary s = modulus_summary(scaled_shift(Scalar(2)), kOpt);
    CHECK(s.discrete.empty());
    CHECK(has_exact(s.m, 2));
    CHECK(has_exact(s.m_e, 2));
    CHECK(has_exact(s.norm, 2));

    const SpectralSummary z = modulus_summary(zero_operator({Space::l2()}), kOpt);
    REQUIRE(z.ess.points.size() == 1);
    CHECK(has_exact(z.ess.points[0], 0));
    CHECK(has_exact(z.m, 0));
}

TEST_CASE("summaries agree with dense sections on random exact operators")
{
    Rng rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const auto spaces = testing::random_spaces(rng);
        const OperatorExpr a = random_diagonal_tail(rng, spaces);
        const OperatorExpr p = adjoint(a) * a;
        const SpectralSummary s = positive_spectral_summary(p, kOpt);
        const Eigenpairs oracle = sym_eigen_blocks(to_complex(truncate(p, 256).matrix), 1e-12);

        CHECK(s.m.value <= s.m_e.value + 1e-12);
        CHECK(s.m_e.value <= s.norm.value + 1e-12);
        for (const auto& c : s.discrete) {
            std::size_t hits = 0;
            for (double v : oracle.values) hits += std::fabs(v - c.value.value) <= 1e-8 ? 1 : 0;
            CHECK(hits >= *c.multiplicity);
            for (const auto& v : c.eigenspace.extras()) {
                const VectorExpr r = apply(p, v) - v.scaled(c.value.exact ? Scalar(*c.value.exact) : Scalar::floating(c.value.value));
                if (c.value.exact && v.exact()) {
                    CHECK(r.is_zero());
                } else {
                    CHECK(std::sqrt(norm2(r).real()) <= 1e-8 * std::sqrt(norm2(v).real()));
                }
            }
        }
        // Every section eigenvalue is a listed eigenvalue or an essential point.
        for (double v : oracle.values) {
            bool found = s.ess.distance(v) <= 1e-8;
            for (const auto* list : {&s.discrete, &s.at_ess}) {
                for (const auto& c : *list) found = found || std::fabs(c.value.value - v) <= 1e-8;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("square-root consistency of the norm")
{
    Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spaces = testing::random_spaces(rng);
        const OperatorExpr t = random_diagonal_tail(rng, spaces);
        const SpectralSummary m = modulus_summary(t, kOpt);
        const SpectralSummary p = positive_spectral_summary(adjoint(t) * t, kOpt);
        CHECK(std::fabs(m.norm.value * m.norm.value - p.norm.value) <= 1e-10 * std::max(1.0, p.norm.value));
        CHECK(m.m.value <= m.m_e.value + 1e-12);
        CHECK(m.m_e.value <= m.norm.value + 1e-12);
    }
}

TEST_CASE("non-positive operators are rejected")
{
    const OperatorExpr p = diagonal_operator({Scalar(-1)}, Scalar(1));
    try {
        positive_spectral_summary(p, kOpt);
        FAIL("expected NotPositive");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotPositive);
    }
}

TEST_CASE("numerical path for non-diagonal tails")
{
    // (S + S*)^2 + 4I has essential spectrum [4, 8] and no eigenvalues.
    const OperatorExpr j = jacobi(Scalar(0), Scalar(1));
    const OperatorExpr p = j * j + scaled(identity_operator({Space::l2()}), Scalar(4));
    const SpectralSummary s = positive_spectral_summary(p, kOpt);
    CHECK(s.tier == Tier::Numerical);
    REQUIRE(s.ess.intervals.size() == 1);
    CHECK(s.ess.intervals[0].first == doctest::Approx(4.0));
    CHECK(s.ess.intervals[0].second == doctest::Approx(8.0));
    CHECK(s.discrete.empty());
    CHECK(s.m.value == doctest::Approx(4.0));
    CHECK(s.norm.value == doctest::Approx(8.0));

    // A rank-one bump at the corner produces an eigenvalue above the band.
    const OperatorExpr q = p + rank_one(0, Scalar(10));
    const SpectralSummary sq = positive_spectral_summary(q, kOpt);
    REQUIRE(sq.discrete.size() == 1);
    CHECK(sq.discrete[0].value.value > 8.0);
    const Eigenpairs oracle = jacobi_eigen(to_complex(truncate(q, 200).matrix));
    CHECK(sq.discrete[0].value.value == doctest::Approx(oracle.values[0]).epsilon(1e-10));
}

TEST_CASE("Example-2 asymptotic summary")
{
    const OperatorExpr t = example2();
    const SpectralSummary s = positive_spectral_summary(adjoint(t) * t, kOpt);
    REQUIRE(s.ess.points.size() == 2);
    CHECK(has_exact(s.ess.points[0], 0));
    CHECK(has_exact(s.ess.points[1], 1));
    REQUIRE(s.sequences.size() == 1);
    CHECK(s.sequences[0].monotone == Monotone::Decreasing);
    CHECK(has_exact(s.m, 0));
    CHECK(has_exact(s.m_e, 0));
    CHECK(has_exact(s.norm, 1));
}

TEST_CASE("positive AN diagonalization")
{
    const DiagonalizationResult d = positive_an_diagonalize(diagonal_operator({Scalar(5), Scalar(3)}, Scalar(2)), kOpt);
    REQUIRE(d.pairs.size() == 3);
    CHECK(has_exact(d.pairs[0].beta, 5));
    CHECK(same_subspace(d.pairs[0].vectors, Subspace::span({Space::l2()}, {std::nullopt}, {VectorExpr::basis(1, 0, 0)}, 0), 0));
    CHECK(has_exact(d.pairs[1].beta, 3));
    CHECK(has_exact(d.pairs[2].beta, 2));
    CHECK(d.pairs[2].vectors.kind() == SubspaceKind::Cofinite);
    CHECK(d.pairs[2].vectors.tails()[0] == std::optional<std::size_t>(2));
    REQUIRE(d.infinite_multiplicity_value);
    CHECK_FALSE(d.limit_point);
    for (const auto& [name, ok] : d.clauses) CHECK_MESSAGE(ok, name);

    const DiagonalizationResult id = positive_an_diagonalize(identity_operator({Space::l2()}), kOpt);
    REQUIRE(id.pairs.size() == 1);
    CHECK(id.pairs[0].vectors.kind() == SubspaceKind::Full);

    const OperatorExpr t = example1();
    const DiagonalizationResult e = positive_an_diagonalize(adjoint(t) * t, kOpt);
    REQUIRE(e.pairs.size() == 3);
    CHECK(has_exact(e.pairs[0].beta, 4));
    CHECK(e.pairs[0].vectors.tails()[0] == std::optional<std::size_t>(0));
    CHECK(e.pairs[0].vectors.extras().empty());
    CHECK(same_subspace(e.pairs[1].vectors, Subspace::span(t.spaces(), {std::nullopt, std::nullopt}, {VectorExpr::basis(2, 1, 0)}, 0), 0));
    CHECK(same_subspace(e.pairs[2].vectors, Subspace::span(t.spaces(), {std::nullopt, std::nullopt}, {VectorExpr::basis(2, 1, 1)}, 0), 0));
}

TEST_CASE("AN criterion on monotone tails")
{
    OperatorExpr inc({Space::l2()});
    inc.add_diagonal(0, 0, DiagonalSeq({}, make_inverse_power(Scalar(1), Scalar(-1), 1, 1)));
    try {
        positive_an_diagonalize(inc, kOpt);
        FAIL("expected NotAN");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotAN);
    }

    OperatorExpr dec({Space::l2()});
    dec.add_diagonal(0, 0, DiagonalSeq({}, make_inverse_power(Scalar(1), Scalar(1), 1, 1)));
    const DiagonalizationResult d = positive_an_diagonalize(dec, kOpt);
    REQUIRE(d.limit_point);
    CHECK(has_exact(*d.limit_point, 1));
    CHECK(has_exact(d.pairs.front().beta, 2));
    bool clause2 = true;
    for (const auto& [name, ok] : d.clauses) {
        if (name.rfind("(2)", 0) == 0) clause2 = ok;
    }
    CHECK_FALSE(clause2);

    try {
        positive_an_diagonalize(direct_sum(identity_operator({Space::l2()}), scaled(identity_operator({Space::l2()}), Scalar(2))), kOpt);
        FAIL("expected NotAN");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotAN);
    }
}

TEST_CASE("kernel dimensions")
{
    const KernelDims s = kernel_dims(scaled_shift(Scalar(2)), kOpt);
    CHECK(s.of_t == KernelDim{KernelDim::Kind::Finite, 0});
    CHECK(s.of_t_star == KernelDim{KernelDim::Kind::Finite, 1});
    CHECK(s.tier == Tier::Exact);

    const KernelDims e = kernel_dims(example2(), kOpt);
    CHECK(e.of_t == KernelDim{KernelDim::Kind::Finite, 0});
    CHECK(e.of_t_star == KernelDim{KernelDim::Kind::Finite, 0});

    const KernelDims i = kernel_dims(identity_operator({Space::l2(), Space::finite(2)}), kOpt);
    CHECK(i.of_t == KernelDim{KernelDim::Kind::Finite, 0});
    CHECK(i.of_t_star == KernelDim{KernelDim::Kind::Finite, 0});

    const KernelDims z = kernel_dims(zero_operator({Space::l2()}), kOpt);
    CHECK(z.of_t.kind == KernelDim::Kind::Infinite);
    CHECK(z.tier == Tier::Numerical);
}

TEST_CASE("eigenspaces")
{
    const OperatorExpr t = example1();
    const OperatorExpr tts = t * adjoint(t);
    const Subspace h = eigenspace(tts, SpectralPoint::of(4), kOpt);
    // N(TT* - 4) = {x1 = 0, y = 0}: cofinite from coordinate 1 of the l2 part.
    CHECK(h.tails()[0] == std::optional<std::size_t>(1));
    CHECK(h.extras().empty());

    const Subspace none = eigenspace(tts, SpectralPoint::of(7), kOpt);
    CHECK(none.kind() == SubspaceKind::Zero);
}

TEST_CASE("summary JSON shape")
{
    const SpectralSummary s = positive_spectral_summary(diagonal_operator({Scalar(5), Scalar(3)}, Scalar(2)), kOpt);
    const nlohmann::json j = s.to_json();
    CHECK(j.at("tier") == "Exact");
    CHECK(j.at("m") == 2);
    CHECK(j.at("discrete").size() == 2);
    CHECK(j.at("discrete")[0].at("value") == 5);
    CHECK(j.at("discrete")[0].at("mult") == 1);
    CHECK(j.at("ess").at("points")[0] == 2);
}
