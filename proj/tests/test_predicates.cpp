#include <doctest.h>

#include "anop/error.hpp"
#include "anop/gallery.hpp"
#include "anop/json_scalar.hpp"
#include "anop/predicates.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace anop;
using anop::testing::Rng;
using anop::testing::uniform;

namespace {

PredicateOptions quick(std::size_t samples = 2000)
{
    PredicateOptions o;
    o.samples = samples;
    o.trunc = 48;
    return o;
}

} // namespace

TEST_CASE("normality")
{
    CHECK(is_normal(identity_operator({Space::l2()}), quick()).status == VerdictStatus::Proven);

    const OperatorExpr s2 = scaled_shift(Scalar(2));
    const PredicateVerdict v = is_normal(s2, quick());
    REQUIRE(v.status == VerdictStatus::Refuted);
    CHECK(*v.witness == VectorExpr::basis(1, 0, 0));
    CHECK(v.evidence.at("form") == scalar_to_json(Scalar(4)));
    CHECK(witness_violates("normal", s2, *v.witness, 1e-10));

    CHECK(is_normal(fixtures::unitary_plus_identity(), quick()).status == VerdictStatus::Proven);
}

TEST_CASE("hyponormality")
{
    const PredicateVerdict s = hyponormal_check(right_shift(), quick());
    CHECK(s.status == VerdictStatus::Proven);
    CHECK(s.evidence.at("corner_matrix") == nlohmann::json::parse("[[[1,0]]]"));

    const OperatorExpr sa = adjoint(right_shift());
    const PredicateVerdict a = hyponormal_check(sa, quick());
    REQUIRE(a.status == VerdictStatus::Refuted);
    CHECK(*a.witness == VectorExpr::basis(1, 0, 0));
    CHECK(witness_violates("hyponormal", sa, *a.witness, 1e-10));

    const PredicateVerdict e = hyponormal_check(example1(), quick());
    CHECK(e.evidence.at("corner_matrix") == nlohmann::json::parse("[[[3,0],[-1,0]],[[-1,0],[1,0]]]"));
    CHECK(e.evidence.at("active_coordinates") == nlohmann::json::parse(R"([{"component":0,"index":0},{"component":1,"index":0}])"));
    CHECK(e.status == VerdictStatus::Proven);

    // T* of the second example: the commutator diagonal is not finitely supported.
    const PredicateVerdict e2 = hyponormal_check(adjoint(example2()), quick());
    CHECK(e2.status == VerdictStatus::Numerical);
    const PredicateVerdict e2t = hyponormal_check(example2(), quick());
    REQUIRE(e2t.status == VerdictStatus::Refuted);
    CHECK(witness_violates("hyponormal", example2(), *e2t.witness, 1e-10));
}

TEST_CASE("paranormal refuter")
{
    const PredicateVerdict n = paranormal_refute(fixtures::nilpotent(), quick());
    REQUIRE(n.status == VerdictStatus::Refuted);
    CHECK(*n.witness == VectorExpr::basis(1, 0, 1));

    CHECK(paranormal_refute(right_shift(), quick(100000)).status == VerdictStatus::Numerical);

    // T e0 = e0 + e1, T e1 = 0: ||T e0||^2 = 2 > ||T^2 e0|| = 1.
    Matrix m(2, 2);
    m(0, 0) = Scalar(1);
    m(1, 0) = Scalar(1);
    const OperatorExpr t = direct_sum(finite_operator(m), zero_operator({Space::l2()}));
    const PredicateVerdict v = paranormal_refute(t, quick());
    REQUIRE(v.status == VerdictStatus::Refuted);
    CHECK(witness_violates("paranormal", t, *v.witness, 1e-10));

    PredicateOptions bad = quick();
    bad.samples = 0;
    CHECK_THROWS_AS(paranormal_refute(t, bad), Error);
}

TEST_CASE("star-paranormal stages")
{
    const PredicateVerdict s = star_paranormal_check(right_shift(), quick());
    CHECK(s.status == VerdictStatus::Proven);
    CHECK(s.evidence.at("stage") == 1);

    const PredicateVerdict n = star_paranormal_check(fixtures::nilpotent(), quick());
    REQUIRE(n.status == VerdictStatus::Refuted);
    CHECK(*n.witness == VectorExpr::basis(1, 0, 0));
    CHECK(witness_violates("star-paranormal", fixtures::nilpotent(), *n.witness, 1e-10));

    CHECK(star_paranormal_check(fixtures::unitary_plus_shift(), quick()).status == VerdictStatus::Proven);

    // Example 2 is not hyponormal; sampling and the k-grid find nothing.
    const PredicateVerdict e2 = star_paranormal_check(adjoint(example2()), quick());
    CHECK(e2.status != VerdictStatus::Refuted);
}

TEST_CASE("norm attainment")
{
    const PredicateVerdict s = norm_attaining_check(scaled_shift(Scalar(2)), quick());
    CHECK(s.status == VerdictStatus::Proven);
    CHECK(s.evidence.at("attaining_subspace").at("kind") == "full");
    CHECK(s.evidence.at("norm") == 2);

    const PredicateVerdict e = norm_attaining_check(example1(), quick());
    CHECK(e.status == VerdictStatus::Proven);
    CHECK(e.evidence.at("attaining_subspace").at("tails") == nlohmann::json::parse(R"([{"component":0,"start":0}])"));

    const PredicateVerdict d = norm_attaining_check(fixtures::increasing_diag(), quick());
    CHECK(d.status == VerdictStatus::Numerical);
    CHECK(d.evidence.at("attained") == false);
}

TEST_CASE("absolutely norm attaining")
{
    CHECK(an_check(example1(), quick()).status == VerdictStatus::Proven);
    CHECK(an_check(adjoint(example2()), quick()).status == VerdictStatus::Refuted);
    CHECK(an_check(fixtures::increasing_diag(), quick()).status == VerdictStatus::Refuted);
    CHECK(an_check(diagonal_operator({Scalar(5), Scalar(3)}, Scalar(2)), quick()).status == VerdictStatus::Proven);
}

TEST_CASE("M and M*")
{
    const NormSubspaces s = compute_M_and_Mstar(scaled_shift(Scalar(2)), quick());
    CHECK(s.m.kind() == SubspaceKind::Full);
    CHECK(s.m_star.tails()[0] == std::optional<std::size_t>(1));
    CHECK(s.m_star.extras().empty());

    const NormSubspaces e = compute_M_and_Mstar(example1(), quick());
    CHECK(e.m.tails()[0] == std::optional<std::size_t>(0));
    CHECK(e.m.extras().empty());
    CHECK(e.m_star.tails()[0] == std::optional<std::size_t>(1));
    CHECK(e.m_star.extras().empty());
    CHECK(e.m.contains(e.m_star, 0));
    CHECK_FALSE(e.m_star.contains(e.m, 0));

    Matrix u(2, 2);
    u(0, 1) = Scalar(1);
    u(1, 0) = Scalar(1);
    const OperatorExpr t = direct_sum(finite_operator(scaled(u, Scalar(3))), zero_operator({Space::l2()}));
    const NormSubspaces f = compute_M_and_Mstar(t, quick());
    CHECK(f.m.dim() == std::optional<std::size_t>(2));
    CHECK(same_subspace(f.m, f.m_star, 0));

    try {
        compute_M_and_Mstar(fixtures::increasing_diag(), quick());
        FAIL("expected NotNormAttaining");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NotNormAttaining);
    }
}

TEST_CASE("every refutation witness re-checks exactly")
{
    Rng rng(41);
    std::size_t refuted = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto spaces = testing::random_spaces(rng);
        const OperatorExpr t = testing::random_exact_operator(rng, spaces);
        for (const char* name : {"normal", "hyponormal", "paranormal", "star-paranormal"}) {
            const PredicateVerdict v = run_predicate(name, t, quick(300));
            if (v.status != VerdictStatus::Refuted) continue;
            ++refuted;
            REQUIRE(v.witness);
            CHECK(v.witness->exact());
            CHECK_MESSAGE(witness_violates(name, t, *v.witness, 0.0), name);
        }
    }
    CHECK(refuted > 20);
}

TEST_CASE("hyponormal operators yield no *-paranormal witness")
{
    Rng rng(43);
    std::size_t fixtures_run = 0;
    for (int attempt = 0; attempt < 400 && fixtures_run < 100; ++attempt) {
        const OperatorExpr t = fixtures::hyponormal_candidate(rng, attempt);
        if (hyponormal_check(t, quick()).status != VerdictStatus::Proven) continue;
        ++fixtures_run;
        PredicateOptions o = quick(10000);
        o.seed = static_cast<std::uint64_t>(attempt);
        CHECK(star_paranormal_refute(t, o).status == VerdictStatus::Numerical);
    }
    CHECK(fixtures_run == 100);
}

TEST_CASE("verdict JSON")
{
    const nlohmann::json j = is_normal(scaled_shift(Scalar(2)), quick()).to_json();
    CHECK(j.at("predicate") == "normal");
    CHECK(j.at("status") == "Refuted");
    CHECK(j.at("params").at("seed") == 42);
    CHECK(j.at("witness").is_array());
}
