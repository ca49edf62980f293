#include <doctest.h>

#include "anop/subspace.hpp"
#include "support.hpp"

using namespace anop;
using anop::testing::Rng;
using anop::testing::uniform;

namespace {

const std::vector<Space> kL2{Space::l2()};
const std::vector<Space> kMixed{Space::l2(), Space::finite(2)};

VectorExpr e(std::size_t comps, std::size_t c, std::size_t i)
{
    return VectorExpr::basis(comps, c, i);
}

} // namespace

TEST_CASE("kinds and dimensions")
{
    CHECK(Subspace::zero(kL2).kind() == SubspaceKind::Zero);
    CHECK(Subspace::full(kMixed).kind() == SubspaceKind::Full);
    CHECK_FALSE(Subspace::full(kMixed).dim());

    const Subspace s = Subspace::span(kMixed, {std::nullopt, std::nullopt}, {e(2, 0, 3), e(2, 1, 0) + e(2, 0, 3)}, 0);
    CHECK(s.kind() == SubspaceKind::FiniteSpan);
    CHECK(s.dim() == std::optional<std::size_t>(2));
    CHECK(s.exact());
    CHECK(inner(s.extras()[0], s.extras()[1]).is_zero());

    const Subspace c = Subspace::span(kL2, {std::size_t{4}}, {}, 0);
    CHECK(c.kind() == SubspaceKind::Cofinite);
    CHECK(c.to_json().at("dim") == "infinite");
}

TEST_CASE("tail coordinates are stripped and tails lowered")
{
    const Subspace s = Subspace::span(kL2, {std::size_t{3}}, {e(1, 0, 1) + e(1, 0, 5), e(1, 0, 2)}, 0);
    // e_2 joins the tail; e_1 + e_5 reduces to e_1 and does not touch e_2.
    CHECK(s.tails()[0] == std::optional<std::size_t>(1));
    CHECK(s.extras().empty());
}

TEST_CASE("projection and containment")
{
    const Subspace s = Subspace::span(kL2, {std::size_t{2}}, {e(1, 0, 0) + e(1, 0, 1)}, 0);
    const VectorExpr v = e(1, 0, 0).scaled(Scalar(3)) + e(1, 0, 4);
    const VectorExpr p = s.project(v);
    CHECK(p.get(0, 0) == Scalar(Rational(3, 2)));
    CHECK(p.get(0, 1) == Scalar(Rational(3, 2)));
    CHECK(p.get(0, 4) == Scalar(1));
    CHECK_FALSE(s.contains(v, 0));
    CHECK(s.contains(p, 0));
    CHECK(s.contains(Subspace::span(kL2, {std::size_t{7}}, {e(1, 0, 2)}, 0), 0));
    CHECK_FALSE(s.contains(Subspace::span(kL2, {std::size_t{1}}, {}, 0), 0));
}

TEST_CASE("intersections")
{
    const Subspace a = Subspace::span(kL2, {std::size_t{1}}, {}, 0);
    const Subspace b = Subspace::span(kL2, {std::nullopt}, {e(1, 0, 0) + e(1, 0, 1), e(1, 0, 2)}, 0);
    const Subspace i = intersect(a, b, 0);
    CHECK(i.kind() == SubspaceKind::FiniteSpan);
    CHECK(same_subspace(i, Subspace::span(kL2, {std::nullopt}, {e(1, 0, 2)}, 0), 0));

    const Subspace c = Subspace::span(kMixed, {std::size_t{2}, std::nullopt}, {e(2, 1, 0)}, 0);
    const Subspace d = Subspace::span(kMixed, {std::size_t{4}, std::nullopt}, {e(2, 0, 2) + e(2, 1, 0), e(2, 0, 3)}, 0);
    const Subspace cd = intersect(c, d, 0);
    CHECK(cd.tails()[0] == std::optional<std::size_t>(3));
    CHECK(cd.contains(e(2, 0, 2) + e(2, 1, 0), 0));
    CHECK_FALSE(cd.contains(e(2, 1, 0), 0));
}

TEST_CASE("orthogonal complements")
{
    const Layout region = Layout::make(kL2, 3);
    const Subspace s = Subspace::span(kL2, {std::nullopt}, {e(1, 0, 0) + e(1, 0, 1)}, 0);
    const Subspace c = complement_in({s}, region, 0);
    CHECK(c.dim() == std::optional<std::size_t>(2));
    CHECK(c.contains(e(1, 0, 0) - e(1, 0, 1), 0));
    CHECK(c.contains(e(1, 0, 2), 0));
}

TEST_CASE("random intersections lie in both operands; complements are orthogonal")
{
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        auto random_sub = [&]() {
            std::vector<std::optional<std::size_t>> tails{std::nullopt, std::nullopt};
            if (uniform(rng, 0, 1) == 0) tails[0] = static_cast<std::size_t>(uniform(rng, 0, 5));
            std::vector<VectorExpr> vs;
            const long n = uniform(rng, 0, 3);
            for (long k = 0; k < n; ++k) vs.push_back(testing::random_vector(rng, kMixed, 6));
            return Subspace::span(kMixed, tails, vs, 0);
        };
        const Subspace a = random_sub();
        const Subspace b = random_sub();
        const Subspace i = intersect(a, b, 0);
        CHECK(a.contains(i, 0));
        CHECK(b.contains(i, 0));

        const Layout region = Layout::make(kMixed, max_extents(a.extents(), std::vector<std::size_t>{6, 2}));
        const Subspace c = complement_in({a}, region, 0);
        for (const auto& v : c.extras()) {
            CHECK(a.project(v).is_zero());
        }
        // a restricted to the region plus its complement fills the region.
        CHECK(a.basis_in(region).size() + *c.dim() == region.total);
    }
}
