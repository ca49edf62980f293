#include <doctest.h>

#include "anop/error.hpp"
#include "anop/serialize.hpp"
#include "support.hpp"

using namespace anop;
using namespace anop::testing;

namespace {

OperatorExpr shift() { return right_shift(); }

OperatorExpr example_one()
{
    OperatorExpr t({Space::l2(), Space::finite(2)});
    t.add_diagonal(0, 1, DiagonalSeq(Scalar(2)));
    t.add_entry(0, 1, 0, 0, Scalar(1));
    t.add_entry(1, 1, 0, 0, Scalar(1));
    t.add_entry(1, 1, 1, 1, Scalar(1));
    return t;
}

Matrix dense_shift(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) m(i + 1, i) = Scalar(1);
    return m;
}

VectorExpr vec(std::vector<std::vector<long>> parts)
{
    VectorExpr x(parts.size());
    for (std::size_t c = 0; c < parts.size(); ++c) {
        for (std::size_t i = 0; i < parts[c].size(); ++i) x.set(c, i, Scalar(parts[c][i]));
    }
    return x;
}

} // namespace

TEST_CASE("combine")
{
    const auto s = shift();
    CHECK(combine({{Scalar(1), s}, {Scalar(-1), s}}) == zero_operator({Space::l2()}));

    const auto id = identity_operator({Space::l2()});
    const auto two = combine({{Scalar(1), id}, {Scalar(1), id}});
    REQUIRE(two.block(0, 0).banded.diagonals.size() == 1);
    CHECK(two.block(0, 0).banded.diagonals.at(0).limit() == Scalar(2));

    const auto comm = combine({{Scalar(1), adjoint(s) * s}, {Scalar(-1), s * adjoint(s)}});
    const auto& diags = comm.block(0, 0).banded.diagonals;
    REQUIRE(diags.size() == 1);
    CHECK(diags.at(0).prefix() == std::vector<Scalar>{Scalar(1)});
    CHECK(diags.at(0).limit() == Scalar(0));

    // Dense 64x64 oracle for the same commutator, compared on the interior.
    const std::size_t n = 64;
    const Matrix d = dense_shift(n);
    const Matrix oracle = dense_product(adjoint(d), d) - dense_product(d, adjoint(d));
    const Matrix got = truncate(comm, n).matrix;
    for (std::size_t r = 0; r + 1 < n; ++r) {
        for (std::size_t c = 0; c + 1 < n; ++c) CHECK(got(r, c) == oracle(r, c));
    }

    CHECK_THROWS_AS(combine({{Scalar(1), s}, {Scalar(1), example_one()}}), Error);
}

TEST_CASE("multiply")
{
    const auto s = shift();
    CHECK(adjoint(s) * s == identity_operator({Space::l2()}));

    const auto ssa = s * adjoint(s);
    OperatorExpr expected = identity_operator({Space::l2()});
    expected.add_entry(0, 0, 0, 0, Scalar(-1));
    CHECK(ssa == expected);

    const auto two_s = scaled(s, Scalar(2));
    const auto sq = two_s * two_s;
    const auto& diags = sq.block(0, 0).banded.diagonals;
    REQUIRE(diags.size() == 1);
    CHECK(diags.begin()->first == 2);
    CHECK(diags.begin()->second.limit() == Scalar(4));
    CHECK(diags.begin()->second.prefix().empty());

    const std::size_t n = 40;
    const Matrix d = dense_shift(n);
    const Matrix oracle = dense_product(d, adjoint(d));
    const Matrix got = truncate(ssa, n).matrix;
    for (std::size_t r = 0; r + 1 < n; ++r) {
        for (std::size_t c = 0; c + 1 < n; ++c) CHECK(got(r, c) == oracle(r, c));
    }

    CHECK_THROWS_AS(s * example_one(), Error);
}

TEST_CASE("adjoint")
{
    CHECK(adjoint(identity_operator({Space::l2()})) == identity_operator({Space::l2()}));
    const auto sa = adjoint(shift());
    REQUIRE(sa.block(0, 0).banded.diagonals.size() == 1);
    CHECK(sa.block(0, 0).banded.diagonals.begin()->first == -1);

    const auto t = example_one();
    const auto ta = adjoint(t);
    CHECK(adjoint(ta) == t);

    // ((u), (v)) -> ((2u2, 2u3, ...), (u1 + v1, v2))
    const auto y = apply(ta, vec({{1, 2, 3, 4}, {5, 6}}));
    CHECK(y == vec({{4, 6, 8}, {6, 6}}));

    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_vector(rng, t.spaces());
        const auto z = random_vector(rng, t.spaces());
        CHECK(inner(apply(t, x), z) == inner(x, apply(ta, z)));
    }
}

TEST_CASE("apply")
{
    CHECK(apply(shift(), VectorExpr::basis(1, 0, 0)) == VectorExpr::basis(1, 0, 1));

    const auto t = example_one();
    CHECK(apply(t, vec({{0}, {1, 0}})) == vec({{1}, {1, 0}}));
    CHECK(apply(t, vec({{1}, {0, 0}})) == vec({{0, 2}, {0, 0}}));

    const auto tt = adjoint(t) * t;
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Scalar x1 = small_scalar(rng), y1 = small_scalar(rng), y2 = small_scalar(rng);
        VectorExpr x(2);
        x.set(0, 0, x1);
        x.set(1, 0, y1);
        x.set(1, 1, y2);
        VectorExpr expected(2);
        expected.set(0, 0, Scalar(4) * x1);
        expected.set(1, 0, Scalar(2) * y1);
        expected.set(1, 1, y2);
        CHECK(apply(tt, x) == expected);
    }

    VectorExpr bad(1);
    bad.set(0, 0, Scalar(1));
    CHECK_THROWS_AS(apply(t, bad), Error);
}

TEST_CASE("truncate")
{
    const auto id = truncate(identity_operator({Space::l2()}), 3);
    CHECK(id.matrix.rows() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(id.matrix(r, c) == Scalar(r == c ? 1 : 0));
    }
    CHECK(id.tail_bound == 0.0);

    const auto s = truncate(scaled(shift(), Scalar(2)), 4);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) CHECK(s.matrix(r, c) == Scalar(r == c + 1 ? 2 : 0));
    }
    CHECK(s.tail_bound == doctest::Approx(2.0));

    OperatorExpr wide({Space::l2()});
    wide.add_diagonal(0, 3, DiagonalSeq(Scalar(1)));
    CHECK_THROWS_AS(truncate(wide, 2), Error);
    try {
        truncate(wide, 2);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NSmallerThanBand);
    }

    // Second example: weights 1/(i+1) on the first component's subdiagonal.
    OperatorExpr t({Space::l2(), Space::l2()});
    t.add_diagonal(0, 1, DiagonalSeq({}, make_inverse_power(Scalar(0), Scalar(1), 1, 1)));
    t.add_entry(0, 1, 0, 0, Scalar(1));
    t.add_diagonal(1, -1, DiagonalSeq(Scalar(1)));
    const auto m = truncate(t * adjoint(t), 5).matrix;
    const Rational expected[5] = {1, 1, Rational(1, 4), Rational(1, 9), Rational(1, 16)};
    for (std::size_t r = 0; r < 10; ++r) {
        for (std::size_t c = 0; c < 10; ++c) {
            Scalar want(0);
            if (r == c) want = r < 5 ? Scalar(expected[r]) : Scalar(1);
            CHECK(m(r, c) == want);
        }
    }
}

TEST_CASE("ring axioms on random exact operators")
{
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const auto spaces = random_spaces(rng);
        const auto a = random_exact_operator(rng, spaces);
        const auto b = random_exact_operator(rng, spaces);
        const auto c = random_exact_operator(rng, spaces);
        CHECK(adjoint(a * b) == adjoint(b) * adjoint(a));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(adjoint(adjoint(a)) == a);
    }
}

TEST_CASE("truncation interior agrees with product of truncations")
{
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const auto spaces = random_spaces(rng);
        const auto a = random_exact_operator(rng, spaces);
        const auto b = random_exact_operator(rng, spaces);
        const std::size_t n = 16;
        const auto prod = truncate(a * b, n);
        const Matrix oracle = dense_product(truncate(a, n).matrix, truncate(b, n).matrix);
        const std::size_t interior = n - a.bandwidth() - b.bandwidth();
        const Layout& l = prod.layout;
        for (std::size_t r = 0; r < l.total; ++r) {
            const auto [cr, ir] = l.locate(r);
            if (spaces[cr].is_l2() && ir >= interior) continue;
            for (std::size_t c = 0; c < l.total; ++c) {
                const auto [cc, ic] = l.locate(c);
                if (spaces[cc].is_l2() && ic >= interior) continue;
                CHECK(prod.matrix(r, c) == oracle(r, c));
            }
        }
    }
}

TEST_CASE("action beyond the prefixes follows the symbol")
{
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_exact_operator(rng, {Space::l2()});
        const std::size_t start = a.corners()[0] + 3;
        VectorExpr x(1);
        for (std::size_t k = 0; k < 4; ++k) x.set(0, start + k, small_scalar(rng));
        // Toeplitz action from the diagonal limits alone.
        VectorExpr y(1);
        for (const auto& [off, d] : a.block(0, 0).banded.diagonals) {
            for (const auto& [k, v] : x.parts[0]) {
                const std::size_t r = static_cast<std::size_t>(static_cast<long>(k) + off);
                y.parts[0][r] += d.limit() * v;
            }
        }
        y.prune();
        CHECK(norm2(apply(a, x)) == norm2(y));
    }
}

TEST_CASE("parse and serialize")
{
    const auto two_s = parse_operator(R"({"builtin": "right_shift", "scale": [2, 0]})");
    CHECK(two_s == scaled(right_shift(), Scalar(2)));

    const auto d = parse_operator(R"({"builtin": "diag", "entries": [5, 3], "limit": 2})");
    CHECK(d == diagonal_operator({Scalar(5), Scalar(3)}, Scalar(2)));

    const auto e1 = parse_operator(R"({
      "spaces": [{"kind": "l2"}, {"kind": "finite", "dim": 2}],
      "blocks": [
        {"row": 0, "col": 0, "kind": "banded", "diagonals": [{"offset": 1, "prefix": [], "limit": [2, 0]}]},
        {"row": 0, "col": 1, "kind": "finite_rank", "entries": [{"r": 0, "c": 0, "value": [1, 0]}]},
        {"row": 1, "col": 1, "kind": "dense", "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}
      ]})");
    CHECK(e1 == example_one());
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_vector(rng, e1.spaces());
        VectorExpr want(2);
        want.set(0, 0, x.get(1, 0));
        for (const auto& [i, v] : x.parts[0]) want.set(0, i + 1, Scalar(2) * v);
        want.set(1, 0, x.get(1, 0));
        want.set(1, 1, x.get(1, 1));
        CHECK(apply(e1, x) == want);
    }

    for (int trial = 0; trial < 40; ++trial) {
        const auto a = random_exact_operator(rng, random_spaces(rng));
        CHECK(parse_operator(serialize_operator(a)) == a);
        CHECK(serialize_operator(parse_operator(serialize_operator(a))) == serialize_operator(a));
    }

    OperatorExpr asym({Space::l2()});
    asym.add_diagonal(0, 0, DiagonalSeq({Scalar(7)}, make_inverse_power(Scalar(1), Scalar(-1), 2, 1)));
    CHECK(parse_operator(serialize_operator(asym)) == asym);

    CHECK(parse_operator(R"({"spaces":[{"kind":"l2"}],"blocks":[{"row":0,"col":0,"kind":"banded","diagonals":[{"offset":0,"prefix":["1/3"]}]}]})") ==
          diagonal_operator({Scalar(Rational(1, 3))}, Scalar(0)));

    const char* bad[] = {
        "{",
        R"({"spaces": []})",
        R"({"spaces": [{"kind": "l3"}]})",
        R"({"spaces": [{"kind": "l2"}], "blocks": [{"row": 0, "col": 0, "kind": "dense", "matrix": []}]})",
        R"({"spaces": [{"kind": "l2"}], "blocks": [{"row": 0, "col": 0, "kind": "banded", "diagonals": [{"offset": 0, "limit": "x"}]}]})",
        R"({"spaces": [{"kind": "l2"}], "blocks": [{"row": 0, "col": 0, "kind": "banded", "diagonals": [{"offset": 0, "decay": {"C": 1, "p": 1}}]}]})",
        R"({"builtin": "unknown"})",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        try {
            parse_operator(text);
            FAIL("expected a schema error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SchemaError);
        }
    }
}
