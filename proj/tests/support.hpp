#pragma once

// Shared generators and oracles for the test binaries.

#include <cstdint>
#include <random>
#include <vector>

#include "anop/operator.hpp"

namespace anop::testing {

using Rng = std::mt19937_64;

inline long uniform(Rng& rng, long lo, long hi)
{
    return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Small Gaussian rational p/q + i r/s with |p|,|r| <= 4 and q, s in {1,2,3}.
inline Scalar small_scalar(Rng& rng, bool complex = true)
{
    const Rational re(uniform(rng, -4, 4), uniform(rng, 1, 3));
    const Rational im = complex && uniform(rng, 0, 2) == 0 ? Rational(uniform(rng, -4, 4), uniform(rng, 1, 3)) : Rational(0);
    Rational a = re, b = im;
    a.canonicalize();
    b.canonicalize();
    return Scalar(a, b);
}

inline std::vector<Space> random_spaces(Rng& rng)
{
    switch (uniform(rng, 0, 3)) {
    case 0: return {Space::l2()};
    case 1: return {Space::l2(), Space::finite(static_cast<std::size_t>(uniform(rng, 1, 3)))};
    case 2: return {Space::finite(2), Space::l2()};
    default: return {Space::l2(), Space::l2()};
    }
}

/// Random exact operator: banded diagonals with offsets in [-2, 2], short
/// prefixes, and a few couplings near the corner.
inline OperatorExpr random_exact_operator(Rng& rng, const std::vector<Space>& spaces)
{
    OperatorExpr op(spaces);
    const std::size_t n = spaces.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j && spaces[i].is_l2()) {
                const long diags = uniform(rng, 0, 3);
                for (long d = 0; d < diags; ++d) {
                    std::vector<Scalar> prefix;
                    const long len = uniform(rng, 0, 4);
                    for (long k = 0; k < len; ++k) prefix.push_back(small_scalar(rng));
                    op.add_diagonal(i, uniform(rng, -2, 2), DiagonalSeq(std::move(prefix), make_const(small_scalar(rng))));
                }
                continue;
            }
            const std::size_t rows = spaces[i].is_l2() ? 4 : spaces[i].dim;
            const std::size_t cols = spaces[j].is_l2() ? 4 : spaces[j].dim;
            const long count = uniform(rng, 0, 3);
            for (long k = 0; k < count; ++k) {
                op.add_entry(i, j, static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(rows) - 1)),
                             static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(cols) - 1)), small_scalar(rng));
            }
        }
    }
    return op;
}

inline VectorExpr random_vector(Rng& rng, const std::vector<Space>& spaces, std::size_t extent = 8)
{
    VectorExpr x(spaces.size());
    for (std::size_t c = 0; c < spaces.size(); ++c) {
        const std::size_t len = spaces[c].is_l2() ? extent : spaces[c].dim;
        for (std::size_t i = 0; i < len; ++i) {
            if (uniform(rng, 0, 1) == 0) x.set(c, i, small_scalar(rng));
        }
    }
    return x;
}

/// Dense product of two exact matrices computed entry by entry.
inline Matrix dense_product(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            Scalar s;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    }
    return out;
}

} // namespace anop::testing
