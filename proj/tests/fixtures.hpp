#pragma once

// Operator fixtures shared by the predicate, decomposition and acceptance tests.

#include <algorithm>
#include <cmath>

#include "anop/gallery.hpp"
#include "support.hpp"

namespace anop::fixtures {

using testing::Rng;
using testing::uniform;

inline Matrix swap2()
{
    Matrix u(2, 2);
    u(0, 1) = Scalar(1);
    u(1, 0) = Scalar(1);
    return u;
}

/// 3U (+) 2I with U the 2x2 swap.
inline OperatorExpr unitary_plus_identity()
{
    return direct_sum(finite_operator(scaled(swap2(), Scalar(3))), scaled(identity_operator({Space::l2()}), Scalar(2)));
}

/// 3U (+) 2S.
inline OperatorExpr unitary_plus_shift()
{
    return direct_sum(finite_operator(scaled(swap2(), Scalar(3))), scaled_shift(Scalar(2)));
}

/// Random skew-Hermitian matrix with small rational entries.
inline Matrix random_skew(Rng& rng, std::size_t n)
{
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        k(i, i) = Scalar(Rational(0), Rational(uniform(rng, -3, 3), uniform(rng, 1, 3)));
        for (std::size_t j = i + 1; j < n; ++j) {
            const Scalar v = testing::small_scalar(rng);
            k(i, j) = v;
            k(j, i) = -v.conj();
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Scalar s = k(i, j);
            Rational re = s.re_q(), im = s.im_q();
            re.canonicalize();
            im.canonicalize();
            k(i, j) = Scalar(re, im);
        }
    }
    return k;
}

inline Matrix random_unitary(Rng& rng, std::size_t n)
{
    return cayley_unitary(random_skew(rng, n));
}

/// Weighted shift with nondecreasing positive weights (hyponormal).
inline OperatorExpr increasing_weighted_shift(Rng& rng)
{
    std::vector<long> w;
    const long len = uniform(rng, 0, 4);
    for (long i = 0; i < len; ++i) w.push_back(uniform(rng, 1, 5));
    std::sort(w.begin(), w.end());
    const long tail = std::max<long>(w.empty() ? 1 : w.back(), uniform(rng, 1, 5));
    std::vector<Scalar> prefix(w.begin(), w.end());
    OperatorExpr t({Space::l2()});
    t.add_diagonal(0, 1, DiagonalSeq(prefix, make_const(Scalar(tail))));
    return t;
}

/// Candidates for hyponormality: many are hyponormal by construction, some
/// random ones are not (callers filter with hyponormal_check).
inline OperatorExpr hyponormal_candidate(Rng& rng, int attempt)
{
    switch (attempt % 4) {
    case 0: {
        const std::size_t n = static_cast<std::size_t>(uniform(rng, 1, 3));
        return direct_sum(finite_operator(scaled(random_unitary(rng, n), Scalar(uniform(rng, 1, 4)))),
                          scaled_shift(Scalar(uniform(rng, 1, 3)), uniform(rng, 1, 2)));
    }
    case 1: return increasing_weighted_shift(rng);
    case 2: {
        Matrix h(2, 2);
        h(0, 0) = Scalar(uniform(rng, -3, 3));
        h(1, 1) = Scalar(uniform(rng, -3, 3));
        h(0, 1) = testing::small_scalar(rng);
        h(1, 0) = h(0, 1).conj();
        return direct_sum(finite_operator(h), increasing_weighted_shift(rng));
    }
    default: {
        const auto spaces = testing::random_spaces(rng);
        return testing::random_exact_operator(rng, spaces);
    }
    }
}

/// Random data for  (+) lambda_x S_x (+) [[m_e S^p, A], [0, B]]  with distinct
/// lambda_x > m_e, k <= p and ||[A; B]|| < m_e.
inline TheoremForm random_theorem_form(Rng& rng)
{
    TheoremForm f;
    const Rational me(uniform(rng, 2, 6), 2);
    f.m_e = Scalar(me);
    std::vector<long> steps;
    const long levels = uniform(rng, 0, 5);
    while (static_cast<long>(steps.size()) < levels) {
        const long s = uniform(rng, 1, 12);
        if (std::find(steps.begin(), steps.end(), s) == steps.end()) steps.push_back(s);
    }
    for (long s : steps) {
        Rational lambda = me + Rational(s, 2);
        lambda.canonicalize();
        f.levels.emplace_back(Scalar(lambda), random_unitary(rng, static_cast<std::size_t>(uniform(rng, 1, 3))));
    }
    f.shift_power = uniform(rng, 1, 3);
    const std::size_t k = static_cast<std::size_t>(uniform(rng, 0, f.shift_power));
    f.a = Matrix(k > 0 ? static_cast<std::size_t>(f.shift_power) : 0, k);
    f.b = Matrix(k, k);
    for (std::size_t r = 0; r < f.a.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) f.a(r, c) = testing::small_scalar(rng);
    }
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) f.b(r, c) = testing::small_scalar(rng) * Scalar(Rational(1, 2));
    }
    if (k > 0) {
        Matrix stacked(f.a.rows() + k, k);
        for (std::size_t r = 0; r < f.a.rows(); ++r) {
            for (std::size_t c = 0; c < k; ++c) stacked(r, c) = f.a(r, c);
        }
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) stacked(f.a.rows() + r, c) = f.b(r, c);
        }
        const double n = spectral_norm(to_complex(stacked));
        const double bound = 0.9 * me.get_d();
        if (n >= bound) {
            const Scalar shrink(Rational(1, static_cast<long>(std::ceil(n / bound))));
            f.a = scaled(f.a, shrink);
            f.b = scaled(f.b, shrink);
        }
    }
    return f;
}

/// T e1 = e0 on C^2, so T^2 = 0.
inline OperatorExpr nilpotent()
{
    Matrix m(2, 2);
    m(0, 1) = Scalar(1);
    return finite_operator(m);
}

/// diag(1 - 1/(n+1)), declared increasing toward 1.
inline OperatorExpr increasing_diag()
{
    OperatorExpr a({Space::l2()});
    a.add_diagonal(0, 0, DiagonalSeq({}, make_inverse_power(Scalar(1), Scalar(-1), 1, 1)));
    return a;
}

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c)
{
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) m(i, j) = testing::small_scalar(rng);
    }
    return m;
}

/// Random matrix with nonzero determinant (strictly diagonally dominant).
inline Matrix random_invertible(Rng& rng, std::size_t n)
{
    Matrix m = random_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = m(i, i) + Scalar(static_cast<long>(5 * n));
    return m;
}

inline Matrix floated(const Matrix& m)
{
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = Scalar::floating(m(i, j).value());
    }
    return out;
}

} // namespace anop::fixtures
