#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace anop {

using Rational = mpq_class;

enum class ScalarKind { Exact, Float };

/// Complex scalar that is either an exact Gaussian rational or a double pair.
/// Arithmetic between two exact values stays exact; any float operand
/// demotes the result to float.
class Scalar {
public:
    Scalar() = default;
    Scalar(int v) : re_(v) {}
    Scalar(long v) : re_(v) {}
    Scalar(long long v) : re_(static_cast<long>(v)) {}
    Scalar(const Rational& re) : re_(re) {}
    Scalar(const Rational& re, const Rational& im) : re_(re), im_(im) {}

    static Scalar floating(double re, double im = 0.0);
    static Scalar floating(std::complex<double> z) { return floating(z.real(), z.imag()); }
    /// Exact rational image of a double (every finite double is a dyadic rational).
    static Scalar exact_from_double(double re, double im = 0.0);

    bool exact() const { return kind_ == ScalarKind::Exact; }
    ScalarKind kind() const { return kind_; }

    const Rational& re_q() const { return re_; }
    const Rational& im_q() const { return im_; }
    std::complex<double> value() const;
    double real() const { return value().real(); }
    double imag() const { return value().imag(); }

    bool is_zero() const;
    bool is_real() const;
    bool near_zero(double tol) const { return abs() <= tol; }

    Scalar conj() const;
    /// |z|^2, exact when z is exact.
    Scalar norm2() const;
    double abs() const { return std::abs(value()); }
    /// Upper bound on |z| safe for use in certified bounds.
    double abs_upper() const;

    Scalar operator-() const;
    Scalar& operator+=(const Scalar& o);
    Scalar& operator-=(const Scalar& o);
    Scalar& operator*=(const Scalar& o);
    Scalar& operator/=(const Scalar& o);

    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

    /// Structural equality: exact values compare exactly, float values
    /// compare bitwise. Mixed kinds compare by double value.
    friend bool operator==(const Scalar& a, const Scalar& b);
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    /// Sign of the real part; only meaningful for real values.
    int sign() const;

    std::string to_string() const;

private:
    void demote();

    ScalarKind kind_ = ScalarKind::Exact;
    Rational re_{0};
    Rational im_{0};
    std::complex<double> f_{0.0, 0.0};
};

/// Compares two real scalars (imaginary parts ignored). Exact when both exact.
int compare_real(const Scalar& a, const Scalar& b);

/// Best rational approximation of x with denominator <= max_den.
Rational rationalize(double x, long max_den);

/// Exact square root of a nonnegative rational when it is a perfect square.
bool exact_sqrt(const Rational& q, Rational& out);

std::string rational_to_string(const Rational& q);

} // namespace anop
