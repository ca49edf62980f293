#include "anop/scalar.hpp"

#include <cmath>
#include <limits>

namespace anop {

Scalar Scalar::floating(double re, double im)
{
    Scalar s;
    s.kind_ = ScalarKind::Float;
    s.re_ = 0;
    s.im_ = 0;
    s.f_ = {re, im};
    return s;
}

Scalar Scalar::exact_from_double(double re, double im)
{
    Rational r(re);
    Rational i(im);
    return Scalar(r, i);
}

std::complex<double> Scalar::value() const
{
    if (exact()) {
        return {re_.get_d(), im_.get_d()};
    }
    return f_;
}

bool Scalar::is_zero() const
{
    if (exact()) {
        return sgn(re_) == 0 && sgn(im_) == 0;
    }
    return f_.real() == 0.0 && f_.imag() == 0.0;
}

bool Scalar::is_real() const
{
    return exact() ? sgn(im_) == 0 : f_.imag() == 0.0;
}

Scalar Scalar::conj() const
{
    if (exact()) {
        return Scalar(re_, -im_);
    }
    return floating(f_.real(), -f_.imag());
}

Scalar Scalar::norm2() const
{
    if (exact()) {
        return Scalar(Rational(re_ * re_ + im_ * im_));
    }
    return floating(std::norm(f_));
}

double Scalar::abs_upper() const
{
    const double a = abs();
    if (a == 0.0 && exact() && !is_zero()) {
        return std::numeric_limits<double>::min();
    }
    return std::nextafter(a * (1.0 + 4 * std::numeric_limits<double>::epsilon()),
                          std::numeric_limits<double>::infinity());
}

void Scalar::demote()
{
    if (exact()) {
        f_ = {re_.get_d(), im_.get_d()};
        re_ = 0;
        im_ = 0;
        kind_ = ScalarKind::Float;
    }
}

Scalar Scalar::operator-() const
{
    if (exact()) {
        return Scalar(Rational(-re_), Rational(-im_));
    }
    return floating(-f_);
}

Scalar& Scalar::operator+=(const Scalar& o)
{
    if (exact() && o.exact()) {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    demote();
    f_ += o.value();
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& o)
{
    if (exact() && o.exact()) {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    demote();
    f_ -= o.value();
    return *this;
}

Scalar& Scalar::operator*=(const Scalar& o)
{
    if (exact() && o.exact()) {
        if (sgn(im_) == 0 && sgn(o.im_) == 0) {
            re_ *= o.re_;
            return *this;
        }
        Rational r = re_ * o.re_ - im_ * o.im_;
        Rational i = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        im_ = std::move(i);
        return *this;
    }
    demote();
    f_ *= o.value();
    return *this;
}

Scalar& Scalar::operator/=(const Scalar& o)
{
    if (exact() && o.exact()) {
        if (sgn(im_) == 0 && sgn(o.im_) == 0) {
            re_ /= o.re_;
            return *this;
        }
        Rational d = o.re_ * o.re_ + o.im_ * o.im_;
        Rational r = (re_ * o.re_ + im_ * o.im_) / d;
        Rational i = (im_ * o.re_ - re_ * o.im_) / d;
        re_ = std::move(r);
        im_ = std::move(i);
        return *this;
    }
    demote();
    f_ /= o.value();
    return *this;
}

bool operator==(const Scalar& a, const Scalar& b)
{
    if (a.exact() && b.exact()) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    return a.value() == b.value();
}

int Scalar::sign() const
{
    if (exact()) {
        return sgn(re_);
    }
    return (f_.real() > 0) - (f_.real() < 0);
}

std::string Scalar::to_string() const
{
    if (exact()) {
        if (sgn(im_) == 0) {
            return rational_to_string(re_);
        }
        return "(" + rational_to_string(re_) + ")+(" + rational_to_string(im_) + ")i";
    }
    if (f_.imag() == 0.0) {
        return std::to_string(f_.real());
    }
    return "(" + std::to_string(f_.real()) + ")+(" + std::to_string(f_.imag()) + ")i";
}

int compare_real(const Scalar& a, const Scalar& b)
{
    if (a.exact() && b.exact()) {
        return cmp(a.re_q(), b.re_q());
    }
    const double x = a.real();
    const double y = b.real();
    return (x > y) - (x < y);
}

Rational rationalize(double x, long max_den)
{
    // Continued-fraction convergents; stops before the denominator bound.
    const bool neg = x < 0;
    double v = std::fabs(x);
    mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const double a = std::floor(v);
        if (a > 1e15) {
            break;
        }
        mpz_class ai = static_cast<long>(a);
        mpz_class h2 = ai * h1 + h0;
        mpz_class k2 = ai * k1 + k0;
        if (k2 > max_den) {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const double frac = v - a;
        if (frac < 1e-15) {
            break;
        }
        v = 1.0 / frac;
    }
    if (k1 == 0) {
        return Rational(0);
    }
    Rational q(h1, k1);
    q.canonicalize();
    return neg ? Rational(-q) : q;
}

bool exact_sqrt(const Rational& q, Rational& out)
{
    if (sgn(q) < 0) {
        return false;
    }
    mpz_class n = q.get_num();
    mpz_class d = q.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) {
        return false;
    }
    mpz_class rn = sqrt(n);
    mpz_class rd = sqrt(d);
    out = Rational(rn, rd);
    out.canonicalize();
    return true;
}

std::string rational_to_string(const Rational& q)
{
    return q.get_str();
}

} // namespace anop
