#include "anop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace anop {

bool all_exact(const Matrix& m)
{
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (!m(r, c).exact()) return false;
        }
    }
    return true;
}

bool all_exact(const Vec& v)
{
    return std::all_of(v.begin(), v.end(), [](const Scalar& s) { return s.exact(); });
}

CMatrix to_complex(const Matrix& m)
{
    CMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c).value();
    }
    return out;
}

CVec to_complex(const Vec& v)
{
    CVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
    return out;
}

Matrix exact_from(const CMatrix& m)
{
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out(r, c) = Scalar::exact_from_double(m(r, c).real(), m(r, c).imag());
        }
    }
    return out;
}

Matrix adjoint(const Matrix& m)
{
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c).conj();
    }
    return out;
}

CMatrix adjoint(const CMatrix& m)
{
    CMatrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = std::conj(m(r, c));
    }
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Scalar& aik = a(i, k);
            if (aik.is_zero()) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                if (b(k, j).is_zero()) continue;
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b)
{
    CMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex(0.0)) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix operator+(const Matrix& a, const Matrix& b)
{
    Matrix out = a;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += b(r, c);
    }
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b)
{
    Matrix out = a;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) -= b(r, c);
    }
    return out;
}

CMatrix operator-(const CMatrix& a, const CMatrix& b)
{
    CMatrix out = a;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) -= b(r, c);
    }
    return out;
}

Matrix scaled(const Matrix& m, const Scalar& s)
{
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) *= s;
    }
    return out;
}

Vec operator*(const Matrix& a, const Vec& x)
{
    Vec out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            if (a(i, k).is_zero() || x[k].is_zero()) continue;
            out[i] += a(i, k) * x[k];
        }
    }
    return out;
}

CVec operator*(const CMatrix& a, const CVec& x)
{
    CVec out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) out[i] += a(i, k) * x[k];
    }
    return out;
}

bool is_zero(const Matrix& m)
{
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (!m(r, c).is_zero()) return false;
        }
    }
    return true;
}

double frobenius(const CMatrix& m)
{
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) s += std::norm(m(r, c));
    }
    return std::sqrt(s);
}

double max_abs(const CMatrix& m)
{
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) s = std::max(s, std::abs(m(r, c)));
    }
    return s;
}

double spectral_norm(const CMatrix& m)
{
    if (m.empty()) return 0.0;
    const CMatrix g = m.cols() <= m.rows() ? adjoint(m) * m : m * adjoint(m);
    const Eigenpairs e = jacobi_eigen(g);
    return std::sqrt(std::max(0.0, e.values.front()));
}

double hermitian_defect(const CMatrix& m)
{
    double d = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            d = std::max(d, std::abs(m(r, c) - std::conj(m(c, r))));
        }
    }
    return d;
}

Scalar inner(const Vec& x, const Vec& y)
{
    Scalar s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].is_zero() || y[i].is_zero()) continue;
        s += x[i] * y[i].conj();
    }
    return s;
}

Complex inner(const CVec& x, const CVec& y)
{
    Complex s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
    return s;
}

double norm(const CVec& x)
{
    return std::sqrt(std::real(inner(x, x)));
}

namespace {

bool pivot_zero(const Scalar& s, bool exact, double tol)
{
    return exact ? s.is_zero() : s.abs() <= tol;
}

/// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(Matrix& a, double tol)
{
    const bool exact = all_exact(a);
    double scale = 1.0;
    if (!exact) scale = std::max(1.0, max_abs(to_complex(a)));
    const double ptol = tol * scale;
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
        std::size_t best = a.rows();
        double best_abs = 0.0;
        for (std::size_t r = row; r < a.rows(); ++r) {
            if (pivot_zero(a(r, col), exact, ptol)) continue;
            if (exact) {
                best = r;
                break;
            }
            if (a(r, col).abs() > best_abs) {
                best_abs = a(r, col).abs();
                best = r;
            }
        }
        if (best == a.rows()) {
            if (!exact) {
                for (std::size_t r = row; r < a.rows(); ++r) a(r, col) = Scalar::floating(0.0);
            }
            continue;
        }
        if (best != row) {
            for (std::size_t c = 0; c < a.cols(); ++c) std::swap(a(row, c), a(best, c));
        }
        const Scalar inv = Scalar(1) / a(row, col);
        for (std::size_t c = col; c < a.cols(); ++c) a(row, c) *= inv;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            if (r == row || a(r, col).is_zero()) continue;
            const Scalar f = a(r, col);
            for (std::size_t c = col; c < a.cols(); ++c) {
                if (a(row, c).is_zero()) continue;
                a(r, c) -= f * a(row, c);
            }
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

} // namespace

std::vector<Vec> kernel(const Matrix& m, double tol)
{
    Matrix a = m;
    const bool exact = all_exact(m);
    const auto pivots = rref(a, tol);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<Vec> out;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        Vec v(m.cols(), exact ? Scalar(0) : Scalar::floating(0.0));
        v[free] = exact ? Scalar(1) : Scalar::floating(1.0);
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -a(i, free);
        out.push_back(std::move(v));
    }
    return out;
}

std::size_t rank(const Matrix& m, double tol)
{
    Matrix a = m;
    return rref(a, tol).size();
}

std::optional<Matrix> inverse(const Matrix& m, double tol)
{
    const std::size_t n = m.rows();
    if (m.cols() != n) return std::nullopt;
    Matrix aug(n, 2 * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) aug(r, c) = m(r, c);
        aug(r, n + r) = Scalar(1);
    }
    if (!all_exact(m)) {
        for (std::size_t r = 0; r < n; ++r) aug(r, n + r) = Scalar::floating(1.0);
    }
    const auto pivots = rref(aug, tol);
    if (pivots.size() < n || pivots[n - 1] != n - 1) return std::nullopt;
    Matrix out(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) out(r, c) = aug(r, n + c);
    }
    return out;
}

std::vector<Vec> orthogonalize(const std::vector<Vec>& vs, double tol)
{
    std::vector<Vec> out;
    std::vector<Scalar> norms;
    for (const auto& a : vs) {
        Vec v = a;
        for (std::size_t j = 0; j < out.size(); ++j) {
            const Scalar coef = inner(v, out[j]) / norms[j];
            if (coef.is_zero()) continue;
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coef * out[j][i];
        }
        const Scalar n2 = inner(v, v);
        const bool exact = all_exact(v);
        if (exact ? n2.is_zero() : std::sqrt(n2.real()) <= tol) continue;
        out.push_back(std::move(v));
        norms.push_back(n2);
    }
    return out;
}

CMatrix orthonormalize(const std::vector<CVec>& vs, double tol)
{
    std::vector<CVec> out;
    for (const auto& a : vs) {
        CVec v = a;
        const double n0 = norm(v);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : out) {
                const Complex c = inner(v, q);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
            }
        }
        const double n = norm(v);
        if (n <= tol * std::max(1.0, n0)) continue;
        for (auto& x : v) x /= n;
        out.push_back(std::move(v));
    }
    const std::size_t rows = vs.empty() ? 0 : vs.front().size();
    return CMatrix::from_columns(out, rows);
}

PsdDecision decide_psd(const Matrix& h)
{
    const std::size_t n = h.rows();
    Matrix a = h;
    std::vector<std::size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), 0);

    struct Step {
        std::size_t pivot;
        Scalar a;
        std::vector<std::pair<std::size_t, Scalar>> row;
    };
    std::vector<Step> steps;

    auto lift = [&](Vec x) {
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
            Scalar s;
            for (const auto& [i, v] : it->row) {
                if (!x[i].is_zero()) s += v * x[i];
            }
            x[it->pivot] = -s / it->a;
        }
        return x;
    };
    auto finish = [&](Vec y) {
        PsdDecision d;
        d.psd = false;
        d.witness = lift(std::move(y));
        d.witness_form = inner(h * d.witness, d.witness);
        return d;
    };

    while (!remaining.empty()) {
        for (auto i : remaining) {
            if (a(i, i).sign() < 0) {
                Vec y(n);
                y[i] = Scalar(1);
                return finish(std::move(y));
            }
        }
        std::size_t p = n;
        for (auto i : remaining) {
            if (a(i, i).sign() > 0) {
                p = i;
                break;
            }
        }
        if (p == n) {
            for (auto i : remaining) {
                for (auto j : remaining) {
                    if (i != j && !a(i, j).is_zero()) {
                        Vec y(n);
                        y[i] = -a(i, j);
                        y[j] = Scalar(1);
                        return finish(std::move(y));
                    }
                }
            }
            break;
        }
        Step st{p, a(p, p), {}};
        std::vector<std::size_t> rest;
        for (auto i : remaining) {
            if (i == p) continue;
            rest.push_back(i);
            if (!a(p, i).is_zero()) st.row.emplace_back(i, a(p, i));
        }
        for (auto i : rest) {
            if (a(i, p).is_zero()) continue;
            const Scalar f = a(i, p) / st.a;
            for (auto j : rest) {
                if (a(p, j).is_zero()) continue;
                a(i, j) -= f * a(p, j);
            }
        }
        steps.push_back(std::move(st));
        remaining = std::move(rest);
    }
    return {};
}

namespace {

void normalize_phase(CMatrix& v, std::size_t col)
{
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t r = 0; r < v.rows(); ++r) {
        const double a = std::abs(v(r, col));
        if (a > best_abs + 1e-9) {
            best_abs = a;
            best = r;
        }
    }
    if (best_abs <= 0.0) return;
    const Complex ph = std::conj(v(best, col)) / std::abs(v(best, col));
    for (std::size_t r = 0; r < v.rows(); ++r) v(r, col) *= ph;
}

} // namespace

Eigenpairs jacobi_eigen(const CMatrix& h, double tol)
{
    const std::size_t n = h.rows();
    CMatrix a = h;
    for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
    CMatrix v = CMatrix::identity(n);
    const double fro = std::max(frobenius(a), 1e-300);
    Eigenpairs out;

    auto off = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * std::norm(a(i, j));
        }
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off() <= tol * fro) break;
        out.sweeps = sweep + 1;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300 || mag <= 1e-18 * fro) continue;
                const Complex ph = apq / mag; // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex emi = std::conj(ph);
                // Columns: A <- A U with U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = akp * c - akq * s * emi;
                    a(k, q) = akp * s + akq * c * emi;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = c * apk - s * ph * aqk;
                    a(q, k) = s * apk + c * ph * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * c - vkq * s * emi;
                    v(k, q) = vkp * s + vkq * c * emi;
                }
            }
        }
    }

    for (std::size_t j = 0; j < n; ++j) normalize_phase(v, j);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const double tie = 1e-12 * fro;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const double ex = a(x, x).real();
        const double ey = a(y, y).real();
        if (std::abs(ex - ey) > tie) return ex > ey;
        for (std::size_t r = 0; r < n; ++r) {
            const Complex vx = v(r, x);
            const Complex vy = v(r, y);
            if (std::abs(vx.real() - vy.real()) > 1e-9) return vx.real() > vy.real();
            if (std::abs(vx.imag() - vy.imag()) > 1e-9) return vx.imag() > vy.imag();
        }
        return x < y;
    });
    out.values.resize(n);
    out.vectors = CMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]).real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
    }
    return out;
}

bool cholesky_succeeds(const CMatrix& h, double shift)
{
    const std::size_t n = h.rows();
    CMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = h(j, j).real() + shift;
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            Complex s = h(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return true;
}

} // namespace anop
