#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "anop/scalar.hpp"

namespace anop {

using Complex = std::complex<double>;

/// Dense row-major matrix over Scalar (exact or float entries) or Complex.
template <typename T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static DenseMatrix identity(std::size_t n)
    {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<T> column(std::size_t c) const
    {
        std::vector<T> v(rows_);
        for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
        return v;
    }

    static DenseMatrix from_columns(const std::vector<std::vector<T>>& cols, std::size_t rows)
    {
        DenseMatrix m(rows, cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            for (std::size_t r = 0; r < rows; ++r) m(r, c) = cols[c][r];
        }
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = DenseMatrix<Scalar>;
using CMatrix = DenseMatrix<Complex>;
using Vec = std::vector<Scalar>;
using CVec = std::vector<Complex>;

bool all_exact(const Matrix& m);
bool all_exact(const Vec& v);
CMatrix to_complex(const Matrix& m);
CVec to_complex(const Vec& v);
/// Float matrix promoted to exact dyadic rationals.
Matrix exact_from(const CMatrix& m);

Matrix adjoint(const Matrix& m);
CMatrix adjoint(const CMatrix& m);
Matrix operator*(const Matrix& a, const Matrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
CMatrix operator-(const CMatrix& a, const CMatrix& b);
Matrix scaled(const Matrix& m, const Scalar& s);
Vec operator*(const Matrix& a, const Vec& x);
CVec operator*(const CMatrix& a, const CVec& x);

bool is_zero(const Matrix& m);
double frobenius(const CMatrix& m);
double max_abs(const CMatrix& m);
/// Largest singular value (via the Hermitian eigenproblem of m* m).
double spectral_norm(const CMatrix& m);
/// Maximum |m - m*| entry.
double hermitian_defect(const CMatrix& m);

Scalar inner(const Vec& x, const Vec& y);
Complex inner(const CVec& x, const CVec& y);
double norm(const CVec& x);

/// Basis of the null space. Exact elimination when every entry is exact;
/// otherwise partial pivoting with |pivot| <= tol treated as zero.
std::vector<Vec> kernel(const Matrix& m, double tol);
std::size_t rank(const Matrix& m, double tol);
std::optional<Matrix> inverse(const Matrix& m, double tol);

/// Unnormalized Gram-Schmidt; exact input stays exact. Vectors that become
/// zero (exactly, or below tol for float data) are dropped.
std::vector<Vec> orthogonalize(const std::vector<Vec>& vs, double tol);
/// Orthonormal columns spanning the input columns (pivot threshold tol).
CMatrix orthonormalize(const std::vector<CVec>& vs, double tol);

/// Exact positive-semidefiniteness of a Hermitian matrix via LDL* with
/// symmetric pivoting. On failure returns a rational witness x with x* H x < 0.
struct PsdDecision {
    bool psd = true;
    Vec witness;
    Scalar witness_form;
};
PsdDecision decide_psd(const Matrix& h);

struct Eigenpairs {
    std::vector<double> values;
    CMatrix vectors; // columns
    int sweeps = 0;
};
/// Cyclic Jacobi for Hermitian matrices; stops when the off-diagonal
/// Frobenius norm falls below tol * ||h||_F. Eigenvalues descending,
/// ties broken lexicographically on the eigenvector entries.
Eigenpairs jacobi_eigen(const CMatrix& h, double tol = 1e-12);

/// Cholesky of h + shift*I; false when a nonpositive pivot appears.
bool cholesky_succeeds(const CMatrix& h, double shift);

} // namespace anop
