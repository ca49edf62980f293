#include "anop/gallery.hpp"

#include <cmath>

#include "anop/error.hpp"
#include "anop/json_scalar.hpp"

namespace anop {

namespace {

Matrix matrix_param(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array()) throw Error(ErrorCode::BadParams, where + ": expected an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j[0].size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw Error(ErrorCode::BadParams, where + ": ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = scalar_from_json(j[r][c], where);
    }
    return m;
}

Scalar scalar_param(const nlohmann::json& params, const char* key, const Scalar& fallback)
{
    if (!params.contains(key)) return fallback;
    return scalar_from_json(params.at(key), key);
}

bool is_unitary(const Matrix& u)
{
    if (u.rows() != u.cols() || u.rows() == 0) return false;
    const Matrix g = adjoint(u) * u;
    if (all_exact(g)) return is_zero(g - Matrix::identity(u.rows()));
    return max_abs(to_complex(g - Matrix::identity(u.rows()))) <= 1e-10;
}

} // namespace

OperatorExpr example1()
{
    OperatorExpr t({Space::l2(), Space::finite(2)});
    t.add_diagonal(0, 1, DiagonalSeq(Scalar(2)));
    t.add_entry(0, 1, 0, 0, Scalar(1));
    t.add_entry(1, 1, 0, 0, Scalar(1));
    t.add_entry(1, 1, 1, 1, Scalar(1));
    return t;
}

OperatorExpr example2()
{
    OperatorExpr t({Space::l2(), Space::l2()});
    t.add_diagonal(0, 1, DiagonalSeq({}, make_inverse_power(Scalar(0), Scalar(1), 1, 1)));
    t.add_entry(0, 1, 0, 0, Scalar(1));
    t.add_diagonal(1, -1, DiagonalSeq(Scalar(1)));
    return t;
}

OperatorExpr scaled_shift(const Scalar& alpha, long power)
{
    if (power < 1) throw Error(ErrorCode::BadParams, "shift power must be at least 1");
    OperatorExpr t({Space::l2()});
    t.add_diagonal(0, power, DiagonalSeq(alpha));
    return t;
}

OperatorExpr jacobi(const Scalar& a, const Scalar& b)
{
    OperatorExpr t({Space::l2()});
    t.add_diagonal(0, 0, DiagonalSeq(a));
    t.add_diagonal(0, 1, DiagonalSeq(b));
    t.add_diagonal(0, -1, DiagonalSeq(b.conj()));
    return t;
}

Matrix cayley_unitary(const Matrix& skew)
{
    const std::size_t n = skew.rows();
    if (skew.cols() != n || n == 0) throw Error(ErrorCode::BadParams, "Cayley transform needs a square matrix");
    const Matrix sum = skew + adjoint(skew);
    if (all_exact(sum) ? !is_zero(sum) : max_abs(to_complex(sum)) > 1e-12) throw Error(ErrorCode::BadParams, "Cayley transform needs a skew-Hermitian matrix");
    const Matrix id = Matrix::identity(n);
    const auto inv = inverse(id + skew, 1e-12);
    if (!inv) throw Error(ErrorCode::BadParams, "I + K is singular");
    return (id - skew) * *inv;
}

OperatorExpr theorem_form(const TheoremForm& f)
{
    if (f.shift_power < 1) throw Error(ErrorCode::BadParams, "shift power must be at least 1");
    const std::size_t k = f.b.rows();
    if (f.b.cols() != k) throw Error(ErrorCode::BadParams, "B must be square");
    if (k > 0 && (f.a.cols() != k || f.a.rows() > static_cast<std::size_t>(f.shift_power))) {
        throw Error(ErrorCode::BadParams, "A must map C^k into the first shift_power coordinates");
    }
    if (k == 0 && !f.a.empty()) throw Error(ErrorCode::BadParams, "A given without B");
    std::vector<Space> spaces;
    for (const auto& [lambda, u] : f.levels) {
        if (!is_unitary(u)) throw Error(ErrorCode::BadParams, "level block is not unitary");
        spaces.push_back(Space::finite(u.rows()));
    }
    const std::size_t tail = spaces.size();
    spaces.push_back(Space::l2());
    if (k > 0) spaces.push_back(Space::finite(k));

    OperatorExpr t(spaces);
    for (std::size_t x = 0; x < f.levels.size(); ++x) {
        const auto& [lambda, u] = f.levels[x];
        for (std::size_t r = 0; r < u.rows(); ++r) {
            for (std::size_t c = 0; c < u.cols(); ++c) t.add_entry(x, x, r, c, lambda * u(r, c));
        }
    }
    t.add_diagonal(tail, f.shift_power, DiagonalSeq(f.m_e));
    for (std::size_t r = 0; r < f.a.rows(); ++r) {
        for (std::size_t c = 0; c < f.a.cols(); ++c) t.add_entry(tail, tail + 1, r, c, f.a(r, c));
    }
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) t.add_entry(tail + 1, tail + 1, r, c, f.b(r, c));
    }
    return t;
}

std::vector<std::string> gallery_names()
{
    return {"example1", "example2", "right_shift", "scaled_shift", "jacobi", "theorem_form"};
}

OperatorExpr build(const std::string& name, const nlohmann::json& params)
{
    try {
        if (name == "example1") return example1();
        if (name == "example2") return example2();
        if (name == "right_shift") return right_shift();
        if (name == "scaled_shift") {
            const long power = params.value("power", 1L);
            return scaled_shift(scalar_param(params, "alpha", Scalar(2)), power);
        }
        if (name == "jacobi") return jacobi(scalar_param(params, "a", Scalar(0)), scalar_param(params, "b", Scalar(1)));
        if (name == "theorem_form") {
            TheoremForm f;
            if (params.contains("levels")) {
                for (const auto& lv : params.at("levels")) {
                    f.levels.emplace_back(scalar_from_json(lv.at("lambda"), "lambda"), matrix_param(lv.at("unitary"), "unitary"));
                }
            } else {
                f.levels.emplace_back(Scalar(3), matrix_param(nlohmann::json::parse("[[0,1],[1,0]]"), "unitary"));
            }
            f.m_e = scalar_param(params, "m_e", Scalar(2));
            f.shift_power = params.value("shift_power", 1L);
            if (params.contains("a")) f.a = matrix_param(params.at("a"), "a");
            if (params.contains("b")) f.b = matrix_param(params.at("b"), "b");
            return theorem_form(f);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadParams, std::string("gallery parameters: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaError) throw Error(ErrorCode::BadParams, e.what());
        throw;
    }
    throw Error(ErrorCode::BadParams, "unknown gallery operator '" + name + "'");
}

} // namespace anop
