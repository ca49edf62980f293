#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "anop/operator.hpp"
#include "anop/predicates.hpp"

namespace anop {

/// l2 + C^2: (x, y) -> ((y1, 2x1, 2x2, ...), (y1, y2)).
OperatorExpr example1();
/// l2 + l2: (x, s) -> ((s1, x1, x2/2, x3/3, ...), (s2, s3, ...)).
OperatorExpr example2();
/// alpha * S^power on a single l2 component.
OperatorExpr scaled_shift(const Scalar& alpha, long power = 1);
/// Self-adjoint tridiagonal operator with constant diagonal a and off-diagonal b.
OperatorExpr jacobi(const Scalar& a, const Scalar& b);

/// Unitary (I - K)(I + K)^{-1} for skew-Hermitian K; exact on rational input.
Matrix cayley_unitary(const Matrix& skew);

/// Blocks of  (+) lambda_x S_x  (+)  [[m_e S^p, A], [0, B]].
struct TheoremForm {
    std::vector<std::pair<Scalar, Matrix>> levels; // (lambda_x, unitary S_x)
    Scalar m_e = Scalar(1);
    long shift_power = 1;
    Matrix a; // C^k -> first shift_power coordinates of the l2 part
    Matrix b; // C^k -> C^k
};
/// Components: one finite component per level, the l2 tail, then C^k when k > 0.
OperatorExpr theorem_form(const TheoremForm& f);

/// Named builder used by the CLI. Throws BadParams for unknown names or bad parameters.
OperatorExpr build(const std::string& name, const nlohmann::json& params = nlohmann::json::object());
std::vector<std::string> gallery_names();

/// One checked statement about the named examples. `agreement` is empty when
/// the computation neither confirms nor contradicts the statement.
struct AuditRecord {
    std::string id;
    std::string claim;
    nlohmann::json computed = nlohmann::json::object();
    std::optional<bool> agreement;
    nlohmann::json artifacts = nlohmann::json::object();
    std::string note;
    nlohmann::json to_json() const;
};

struct AuditReport {
    std::vector<AuditRecord> records;
    PredicateOptions config;
    const AuditRecord& record(const std::string& id) const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

AuditReport audit(const PredicateOptions& opt = {});

} // namespace anop
