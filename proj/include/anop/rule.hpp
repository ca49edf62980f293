#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "anop/scalar.hpp"

namespace anop {

/// Strict monotonicity of a real tail sequence.
enum class Monotone { None, Constant, Increasing, Decreasing };
enum class TailSign { Unknown, Positive, Negative };

/// Certifies |at(i) - limit| <= C * (i + 1)^(-p) for every valid index.
struct DecayBound {
    double C = 0.0;
    double p = 0.0;
};

/// Entry rule for the tail of a diagonal. Rules form an immutable expression
/// tree; every node knows its limit, a decay certificate when one can be
/// propagated, and the monotonicity/sign facts the verdict engine relies on.
class TailRule {
public:
    virtual ~TailRule() = default;

    virtual Scalar at(std::size_t i) const = 0;
    virtual Scalar limit() const = 0;
    virtual std::optional<DecayBound> decay() const = 0;
    /// Smallest index at which at() is defined.
    virtual std::size_t valid_from() const { return 0; }
    virtual bool is_const() const { return false; }
    virtual bool real() const = 0;
    virtual Monotone monotone() const = 0;
    virtual TailSign sign() const = 0;
    /// True when at(i) != 0 for every valid i.
    virtual bool nonvanishing() const = 0;
    virtual nlohmann::json describe() const = 0;
};

using RulePtr = std::shared_ptr<const TailRule>;

RulePtr make_const(const Scalar& value);
/// entry(i) = limit + coeff / (i + shift)^power, shift >= 1, power >= 1.
RulePtr make_inverse_power(const Scalar& limit, const Scalar& coeff, long shift, int power);
/// entry(i) = inner(i + by).
RulePtr make_shift(const RulePtr& inner, long by);
RulePtr make_conj(const RulePtr& inner);
RulePtr make_scale(const RulePtr& inner, const Scalar& by);
RulePtr make_product(const RulePtr& a, const RulePtr& b);
RulePtr make_sum(std::vector<RulePtr> terms);

bool same_rule(const RulePtr& a, const RulePtr& b);
RulePtr rule_from_json(const nlohmann::json& j);

} // namespace anop
