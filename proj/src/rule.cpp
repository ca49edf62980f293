#include "anop/rule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anop/error.hpp"
#include "anop/json_scalar.hpp"

namespace anop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DecayBound zero_decay() { return {0.0, kInf}; }

double min_p(double a, double b) { return std::min(a, b); }

/// Sign of a strictly monotone real tail from its first value and limit.
TailSign monotone_sign(Monotone mono, const Scalar& first, const Scalar& limit)
{
    if (mono == Monotone::Increasing) {
        if (first.sign() > 0) return TailSign::Positive;
        if (limit.sign() <= 0) return TailSign::Negative;
    } else if (mono == Monotone::Decreasing) {
        if (limit.sign() >= 0) return TailSign::Positive;
        if (first.sign() < 0) return TailSign::Negative;
    }
    return TailSign::Unknown;
}

class ConstRule final : public TailRule {
public:
    explicit ConstRule(Scalar v) : v_(std::move(v)) {}
    Scalar at(std::size_t) const override { return v_; }
    Scalar limit() const override { return v_; }
    std::optional<DecayBound> decay() const override { return zero_decay(); }
    bool is_const() const override { return true; }
    bool real() const override { return v_.is_real(); }
    Monotone monotone() const override { return Monotone::Constant; }
    TailSign sign() const override
    {
        if (!real() || v_.is_zero()) return TailSign::Unknown;
        return v_.sign() > 0 ? TailSign::Positive : TailSign::Negative;
    }
    bool nonvanishing() const override { return !v_.is_zero(); }
    nlohmann::json describe() const override
    {
        return {{"kind", "const"}, {"value", scalar_to_json(v_)}};
    }

private:
    Scalar v_;
};

class InversePowerRule final : public TailRule {
public:
    InversePowerRule(Scalar limit, Scalar coeff, long shift, int power)
        : limit_(std::move(limit)), coeff_(std::move(coeff)), shift_(shift), power_(power)
    {
    }

    Scalar at(std::size_t i) const override
    {
        Rational base(static_cast<long>(i) + shift_);
        Rational den = 1;
        for (int k = 0; k < power_; ++k) den *= base;
        return limit_ + coeff_ / Scalar(den);
    }
    Scalar limit() const override { return limit_; }
    std::optional<DecayBound> decay() const override
    {
        return DecayBound{coeff_.abs_upper(), static_cast<double>(power_)};
    }
    bool real() const override { return limit_.is_real() && coeff_.is_real(); }
    Monotone monotone() const override
    {
        if (!real()) return Monotone::None;
        return coeff_.sign() > 0 ? Monotone::Decreasing : Monotone::Increasing;
    }
    TailSign sign() const override
    {
        if (!real()) return TailSign::Unknown;
        return monotone_sign(monotone(), at(0), limit_);
    }
    bool nonvanishing() const override
    {
        return sign() != TailSign::Unknown || limit_.is_zero();
    }
    nlohmann::json describe() const override
    {
        return {{"kind", "inverse_power"},
                {"limit", scalar_to_json(limit_)},
                {"coeff", scalar_to_json(coeff_)},
                {"shift", shift_},
                {"power", power_}};
    }

private:
    Scalar limit_;
    Scalar coeff_;
    long shift_;
    int power_;
};

class ShiftRule final : public TailRule {
public:
    ShiftRule(RulePtr inner, long by) : inner_(std::move(inner)), by_(by) {}
    const RulePtr& inner() const { return inner_; }
    long by() const { return by_; }

    Scalar at(std::size_t i) const override
    {
        return inner_->at(static_cast<std::size_t>(static_cast<long>(i) + by_));
    }
    Scalar limit() const override { return inner_->limit(); }
    std::optional<DecayBound> decay() const override
    {
        auto d = inner_->decay();
        if (!d) return std::nullopt;
        if (by_ >= 0 || d->C == 0.0) return d;
        return DecayBound{d->C * std::pow(static_cast<double>(-by_ + 1), d->p) * (1.0 + 1e-12), d->p};
    }
    std::size_t valid_from() const override
    {
        const long vf = static_cast<long>(inner_->valid_from()) - by_;
        return static_cast<std::size_t>(std::max(0L, vf));
    }
    bool real() const override { return inner_->real(); }
    Monotone monotone() const override { return inner_->monotone(); }
    TailSign sign() const override { return inner_->sign(); }
    bool nonvanishing() const override { return inner_->nonvanishing(); }
    nlohmann::json describe() const override
    {
        return {{"kind", "shift"}, {"by", by_}, {"of", inner_->describe()}};
    }

private:
    RulePtr inner_;
    long by_;
};

class ConjRule final : public TailRule {
public:
    explicit ConjRule(RulePtr inner) : inner_(std::move(inner)) {}
    const RulePtr& inner() const { return inner_; }
    Scalar at(std::size_t i) const override { return inner_->at(i).conj(); }
    Scalar limit() const override { return inner_->limit().conj(); }
    std::optional<DecayBound> decay() const override { return inner_->decay(); }
    std::size_t valid_from() const override { return inner_->valid_from(); }
    bool real() const override { return false; }
    Monotone monotone() const override { return Monotone::None; }
    TailSign sign() const override { return TailSign::Unknown; }
    bool nonvanishing() const override { return inner_->nonvanishing(); }
    nlohmann::json describe() const override
    {
        return {{"kind", "conj"}, {"of", inner_->describe()}};
    }

private:
    RulePtr inner_;
};

class ScaleRule final : public TailRule {
public:
    ScaleRule(RulePtr inner, Scalar by) : inner_(std::move(inner)), by_(std::move(by)) {}
    Scalar at(std::size_t i) const override { return by_ * inner_->at(i); }
    Scalar limit() const override { return by_ * inner_->limit(); }
    std::optional<DecayBound> decay() const override
    {
        auto d = inner_->decay();
        if (!d) return std::nullopt;
        return DecayBound{d->C * by_.abs_upper(), d->p};
    }
    std::size_t valid_from() const override { return inner_->valid_from(); }
    bool real() const override { return by_.is_real() && inner_->real(); }
    Monotone monotone() const override
    {
        if (!real()) return Monotone::None;
        const Monotone m = inner_->monotone();
        if (by_.sign() > 0 || m == Monotone::Constant || m == Monotone::None) return m;
        return m == Monotone::Increasing ? Monotone::Decreasing : Monotone::Increasing;
    }
    TailSign sign() const override
    {
        if (!real()) return TailSign::Unknown;
        const TailSign s = inner_->sign();
        if (s == TailSign::Unknown || by_.sign() > 0) return s;
        return s == TailSign::Positive ? TailSign::Negative : TailSign::Positive;
    }
    bool nonvanishing() const override { return inner_->nonvanishing(); }
    nlohmann::json describe() const override
    {
        return {{"kind", "scale"}, {"by", scalar_to_json(by_)}, {"of", inner_->describe()}};
    }

private:
    RulePtr inner_;
    Scalar by_;
};

class ProductRule final : public TailRule {
public:
    ProductRule(RulePtr a, RulePtr b) : a_(std::move(a)), b_(std::move(b)) {}
    Scalar at(std::size_t i) const override { return a_->at(i) * b_->at(i); }
    Scalar limit() const override { return a_->limit() * b_->limit(); }
    std::optional<DecayBound> decay() const override
    {
        auto da = a_->decay();
        auto db = b_->decay();
        if (!da || !db) return std::nullopt;
        const double la = a_->limit().abs_upper();
        const double lb = b_->limit().abs_upper();
        return DecayBound{(la * db->C + lb * da->C + da->C * db->C) * (1.0 + 1e-12),
                          min_p(da->p, db->p)};
    }
    std::size_t valid_from() const override
    {
        return std::max(a_->valid_from(), b_->valid_from());
    }
    bool real() const override { return a_->real() && b_->real(); }
    TailSign sign() const override
    {
        const TailSign sa = a_->sign();
        const TailSign sb = b_->sign();
        if (sa == TailSign::Unknown || sb == TailSign::Unknown) return TailSign::Unknown;
        return sa == sb ? TailSign::Positive : TailSign::Negative;
    }
    Monotone monotone() const override
    {
        // An increasing factor that starts at zero is positive from its second entry on.
        auto sign_of = [](const RulePtr& r) {
            const TailSign s = r->sign();
            if (s != TailSign::Unknown) return s;
            if (r->real() && r->monotone() == Monotone::Increasing && r->at(0).sign() >= 0) return TailSign::Positive;
            return s;
        };
        const TailSign sa = sign_of(a_);
        const TailSign sb = sign_of(b_);
        if (!real() || sa == TailSign::Unknown || sb == TailSign::Unknown) return Monotone::None;
        // Monotonicity of |a| and |b|; the product of two same-direction
        // positive sequences keeps that direction.
        auto abs_dir = [](Monotone m, TailSign s) {
            if (m == Monotone::Constant || m == Monotone::None) return m;
            if (s == TailSign::Positive) return m;
            return m == Monotone::Increasing ? Monotone::Decreasing : Monotone::Increasing;
        };
        const Monotone ma = abs_dir(a_->monotone(), sa);
        const Monotone mb = abs_dir(b_->monotone(), sb);
        Monotone mag = Monotone::None;
        if (ma == mb) mag = ma;
        else if (ma == Monotone::Constant) mag = mb;
        else if (mb == Monotone::Constant) mag = ma;
        if (mag == Monotone::None || mag == Monotone::Constant) return mag;
        if (sa == sb) return mag;
        return mag == Monotone::Increasing ? Monotone::Decreasing : Monotone::Increasing;
    }
    bool nonvanishing() const override { return a_->nonvanishing() && b_->nonvanishing(); }
    nlohmann::json describe() const override
    {
        return {{"kind", "product"}, {"of", nlohmann::json::array({a_->describe(), b_->describe()})}};
    }

private:
    RulePtr a_;
    RulePtr b_;
};

class SumRule final : public TailRule {
public:
    explicit SumRule(std::vector<RulePtr> terms) : terms_(std::move(terms)) {}
    const std::vector<RulePtr>& terms() const { return terms_; }
    Scalar at(std::size_t i) const override
    {
        Scalar s;
        for (const auto& t : terms_) s += t->at(i);
        return s;
    }
    Scalar limit() const override
    {
        Scalar s;
        for (const auto& t : terms_) s += t->limit();
        return s;
    }
    std::optional<DecayBound> decay() const override
    {
        DecayBound out = zero_decay();
        for (const auto& t : terms_) {
            auto d = t->decay();
            if (!d) return std::nullopt;
            if (d->C == 0.0) continue;
            out.C += d->C;
            out.p = min_p(out.p, d->p);
        }
        out.C *= 1.0 + 1e-12;
        return out;
    }
    std::size_t valid_from() const override
    {
        std::size_t v = 0;
        for (const auto& t : terms_) v = std::max(v, t->valid_from());
        return v;
    }
    bool real() const override
    {
        return std::all_of(terms_.begin(), terms_.end(), [](const RulePtr& t) { return t->real(); });
    }
    Monotone monotone() const override
    {
        if (!real()) return Monotone::None;
        Monotone m = Monotone::Constant;
        for (const auto& t : terms_) {
            const Monotone tm = t->monotone();
            if (tm == Monotone::None) return Monotone::None;
            if (tm == Monotone::Constant) continue;
            if (m == Monotone::Constant) m = tm;
            else if (m != tm) return Monotone::None;
        }
        return m;
    }
    TailSign sign() const override
    {
        if (!real()) return TailSign::Unknown;
        const Monotone m = monotone();
        if (m == Monotone::Increasing || m == Monotone::Decreasing) {
            return monotone_sign(m, at(valid_from()), limit());
        }
        TailSign s = terms_.front()->sign();
        for (const auto& t : terms_) {
            if (t->sign() != s) return TailSign::Unknown;
        }
        return s;
    }
    bool nonvanishing() const override { return sign() != TailSign::Unknown; }
    nlohmann::json describe() const override
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : terms_) arr.push_back(t->describe());
        return {{"kind", "sum"}, {"of", arr}};
    }

private:
    std::vector<RulePtr> terms_;
};

std::string key_of(const RulePtr& r) { return r->describe().dump(); }

} // namespace

RulePtr make_const(const Scalar& value)
{
    return std::make_shared<ConstRule>(value);
}

RulePtr make_inverse_power(const Scalar& limit, const Scalar& coeff, long shift, int power)
{
    if (shift < 1 || power < 1) {
        throw Error(ErrorCode::BadParams, "inverse_power rule requires shift >= 1 and power >= 1");
    }
    if (coeff.is_zero()) return make_const(limit);
    return std::make_shared<InversePowerRule>(limit, coeff, shift, power);
}

RulePtr make_shift(const RulePtr& inner, long by)
{
    if (by == 0 || inner->is_const()) return inner;
    if (auto* s = dynamic_cast<const ShiftRule*>(inner.get())) {
        return make_shift(s->inner(), by + s->by());
    }
    return std::make_shared<ShiftRule>(inner, by);
}

RulePtr make_conj(const RulePtr& inner)
{
    if (inner->is_const()) return make_const(inner->limit().conj());
    if (inner->real()) return inner;
    if (auto* c = dynamic_cast<const ConjRule*>(inner.get())) {
        return c->inner();
    }
    return std::make_shared<ConjRule>(inner);
}

RulePtr make_scale(const RulePtr& inner, const Scalar& by)
{
    if (by.is_zero()) return make_const(Scalar(0) * by);
    if (by == Scalar(1)) return inner;
    if (inner->is_const()) return make_const(by * inner->limit());
    return std::make_shared<ScaleRule>(inner, by);
}

RulePtr make_product(const RulePtr& a, const RulePtr& b)
{
    if (a->is_const()) return make_scale(b, a->limit());
    if (b->is_const()) return make_scale(a, b->limit());
    if (key_of(a) <= key_of(b)) return std::make_shared<ProductRule>(a, b);
    return std::make_shared<ProductRule>(b, a);
}

RulePtr make_sum(std::vector<RulePtr> terms)
{
    std::vector<RulePtr> flat;
    Scalar c;
    bool have_const = false;
    for (auto& t : terms) {
        if (t->is_const()) {
            c += t->limit();
            have_const = true;
        } else if (auto* s = dynamic_cast<const SumRule*>(t.get())) {
            for (const auto& r : s->terms()) {
                if (r->is_const()) {
                    c += r->limit();
                    have_const = true;
                } else {
                    flat.push_back(r);
                }
            }
        } else {
            flat.push_back(t);
        }
    }
    if (flat.empty()) return make_const(c);
    if (have_const && !c.is_zero()) flat.push_back(make_const(c));
    if (flat.size() == 1) return flat.front();
    std::stable_sort(flat.begin(), flat.end(),
                     [](const RulePtr& x, const RulePtr& y) { return key_of(x) < key_of(y); });
    return std::make_shared<SumRule>(std::move(flat));
}

bool same_rule(const RulePtr& a, const RulePtr& b)
{
    if (a->is_const() && b->is_const()) return a->limit() == b->limit();
    return a->describe() == b->describe();
}

RulePtr rule_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw Error(ErrorCode::SchemaError, "rule: expected object with string field \"kind\"");
    }
    const std::string kind = j["kind"].get<std::string>();
    auto need = [&](const char* field) -> const nlohmann::json& {
        if (!j.contains(field)) {
            throw Error(ErrorCode::SchemaError, "rule." + kind + ": missing field \"" + field + "\"");
        }
        return j[field];
    };
    if (kind == "const") return make_const(scalar_from_json(need("value"), "rule.const.value"));
    if (kind == "inverse_power") {
        const Scalar limit = j.contains("limit") ? scalar_from_json(j["limit"], "rule.limit") : Scalar(0);
        const auto& shift = need("shift");
        const auto& power = need("power");
        if (!shift.is_number_integer() || !power.is_number_integer()) {
            throw Error(ErrorCode::SchemaError, "rule.inverse_power: shift and power must be integers");
        }
        try {
            return make_inverse_power(limit, scalar_from_json(need("coeff"), "rule.coeff"),
                                      shift.get<long>(), power.get<int>());
        } catch (const Error& e) {
            throw Error(ErrorCode::SchemaError, e.what());
        }
    }
    if (kind == "shift") {
        const auto& by = need("by");
        if (!by.is_number_integer()) throw Error(ErrorCode::SchemaError, "rule.shift.by must be an integer");
        return make_shift(rule_from_json(need("of")), by.get<long>());
    }
    if (kind == "conj") return make_conj(rule_from_json(need("of")));
    if (kind == "scale") return make_scale(rule_from_json(need("of")), scalar_from_json(need("by"), "rule.scale.by"));
    if (kind == "product") {
        const auto& of = need("of");
        if (!of.is_array() || of.size() != 2) throw Error(ErrorCode::SchemaError, "rule.product.of must have 2 entries");
        return make_product(rule_from_json(of[0]), rule_from_json(of[1]));
    }
    if (kind == "sum") {
        const auto& of = need("of");
        if (!of.is_array() || of.empty()) throw Error(ErrorCode::SchemaError, "rule.sum.of must be a non-empty array");
        std::vector<RulePtr> terms;
        for (const auto& t : of) terms.push_back(rule_from_json(t));
        return make_sum(std::move(terms));
    }
    throw Error(ErrorCode::SchemaError, "rule: unknown kind \"" + kind + "\"");
}

} // namespace anop
