#include "anop/json_scalar.hpp"

#include <cmath>

#include "anop/error.hpp"

namespace anop {

namespace {

nlohmann::json part_to_json(const Rational& q)
{
    if (q.get_den() == 1 && q.get_num().fits_slong_p()) {
        return q.get_num().get_si();
    }
    return q.get_str();
}

bool part_from_json(const nlohmann::json& j, Rational& q, double& d, bool& is_float)
{
    if (j.is_number_integer()) {
        q = Rational(std::to_string(j.get<long long>()));
        return true;
    }
    if (j.is_number_unsigned()) {
        q = Rational(std::to_string(j.get<unsigned long long>()));
        return true;
    }
    if (j.is_number_float()) {
        d = j.get<double>();
        is_float = true;
        return std::isfinite(d);
    }
    if (j.is_string()) {
        try {
            q = Rational(j.get<std::string>());
            if (q.get_den() == 0) {
                return false;
            }
            q.canonicalize();
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }
    return false;
}

} // namespace

nlohmann::json scalar_to_json(const Scalar& s)
{
    if (s.exact()) {
        return nlohmann::json::array({part_to_json(s.re_q()), part_to_json(s.im_q())});
    }
    return nlohmann::json::array({s.real(), s.imag()});
}

Scalar scalar_from_json(const nlohmann::json& j, const std::string& where)
{
    Rational re{0}, im{0};
    double fre = 0.0, fim = 0.0;
    bool fl_re = false, fl_im = false;
    bool ok = false;
    if (j.is_array() && j.size() == 2) {
        ok = part_from_json(j[0], re, fre, fl_re) && part_from_json(j[1], im, fim, fl_im);
    } else if (j.is_number() || j.is_string()) {
        ok = part_from_json(j, re, fre, fl_re);
    }
    if (!ok) {
        throw Error(ErrorCode::SchemaError, where + ": expected complex literal [re, im], got " + j.dump());
    }
    if (fl_re || fl_im) {
        return Scalar::floating(fl_re ? fre : re.get_d(), fl_im ? fim : im.get_d());
    }
    return Scalar(re, im);
}

nlohmann::json rational_to_json(const Rational& q)
{
    return part_to_json(q);
}

} // namespace anop
