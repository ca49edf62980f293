#include <chrono>

#include <doctest.h>

#include "anop/error.hpp"
#include "anop/gallery.hpp"
#include "anop/json_scalar.hpp"
#include "anop/serialize.hpp"
#include "fixtures.hpp"

using namespace anop;

TEST_CASE("builders round-trip through the file format")
{
    for (const std::string& name : gallery_names()) {
        const OperatorExpr t = build(name);
        CHECK_MESSAGE(parse_operator(serialize_operator(t)) == t, name);
    }
    const OperatorExpr j = build("jacobi", nlohmann::json::parse(R"({"a": [1, 0], "b": "1/2"})"));
    CHECK(parse_operator(serialize_operator(j)) == j);
}

TEST_CASE("builder outputs")
{
    VectorExpr x(2);
    x.set(0, 0, Scalar(1));
    VectorExpr expect(2);
    expect.set(0, 1, Scalar(2));
    VectorExpr got = apply(example1(), x);
    got.prune();
    CHECK(got == expect);

    const OperatorExpr s = build("right_shift");
    const OperatorExpr sts = adjoint(s) * s;
    for (std::size_t i = 0; i < 6; ++i) CHECK(apply(sts, VectorExpr::basis(1, 0, i)) == VectorExpr::basis(1, 0, i));

    CHECK(build("theorem_form") == fixtures::unitary_plus_shift());

    CHECK_THROWS_AS(build("nope"), Error);
    CHECK_THROWS_AS(build("scaled_shift", nlohmann::json::parse(R"({"power": 0})")), Error);
    CHECK_THROWS_AS(build("theorem_form", nlohmann::json::parse(R"({"levels": [{"lambda": 3, "unitary": [[1, 1], [0, 1]]}]})")),
                    Error);
}

TEST_CASE("audit records")
{
    const auto start = std::chrono::steady_clock::now();
    const AuditReport rep = audit();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 10.0);

    const AuditRecord& d1 = rep.record("example1.first-display");
    CHECK(d1.computed.at("matches_T*T") == true);
    CHECK(d1.agreement == std::optional<bool>(true));
    const AuditRecord& d2 = rep.record("example1.second-display");
    CHECK(d2.computed.at("matches_TT*") == true);
    CHECK(d2.computed.at("matches_T*T") == false);
    CHECK(d2.agreement == std::optional<bool>(false));

    const AuditRecord& h = rep.record("example1.hyponormality");
    CHECK(h.computed.at("corner_from_displays") == nlohmann::json::parse("[[[3,0],[-1,0]],[[-1,0],[1,0]]]"));
    CHECK(h.computed.at("corners_equal") == true);
    CHECK(h.computed.at("corner_psd") == true);
    CHECK(h.agreement == std::optional<bool>(false));

    const AuditRecord& c = rep.record("example1.coupling");
    CHECK(c.computed.at("s_star_a_norm") == 0.0);
    CHECK(c.computed.at("stated_s_star_a_zero") == true);
    CHECK(c.agreement == std::optional<bool>(true));

    for (const char* id : {"example2.tt-star-display", "example2.t-star-t-display", "example2.kernels",
                           "example2.adjoint-hyponormal", "example2.essential-spectrum", "example2.adjoint-an"}) {
        CHECK_MESSAGE(rep.record(id).agreement == std::optional<bool>(true), id);
    }
    CHECK(rep.record("example2.essential-spectrum").computed.at("exact") == true);

    std::size_t spot = 0;
    for (const AuditRecord& r : rep.records) {
        if (r.id.rfind("mstar-in-m.", 0) != 0) continue;
        ++spot;
        CHECK_MESSAGE(r.computed.at("contained") == true, r.id);
    }
    CHECK(spot >= 4);
}

TEST_CASE("audit is deterministic")
{
    PredicateOptions o;
    o.samples = 5000;
    const AuditReport a = audit(o), b = audit(o);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.to_text() == b.to_text());
    CHECK(a.to_json().at("config").at("samples") == 5000);
    CHECK(a.to_text().find("DISAGREE") != std::string::npos);
}
