#include "anop/serialize.hpp"

#include <fstream>
#include <sstream>

#include "anop/error.hpp"
#include "anop/json_scalar.hpp"

namespace anop {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& msg)
{
    throw Error(ErrorCode::SchemaError, where + ": " + msg);
}

const json& field(const json& j, const char* name, const std::string& where)
{
    if (!j.is_object()) schema(where, "expected an object");
    const auto it = j.find(name);
    if (it == j.end()) schema(where, std::string("missing field \"") + name + "\"");
    return *it;
}

std::size_t index_field(const json& j, const char* name, const std::string& where)
{
    const json& v = field(j, name, where);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        schema(where + "." + name, "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
}

std::vector<Space> parse_spaces(const json& j)
{
    if (!j.is_array() || j.empty()) schema("spaces", "expected a non-empty array");
    std::vector<Space> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "spaces[" + std::to_string(i) + "]";
        const json& kind = field(j[i], "kind", where);
        if (kind == "l2") {
            out.push_back(Space::l2());
        } else if (kind == "finite") {
            const std::size_t dim = index_field(j[i], "dim", where);
            if (dim == 0) schema(where + ".dim", "must be positive");
            out.push_back(Space::finite(dim));
        } else {
            schema(where + ".kind", "expected \"l2\" or \"finite\"");
        }
    }
    return out;
}

DiagonalSeq parse_diagonal(const json& d, const std::string& where)
{
    std::vector<Scalar> prefix;
    if (d.contains("prefix")) {
        const json& p = d["prefix"];
        if (!p.is_array()) schema(where + ".prefix", "expected an array");
        for (std::size_t k = 0; k < p.size(); ++k) {
            prefix.push_back(scalar_from_json(p[k], where + ".prefix[" + std::to_string(k) + "]"));
        }
    }
    const bool has_limit = d.contains("limit");
    const Scalar limit = has_limit ? scalar_from_json(d["limit"], where + ".limit") : Scalar(0);
    if (d.contains("decay")) {
        const json& dc = d["decay"];
        if (!dc.is_object() || !dc.contains("C") || !dc.contains("p") || !dc["C"].is_number() || !dc["p"].is_number()) {
            schema(where + ".decay", "expected {\"C\": number, \"p\": number}");
        }
        if (dc["p"].get<double>() <= 0.0 || dc["C"].get<double>() < 0.0) schema(where + ".decay", "needs C >= 0 and p > 0");
        if (!d.contains("rule")) schema(where + ".decay", "a decay bound needs an entry rule (field \"rule\")");
    }
    if (!d.contains("rule")) return DiagonalSeq(std::move(prefix), make_const(limit));
    RulePtr rule;
    try {
        rule = rule_from_json(d["rule"]);
    } catch (const Error& e) {
        schema(where + ".rule", e.what());
    }
    if (has_limit && !(rule->limit() == limit)) schema(where + ".limit", "disagrees with the rule's limit");
    if (prefix.size() < rule->valid_from()) {
        schema(where + ".prefix", "must cover the indices below " + std::to_string(rule->valid_from()));
    }
    return DiagonalSeq(std::move(prefix), rule);
}

void parse_block(OperatorExpr& op, const json& b, const std::string& where)
{
    const std::size_t row = index_field(b, "row", where);
    const std::size_t col = index_field(b, "col", where);
    const auto& spaces = op.spaces();
    if (row >= spaces.size() || col >= spaces.size()) schema(where, "row/col outside the space list");
    const json& kind = field(b, "kind", where);
    if (kind == "banded") {
        if (row != col || !spaces[row].is_l2()) schema(where, "banded blocks sit on l2 diagonal positions");
        const json& diags = field(b, "diagonals", where);
        if (!diags.is_array()) schema(where + ".diagonals", "expected an array");
        for (std::size_t k = 0; k < diags.size(); ++k) {
            const std::string dw = where + ".diagonals[" + std::to_string(k) + "]";
            const json& off = field(diags[k], "offset", dw);
            if (!off.is_number_integer()) schema(dw + ".offset", "expected an integer");
            op.add_diagonal(row, off.get<long>(), parse_diagonal(diags[k], dw));
        }
    } else if (kind == "finite_rank") {
        const json& entries = field(b, "entries", where);
        if (!entries.is_array()) schema(where + ".entries", "expected an array");
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const std::string ew = where + ".entries[" + std::to_string(k) + "]";
            const std::size_t r = index_field(entries[k], "r", ew);
            const std::size_t c = index_field(entries[k], "c", ew);
            if ((!spaces[row].is_l2() && r >= spaces[row].dim) || (!spaces[col].is_l2() && c >= spaces[col].dim)) {
                schema(ew, "index outside a finite component");
            }
            op.add_entry(row, col, r, c, scalar_from_json(field(entries[k], "value", ew), ew + ".value"));
        }
    } else if (kind == "dense") {
        if (spaces[row].is_l2() || spaces[col].is_l2()) schema(where, "dense blocks need finite row and column components");
        const json& m = field(b, "matrix", where);
        if (!m.is_array() || m.size() != spaces[row].dim) {
            schema(where + ".matrix", "expected " + std::to_string(spaces[row].dim) + " rows");
        }
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (!m[r].is_array() || m[r].size() != spaces[col].dim) {
                schema(where + ".matrix[" + std::to_string(r) + "]", "expected " + std::to_string(spaces[col].dim) + " entries");
            }
            for (std::size_t c = 0; c < m[r].size(); ++c) {
                op.add_entry(row, col, r, c,
                             scalar_from_json(m[r][c], where + ".matrix[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
            }
        }
    } else {
        schema(where + ".kind", "expected \"banded\", \"finite_rank\" or \"dense\"");
    }
}

OperatorExpr parse_builtin(const json& j)
{
    const json& name = j["builtin"];
    const Scalar scale = j.contains("scale") ? scalar_from_json(j["scale"], "scale") : Scalar(1);
    OperatorExpr base;
    if (name == "identity") {
        base = identity_operator(j.contains("spaces") ? parse_spaces(j["spaces"]) : std::vector<Space>{Space::l2()});
    } else if (name == "right_shift") {
        base = right_shift();
    } else if (name == "diag") {
        std::vector<Scalar> entries;
        if (j.contains("entries")) {
            if (!j["entries"].is_array()) schema("entries", "expected an array");
            for (std::size_t k = 0; k < j["entries"].size(); ++k) {
                entries.push_back(scalar_from_json(j["entries"][k], "entries[" + std::to_string(k) + "]"));
            }
        }
        const Scalar limit = j.contains("limit") ? scalar_from_json(j["limit"], "limit") : Scalar(0);
        base = diagonal_operator(std::move(entries), limit);
    } else {
        schema("builtin", "expected \"identity\", \"right_shift\" or \"diag\"");
    }
    return scale == Scalar(1) ? base : scaled(base, scale);
}

json diagonal_to_json(long offset, const DiagonalSeq& d)
{
    json p = json::array();
    for (const auto& v : d.prefix()) p.push_back(scalar_to_json(v));
    json out = {{"offset", offset}, {"prefix", p}, {"limit", scalar_to_json(d.limit())}};
    if (d.asymptotic()) {
        out["rule"] = d.tail()->describe();
        if (const auto dc = d.decay()) out["decay"] = {{"C", dc->C}, {"p", dc->p}};
    }
    return out;
}

} // namespace

OperatorExpr operator_from_json(const json& j)
{
    if (!j.is_object()) schema("<root>", "expected an object");
    if (j.contains("builtin")) return parse_builtin(j);
    OperatorExpr op(parse_spaces(field(j, "spaces", "<root>")));
    if (j.contains("blocks")) {
        const json& blocks = j["blocks"];
        if (!blocks.is_array()) schema("blocks", "expected an array");
        for (std::size_t k = 0; k < blocks.size(); ++k) parse_block(op, blocks[k], "blocks[" + std::to_string(k) + "]");
    }
    return op;
}

OperatorExpr parse_operator(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed JSON: ") + e.what());
    }
    return operator_from_json(j);
}

OperatorExpr load_operator(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_operator(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

json operator_to_json(const OperatorExpr& a)
{
    json spaces = json::array();
    for (const auto& s : a.spaces()) {
        if (s.is_l2()) {
            spaces.push_back({{"kind", "l2"}});
        } else {
            spaces.push_back({{"kind", "finite"}, {"dim", s.dim}});
        }
    }
    json blocks = json::array();
    const std::size_t n = a.components();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Block& b = a.block(i, j);
            if (b.empty()) continue;
            const Space& si = a.spaces()[i];
            const Space& sj = a.spaces()[j];
            if (i == j && si.is_l2()) {
                json diags = json::array();
                for (const auto& [off, d] : b.banded.diagonals) diags.push_back(diagonal_to_json(off, d));
                blocks.push_back({{"row", i}, {"col", j}, {"kind", "banded"}, {"diagonals", diags}});
            } else if (i == j) {
                json m = json::array();
                for (std::size_t r = 0; r < si.dim; ++r) {
                    json row = json::array();
                    for (std::size_t c = 0; c < sj.dim; ++c) row.push_back(scalar_to_json(a.entry(i, r, j, c)));
                    m.push_back(row);
                }
                blocks.push_back({{"row", i}, {"col", j}, {"kind", "dense"}, {"matrix", m}});
            } else {
                json entries = json::array();
                for (const auto& [rc, v] : b.sparse) {
                    entries.push_back({{"r", rc.first}, {"c", rc.second}, {"value", scalar_to_json(v)}});
                }
                blocks.push_back({{"row", i}, {"col", j}, {"kind", "finite_rank"}, {"entries", entries}});
            }
        }
    }
    return {{"spaces", spaces}, {"blocks", blocks}};
}

std::string serialize_operator(const OperatorExpr& a)
{
    return operator_to_json(a).dump(2) + "\n";
}

json vector_to_json(const VectorExpr& x)
{
    json out = json::array();
    for (const auto& part : x.parts) {
        json p = json::array();
        for (const auto& [i, v] : part) {
            if (!v.is_zero()) p.push_back({{"i", i}, {"value", scalar_to_json(v)}});
        }
        out.push_back(p);
    }
    return out;
}

VectorExpr vector_from_json(const json& j, std::size_t components)
{
    if (!j.is_array() || j.size() != components) schema("vector", "expected one entry list per component");
    VectorExpr x(components);
    for (std::size_t c = 0; c < components; ++c) {
        if (!j[c].is_array()) schema("vector[" + std::to_string(c) + "]", "expected an array");
        for (std::size_t k = 0; k < j[c].size(); ++k) {
            const std::string w = "vector[" + std::to_string(c) + "][" + std::to_string(k) + "]";
            x.set(c, index_field(j[c][k], "i", w), scalar_from_json(field(j[c][k], "value", w), w + ".value"));
        }
    }
    return x;
}

json matrix_to_json(const Matrix& m)
{
    json out = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(scalar_to_json(m(r, c)));
        out.push_back(row);
    }
    return out;
}

json matrix_to_json(const CMatrix& m)
{
    json out = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        out.push_back(row);
    }
    return out;
}

} // namespace anop
