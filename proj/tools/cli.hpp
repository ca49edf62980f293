#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "anop/decomposition.hpp"
#include "anop/error.hpp"
#include "anop/predicates.hpp"

namespace anop::cli {

enum Exit : int {
    kProven = 0,
    kRefuted = 1,
    kInconclusive = 2,
    kNotSelfAdjoint = 3,
    kStructureViolation = 4,
    kUsage = 64,
    kParse = 65,
};

struct RunConfig {
    double tol = 1e-10;
    std::size_t trunc = 256;
    std::size_t samples = 100000;
    std::uint64_t seed = 42;
    std::size_t k_grid = 64;
    std::size_t max_peel = 64;
    bool json = false;

    /// Throws BadParams on a nonpositive value.
    void validate() const;
    PredicateOptions predicate() const;
    DecomposeOptions decompose() const;
    nlohmann::json to_json() const;
};

int exit_code(ErrorCode code);
int exit_code(VerdictStatus status);

/// Full command line without the program name. Reports go to `out`,
/// diagnostics to `err`; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// YAML-like rendering of a report for text output.
std::string render_text(const nlohmann::json& j);

} // namespace anop::cli
