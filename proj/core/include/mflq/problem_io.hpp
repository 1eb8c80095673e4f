#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mflq/problem.hpp"

namespace mflq {

struct LoadedProblem {
    ProblemSpec spec;
    InitialCondition initial;
};

/// Parses a problem document:
///
///   { "n": 3, "m": 2, "N": 4,
///     "A": [[...],[...],[...]]          <- one 2-D array: same matrix at every stage
///     "B": [ [[...]], [[...]], ... ]    <- 3-D array: one matrix per stage
///     ... Abar Bbar C Cbar D Dbar Q Qbar R Rbar G_N Gbar_N ...
///     "initial": {"kind": "deterministic", "zeta": [1,1,1]} }
///
/// `initial` may also be {"kind":"gaussian","mean":[..],"covariance":[[..]]} or
/// {"kind":"finite_support","atoms":[{"point":[..],"probability":p}, ...]}; when
/// absent ζ = 0. Unknown top-level keys are ignored.
/// Throws ParseError (message starts with the JSON path) or StructuralError.
LoadedProblem load_problem(std::string_view text);
LoadedProblem load_problem_file(const std::filesystem::path& path);

/// Inverse of load_problem. Stage sequences whose matrices are all identical are
/// written in the broadcast form.
std::string serialize_problem(const ProblemSpec& spec, const InitialCondition& initial);

}  // namespace mflq
