#pragma once

#include <string>

#include "mflq/problem_io.hpp"

namespace mflq {

/// The built-in four-stage benchmark (n = 3, m = 2, time-invariant coefficients).
///
/// `reference` is the canonical instance: its terminal weights satisfy
/// G_N = diag(0, 1, 1) and G_N + Gbar_N = diag(0.5, 1, 0), which is the pair the
/// 4-decimal reference tables for S_k, T_k, M_k, L_k correspond to.
/// `as_printed` uses Gbar_N = diag(0.5, 1, 0) directly as the terminal mean weight;
/// it reproduces the S_k and L_k tables but not T_k and M_k.
enum class ExampleVariant { reference, as_printed };

std::string example_document(ExampleVariant variant = ExampleVariant::reference);

LoadedProblem example_problem(ExampleVariant variant = ExampleVariant::reference);

}  // namespace mflq
