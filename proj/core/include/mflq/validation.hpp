#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mflq/problem.hpp"

namespace mflq {

/// Eigenvalue thresholds applied to the standard condition.
inline constexpr double kPsdTolerance = -1e-10;  // PSD: λ_min ≥ this
inline constexpr double kPdTolerance = 1e-12;    // PD:  λ_min ≥ this

enum class Requirement { none, positive_semidefinite, positive_definite };

struct MatrixCheck {
    std::string name;          // "R_0", "Q_2+Qbar_2", "G_N+Gbar_N", ...
    std::optional<int> stage;  // empty for terminal weights
    Requirement requirement;
    double asymmetry;
    double min_eigenvalue;
    bool ok;
};

struct ValidationReport {
    std::vector<MatrixCheck> checks;
    std::vector<std::string> violations;  // e.g. "R_0 not positive definite"
    bool satisfied = true;
};

/// Per-matrix symmetry and minimum-eigenvalue report with the overall verdict on
///   Q_k ⪰ 0, Q_k+Qbar_k ⪰ 0, R_k ≻ 0, R_k+Rbar_k ≻ 0, G_N ⪰ 0, G_N+Gbar_N ⪰ 0.
/// The barred weights are listed for information only.
ValidationReport validate(const ProblemSpec& spec);

/// Throws ValidationError listing every violation when the condition fails.
void require_standard_condition(const ProblemSpec& spec);

}  // namespace mflq
