#pragma once

#include <vector>

#include "mflq/problem.hpp"
#include "mflq/riccati.hpp"

namespace mflq {

/// Second moments along a closed loop: X_k = E[x_k x_kᵀ], Xbar_k = Ex_k (Ex_k)ᵀ.
struct MomentTrajectory {
    std::vector<Matrix> X;     // k = 0..N
    std::vector<Matrix> Xbar;  // k = 0..N
    std::vector<Vector> mean;  // k = 0..N
};

/// Forward moment recursion under u = L x + Lbar Ex with Lbar = M − L.
/// Throws std::logic_error if the propagated Xbar_k drifts from mean_k mean_kᵀ.
MomentTrajectory propagate(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init);

/// Per-stage split of the expected cost. Entry k < N is the running cost of
/// stage k, entry N the terminal cost.
struct CostBreakdown {
    std::vector<double> stage;
    double total;
};

/// J = Σ_k { Tr[(Q + LᵀRL) X_k] + Tr[Φbar_k Xbar_k] } + Tr[G X_N] + Tr[Gbar Xbar_N]
/// with Φbar_k = Qbar + (L+Lbar)ᵀRbar(L+Lbar) + LᵀR Lbar + LbarᵀR L + LbarᵀR Lbar.
CostBreakdown cost_breakdown(const ProblemSpec& spec, const FeedbackPolicy& policy, const MomentTrajectory& traj);

double exact_cost(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init);

/// Tr[S_0 Cov ζ] + (Eζ)ᵀ T_0 Eζ
double optimal_value(const RiccatiSolution& sol, const InitialCondition& init);

}  // namespace mflq
