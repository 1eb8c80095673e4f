#pragma once

#include <vector>

#include "mflq/problem.hpp"

namespace mflq {

/// Output of the coupled backward recursion
///
///   W1_k = R + BᵀS B + DᵀS D                     H1_k = BᵀS A + DᵀS C
///   W2_k = R + Rbar + (B+Bbar)ᵀT(B+Bbar)         H2_k = (B+Bbar)ᵀT(A+Abar)
///          + (D+Dbar)ᵀS(D+Dbar)                         + (D+Dbar)ᵀS(C+Cbar)
///   S_k  = Q + AᵀS A + CᵀS C − H1ᵀ W1⁻¹ H1
///   T_k  = Q + Qbar + (C+Cbar)ᵀS(C+Cbar) + (A+Abar)ᵀT(A+Abar) − H2ᵀ W2⁻¹ H2
///
/// with S = S_{k+1}, T = T_{k+1}, S_N = G_N and T_N = G_N + Gbar_N.
/// Optimal gains: L_k = −W1⁻¹H1 acts on x − Ex, M_k = −W2⁻¹H2 acts on Ex.
struct RiccatiSolution {
    std::vector<Matrix> S, T;          // k = 0..N
    std::vector<Matrix> W1, W2;        // k = 0..N-1, m×m
    std::vector<Matrix> H1, H2;        // k = 0..N-1, m×n
    std::vector<Matrix> L, M;          // k = 0..N-1, m×n

    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(L.size()); }
};

/// Requires the standard condition (throws ValidationError otherwise) and throws
/// NumericalError naming the stage and W matrix if a factorization fails.
RiccatiSolution solve_riccati(const ProblemSpec& spec);

FeedbackPolicy optimal_policy(const RiccatiSolution& sol);

/// max_k ‖W1_k L_k + H1_k‖ and max_k ‖W2_k M_k + H2_k‖ (max-abs entry).
struct GainResiduals {
    double fluctuation;
    double mean;
};
GainResiduals gain_residuals(const RiccatiSolution& sol);

/// Multipliers of the matrix minimum principle applied to the moment dynamics:
/// P_k weights E[x xᵀ], Pbar_k weights Ex(Ex)ᵀ. The optimal control is written
/// u = L x + Lbar Ex here, so Lbar_k = M_k − L_k of the Riccati form.
struct PrincipleSolution {
    std::vector<Matrix> P, Pbar;       // k = 0..N, P_N = G_N, Pbar_N = Gbar_N
    std::vector<Matrix> L, Lbar;       // k = 0..N-1
};

/// Runs the P / Pbar recursion with gains computed from its own W, H matrices
/// (built from P_{k+1}, Pbar_{k+1}); it shares no intermediate with solve_riccati.
PrincipleSolution solve_principle(const ProblemSpec& spec);

/// How far the two solutions are from S_k = P_k, T_k = P_k + Pbar_k and from
/// identical gains (all max-abs entry, maximized over k).
struct EquivalenceResiduals {
    double S_vs_P;
    double T_vs_P_plus_Pbar;
    double L_gap;
    double M_gap;
};
EquivalenceResiduals compare(const PrincipleSolution& principle, const RiccatiSolution& riccati);

}  // namespace mflq
