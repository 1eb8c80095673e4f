#include "mflq/riccati.hpp"

#include <algorithm>

#include "mflq/errors.hpp"
#include "mflq/validation.hpp"

namespace mflq {

namespace {

std::string at_stage(const std::string& name, int k) {
    return stage_field(name, k) + " (stage k=" + std::to_string(k) + ")";
}

}  // namespace

RiccatiSolution solve_riccati(const ProblemSpec& spec) {
    require_standard_condition(spec);

    const int horizon = spec.horizon();
    const auto N = static_cast<std::size_t>(horizon);
    RiccatiSolution sol;
    sol.S.resize(N + 1);
    sol.T.resize(N + 1);
    sol.W1.resize(N);
    sol.W2.resize(N);
    sol.H1.resize(N);
    sol.H2.resize(N);
    sol.L.resize(N);
    sol.M.resize(N);

    sol.S[N] = spec.G();
    sol.T[N] = spec.G() + spec.Gbar();

    for (int k = horizon - 1; k >= 0; --k) {
        const auto i = static_cast<std::size_t>(k);
        const auto& c = spec.stage(k);
        const Matrix& S = sol.S[i + 1];
        const Matrix& T = sol.T[i + 1];

        const Matrix A_sum = c.A + c.Abar;
        const Matrix B_sum = c.B + c.Bbar;
        const Matrix C_sum = c.C + c.Cbar;
        const Matrix D_sum = c.D + c.Dbar;

        sol.W1[i] = symmetrized(c.R + c.B.transpose() * S * c.B + c.D.transpose() * S * c.D);
        sol.H1[i] = c.B.transpose() * S * c.A + c.D.transpose() * S * c.C;
        sol.W2[i] = symmetrized(c.R + c.Rbar + B_sum.transpose() * T * B_sum + D_sum.transpose() * S * D_sum);
        sol.H2[i] = B_sum.transpose() * T * A_sum + D_sum.transpose() * S * C_sum;

        sol.L[i] = -spd_solve(sol.W1[i], sol.H1[i], at_stage("W1", k));
        sol.M[i] = -spd_solve(sol.W2[i], sol.H2[i], at_stage("W2", k));

        // −Hᵀ W⁻¹ H = Hᵀ·gain
        sol.S[i] = symmetrized(c.Q + c.A.transpose() * S * c.A + c.C.transpose() * S * c.C +
                               sol.H1[i].transpose() * sol.L[i]);
        sol.T[i] = symmetrized(c.Q + c.Qbar + C_sum.transpose() * S * C_sum + A_sum.transpose() * T * A_sum +
                               sol.H2[i].transpose() * sol.M[i]);
    }
    return sol;
}

FeedbackPolicy optimal_policy(const RiccatiSolution& sol) { return FeedbackPolicy(sol.L, sol.M); }

GainResiduals gain_residuals(const RiccatiSolution& sol) {
    GainResiduals r{0.0, 0.0};
    for (int k = 0; k < sol.horizon(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        r.fluctuation = std::max(r.fluctuation, max_abs(sol.W1[i] * sol.L[i] + sol.H1[i]));
        r.mean = std::max(r.mean, max_abs(sol.W2[i] * sol.M[i] + sol.H2[i]));
    }
    return r;
}

PrincipleSolution solve_principle(const ProblemSpec& spec) {
    require_standard_condition(spec);

    const int horizon = spec.horizon();
    const auto N = static_cast<std::size_t>(horizon);
    PrincipleSolution out;
    out.P.resize(N + 1);
    out.Pbar.resize(N + 1);
    out.L.resize(N);
    out.Lbar.resize(N);

    out.P[N] = spec.G();
    out.Pbar[N] = spec.Gbar();

    for (int k = horizon - 1; k >= 0; --k) {
        const auto i = static_cast<std::size_t>(k);
        const auto& c = spec.stage(k);
        const Matrix& P = out.P[i + 1];
        const Matrix& Pbar = out.Pbar[i + 1];
        const Matrix P_sum = P + Pbar;

        const Matrix W1 = c.R + c.B.transpose() * P * c.B + c.D.transpose() * P * c.D;
        const Matrix W2 = c.R + c.Rbar + (c.B + c.Bbar).transpose() * P_sum * (c.B + c.Bbar) +
                          (c.D + c.Dbar).transpose() * P * (c.D + c.Dbar);
        const Matrix H1 = c.B.transpose() * P * c.A + c.D.transpose() * P * c.C;
        const Matrix H2 = (c.B + c.Bbar).transpose() * P_sum * (c.A + c.Abar) +
                          (c.D + c.Dbar).transpose() * P * (c.C + c.Cbar);

        const Matrix W1_inv_H1 = spd_solve(symmetrized(W1), H1, at_stage("W1", k));
        const Matrix W2_inv_H2 = spd_solve(symmetrized(W2), H2, at_stage("W2", k));
        const Matrix L = -W1_inv_H1;
        const Matrix Lbar = -W2_inv_H2 + W1_inv_H1;
        const Matrix L_sum = L + Lbar;

        // Closed-loop pieces of the fluctuation and mean channels.
        const Matrix drift = c.A + c.B * L;
        const Matrix diffusion = c.C + c.D * L;
        const Matrix drift_mf = c.Abar + c.B * Lbar + c.Bbar * L_sum;
        const Matrix diffusion_mf = c.Cbar + c.D * Lbar + c.Dbar * L_sum;
        const Matrix mean_drift = c.A + c.Abar + (c.B + c.Bbar) * L_sum;

        out.P[i] = symmetrized(c.Q + L.transpose() * c.R * L + drift.transpose() * P * drift +
                               diffusion.transpose() * P * diffusion);

        out.Pbar[i] = symmetrized(
            c.Qbar + L.transpose() * c.R * Lbar + Lbar.transpose() * c.R * L + Lbar.transpose() * c.R * Lbar +
            L_sum.transpose() * c.Rbar * L_sum +
            drift.transpose() * P * drift_mf + drift_mf.transpose() * P * drift +
            drift_mf.transpose() * P * drift_mf +
            diffusion.transpose() * P * diffusion_mf + diffusion_mf.transpose() * P * diffusion +
            diffusion_mf.transpose() * P * diffusion_mf +
            mean_drift.transpose() * Pbar * mean_drift);

        out.L[i] = L;
        out.Lbar[i] = Lbar;
    }
    return out;
}

EquivalenceResiduals compare(const PrincipleSolution& principle, const RiccatiSolution& riccati) {
    if (principle.P.size() != riccati.S.size()) throw StructuralError("compare: horizons differ");
    EquivalenceResiduals r{0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < riccati.S.size(); ++k) {
        r.S_vs_P = std::max(r.S_vs_P, max_abs(principle.P[k] - riccati.S[k]));
        r.T_vs_P_plus_Pbar = std::max(r.T_vs_P_plus_Pbar, max_abs(principle.P[k] + principle.Pbar[k] - riccati.T[k]));
    }
    for (std::size_t k = 0; k < riccati.L.size(); ++k) {
        r.L_gap = std::max(r.L_gap, max_abs(principle.L[k] - riccati.L[k]));
        r.M_gap = std::max(r.M_gap, max_abs(principle.L[k] + principle.Lbar[k] - riccati.M[k]));
    }
    return r;
}

}  // namespace mflq
