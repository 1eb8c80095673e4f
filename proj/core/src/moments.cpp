#include "mflq/moments.hpp"

#include <stdexcept>

#include "mflq/errors.hpp"

namespace mflq {

namespace {

constexpr double kMeanOuterTolerance = 1e-9;

double trace_product(const Matrix& a, const Matrix& b) { return (a.transpose().cwiseProduct(b)).sum(); }

}  // namespace

MomentTrajectory propagate(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init) {
    policy.check_compatible(spec);
    if (init.dimension() != spec.n()) throw StructuralError("initial: dimension differs from n");

    const auto N = static_cast<std::size_t>(spec.horizon());
    MomentTrajectory traj;
    traj.X.reserve(N + 1);
    traj.Xbar.reserve(N + 1);
    traj.mean.reserve(N + 1);

    const Vector mu0 = init.mean();
    traj.X.push_back(symmetrized(init.second_moment()));
    traj.Xbar.push_back(mu0 * mu0.transpose());
    traj.mean.push_back(mu0);

    for (int k = 0; k < spec.horizon(); ++k) {
        const auto& c = spec.stage(k);
        const Matrix& L = policy.L(k);
        const Matrix Lbar = policy.Lbar(k);
        const Matrix L_sum = L + Lbar;
        const Matrix& X = traj.X.back();
        const Matrix& Xbar = traj.Xbar.back();

        const Matrix drift = c.A + c.B * L;
        const Matrix drift_mf = c.Abar + c.B * Lbar + c.Bbar * L_sum;
        const Matrix diffusion = c.C + c.D * L;
        const Matrix diffusion_mf = c.Cbar + c.D * Lbar + c.Dbar * L_sum;
        const Matrix mean_drift = (c.A + c.Abar) + (c.B + c.Bbar) * L_sum;

        Matrix X_next = drift * X * drift.transpose() + drift * Xbar * drift_mf.transpose() +
                        drift_mf * Xbar * drift.transpose() + drift_mf * Xbar * drift_mf.transpose() +
                        diffusion * X * diffusion.transpose() + diffusion * Xbar * diffusion_mf.transpose() +
                        diffusion_mf * Xbar * diffusion.transpose() + diffusion_mf * Xbar * diffusion_mf.transpose();
        Matrix Xbar_next = mean_drift * Xbar * mean_drift.transpose();
        Vector mean_next = mean_drift * traj.mean.back();

        const Matrix outer = mean_next * mean_next.transpose();
        if (max_abs(symmetrized(Xbar_next) - outer) > kMeanOuterTolerance * (1.0 + max_abs(outer))) {
            throw std::logic_error("propagate: Xbar diverged from mean outer product at stage " +
                                   std::to_string(k + 1));
        }

        traj.X.push_back(symmetrized(X_next));
        traj.Xbar.push_back(symmetrized(Xbar_next));
        traj.mean.push_back(std::move(mean_next));
    }
    return traj;
}

CostBreakdown cost_breakdown(const ProblemSpec& spec, const FeedbackPolicy& policy, const MomentTrajectory& traj) {
    CostBreakdown out;
    out.stage.reserve(static_cast<std::size_t>(spec.horizon()) + 1);
    long double total = 0.0L;
    for (int k = 0; k < spec.horizon(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        const auto& c = spec.stage(k);
        const Matrix& L = policy.L(k);
        const Matrix Lbar = policy.Lbar(k);
        const Matrix L_sum = L + Lbar;
        const Matrix phi_bar = c.Qbar + L_sum.transpose() * c.Rbar * L_sum + L.transpose() * c.R * Lbar +
                               Lbar.transpose() * c.R * L + Lbar.transpose() * c.R * Lbar;
        const double stage_cost =
            trace_product(c.Q + L.transpose() * c.R * L, traj.X[i]) + trace_product(phi_bar, traj.Xbar[i]);
        out.stage.push_back(stage_cost);
        total += stage_cost;
    }
    const auto N = static_cast<std::size_t>(spec.horizon());
    const double terminal = trace_product(spec.G(), traj.X[N]) + trace_product(spec.Gbar(), traj.Xbar[N]);
    out.stage.push_back(terminal);
    total += terminal;
    out.total = static_cast<double>(total);
    return out;
}

double exact_cost(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init) {
    return cost_breakdown(spec, policy, propagate(spec, policy, init)).total;
}

double optimal_value(const RiccatiSolution& sol, const InitialCondition& init) {
    const Vector mu = init.mean();
    return trace_product(sol.S.front(), init.covariance()) + mu.dot(sol.T.front() * mu);
}

}  // namespace mflq
