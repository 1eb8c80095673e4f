#include <gtest/gtest.h>

#include <cmath>

#include "mflq/example_instance.hpp"
#include "mflq/moments.hpp"
#include "mflq/riccati.hpp"
#include "mflq/simulator.hpp"
#include "support/random_problems.hpp"
#include "support/reference_tables.hpp"

namespace mflq {
namespace {

std::pair<std::vector<Matrix>, std::vector<Matrix>> random_direction(std::mt19937_64& rng, const ProblemSpec& spec) {
    std::vector<Matrix> dL, dM;
    for (int k = 0; k < spec.horizon(); ++k) {
        dL.push_back(testing::uniform_matrix(rng, spec.m(), spec.n()));
        dM.push_back(testing::uniform_matrix(rng, spec.m(), spec.n()));
    }
    return {dL, dM};
}

TEST(Moments, ZeroInitialStateStaysAtZero) {
    const auto loaded = example_problem();
    const auto policy = optimal_policy(solve_riccati(loaded.spec));
    const auto traj = propagate(loaded.spec, policy, InitialCondition::deterministic(Vector::Zero(3)));
    ASSERT_EQ(traj.X.size(), 5U);
    for (std::size_t k = 0; k < traj.X.size(); ++k) {
        EXPECT_EQ(max_abs(traj.X[k]), 0.0);
        EXPECT_EQ(max_abs(traj.Xbar[k]), 0.0);
    }
    EXPECT_EQ(exact_cost(loaded.spec, policy, InitialCondition::deterministic(Vector::Zero(3))), 0.0);
}

TEST(Moments, NoiselessDeterministicSystemHasNoSpread) {
    std::mt19937_64 rng(3);
    auto spec = testing::random_problem(rng, {.min_horizon = 3});
    auto stages = spec.stages();
    for (auto& c : stages) {
        c.C.setZero();
        c.Cbar.setZero();
        c.D.setZero();
        c.Dbar.setZero();
    }
    spec = ProblemSpec(spec.n(), spec.m(), stages, spec.G(), spec.Gbar());
    const auto init = InitialCondition::deterministic(testing::uniform_vector(rng, spec.n()));
    const auto traj = propagate(spec, testing::random_policy(rng, spec), init);
    for (std::size_t k = 0; k < traj.X.size(); ++k) {
        const Matrix outer = traj.mean[k] * traj.mean[k].transpose();
        const double scale = 1.0 + max_abs(outer);
        EXPECT_LE(max_abs(traj.X[k] - outer), 1e-12 * scale);
        EXPECT_LE(max_abs(traj.Xbar[k] - outer), 1e-12 * scale);
    }
}

TEST(Moments, ExampleOptimalCost) {
    const auto loaded = example_problem();
    const auto sol = solve_riccati(loaded.spec);
    const double cost = exact_cost(loaded.spec, optimal_policy(sol), loaded.initial);
    EXPECT_NEAR(cost, testing::reference::kOptimalCostOnes, 2e-3);
    EXPECT_NEAR(cost, sol.T[0].sum(), 1e-10 * cost);
    EXPECT_NEAR(cost, optimal_value(sol, loaded.initial), 1e-10 * cost);

    const auto breakdown = cost_breakdown(loaded.spec, optimal_policy(sol),
                                          propagate(loaded.spec, optimal_policy(sol), loaded.initial));
    ASSERT_EQ(breakdown.stage.size(), 5U);
    double sum = 0.0;
    for (double c : breakdown.stage) sum += c;
    EXPECT_NEAR(sum, breakdown.total, 1e-12 * cost);
}

TEST(Moments, ScalarCost) {
    StageCoefficients c;
    const Matrix one = Matrix::Ones(1, 1), zero = Matrix::Zero(1, 1);
    c.A = c.Abar = c.B = c.Bbar = c.R = c.Rbar = one;
    c.C = c.Cbar = c.D = c.Dbar = c.Q = c.Qbar = zero;
    const ProblemSpec spec(1, 1, {c}, one, one);
    const auto init = InitialCondition::deterministic(Vector::Ones(1));
    const auto sol = solve_riccati(spec);
    EXPECT_NEAR(exact_cost(spec, optimal_policy(sol), init), 1.6, 1e-14);
    EXPECT_NEAR(optimal_value(sol, init), 1.6, 1e-14);
}

TEST(Moments, OptimalValueSpecialCases) {
    const auto loaded = example_problem();
    const auto sol = solve_riccati(loaded.spec);
    EXPECT_EQ(optimal_value(sol, InitialCondition::deterministic(Vector::Zero(3))), 0.0);
    // Zero mean: only the fluctuation part S_0 contributes.
    const Matrix cov = Eigen::Vector3d(1.0, 2.0, 0.5).asDiagonal();
    EXPECT_NEAR(optimal_value(sol, InitialCondition::gaussian(Vector::Zero(3), cov)), (sol.S[0] * cov).trace(), 1e-14);
    const Vector e1 = Eigen::Vector3d(1.0, 0.0, 0.0);
    EXPECT_NEAR(optimal_value(sol, InitialCondition::deterministic(e1)), sol.T[0](0, 0), 1e-14);
}

TEST(Moments, OptimalValueMatchesExactCostForRandomInitialConditions) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto spec = testing::random_problem(rng);
        const auto sol = solve_riccati(spec);
        const Matrix f = testing::uniform_matrix(rng, spec.n(), spec.n());
        const auto init = trial % 2 == 0
                              ? InitialCondition::gaussian(testing::uniform_vector(rng, spec.n()), f * f.transpose())
                              : testing::random_finite_support(rng, spec.n(), 4);
        const double v = optimal_value(sol, init);
        EXPECT_NEAR(exact_cost(spec, optimal_policy(sol), init), v, 1e-9 * (1.0 + std::abs(v))) << trial;
    }
}

TEST(Moments, OptimalPolicyBeatsPerturbations) {
    const auto loaded = example_problem();
    const auto sol = solve_riccati(loaded.spec);
    const auto best = optimal_policy(sol);
    const double opt = optimal_value(sol, loaded.initial);
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> log_mag(-3.0, 0.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double magnitude = std::pow(10.0, log_mag(rng));
        const auto [dL, dM] = random_direction(rng, loaded.spec);
        const double cost = exact_cost(loaded.spec, testing::perturbed(best, dL, dM, magnitude), loaded.initial);
        EXPECT_GE(cost, opt - 1e-9 * (1.0 + std::abs(opt))) << magnitude;
        if (magnitude >= 1e-2) EXPECT_GT(cost - opt, 1e-10) << magnitude;
    }
}

TEST(Moments, GradientVanishesAtOptimum) {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        const auto spec = trial == 0 ? example_problem().spec : testing::random_problem(rng, {.max_horizon = 4});
        const Matrix f = testing::uniform_matrix(rng, spec.n(), spec.n());
        const auto init = InitialCondition::gaussian(testing::uniform_vector(rng, spec.n()), f * f.transpose());
        const auto best = optimal_policy(solve_riccati(spec));
        const double h = 1e-5;
        double worst = 0.0, scale = 1.0;
        for (int k = 0; k < spec.horizon(); ++k) {
            for (int which = 0; which < 2; ++which) {
                for (Eigen::Index i = 0; i < spec.m() * spec.n(); ++i) {
                    std::vector<Matrix> dL(static_cast<std::size_t>(spec.horizon()), Matrix::Zero(spec.m(), spec.n()));
                    auto dM = dL;
                    (which == 0 ? dL : dM)[static_cast<std::size_t>(k)].data()[i] = 1.0;
                    const double up = exact_cost(spec, testing::perturbed(best, dL, dM, h), init);
                    const double down = exact_cost(spec, testing::perturbed(best, dL, dM, -h), init);
                    worst = std::max(worst, std::abs(up - down) / (2.0 * h));
                    scale = std::max(scale, std::abs(up));
                }
            }
        }
        EXPECT_LE(worst, 1e-6 * scale) << trial;
    }
}

TEST(Moments, FluctuationIsPsdAndMeanPartIsRankOne) {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 30; ++trial) {
        const auto spec = testing::random_problem(rng);
        const auto init = testing::random_finite_support(rng, spec.n(), 3);
        const auto traj = propagate(spec, testing::random_policy(rng, spec), init);
        for (std::size_t k = 0; k < traj.X.size(); ++k) {
            const Matrix spread = traj.X[k] - traj.Xbar[k];
            const double scale = 1.0 + max_abs(traj.X[k]);
            EXPECT_GE(min_eigenvalue(spread), -1e-9 * scale);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(traj.Xbar[k]);
            const auto& ev = eig.eigenvalues();
            for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) EXPECT_LE(std::abs(ev(i)), 1e-9 * scale);
        }
    }
}

TEST(Moments, MatchesMonteCarloAfterOneStage) {
    const auto loaded = example_problem();
    const ProblemSpec one_stage(3, 2, {loaded.spec.stage(0)}, loaded.spec.G(), loaded.spec.Gbar());
    const auto policy = optimal_policy(solve_riccati(one_stage));
    const Matrix cov = Eigen::Vector3d(0.5, 1.0, 0.25).asDiagonal();
    const auto init = InitialCondition::gaussian(Vector::Ones(3), cov);
    const auto traj = propagate(one_stage, policy, init);
    const auto mc = simulate(one_stage, policy, init, NoiseKind::standard_normal, std::uint64_t{1} << 20, 42);
    for (int k = 0; k <= 1; ++k) {
        for (Eigen::Index i = 0; i < 3; ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) {
                EXPECT_LE(std::abs(mc.second_moment[k](i, j) - traj.X[k](i, j)),
                          3.0 * mc.second_moment_stderr[k](i, j) + 1e-12)
                    << "k=" << k << " (" << i << "," << j << ")";
            }
        }
    }
}

}  // namespace
}  // namespace mflq
