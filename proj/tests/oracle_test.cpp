#include <gtest/gtest.h>

#include "mflq/errors.hpp"
#include "mflq/example_instance.hpp"
#include "mflq/moments.hpp"
#include "mflq/oracle.hpp"
#include "mflq/riccati.hpp"
#include "support/random_problems.hpp"

namespace mflq {
namespace {

StageCoefficients zero_stage(int n, int m) {
    StageCoefficients c;
    c.A = c.Abar = c.C = c.Cbar = c.Q = c.Qbar = Matrix::Zero(n, n);
    c.B = c.Bbar = c.D = c.Dbar = Matrix::Zero(n, m);
    c.R = c.Rbar = Matrix::Zero(m, m);
    return c;
}

ProblemSpec scalar_problem() {
    auto c = zero_stage(1, 1);
    c.A = c.Abar = c.B = c.Bbar = c.R = c.Rbar = Matrix::Ones(1, 1);
    return ProblemSpec(1, 1, {c}, Matrix::Ones(1, 1), Matrix::Ones(1, 1));
}

TEST(ScenarioTree, Layout) {
    const ScenarioTree tree(3, 2, {0.25, 0.75});
    EXPECT_EQ(tree.roots(), 2U);
    EXPECT_EQ(tree.nodes_at(0), 2U);
    EXPECT_EQ(tree.nodes_at(3), 16U);
    EXPECT_EQ(tree.node_count(), 2U + 4U + 8U + 16U);
    EXPECT_EQ(tree.control_count(), 2U * (2U + 4U + 8U));
    EXPECT_EQ(tree.control_offset(1), 4U);
    EXPECT_EQ(tree.control_index(1, 3), 4U + 6U);
    EXPECT_DOUBLE_EQ(tree.probability(0, 1), 0.75);
    EXPECT_DOUBLE_EQ(tree.probability(2, 0), 0.25 / 4.0);
    EXPECT_DOUBLE_EQ(tree.probability(2, 7), 0.75 / 4.0);
    EXPECT_EQ(ScenarioTree::last_noise(4), -1.0);
    EXPECT_EQ(ScenarioTree::last_noise(5), 1.0);
}

TEST(Oracle, ScalarQuadraticForm) {
    const auto spec = scalar_problem();
    for (double zeta : {1.0, -2.0, 0.5}) {
        const auto init = InitialCondition::deterministic(Vector::Constant(1, zeta));
        const auto form = assemble(spec, init);
        ASSERT_EQ(form.Theta1.rows(), 1);
        EXPECT_NEAR(form.Theta1(0, 0), 10.0, 1e-14);
        EXPECT_NEAR(form.theta2(0), 8.0 * zeta, 1e-14);
        EXPECT_NEAR(form.theta3, 8.0 * zeta * zeta, 1e-14);
        const auto sol = solve_open_loop(form);
        EXPECT_NEAR(sol.u(0), -0.8 * zeta, 1e-14);
        EXPECT_NEAR(sol.cost, 1.6 * zeta * zeta, 1e-13);
    }
}

TEST(Oracle, ZeroDynamicsGivesControlWeightsOnly) {
    const int n = 2, m = 1, horizon = 2;
    std::vector<StageCoefficients> stages;
    for (int k = 0; k < horizon; ++k) {
        auto c = zero_stage(n, m);
        c.Q = Matrix::Identity(n, n);
        c.Qbar = 2.0 * Matrix::Identity(n, n);
        c.R = Matrix::Constant(1, 1, 3.0);
        c.Rbar = Matrix::Constant(1, 1, 5.0);
        stages.push_back(c);
    }
    const ProblemSpec spec(n, m, stages, Matrix::Identity(n, n), Matrix::Zero(n, n));
    const Vector zeta = Eigen::Vector2d(1.0, -2.0);
    const auto form = assemble(spec, InitialCondition::deterministic(zeta));
    ASSERT_EQ(form.Theta1.rows(), 3);
    // Depth 0: one node of mass 1. Depth 1: two nodes of mass 1/2 sharing the Rbar term.
    Matrix expected(3, 3);
    expected << 8.0, 0.0, 0.0,  //
        0.0, 1.5 + 1.25, 1.25,  //
        0.0, 1.25, 1.5 + 1.25;
    EXPECT_LE(max_abs(form.Theta1 - expected), 1e-14);
    EXPECT_LE(max_abs(form.theta2), 1e-14);
    EXPECT_NEAR(form.theta3, 3.0 * zeta.squaredNorm(), 1e-14);
}

TEST(Oracle, QuadraticFormMatchesDirectPlayback) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = testing::random_problem(rng, {.max_horizon = 5});
        const auto init = trial % 2 == 0 ? InitialCondition::deterministic(testing::uniform_vector(rng, spec.n()))
                                         : testing::random_finite_support(rng, spec.n(), 2);
        const auto form = assemble(spec, init);
        const auto count = static_cast<Eigen::Index>(form.tree.control_count());
        const Vector u = testing::uniform_vector(rng, count);
        const double direct = play_open_loop(spec, init, u).cost;
        EXPECT_NEAR(form.evaluate(u), direct, 1e-10 * (1.0 + std::abs(direct))) << trial;

        // Central differences along random directions against the analytic gradient.
        const Vector grad = 2.0 * (form.Theta1 * u + form.theta2);
        const double h = 1e-4;
        for (int d = 0; d < 20; ++d) {
            const Vector dir = testing::uniform_vector(rng, count);
            const double fd =
                (play_open_loop(spec, init, u + h * dir).cost - play_open_loop(spec, init, u - h * dir).cost) / (2 * h);
            EXPECT_NEAR(fd, grad.dot(dir), 1e-6 * (1.0 + std::abs(direct))) << trial;
        }
    }
}

TEST(Oracle, ExampleAgreesWithRiccati) {
    const auto loaded = example_problem();
    const auto form = assemble(loaded.spec, loaded.initial);
    EXPECT_EQ(form.tree.control_count(), 2U * 15U);
    EXPECT_GT(min_eigenvalue(form.Theta1), 0.0);
    const auto report = verify(loaded.spec, loaded.initial);
    EXPECT_LE(report.rel_diff, 1e-7);
    EXPECT_GT(report.theta1_min_eig, 0.0);
    EXPECT_LE(report.per_node_gain_residual_max, 1e-7);
    EXPECT_NEAR(report.cost_oracle, 16.2028, 2e-3);
}

TEST(Oracle, RandomSpecsAgreeWithRiccati) {
    std::mt19937_64 rng(909);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = testing::random_problem(rng, {.max_horizon = 6});
        const auto init = InitialCondition::deterministic(testing::uniform_vector(rng, spec.n()));
        const auto report = verify(spec, init);
        EXPECT_LE(report.rel_diff, 1e-6) << trial;
    }
}

TEST(Oracle, FiniteSupportStartAgreesWithOptimalValue) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto spec = testing::random_problem(rng, {.max_horizon = 4});
        const auto init = testing::random_finite_support(rng, spec.n(), 3);
        const double v = optimal_value(solve_riccati(spec), init);
        const auto sol = solve_open_loop(assemble(spec, init));
        EXPECT_NEAR(sol.cost, v, 1e-7 * (1.0 + std::abs(v))) << trial;
    }
}

TEST(Oracle, PolicyEvaluationMatchesMoments) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const auto spec = testing::random_problem(rng, {.max_horizon = 6});
        const auto policy = testing::random_policy(rng, spec);
        const auto init = trial % 2 == 0 ? InitialCondition::deterministic(testing::uniform_vector(rng, spec.n()))
                                         : testing::random_finite_support(rng, spec.n(), 2);
        const double a = exact_cost(spec, policy, init);
        const double b = eval_policy_on_tree(spec, policy, init);
        EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a))) << trial;
    }
}

TEST(Oracle, ZeroPolicyTerminalNorm) {
    std::mt19937_64 rng(12);
    auto base = testing::random_problem(rng, {.min_horizon = 3, .max_horizon = 3});
    auto stages = base.stages();
    for (auto& c : stages) c.Q = c.Qbar = Matrix::Zero(base.n(), base.n());
    const ProblemSpec spec(base.n(), base.m(), stages, Matrix::Identity(base.n(), base.n()),
                           Matrix::Zero(base.n(), base.n()));
    const auto init = InitialCondition::deterministic(testing::uniform_vector(rng, spec.n()));
    const auto traj = play_policy(spec, FeedbackPolicy::zero(spec.n(), spec.m(), 3), init);
    double expected = 0.0;
    for (std::size_t h = 0; h < traj.tree.nodes_at(3); ++h) {
        expected += traj.tree.probability(3, h) * traj.states[3].col(static_cast<Eigen::Index>(h)).squaredNorm();
    }
    EXPECT_NEAR(traj.cost, expected, 1e-12 * (1.0 + expected));
    EXPECT_NEAR(eval_policy_on_tree(spec, FeedbackPolicy::zero(spec.n(), spec.m(), 3), init), expected,
                1e-12 * (1.0 + expected));
}

TEST(Oracle, OpenLoopOptimumIsRealizedByFeedback) {
    const auto loaded = example_problem();
    const auto policy = optimal_policy(solve_riccati(loaded.spec));
    const auto sol = solve_open_loop(assemble(loaded.spec, loaded.initial));
    EXPECT_LE(sol.residual, 1e-10);
    EXPECT_LE(feedback_residual(loaded.spec, policy, loaded.initial, sol.u), 1e-7);
    // A non-optimal control vector is not a closed-loop trajectory of the optimal gains.
    EXPECT_GT(feedback_residual(loaded.spec, policy, loaded.initial, Vector::Zero(sol.u.size())), 1e-3);
}

TEST(Oracle, CapacityAndArgumentErrors) {
    const auto& base = example_problem().spec;
    auto long_spec = [&](int horizon) {
        return ProblemSpec(3, 2, std::vector<StageCoefficients>(static_cast<std::size_t>(horizon), base.stage(0)),
                           base.G(), base.Gbar());
    };
    const auto ones = InitialCondition::deterministic(Vector::Ones(3));
    EXPECT_NO_THROW(assemble(long_spec(10), ones));
    EXPECT_THROW(assemble(long_spec(11), ones), CapacityError);
    EXPECT_THROW(assemble(long_spec(15), ones), CapacityError);
    EXPECT_THROW(assemble(base, InitialCondition::gaussian(Vector::Ones(3), Matrix::Identity(3, 3))), ArgumentError);
}

TEST(Oracle, IndefiniteControlWeightIsNumericalError) {
    auto stages = example_problem().spec.stages();
    for (auto& c : stages) c.R = -Matrix::Identity(2, 2);
    const ProblemSpec spec(3, 2, stages, Matrix::Zero(3, 3), Matrix::Zero(3, 3));
    EXPECT_THROW(solve_open_loop(assemble(spec, InitialCondition::deterministic(Vector::Ones(3)))), NumericalError);
}

}  // namespace
}  // namespace mflq
