#include <gtest/gtest.h>

#include <cstring>

#include "mflq/errors.hpp"
#include "mflq/example_instance.hpp"
#include "mflq/riccati.hpp"
#include "mflq/validation.hpp"
#include "support/random_problems.hpp"
#include "support/reference_tables.hpp"

namespace mflq {
namespace {

namespace ref = testing::reference;

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

ProblemSpec scalar_problem() {
    // One noiseless stage with every nonzero coefficient and weight equal to 1.
    StageCoefficients c;
    const Matrix one = Matrix::Ones(1, 1), zero = Matrix::Zero(1, 1);
    c.A = one;
    c.Abar = one;
    c.C = zero;
    c.Cbar = zero;
    c.B = one;
    c.Bbar = one;
    c.D = zero;
    c.Dbar = zero;
    c.Q = zero;
    c.Qbar = zero;
    c.R = one;
    c.Rbar = one;
    return ProblemSpec(1, 1, {c}, one, one);
}

TEST(Riccati, ReproducesReferenceTables) {
    const auto sol = solve_riccati(example_problem().spec);
    EXPECT_LE(ref::max_table_error(ref::S, sol.S), ref::kTableTolerance);
    EXPECT_LE(ref::max_table_error(ref::T, sol.T), ref::kTableTolerance);
    EXPECT_LE(ref::max_table_error(ref::M, sol.M), ref::kTableTolerance);
    EXPECT_LE(ref::max_table_error(ref::L, sol.L), ref::kTableTolerance);
    EXPECT_NEAR(sol.S[0](0, 0), 0.5227, 5e-5);
    EXPECT_NEAR(sol.T[0](0, 0), 4.3329, 5e-5);
    EXPECT_NEAR(sol.T[3](2, 2), 2.4932, 5e-5);
}

TEST(Riccati, TerminalConditionsAreExact) {
    const auto& spec = example_problem().spec;
    const auto sol = solve_riccati(spec);
    ASSERT_EQ(sol.S.size(), 5U);
    ASSERT_EQ(sol.L.size(), 4U);
    EXPECT_EQ(sol.S[4], spec.G());
    EXPECT_EQ(sol.T[4], Matrix(spec.G() + spec.Gbar()));
}

TEST(Riccati, ScalarInstance) {
    const auto sol = solve_riccati(scalar_problem());
    EXPECT_NEAR(sol.S[0](0, 0), 0.5, 1e-15);
    // W2 = 2 + 4·2 = 10, H2 = 2·2·2 = 8, T_0 = 4·2 − 64/10.
    EXPECT_NEAR(sol.W2[0](0, 0), 10.0, 1e-15);
    EXPECT_NEAR(sol.T[0](0, 0), 1.6, 1e-14);
    EXPECT_NEAR(sol.M[0](0, 0), -0.8, 1e-15);
    EXPECT_NEAR(sol.L[0](0, 0), -0.5, 1e-15);
}

TEST(Riccati, WithoutMeanFieldReducesToClassicalLq) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto spec = trial == 0 ? example_problem().spec.without_mean_field()
                                     : testing::random_problem(rng, {.mean_field = false});
        const auto sol = solve_riccati(spec);
        for (int k = 0; k <= spec.horizon(); ++k) EXPECT_LE(max_abs(sol.T[k] - sol.S[k]), 1e-10);
        for (int k = 0; k < spec.horizon(); ++k) EXPECT_LE(max_abs(sol.M[k] - sol.L[k]), 1e-10);
    }
}

TEST(Riccati, RejectsSpecViolatingStandardCondition) {
    auto stages = example_problem().spec.stages();
    stages[0].R = Matrix::Zero(2, 2);
    const ProblemSpec spec(3, 2, stages, Matrix::Identity(3, 3), Matrix::Zero(3, 3));
    try {
        solve_riccati(spec);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("R_0 not positive definite"), std::string::npos) << e.what();
    }
}

TEST(Riccati, RandomSpecInvariants) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        const auto spec = testing::random_problem(rng);
        const auto sol = solve_riccati(spec);
        for (int k = 0; k <= spec.horizon(); ++k) {
            EXPECT_EQ(asymmetry(sol.S[k]), 0.0);
            EXPECT_EQ(asymmetry(sol.T[k]), 0.0);
            const double scale = 1.0 + max_abs(sol.S[k]) + max_abs(sol.T[k]);
            EXPECT_GE(min_eigenvalue(sol.S[k]), -1e-9 * scale);
            EXPECT_GE(min_eigenvalue(sol.T[k]), -1e-9 * scale);
        }
        const auto res = gain_residuals(sol);
        double wscale = 1.0;
        for (int k = 0; k < spec.horizon(); ++k) {
            wscale = std::max({wscale, max_abs(sol.W1[k]), max_abs(sol.W2[k])});
            EXPECT_GT(min_eigenvalue(sol.W1[k]), 0.0);
            EXPECT_GT(min_eigenvalue(sol.W2[k]), 0.0);
        }
        EXPECT_LE(res.fluctuation, 1e-10 * wscale);
        EXPECT_LE(res.mean, 1e-10 * wscale);
    }
}

TEST(Riccati, IsBitwiseDeterministic) {
    std::mt19937_64 rng(77);
    const auto spec = testing::random_problem(rng, {.min_horizon = 5});
    const auto a = solve_riccati(spec);
    const auto b = solve_riccati(spec);
    for (int k = 0; k <= spec.horizon(); ++k) {
        EXPECT_TRUE(bitwise_equal(a.S[k], b.S[k]));
        EXPECT_TRUE(bitwise_equal(a.T[k], b.T[k]));
    }
    for (int k = 0; k < spec.horizon(); ++k) {
        EXPECT_TRUE(bitwise_equal(a.L[k], b.L[k]));
        EXPECT_TRUE(bitwise_equal(a.M[k], b.M[k]));
    }
}

TEST(Riccati, OptimalPolicyCarriesGains) {
    const auto sol = solve_riccati(example_problem().spec);
    const auto policy = optimal_policy(sol);
    ASSERT_EQ(policy.horizon(), 4);
    EXPECT_EQ(policy.L(2), sol.L[2]);
    EXPECT_EQ(policy.M(2), sol.M[2]);
    EXPECT_EQ(policy.Lbar(2), Matrix(sol.M[2] - sol.L[2]));
}

TEST(Principle, TerminalValues) {
    const auto& spec = example_problem().spec;
    const auto p = solve_principle(spec);
    EXPECT_EQ(p.P.back(), spec.G());
    EXPECT_EQ(p.Pbar.back(), spec.Gbar());
}

TEST(Principle, MatchesRiccatiOnExample) {
    const auto& spec = example_problem().spec;
    const auto r = compare(solve_principle(spec), solve_riccati(spec));
    EXPECT_LE(r.S_vs_P, 1e-12);
    EXPECT_LE(r.T_vs_P_plus_Pbar, 1e-12);
    EXPECT_LE(r.L_gap, 1e-12);
    EXPECT_LE(r.M_gap, 1e-12);
}

TEST(Principle, MatchesRiccatiOnRandomSpecs) {
    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 50; ++trial) {
        const auto spec = testing::random_problem(rng);
        const auto sol = solve_riccati(spec);
        const auto r = compare(solve_principle(spec), sol);
        EXPECT_LE(r.S_vs_P, 1e-8) << trial;
        EXPECT_LE(r.T_vs_P_plus_Pbar, 1e-8) << trial;
        EXPECT_LE(r.L_gap, 1e-8) << trial;
        EXPECT_LE(r.M_gap, 1e-8) << trial;
    }
}

TEST(Principle, NoMeanFieldGivesZeroPbar) {
    std::mt19937_64 rng(8);
    const auto spec = testing::random_problem(rng, {.mean_field = false});
    const auto p = solve_principle(spec);
    for (const auto& pb : p.Pbar) EXPECT_LE(max_abs(pb), 1e-10);
    for (int k = 0; k < spec.horizon(); ++k) EXPECT_LE(max_abs(p.Lbar[static_cast<std::size_t>(k)]), 1e-10);
}

TEST(ExampleVariants, AsPrintedMatchesOnlyFluctuationTables) {
    const auto sol = solve_riccati(example_problem(ExampleVariant::as_printed).spec);
    EXPECT_LE(ref::max_table_error(ref::S, sol.S), ref::kTableTolerance);
    EXPECT_LE(ref::max_table_error(ref::L, sol.L), ref::kTableTolerance);
    EXPECT_GT(ref::max_table_error(ref::T, sol.T), 0.1);
    EXPECT_GT(ref::max_table_error(ref::M, sol.M), 0.01);
}

TEST(Linalg, SpdSolveNamesFailingMatrix) {
    Matrix w(2, 2);
    w << 1.0, 2.0, 2.0, 1.0;
    try {
        spd_solve(w, Matrix::Identity(2, 2), "W1_3");
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_STREQ(e.what(), "W1_3 is not positive definite (Cholesky factorization failed)");
    }
    const Matrix x = spd_solve(Matrix::Identity(2, 2) * 4.0, Matrix::Ones(2, 1), "W");
    EXPECT_DOUBLE_EQ(x(1, 0), 0.25);
}

}  // namespace
}  // namespace mflq
