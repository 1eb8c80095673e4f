#pragma once

#include <cstddef>
#include <vector>

#include "mflq/problem.hpp"

namespace mflq {

/// Largest horizon the oracle accepts.
inline constexpr int kOracleMaxHorizon = 14;
/// Largest number of stacked control variables m·roots·(2^N − 1) assembled densely.
inline constexpr std::size_t kOracleMaxControls = 2048;

/// Exhaustive tree of Rademacher noise histories.
///
/// Depth k holds roots·2^k nodes: one subtree per atom of ζ (the roots) and one
/// node per history (w_0, …, w_{k−1}) ∈ {−1,+1}^k. Within a depth nodes are
/// ordered atom-major; node i has children 2i (w_k = −1) and 2i + 1 (w_k = +1).
/// The control at a depth-k node may depend on ζ and w_0..w_{k−1} only.
class ScenarioTree {
public:
    ScenarioTree(int depth, int control_dim, std::vector<double> root_probabilities);

    [[nodiscard]] int depth() const noexcept { return depth_; }
    [[nodiscard]] std::size_t roots() const noexcept { return roots_.size(); }
    [[nodiscard]] std::size_t nodes_at(int k) const noexcept { return roots() << k; }
    [[nodiscard]] std::size_t node_count() const noexcept;
    [[nodiscard]] double probability(int k, std::size_t node) const;
    /// w_{k−1}, the last noise value on the path to `node` (k ≥ 1).
    [[nodiscard]] static double last_noise(std::size_t node) noexcept { return (node & 1U) != 0 ? 1.0 : -1.0; }

    /// Index of the first control variable of depth k in the stacked vector.
    [[nodiscard]] std::size_t control_offset(int k) const noexcept;
    [[nodiscard]] std::size_t control_index(int k, std::size_t node) const noexcept;
    [[nodiscard]] std::size_t control_count() const noexcept { return control_offset(depth_); }

private:
    int depth_;
    int control_dim_;
    std::vector<double> roots_;
};

/// J(u) = uᵀ Theta1 u + 2 theta2ᵀ u + theta3 over the stacked node controls.
struct QuadraticForm {
    ScenarioTree tree;
    Matrix Theta1;
    Vector theta2;
    double theta3 = 0.0;

    [[nodiscard]] double evaluate(const Vector& u) const;
};

/// Builds the exact cost quadratic form on the tree by propagating the linear
/// sensitivity of each node state to the controls and ζ. `init` must have finite
/// support (deterministic or finite_support). Throws CapacityError when the tree
/// exceeds kOracleMaxHorizon or kOracleMaxControls.
QuadraticForm assemble(const ProblemSpec& spec, const InitialCondition& init);

struct OpenLoopSolution {
    Vector u;
    double cost = 0.0;
    double residual = 0.0;  // ‖Theta1 u + theta2‖∞
};

/// Solves Theta1 u = −theta2 by Cholesky; throws NumericalError when Theta1 is not
/// positive definite.
OpenLoopSolution solve_open_loop(const QuadraticForm& form);

/// States and controls at every node of a policy or control sequence played on the tree.
struct TreeTrajectory {
    ScenarioTree tree;
    std::vector<Matrix> states;    // per depth: n × nodes_at(k)
    std::vector<Matrix> controls;  // per depth k < N: m × nodes_at(k)
    std::vector<Vector> mean;      // per depth: Ex_k
    double cost = 0.0;
};

/// Plays an open-loop control vector (stacked as in ScenarioTree) and evaluates
/// the cost directly from the states, without the quadratic form.
TreeTrajectory play_open_loop(const ProblemSpec& spec, const InitialCondition& init, const Vector& u);

/// Plays u = M Ex + L (x − Ex) at every node with exact depth-level expectations.
TreeTrajectory play_policy(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init);

/// Exact expected cost of a feedback policy on the tree.
double eval_policy_on_tree(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init);

/// max over nodes of ‖u_h − (M Ex + L (x_h − Ex))‖∞ along the trajectory driven by u.
double feedback_residual(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                         const Vector& u);

struct VerificationReport {
    double cost_riccati = 0.0;
    double cost_oracle = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;
    double theta1_min_eig = 0.0;
    double per_node_gain_residual_max = 0.0;
};

/// Riccati optimal value against the open-loop optimum on the tree.
VerificationReport verify(const ProblemSpec& spec, const InitialCondition& init);

}  // namespace mflq
