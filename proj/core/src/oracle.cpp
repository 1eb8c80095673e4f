#include "mflq/oracle.hpp"

#include <cfloat>
#include <cmath>
#include <functional>

#include "mflq/errors.hpp"
#include "mflq/moments.hpp"
#include "mflq/riccati.hpp"

namespace mflq {

// ── ScenarioTree ────────────────────────────────────────────────────────────

ScenarioTree::ScenarioTree(int depth, int control_dim, std::vector<double> root_probabilities)
    : depth_(depth), control_dim_(control_dim), roots_(std::move(root_probabilities)) {
    if (depth_ < 1) throw ArgumentError("scenario tree: depth must be at least 1");
    if (depth_ > kOracleMaxHorizon) {
        throw CapacityError("scenario tree: horizon N=" + std::to_string(depth_) + " exceeds the oracle limit " +
                            std::to_string(kOracleMaxHorizon) + "; use a smaller horizon");
    }
    if (roots_.empty()) throw ArgumentError("scenario tree: needs at least one root");
}

std::size_t ScenarioTree::node_count() const noexcept { return roots() * ((std::size_t{1} << (depth_ + 1)) - 1); }

double ScenarioTree::probability(int k, std::size_t node) const {
    return roots_.at(node >> k) * std::ldexp(1.0, -k);
}

std::size_t ScenarioTree::control_offset(int k) const noexcept {
    return static_cast<std::size_t>(control_dim_) * roots() * ((std::size_t{1} << k) - 1);
}

std::size_t ScenarioTree::control_index(int k, std::size_t node) const noexcept {
    return control_offset(k) + static_cast<std::size_t>(control_dim_) * node;
}

double QuadraticForm::evaluate(const Vector& u) const { return u.dot(Theta1 * u) + 2.0 * theta2.dot(u) + theta3; }

namespace {

ScenarioTree tree_for(const ProblemSpec& spec, const std::vector<InitialCondition::Atom>& atoms) {
    std::vector<double> probs;
    probs.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (a.point.size() != spec.n()) throw StructuralError("initial: dimension differs from n");
        probs.push_back(a.probability);
    }
    return ScenarioTree(spec.horizon(), spec.m(), std::move(probs));
}

using ControlRule = std::function<Vector(int k, std::size_t node, const Vector& x, const Vector& mean)>;

TreeTrajectory play(const ProblemSpec& spec, const InitialCondition& init, const ControlRule& rule) {
    const auto atoms = init.support();
    TreeTrajectory traj{tree_for(spec, atoms), {}, {}, {}, 0.0};
    const auto& tree = traj.tree;
    const Eigen::Index n = spec.n();

    Matrix states(n, static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t r = 0; r < atoms.size(); ++r) states.col(static_cast<Eigen::Index>(r)) = atoms[r].point;

    long double cost = 0.0L;
    for (int k = 0;; ++k) {
        const auto nodes = tree.nodes_at(k);
        Vector mean = Vector::Zero(n);
        for (std::size_t i = 0; i < nodes; ++i) mean += tree.probability(k, i) * states.col(static_cast<Eigen::Index>(i));
        traj.states.push_back(states);
        traj.mean.push_back(mean);

        if (k == spec.horizon()) {
            for (std::size_t i = 0; i < nodes; ++i) {
                const auto x = states.col(static_cast<Eigen::Index>(i));
                cost += tree.probability(k, i) * x.dot(spec.G() * x);
            }
            cost += mean.dot(spec.Gbar() * mean);
            break;
        }

        const auto& c = spec.stage(k);
        Matrix controls(spec.m(), static_cast<Eigen::Index>(nodes));
        Vector control_mean = Vector::Zero(spec.m());
        for (std::size_t i = 0; i < nodes; ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            controls.col(col) = rule(k, i, states.col(col), mean);
            control_mean += tree.probability(k, i) * controls.col(col);
        }
        for (std::size_t i = 0; i < nodes; ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            const double p = tree.probability(k, i);
            cost += p * (states.col(col).dot(c.Q * states.col(col)) + controls.col(col).dot(c.R * controls.col(col)));
        }
        cost += mean.dot(c.Qbar * mean) + control_mean.dot(c.Rbar * control_mean);
        traj.controls.push_back(controls);

        const Vector drift_offset = c.Abar * mean + c.Bbar * control_mean;
        const Vector noise_offset = c.Cbar * mean + c.Dbar * control_mean;
        Matrix next(n, static_cast<Eigen::Index>(2 * nodes));
        for (std::size_t i = 0; i < nodes; ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            const Vector drift = c.A * states.col(col) + c.B * controls.col(col) + drift_offset;
            const Vector diffusion = c.C * states.col(col) + c.D * controls.col(col) + noise_offset;
            for (std::size_t b = 0; b < 2; ++b) {
                const std::size_t child = 2 * i + b;
                next.col(static_cast<Eigen::Index>(child)) = drift + ScenarioTree::last_noise(child) * diffusion;
            }
        }
        states = std::move(next);
    }
    traj.cost = static_cast<double>(cost);
    return traj;
}

}  // namespace

// ── assembly ────────────────────────────────────────────────────────────────

QuadraticForm assemble(const ProblemSpec& spec, const InitialCondition& init) {
    const auto atoms = init.support();
    ScenarioTree tree = tree_for(spec, atoms);
    const std::size_t total_controls = tree.control_count();
    if (total_controls > kOracleMaxControls) {
        throw CapacityError("scenario tree: " + std::to_string(total_controls) + " control variables exceed the limit " +
                            std::to_string(kOracleMaxControls) + "; use a smaller horizon (N=" +
                            std::to_string(spec.horizon()) + ")");
    }

    const Eigen::Index n = spec.n();
    const Eigen::Index m = spec.m();
    const auto nv = static_cast<Eigen::Index>(total_controls);

    Matrix theta1 = Matrix::Zero(nv, nv);
    Vector theta2 = Vector::Zero(nv);
    long double theta3 = 0.0L;

    // Node i of the current depth: x_i = S_i u + s_i, stored as row block i of
    // (sens, offset). Only the first `cols` controls (those of earlier depths) enter.
    auto nodes = static_cast<Eigen::Index>(tree.roots());
    Eigen::Index cols = 0;
    Matrix sens(n * nodes, 0);
    Vector offset(n * nodes);
    for (Eigen::Index r = 0; r < nodes; ++r) offset.segment(n * r, n) = atoms[static_cast<std::size_t>(r)].point;

    for (int k = 0; k <= spec.horizon(); ++k) {
        const bool terminal = k == spec.horizon();
        const Matrix& weight = terminal ? spec.G() : spec.stage(k).Q;
        const Matrix& mean_weight = terminal ? spec.Gbar() : spec.stage(k).Qbar;

        Vector prob(nodes);
        for (Eigen::Index i = 0; i < nodes; ++i) prob(i) = tree.probability(k, static_cast<std::size_t>(i));

        Matrix sens_mean = Matrix::Zero(n, cols);
        Vector offset_mean = Vector::Zero(n);
        Matrix weighted_sens(n * nodes, cols);
        Vector weighted_offset(n * nodes);
        for (Eigen::Index i = 0; i < nodes; ++i) {
            const auto S_i = sens.middleRows(n * i, n);
            const auto s_i = offset.segment(n * i, n);
            sens_mean.noalias() += prob(i) * S_i;
            offset_mean.noalias() += prob(i) * s_i;
            weighted_sens.middleRows(n * i, n).noalias() = prob(i) * weight * S_i;
            weighted_offset.segment(n * i, n).noalias() = prob(i) * weight * s_i;
        }

        // E[xᵀ W x] + (Ex)ᵀ Wbar (Ex)
        theta1.topLeftCorner(cols, cols).noalias() += sens.transpose() * weighted_sens;
        theta1.topLeftCorner(cols, cols).noalias() += sens_mean.transpose() * mean_weight * sens_mean;
        theta2.head(cols).noalias() += sens.transpose() * weighted_offset;
        theta2.head(cols).noalias() += sens_mean.transpose() * (mean_weight * offset_mean);
        theta3 += offset.dot(weighted_offset) + offset_mean.dot(mean_weight * offset_mean);

        if (terminal) break;

        // E[uᵀ R u] + (Eu)ᵀ Rbar (Eu) on this depth's controls.
        const auto& c = spec.stage(k);
        for (Eigen::Index i = 0; i < nodes; ++i) {
            const Eigen::Index vi = cols + m * i;
            theta1.block(vi, vi, m, m) += prob(i) * c.R;
            for (Eigen::Index j = 0; j < nodes; ++j) {
                theta1.block(vi, cols + m * j, m, m) += prob(i) * prob(j) * c.Rbar;
            }
        }

        // Children: x' = (A + wC) x + (Abar + wCbar) Ex + (B + wD) u + (Bbar + wDbar) Eu.
        const Eigen::Index next_nodes = 2 * nodes;
        const Eigen::Index next_cols = cols + m * nodes;
        Matrix next_sens = Matrix::Zero(n * next_nodes, next_cols);
        Vector next_offset(n * next_nodes);
        for (int b = 0; b < 2; ++b) {
            const double w = b == 0 ? -1.0 : 1.0;
            const Matrix A_w = c.A + w * c.C;
            const Matrix Abar_w = c.Abar + w * c.Cbar;
            const Matrix B_w = c.B + w * c.D;
            const Matrix Bbar_w = c.Bbar + w * c.Dbar;
            const Matrix mean_sens = Abar_w * sens_mean;
            const Vector mean_offset = Abar_w * offset_mean;
            Matrix control_mean_sens(n, m * nodes);
            for (Eigen::Index j = 0; j < nodes; ++j) control_mean_sens.middleCols(m * j, m) = prob(j) * Bbar_w;

            for (Eigen::Index i = 0; i < nodes; ++i) {
                const Eigen::Index child = 2 * i + b;
                auto rows = next_sens.middleRows(n * child, n);
                rows.leftCols(cols).noalias() = A_w * sens.middleRows(n * i, n);
                rows.leftCols(cols) += mean_sens;
                rows.middleCols(cols, m * nodes) = control_mean_sens;
                rows.middleCols(cols + m * i, m) += B_w;
                next_offset.segment(n * child, n).noalias() = A_w * offset.segment(n * i, n);
                next_offset.segment(n * child, n) += mean_offset;
            }
        }
        sens = std::move(next_sens);
        offset = std::move(next_offset);
        nodes = next_nodes;
        cols = next_cols;
    }

    return QuadraticForm{std::move(tree), symmetrized(theta1), std::move(theta2), static_cast<double>(theta3)};
}

OpenLoopSolution solve_open_loop(const QuadraticForm& form) {
    Eigen::LLT<Matrix> llt(form.Theta1);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("Theta1 is not positive definite; the open-loop problem has no unique minimizer");
    }
    OpenLoopSolution out;
    out.u = -llt.solve(form.theta2);
    out.cost = form.theta3 + form.theta2.dot(out.u);
    out.residual = max_abs(form.Theta1 * out.u + form.theta2);
    return out;
}

TreeTrajectory play_open_loop(const ProblemSpec& spec, const InitialCondition& init, const Vector& u) {
    const auto tree = tree_for(spec, init.support());
    if (static_cast<std::size_t>(u.size()) != tree.control_count()) {
        throw StructuralError("open-loop control vector has " + std::to_string(u.size()) + " entries, tree needs " +
                              std::to_string(tree.control_count()));
    }
    const auto m = spec.m();
    return play(spec, init, [&](int k, std::size_t node, const Vector&, const Vector&) -> Vector {
        return u.segment(static_cast<Eigen::Index>(tree.control_index(k, node)), m);
    });
}

TreeTrajectory play_policy(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init) {
    policy.check_compatible(spec);
    return play(spec, init, [&](int k, std::size_t, const Vector& x, const Vector& mean) -> Vector {
        return policy.M(k) * mean + policy.L(k) * (x - mean);
    });
}

double eval_policy_on_tree(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init) {
    return play_policy(spec, policy, init).cost;
}

double feedback_residual(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                         const Vector& u) {
    policy.check_compatible(spec);
    const auto traj = play_open_loop(spec, init, u);
    double worst = 0.0;
    for (int k = 0; k < spec.horizon(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        const Matrix& x = traj.states[i];
        const Vector& mean = traj.mean[i];
        Matrix law = policy.L(k) * (x.colwise() - mean);
        law.colwise() += policy.M(k) * mean;
        worst = std::max(worst, max_abs(traj.controls[i] - law));
    }
    return worst;
}

VerificationReport verify(const ProblemSpec& spec, const InitialCondition& init) {
    const auto sol = solve_riccati(spec);
    const auto form = assemble(spec, init);
    const auto open_loop = solve_open_loop(form);

    VerificationReport r;
    r.cost_riccati = optimal_value(sol, init);
    r.cost_oracle = open_loop.cost;
    r.abs_diff = std::abs(r.cost_oracle - r.cost_riccati);
    r.rel_diff = r.abs_diff == 0.0 ? 0.0 : r.abs_diff / std::max(std::abs(r.cost_riccati), DBL_MIN);
    r.theta1_min_eig = min_eigenvalue(form.Theta1);
    r.per_node_gain_residual_max = feedback_residual(spec, optimal_policy(sol), init, open_loop.u);
    return r;
}

}  // namespace mflq
