#include "mflq/export.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "mflq/errors.hpp"

namespace mflq {

namespace {

using Json = nlohmann::json;

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json sequence_json(const std::vector<Matrix>& seq) {
    Json out = Json::array();
    for (const auto& m : seq) out.push_back(matrix_json(m));
    return out;
}

Json sequence_json(const std::vector<Vector>& seq) {
    Json out = Json::array();
    for (const auto& v : seq) out.push_back(vector_json(v));
    return out;
}

std::string num(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

void append_table(std::string& out, const std::string& name, const Matrix& m) {
    out += name + " =\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += "  ";
        for (Eigen::Index j = 0; j < m.cols(); ++j) out += num(m(i, j), "%10.4f");
        out += "\n";
    }
}

std::string requirement_name(Requirement r) {
    switch (r) {
        case Requirement::none: return "none";
        case Requirement::positive_semidefinite: return "psd";
        case Requirement::positive_definite: return "pd";
    }
    return "none";
}

Json trace_json(const TraceExport& trace) {
    return Json{{"mean", sequence_json(trace.trajectory.mean)},
                {"X", sequence_json(trace.trajectory.X)},
                {"Xbar", sequence_json(trace.trajectory.Xbar)},
                {"stage_cost", trace.cost.stage},
                {"cost", trace.cost.total},
                {"optimal_value", trace.optimal_value}};
}

}  // namespace

std::string to_json(const ValidationReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) {
        Json entry{{"matrix", c.name},
                   {"requirement", requirement_name(c.requirement)},
                   {"asymmetry", c.asymmetry},
                   {"min_eigenvalue", c.min_eigenvalue},
                   {"ok", c.ok}};
        entry["stage"] = c.stage ? Json(*c.stage) : Json(nullptr);
        checks.push_back(std::move(entry));
    }
    Json doc{{"satisfied", report.satisfied}, {"violations", report.violations}, {"checks", std::move(checks)}};
    return doc.dump(2) + "\n";
}

std::string to_text(const ValidationReport& report) {
    std::string out;
    for (const auto& c : report.checks) {
        out += c.name;
        out.append(c.name.size() < 14 ? 14 - c.name.size() : 1, ' ');
        out += " req=" + requirement_name(c.requirement) + " min_eig=" + num(c.min_eigenvalue, "%.4e") +
               " asym=" + num(c.asymmetry, "%.1e") + (c.ok ? "" : "  VIOLATED") + "\n";
    }
    out += report.satisfied ? "standard condition satisfied\n" : "standard condition violated\n";
    for (const auto& v : report.violations) out += "  " + v + "\n";
    return out;
}

std::string to_json(const RiccatiSolution& sol, const std::optional<PrincipleExport>& principle,
                    const std::optional<TraceExport>& trace) {
    const auto residuals = gain_residuals(sol);
    Json doc{{"N", sol.horizon()},
             {"S", sequence_json(sol.S)},
             {"T", sequence_json(sol.T)},
             {"W1", sequence_json(sol.W1)},
             {"W2", sequence_json(sol.W2)},
             {"H1", sequence_json(sol.H1)},
             {"H2", sequence_json(sol.H2)},
             {"L", sequence_json(sol.L)},
             {"M", sequence_json(sol.M)},
             {"gain_residuals", {{"W1_L_plus_H1", residuals.fluctuation}, {"W2_M_plus_H2", residuals.mean}}}};
    if (principle) {
        doc["P"] = sequence_json(principle->solution.P);
        doc["Pbar"] = sequence_json(principle->solution.Pbar);
        doc["Lbar"] = sequence_json(principle->solution.Lbar);
        doc["equivalence"] = {{"max_abs_P_minus_S", principle->residuals.S_vs_P},
                              {"max_abs_P_plus_Pbar_minus_T", principle->residuals.T_vs_P_plus_Pbar},
                              {"max_abs_L_gap", principle->residuals.L_gap},
                              {"max_abs_M_gap", principle->residuals.M_gap}};
    }
    if (trace) doc["trace"] = trace_json(*trace);
    return doc.dump(2) + "\n";
}

std::string gains_csv(const RiccatiSolution& sol) {
    std::string out = "matrix,k,row";
    Eigen::Index width = std::max(sol.S.front().cols(), sol.L.front().cols());
    for (Eigen::Index j = 0; j < width; ++j) out += ",c" + std::to_string(j);
    out += "\n";
    auto rows = [&](const std::string& name, const std::vector<Matrix>& seq) {
        for (std::size_t k = 0; k < seq.size(); ++k) {
            for (Eigen::Index i = 0; i < seq[k].rows(); ++i) {
                out += name + "," + std::to_string(k) + "," + std::to_string(i);
                for (Eigen::Index j = 0; j < seq[k].cols(); ++j) out += "," + num(seq[k](i, j));
                out += "\n";
            }
        }
    };
    rows("L", sol.L);
    rows("M", sol.M);
    rows("S", sol.S);
    rows("T", sol.T);
    return out;
}

std::string to_text(const RiccatiSolution& sol, const std::optional<PrincipleExport>& principle,
                    const std::optional<TraceExport>& trace) {
    std::string out;
    for (std::size_t k = 0; k < sol.S.size(); ++k) {
        append_table(out, "S_" + std::to_string(k), sol.S[k]);
        append_table(out, "T_" + std::to_string(k), sol.T[k]);
    }
    for (std::size_t k = 0; k < sol.L.size(); ++k) {
        append_table(out, "M_" + std::to_string(k), sol.M[k]);
        append_table(out, "L_" + std::to_string(k), sol.L[k]);
    }
    if (principle) {
        out += "max |P_k - S_k|          = " + num(principle->residuals.S_vs_P, "%.3e") + "\n";
        out += "max |P_k + Pbar_k - T_k| = " + num(principle->residuals.T_vs_P_plus_Pbar, "%.3e") + "\n";
    }
    if (trace) {
        out += "cost under optimal policy = " + num(trace->cost.total, "%.4f") + "\n";
        out += "optimal value             = " + num(trace->optimal_value, "%.4f") + "\n";
    }
    return out;
}

std::string trace_csv(const TraceExport& trace) {
    const auto& traj = trace.trajectory;
    const Eigen::Index n = traj.mean.front().size();
    std::string out = "k";
    for (Eigen::Index i = 0; i < n; ++i) out += ",mean_" + std::to_string(i);
    for (Eigen::Index i = 0; i < n; ++i) out += ",X_" + std::to_string(i) + std::to_string(i);
    out += ",stage_cost,cost_to_go\n";
    double to_go = 0.0;
    std::vector<double> cost_to_go(trace.cost.stage.size());
    for (std::size_t k = trace.cost.stage.size(); k-- > 0;) {
        to_go += trace.cost.stage[k];
        cost_to_go[k] = to_go;
    }
    for (std::size_t k = 0; k < traj.mean.size(); ++k) {
        out += std::to_string(k);
        for (Eigen::Index i = 0; i < n; ++i) out += "," + num(traj.mean[k](i));
        for (Eigen::Index i = 0; i < n; ++i) out += "," + num(traj.X[k](i, i));
        out += "," + num(trace.cost.stage[k]) + "," + num(cost_to_go[k]) + "\n";
    }
    return out;
}

std::string to_json(const SimulationResult& result) {
    Json doc{{"cost_mean", result.cost_mean},
             {"cost_stderr", result.cost_stderr},
             {"n_paths", result.n_paths},
             {"seed", result.seed},
             {"noise", to_string(result.noise)},
             {"state_mean", sequence_json(result.state_mean)},
             {"state_mean_stderr", sequence_json(result.state_mean_stderr)},
             {"deterministic_mean", sequence_json(result.deterministic_mean)}};
    return doc.dump(2) + "\n";
}

std::string simulation_csv(const SimulationResult& result) {
    std::string out = "k,coord,sample_mean,stderr,ci_low,ci_high,deterministic_mean\n";
    for (std::size_t k = 0; k < result.state_mean.size(); ++k) {
        for (Eigen::Index i = 0; i < result.state_mean[k].size(); ++i) {
            const double mu = result.state_mean[k](i);
            const double se = result.state_mean_stderr[k](i);
            out += std::to_string(k) + "," + std::to_string(i) + "," + num(mu) + "," + num(se) + "," +
                   num(mu - 3.0 * se) + "," + num(mu + 3.0 * se) + "," + num(result.deterministic_mean[k](i)) + "\n";
        }
    }
    return out;
}

std::string to_text(const SimulationResult& result) {
    return "paths " + std::to_string(result.n_paths) + ", seed " + std::to_string(result.seed) + ", noise " +
           to_string(result.noise) + "\ncost " + num(result.cost_mean, "%.4f") + " +/- " +
           num(result.cost_stderr, "%.4f") + " (1 s.e.)\n";
}

ParticleSweep particle_sweep(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                             NoiseKind noise, const std::vector<std::uint64_t>& counts, int replications,
                             std::uint64_t seed) {
    if (replications < 1) throw ArgumentError("particles: replications must be at least 1");
    ParticleSweep sweep{{}, seed, noise};
    for (std::size_t level = 0; level < counts.size(); ++level) {
        ParticleSweep::Level out{counts[level], {}, 0.0};
        for (int r = 0; r < replications; ++r) {
            const auto run_seed = stream_seed(seed, level * 1'000'003ULL + static_cast<std::uint64_t>(r));
            out.max_deviation.push_back(
                simulate_particles(spec, policy, init, noise, counts[level], run_seed).max_deviation);
        }
        auto sorted = out.max_deviation;
        std::sort(sorted.begin(), sorted.end());
        const auto mid = sorted.size() / 2;
        out.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
        sweep.levels.push_back(std::move(out));
    }
    return sweep;
}

std::string to_json(const ParticleSweep& sweep) {
    Json levels = Json::array();
    for (std::size_t i = 0; i < sweep.levels.size(); ++i) {
        const auto& l = sweep.levels[i];
        Json entry{{"particles", l.particles}, {"median_max_deviation", l.median}, {"max_deviation", l.max_deviation}};
        if (i > 0) entry["ratio_to_previous"] = l.median / sweep.levels[i - 1].median;
        levels.push_back(std::move(entry));
    }
    Json doc{{"seed", sweep.seed}, {"noise", to_string(sweep.noise)}, {"levels", std::move(levels)}};
    return doc.dump(2) + "\n";
}

std::string particles_csv(const ParticleSweep& sweep) {
    std::string out = "particles,replications,median_max_deviation,ratio_to_previous\n";
    for (std::size_t i = 0; i < sweep.levels.size(); ++i) {
        const auto& l = sweep.levels[i];
        out += std::to_string(l.particles) + "," + std::to_string(l.max_deviation.size()) + "," + num(l.median) + "," +
               (i > 0 ? num(l.median / sweep.levels[i - 1].median) : std::string()) + "\n";
    }
    return out;
}

std::string to_json(const VerificationReport& report) {
    Json doc{{"cost_riccati", report.cost_riccati},
             {"cost_oracle", report.cost_oracle},
             {"abs_diff", report.abs_diff},
             {"rel_diff", report.rel_diff},
             {"theta1_min_eig", report.theta1_min_eig},
             {"per_node_gain_residual_max", report.per_node_gain_residual_max}};
    return doc.dump(2) + "\n";
}

}  // namespace mflq
