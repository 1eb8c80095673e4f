#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mflq/moments.hpp"
#include "mflq/oracle.hpp"
#include "mflq/riccati.hpp"
#include "mflq/simulator.hpp"
#include "mflq/validation.hpp"

namespace mflq {

// JSON documents print doubles with full round-trip precision; CSV with 10
// significant digits; the text tables with 4 decimals.

std::string to_json(const ValidationReport& report);
std::string to_text(const ValidationReport& report);

struct PrincipleExport {
    PrincipleSolution solution;
    EquivalenceResiduals residuals;
};

struct TraceExport {
    MomentTrajectory trajectory;
    CostBreakdown cost;
    double optimal_value;
};

/// Arrays S, T, W1, W2, H1, H2, L, M indexed by stage, plus P, Pbar, Lbar and
/// the equivalence residuals when `principle` is given, and the optimal-policy
/// moment trace when `trace` is given.
std::string to_json(const RiccatiSolution& sol, const std::optional<PrincipleExport>& principle = std::nullopt,
                    const std::optional<TraceExport>& trace = std::nullopt);

/// Rows `matrix,k,row,c0,c1,...` for the gains L and M (and S, T).
std::string gains_csv(const RiccatiSolution& sol);

/// 4-decimal tables of S_k, T_k, M_k, L_k.
std::string to_text(const RiccatiSolution& sol, const std::optional<PrincipleExport>& principle = std::nullopt,
                    const std::optional<TraceExport>& trace = std::nullopt);

/// Rows `k,mean_0..,X_00,X_11..,stage_cost,cost_to_go`.
std::string trace_csv(const TraceExport& trace);

std::string to_json(const SimulationResult& result);
/// Rows `k,coord,sample_mean,stderr,ci_low,ci_high,deterministic_mean` (99.7% band).
std::string simulation_csv(const SimulationResult& result);
std::string to_text(const SimulationResult& result);

struct ParticleSweep {
    struct Level {
        std::uint64_t particles;
        std::vector<double> max_deviation;  // one per replication
        double median;
    };
    std::vector<Level> levels;
    std::uint64_t seed;
    NoiseKind noise;
};

/// Median over `replications` of the max-over-stages deviation, for each count.
ParticleSweep particle_sweep(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                             NoiseKind noise, const std::vector<std::uint64_t>& counts, int replications,
                             std::uint64_t seed);

std::string to_json(const ParticleSweep& sweep);
std::string particles_csv(const ParticleSweep& sweep);

std::string to_json(const VerificationReport& report);

}  // namespace mflq
