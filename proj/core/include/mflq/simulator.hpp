#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mflq/problem.hpp"

namespace mflq {

/// I.i.d. scalar noise with Ew = 0 and Ew² = 1.
enum class NoiseKind { rademacher, standard_normal };

std::string to_string(NoiseKind kind);
/// Accepts "rademacher" and "standard_normal" (or "normal"/"gaussian").
NoiseKind parse_noise_kind(const std::string& text);

/// Seed of the independent random stream `stream` under master seed `seed`.
/// Stream i of a simulation drives path (or particle) i only, so results do not
/// depend on how paths are split across workers.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

struct SimulationResult {
    double cost_mean = 0.0;
    double cost_stderr = 0.0;  // sample std / sqrt(n_paths); 0 for a single path
    std::uint64_t n_paths = 0;
    std::uint64_t seed = 0;
    NoiseKind noise = NoiseKind::standard_normal;

    std::vector<Vector> deterministic_mean;    // Ex_k from the mean dynamics, k = 0..N
    std::vector<Vector> state_mean;            // sample mean of x_k
    std::vector<Vector> state_mean_stderr;     // per coordinate
    std::vector<Matrix> second_moment;         // sample mean of x_k x_kᵀ
    std::vector<Matrix> second_moment_stderr;  // per entry
};

/// Monte Carlo of the closed loop u_k = M_k Ex_k + L_k (x_k − Ex_k).
///
/// Ex_k and Eu_k = M_k Ex_k come from the deterministic mean recursion, never from
/// the sample. Paths are reduced in fixed blocks in path order, so the result is
/// bitwise identical for any `threads` (0 = hardware concurrency).
SimulationResult simulate(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                          NoiseKind noise, std::uint64_t n_paths, std::uint64_t seed, unsigned threads = 0);

struct ParticleResult {
    std::uint64_t particles = 0;
    std::uint64_t seed = 0;
    std::vector<Vector> empirical_mean;      // (1/L) Σ_i x_k^i
    std::vector<Vector> deterministic_mean;  // Ex_k
    std::vector<double> deviation;           // ‖empirical − deterministic‖₂ per stage
    double max_deviation = 0.0;
};

/// L interacting particles: every occurrence of Ex_k in dynamics and control is
/// replaced by the empirical particle mean, and Eu_k by the empirical control mean.
/// Each particle applies its own feedback u^i = M x̄ + L (x^i − x̄) and draws its own
/// noise. Particle i uses the same random stream as path i of simulate().
ParticleResult simulate_particles(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                                  NoiseKind noise, std::uint64_t particles, std::uint64_t seed);

/// Deterministic mean path Ex_{k+1} = (A+Abar)Ex_k + (B+Bbar) M_k Ex_k.
std::vector<Vector> mean_path(const ProblemSpec& spec, const FeedbackPolicy& policy, const Vector& initial_mean);

}  // namespace mflq
