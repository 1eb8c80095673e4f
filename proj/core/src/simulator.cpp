#include "mflq/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mflq/errors.hpp"

namespace mflq {

namespace {

constexpr std::uint64_t kBlockSize = 4096;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

using Engine = std::mt19937_64;

class NoiseSource {
public:
    explicit NoiseSource(NoiseKind kind) : kind_(kind) {}

    double operator()(Engine& engine) {
        if (kind_ == NoiseKind::rademacher) return (engine() >> 63) != 0 ? 1.0 : -1.0;
        return normal_(engine);
    }

private:
    NoiseKind kind_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Draws ζ; all randomness comes from the path's engine.
class InitialSampler {
public:
    explicit InitialSampler(const InitialCondition& init) : kind_(init.kind()) {
        switch (kind_) {
            case InitialCondition::Kind::deterministic: point_ = init.mean(); break;
            case InitialCondition::Kind::gaussian: {
                point_ = init.gaussian_mean();
                Eigen::SelfAdjointEigenSolver<Matrix> eig(init.gaussian_covariance());
                factor_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
                break;
            }
            case InitialCondition::Kind::finite_support: {
                atoms_ = init.support();
                double acc = 0.0;
                for (const auto& a : atoms_) {
                    acc += a.probability;
                    cumulative_.push_back(acc);
                }
                break;
            }
        }
    }

    void sample(Engine& engine, std::normal_distribution<double>& normal, Vector& out) const {
        switch (kind_) {
            case InitialCondition::Kind::deterministic: out = point_; return;
            case InitialCondition::Kind::gaussian: {
                Vector z(point_.size());
                for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(engine);
                out.noalias() = factor_ * z;
                out += point_;
                return;
            }
            case InitialCondition::Kind::finite_support: {
                const double u = std::generate_canonical<double, 64>(engine) * cumulative_.back();
                auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
                const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                       atoms_.size() - 1);
                out = atoms_[idx].point;
                return;
            }
        }
    }

private:
    InitialCondition::Kind kind_;
    Vector point_;
    Matrix factor_;
    std::vector<InitialCondition::Atom> atoms_;
    std::vector<double> cumulative_;
};

/// Welford accumulator over fixed-length vectors, mergeable with Chan's update.
struct RunningMoments {
    std::uint64_t count = 0;
    Vector mean;
    Vector m2;

    explicit RunningMoments(Eigen::Index dim = 0) : mean(Vector::Zero(dim)), m2(Vector::Zero(dim)) {}

    void add(const Vector& x) {
        ++count;
        const Vector delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta.cwiseProduct(x - mean);
    }

    void merge(const RunningMoments& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double total = na + nb;
        const Vector delta = other.mean - mean;
        mean += delta * (nb / total);
        m2 += other.m2 + delta.cwiseProduct(delta) * (na * nb / total);
        count += other.count;
    }

    [[nodiscard]] Vector stderr_of_mean() const {
        if (count < 2) return Vector::Zero(mean.size());
        const double n = static_cast<double>(count);
        return (m2.cwiseMax(0.0) / (n - 1.0)).cwiseSqrt() / std::sqrt(n);
    }
};

struct Block {
    RunningMoments cost{1};
    std::vector<RunningMoments> stage;  // [x ; vec(x xᵀ)] per stage
};

/// Per-stage constants of the closed loop along the deterministic mean path.
struct StagePlan {
    Vector mean;          // Ex_k
    Vector control_mean;  // Eu_k = M_k Ex_k
    Vector drift_offset;  // Abar Ex + Bbar Eu
    Vector noise_offset;  // Cbar Ex + Dbar Eu
    double mean_cost;     // (Ex)ᵀQbar(Ex) + (Eu)ᵀRbar(Eu)
};

unsigned resolve_threads(unsigned requested, std::uint64_t blocks) {
    unsigned t = requested == 0 ? std::max(1U, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::uint64_t>(t, std::max<std::uint64_t>(1, blocks)));
}

}  // namespace

std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::rademacher ? "rademacher" : "standard_normal";
}

NoiseKind parse_noise_kind(const std::string& text) {
    if (text == "rademacher") return NoiseKind::rademacher;
    if (text == "standard_normal" || text == "normal" || text == "gaussian") return NoiseKind::standard_normal;
    throw ArgumentError("unknown noise model \"" + text + "\" (expected rademacher or standard_normal)");
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL));
}

std::vector<Vector> mean_path(const ProblemSpec& spec, const FeedbackPolicy& policy, const Vector& initial_mean) {
    policy.check_compatible(spec);
    std::vector<Vector> path{initial_mean};
    for (int k = 0; k < spec.horizon(); ++k) {
        const auto& c = spec.stage(k);
        const Vector& m = path.back();
        path.push_back((c.A + c.Abar) * m + (c.B + c.Bbar) * (policy.M(k) * m));
    }
    return path;
}

SimulationResult simulate(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                          NoiseKind noise, std::uint64_t n_paths, std::uint64_t seed, unsigned threads) {
    if (n_paths == 0) throw ArgumentError("simulate: n_paths must be at least 1");
    policy.check_compatible(spec);
    if (init.dimension() != spec.n()) throw StructuralError("initial: dimension differs from n");

    const int horizon = spec.horizon();
    const Eigen::Index n = spec.n();
    const Eigen::Index feature_dim = n + n * n;

    const auto means = mean_path(spec, policy, init.mean());
    std::vector<StagePlan> plan;
    for (int k = 0; k < horizon; ++k) {
        const auto& c = spec.stage(k);
        const Vector& m = means[static_cast<std::size_t>(k)];
        const Vector um = policy.M(k) * m;
        plan.push_back({m, um, c.Abar * m + c.Bbar * um, c.Cbar * m + c.Dbar * um,
                        m.dot(c.Qbar * m) + um.dot(c.Rbar * um)});
    }
    const Vector& mean_N = means.back();
    const double terminal_mean_cost = mean_N.dot(spec.Gbar() * mean_N);

    const InitialSampler sampler(init);
    const std::uint64_t n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
    std::vector<Block> blocks(n_blocks);

    auto run_block = [&](std::uint64_t b) {
        Block block;
        block.stage.assign(static_cast<std::size_t>(horizon) + 1, RunningMoments(feature_dim));
        Vector x(n), x_next(n), u(spec.m()), feature(feature_dim), noise_term(n);
        const std::uint64_t first = b * kBlockSize;
        const std::uint64_t last = std::min(n_paths, first + kBlockSize);
        for (std::uint64_t path = first; path < last; ++path) {
            Engine engine(stream_seed(seed, path));
            NoiseSource draw(noise);
            std::normal_distribution<double> normal(0.0, 1.0);
            sampler.sample(engine, normal, x);

            auto record = [&](int k) {
                feature.head(n) = x;
                Eigen::Map<Matrix>(feature.data() + n, n, n).noalias() = x * x.transpose();
                block.stage[static_cast<std::size_t>(k)].add(feature);
            };

            long double cost = 0.0L;
            for (int k = 0; k < horizon; ++k) {
                const auto& c = spec.stage(k);
                const auto& p = plan[static_cast<std::size_t>(k)];
                record(k);
                u = p.control_mean;
                u.noalias() += policy.L(k) * (x - p.mean);
                cost += x.dot(c.Q * x) + u.dot(c.R * u) + p.mean_cost;

                const double w = draw(engine);
                noise_term = p.noise_offset;
                noise_term.noalias() += c.C * x;
                noise_term.noalias() += c.D * u;
                x_next = p.drift_offset;
                x_next.noalias() += c.A * x;
                x_next.noalias() += c.B * u;
                x_next += w * noise_term;
                x.swap(x_next);
            }
            record(horizon);
            cost += x.dot(spec.G() * x) + terminal_mean_cost;
            block.cost.add(Vector::Constant(1, static_cast<double>(cost)));
        }
        blocks[b] = std::move(block);
    };

    const unsigned workers = resolve_threads(threads, n_blocks);
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::uint64_t b = next++; b < n_blocks; b = next++) run_block(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Merge in block order so the result is independent of the worker count.
    RunningMoments cost(1);
    std::vector<RunningMoments> stages(static_cast<std::size_t>(horizon) + 1, RunningMoments(feature_dim));
    for (const auto& block : blocks) {
        cost.merge(block.cost);
        for (std::size_t k = 0; k < stages.size(); ++k) stages[k].merge(block.stage[k]);
    }

    SimulationResult out;
    out.cost_mean = cost.mean(0);
    out.cost_stderr = cost.stderr_of_mean()(0);
    out.n_paths = n_paths;
    out.seed = seed;
    out.noise = noise;
    out.deterministic_mean = means;
    for (const auto& s : stages) {
        const Vector se = s.stderr_of_mean();
        out.state_mean.push_back(s.mean.head(n));
        out.state_mean_stderr.push_back(se.head(n));
        out.second_moment.push_back(Eigen::Map<const Matrix>(s.mean.data() + n, n, n));
        out.second_moment_stderr.push_back(Eigen::Map<const Matrix>(se.data() + n, n, n));
    }
    return out;
}

ParticleResult simulate_particles(const ProblemSpec& spec, const FeedbackPolicy& policy, const InitialCondition& init,
                                  NoiseKind noise, std::uint64_t particles, std::uint64_t seed) {
    if (particles == 0) throw ArgumentError("simulate_particles: particle count must be at least 1");
    policy.check_compatible(spec);
    if (init.dimension() != spec.n()) throw StructuralError("initial: dimension differs from n");

    const Eigen::Index n = spec.n();
    const auto count = static_cast<Eigen::Index>(particles);
    const double inv_count = 1.0 / static_cast<double>(particles);

    std::vector<Engine> engines;
    std::vector<NoiseSource> sources(particles, NoiseSource(noise));
    engines.reserve(particles);
    Matrix states(n, count);  // one particle per column
    {
        const InitialSampler sampler(init);
        Vector x(n);
        for (std::uint64_t i = 0; i < particles; ++i) {
            engines.emplace_back(stream_seed(seed, i));
            std::normal_distribution<double> normal(0.0, 1.0);
            sampler.sample(engines.back(), normal, x);
            states.col(static_cast<Eigen::Index>(i)) = x;
        }
    }

    ParticleResult out;
    out.particles = particles;
    out.seed = seed;
    out.deterministic_mean = mean_path(spec, policy, init.mean());

    auto record_mean = [&](int k) {
        const Vector emp = states.rowwise().sum() * inv_count;
        const double dev = (emp - out.deterministic_mean[static_cast<std::size_t>(k)]).norm();
        out.empirical_mean.push_back(emp);
        out.deviation.push_back(dev);
        out.max_deviation = std::max(out.max_deviation, dev);
    };

    Matrix controls(spec.m(), count);
    Matrix next(n, count);
    for (int k = 0; k < spec.horizon(); ++k) {
        const auto& c = spec.stage(k);
        record_mean(k);
        const Vector& xbar = out.empirical_mean.back();

        const Matrix centered = states.colwise() - xbar;
        controls.noalias() = policy.L(k) * centered;
        controls.colwise() += policy.M(k) * xbar;
        const Vector ubar = controls.rowwise().sum() * inv_count;

        const Vector drift_offset = c.Abar * xbar + c.Bbar * ubar;
        const Vector noise_offset = c.Cbar * xbar + c.Dbar * ubar;
        Matrix noise_part = c.C * states + c.D * controls;
        noise_part.colwise() += noise_offset;
        next.noalias() = c.A * states + c.B * controls;
        next.colwise() += drift_offset;
        for (Eigen::Index i = 0; i < count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            next.col(i) += sources[idx](engines[idx]) * noise_part.col(i);
        }
        states.swap(next);
    }
    record_mean(spec.horizon());
    return out;
}

}  // namespace mflq
