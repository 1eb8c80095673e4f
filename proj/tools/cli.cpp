#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mflq/errors.hpp"
#include "mflq/example_instance.hpp"
#include "mflq/export.hpp"
#include "mflq/moments.hpp"
#include "mflq/oracle.hpp"
#include "mflq/problem_io.hpp"
#include "mflq/riccati.hpp"
#include "mflq/validation.hpp"

namespace mflq::cli {

namespace {

constexpr double kVerifyTolerance = 1e-6;

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
}

Vector parse_vector(const std::string& text) {
    const auto parts = split_commas(text);
    if (parts.empty()) throw CLI::ValidationError("--zeta", "expected comma-separated numbers");
    Vector v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        try {
            std::size_t used = 0;
            v(static_cast<Eigen::Index>(i)) = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--zeta", "not a number: '" + parts[i] + "'");
        }
    }
    return v;
}

std::vector<std::uint64_t> parse_counts(const std::string& text) {
    std::vector<std::uint64_t> counts;
    for (const auto& part : split_commas(text)) {
        std::size_t used = 0;
        unsigned long long value = 0;
        try {
            value = std::stoull(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != part.size() || part.empty() || value == 0) {
            throw CLI::ValidationError("--particles", "expected positive integers, got '" + part + "'");
        }
        counts.push_back(value);
    }
    if (counts.empty()) throw CLI::ValidationError("--particles", "expected at least one count");
    return counts;
}

std::string read_all(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

LoadedProblem load_input(const CommandConfig& config, std::istream& in, std::ostream& err) {
    std::string text;
    if (config.input == "-") {
        text = read_all(in);
    } else {
        std::ifstream file(config.input);
        if (!file) throw ParseError(config.input + ": cannot open file");
        text = read_all(file);
    }
    auto loaded = load_problem(text);
    for (const auto& note : loaded.spec.symmetrization_notes()) {
        err << "warning: " << note.field << " was asymmetric by " << note.asymmetry << "; symmetrized\n";
    }
    if (config.zeta) {
        if (config.zeta->size() != loaded.spec.n()) {
            throw ArgumentError("--zeta has " + std::to_string(config.zeta->size()) + " entries, problem has n=" +
                                std::to_string(loaded.spec.n()));
        }
        loaded.initial = InitialCondition::deterministic(*config.zeta);
    }
    return loaded;
}

std::string validation_csv(const ValidationReport& report) {
    std::string out = "matrix,stage,min_eigenvalue,asymmetry,ok\n";
    for (const auto& c : report.checks) {
        std::ostringstream row;
        row.precision(10);
        row << c.name << "," << (c.stage ? std::to_string(*c.stage) : std::string("N")) << "," << c.min_eigenvalue
            << "," << c.asymmetry << "," << (c.ok ? 1 : 0) << "\n";
        out += row.str();
    }
    return out;
}

std::string verification_csv(const VerificationReport& r) {
    std::ostringstream os;
    os.precision(12);
    os << "cost_riccati,cost_oracle,abs_diff,rel_diff,theta1_min_eig,per_node_gain_residual_max\n"
       << r.cost_riccati << "," << r.cost_oracle << "," << r.abs_diff << "," << r.rel_diff << "," << r.theta1_min_eig
       << "," << r.per_node_gain_residual_max << "\n";
    return os.str();
}

struct Emitted {
    std::string document;
    int status = kExitOk;
};

Emitted execute(const CommandConfig& config, std::istream& in, std::ostream& err) {
    if (config.command == Subcommand::example) {
        return {example_document(config.as_printed ? ExampleVariant::as_printed : ExampleVariant::reference)};
    }

    const auto problem = load_input(config, in, err);
    const auto& spec = problem.spec;

    switch (config.command) {
        case Subcommand::validate: {
            const auto report = validate(spec);
            const int status = report.satisfied ? kExitOk : kExitValidation;
            if (!report.satisfied) {
                for (const auto& v : report.violations) err << "error: " << v << "\n";
            }
            switch (config.format) {
                case Format::json: return {to_json(report), status};
                case Format::csv: return {validation_csv(report), status};
                case Format::table: return {to_text(report), status};
            }
            break;
        }
        case Subcommand::solve: {
            const auto sol = solve_riccati(spec);
            std::optional<PrincipleExport> principle;
            if (config.principle) {
                auto p = solve_principle(spec);
                const auto residuals = compare(p, sol);
                principle = PrincipleExport{std::move(p), residuals};
            }
            std::optional<TraceExport> trace;
            if (config.trace) {
                const auto policy = optimal_policy(sol);
                auto traj = propagate(spec, policy, problem.initial);
                auto cost = cost_breakdown(spec, policy, traj);
                trace = TraceExport{std::move(traj), std::move(cost), optimal_value(sol, problem.initial)};
            }
            switch (config.format) {
                case Format::json: return {to_json(sol, principle, trace)};
                case Format::csv: return {trace ? trace_csv(*trace) : gains_csv(sol)};
                case Format::table: return {to_text(sol, principle, trace)};
            }
            break;
        }
        case Subcommand::simulate: {
            const auto policy = optimal_policy(solve_riccati(spec));
            const auto result = simulate(spec, policy, problem.initial,
                                         config.noise.value_or(NoiseKind::standard_normal), config.paths, config.seed,
                                         config.threads);
            switch (config.format) {
                case Format::json: return {to_json(result)};
                case Format::csv: return {simulation_csv(result)};
                case Format::table: return {to_text(result)};
            }
            break;
        }
        case Subcommand::verify: {
            const auto report = verify(spec, problem.initial);
            const int status = report.rel_diff <= kVerifyTolerance ? kExitOk : kExitNumerical;
            if (status != kExitOk) err << "error: oracle and Riccati optimal costs disagree (rel_diff " << report.rel_diff << ")\n";
            return {config.format == Format::json ? to_json(report) : verification_csv(report), status};
        }
        case Subcommand::particles: {
            const auto policy = optimal_policy(solve_riccati(spec));
            const auto sweep = particle_sweep(spec, policy, problem.initial,
                                              config.noise.value_or(NoiseKind::standard_normal), config.particles,
                                              config.replications, config.seed);
            return {config.format == Format::json ? to_json(sweep) : particles_csv(sweep)};
        }
        case Subcommand::example: break;
    }
    return {};
}

}  // namespace

ParseOutcome parse_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mean-field stochastic LQ solver: Riccati gains, exact moment costs, Monte Carlo and tree oracle"};
    app.require_subcommand(1);

    CommandConfig config;
    std::string format = "json";
    std::string zeta;
    std::string particles = "1000";
    std::string noise;

    auto common = [&](CLI::App* sub, bool needs_input) {
        if (needs_input) sub->add_option("-i,--input", config.input, "Problem document (\"-\" for stdin)");
        sub->add_option("-o,--output", config.output, "Output path (\"-\" for stdout)");
        sub->add_option("-f,--format", format, "Output format")
            ->check(CLI::IsMember({"json", "csv", "table"}));
    };
    auto with_zeta = [&](CLI::App* sub) {
        sub->add_option("--zeta", zeta, "Deterministic initial state override, e.g. 1,1,1");
    };
    auto with_rng = [&](CLI::App* sub) {
        sub->add_option("--seed", config.seed, "Master seed");
        sub->add_option("--noise", noise, "Noise model")->check(CLI::IsMember({"rademacher", "standard_normal"}));
        sub->add_option("--threads", config.threads, "Worker threads (0 = all cores)");
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check the standard condition");
    common(validate_cmd, true);

    auto* solve_cmd = app.add_subcommand("solve", "Solve the coupled Riccati recursion");
    common(solve_cmd, true);
    with_zeta(solve_cmd);
    solve_cmd->add_flag("--principle", config.principle, "Also run the P/Pbar recursion and report equivalence");
    solve_cmd->add_flag("--trace", config.trace, "Also emit the optimal-policy moment trajectory and cost");

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo of the optimal closed loop");
    common(simulate_cmd, true);
    with_zeta(simulate_cmd);
    with_rng(simulate_cmd);
    simulate_cmd->add_option("--paths", config.paths, "Number of sample paths")->check(CLI::PositiveNumber);

    auto* verify_cmd = app.add_subcommand("verify", "Certify the Riccati optimum against the scenario-tree oracle");
    common(verify_cmd, true);
    with_zeta(verify_cmd);

    auto* particles_cmd = app.add_subcommand("particles", "Interacting-particle approximation of the mean field");
    common(particles_cmd, true);
    with_zeta(particles_cmd);
    with_rng(particles_cmd);
    particles_cmd->add_option("--particles", particles, "Particle counts, comma separated");
    particles_cmd->add_option("--replications", config.replications, "Replications per count")
        ->check(CLI::PositiveNumber);

    auto* example_cmd = app.add_subcommand("example", "Write the built-in four-stage problem document");
    common(example_cmd, false);
    example_cmd->add_flag("--as-printed", config.as_printed,
                          "Use Gbar_N = diag(0.5,1,0) instead of the reference terminal weights");

    try {
        app.parse(argc, argv);
        if (!zeta.empty()) config.zeta = parse_vector(zeta);
        config.particles = parse_counts(particles);
        if (!noise.empty()) config.noise = parse_noise_kind(noise);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return {std::nullopt, code == 0 ? kExitOk : kExitInput};
    }

    config.format = format == "csv" ? Format::csv : format == "table" ? Format::table : Format::json;
    if (validate_cmd->parsed()) config.command = Subcommand::validate;
    if (solve_cmd->parsed()) config.command = Subcommand::solve;
    if (simulate_cmd->parsed()) config.command = Subcommand::simulate;
    if (verify_cmd->parsed()) config.command = Subcommand::verify;
    if (particles_cmd->parsed()) config.command = Subcommand::particles;
    if (example_cmd->parsed()) config.command = Subcommand::example;
    return {config, kExitOk};
}

int run(const CommandConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    Emitted emitted;
    try {
        emitted = execute(config, in, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    if (config.output == "-") {
        out << emitted.document;
    } else {
        std::ofstream file(config.output);
        if (!file || !(file << emitted.document)) {
            err << "error: cannot write " << config.output << "\n";
            return kExitInput;
        }
    }
    return emitted.status;
}

}  // namespace mflq::cli
