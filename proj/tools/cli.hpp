#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mflq/linalg.hpp"
#include "mflq/simulator.hpp"

namespace mflq::cli {

enum class Subcommand { validate, solve, simulate, verify, particles, example };
enum class Format { json, csv, table };

struct CommandConfig {
    Subcommand command = Subcommand::example;
    std::string input = "-";   // "-" reads standard input
    std::string output = "-";  // "-" writes standard output
    Format format = Format::json;
    std::uint64_t seed = 0;
    std::uint64_t paths = 10'000;
    std::vector<std::uint64_t> particles{1'000};
    int replications = 1;
    std::optional<Vector> zeta;
    std::optional<NoiseKind> noise;
    bool principle = false;
    bool trace = false;
    bool as_printed = false;
    unsigned threads = 0;
};

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitInput = 3;

struct ParseOutcome {
    std::optional<CommandConfig> config;  // empty when the process should exit
    int exit_code = kExitOk;
};

/// Parses argv; on --help or a usage error prints to `out`/`err` and returns no config.
ParseOutcome parse_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Executes one subcommand. Documents go to config.output (or `out`), diagnostics to `err`.
int run(const CommandConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mflq::cli
