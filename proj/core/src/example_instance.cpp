#include "mflq/example_instance.hpp"

namespace mflq {

namespace {

constexpr const char* kCoefficients = R"({
  "description": "four-stage mean-field LQ benchmark, n=3, m=2",
  "n": 3,
  "m": 2,
  "N": 4,
  "A":    [[0.2, 0.4, 0.2], [0.0, 0.2, 0.6], [0.6, 0.4, 0.2]],
  "Abar": [[0.3, 0.4, 0.2], [0.0, 0.2, 0.7], [0.6, 0.5, 0.2]],
  "B":    [[0.4, 0.2], [0.2, 0.4], [0.3, 0.3]],
  "Bbar": [[0.5, 0.2], [0.2, 0.5], [0.2, 0.3]],
  "C":    [[0.2, 0.4, 0.6], [0.4, 0.2, 0.6], [0.2, 0.4, 0.2]],
  "Cbar": [[0.3, 0.4, 0.6], [0.4, 0.3, 0.6], [0.2, 0.4, 0.3]],
  "D":    [[0.2, 0.6], [0.6, 0.4], [0.3, 0.1]],
  "Dbar": [[0.3, 0.5], [0.5, 0.4], [0.3, 0.3]],
  "Q":    [[0.0, 0.0, 0.0], [0.0, 1.5, 0.0], [0.0, 0.0, 1.0]],
  "Qbar": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
  "R":    [[1.0, 0.0], [0.0, 1.0]],
  "Rbar": [[1.5, 0.0], [0.0, 1.0]],
  "G_N":  [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
)";

constexpr const char* kReferenceTerminal = R"(  "Gbar_N": [[0.5, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]],
)";

constexpr const char* kPrintedTerminal = R"(  "Gbar_N": [[0.5, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
)";

constexpr const char* kInitial = R"(  "initial": {"kind": "deterministic", "zeta": [1.0, 1.0, 1.0]}
}
)";

}  // namespace

std::string example_document(ExampleVariant variant) {
    std::string doc = kCoefficients;
    doc += variant == ExampleVariant::reference ? kReferenceTerminal : kPrintedTerminal;
    doc += kInitial;
    return doc;
}

LoadedProblem example_problem(ExampleVariant variant) { return load_problem(example_document(variant)); }

}  // namespace mflq
