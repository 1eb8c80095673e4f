#include "mflq/validation.hpp"

#include "mflq/errors.hpp"

namespace mflq {

namespace {

void check(ValidationReport& report, std::string name, std::optional<int> stage, Requirement req, const Matrix& mat) {
    MatrixCheck c{std::move(name), stage, req, asymmetry(mat), min_eigenvalue(mat), true};
    switch (req) {
        case Requirement::none: break;
        case Requirement::positive_semidefinite:
            c.ok = c.min_eigenvalue >= kPsdTolerance;
            if (!c.ok) report.violations.push_back(c.name + " not PSD");
            break;
        case Requirement::positive_definite:
            c.ok = c.min_eigenvalue >= kPdTolerance;
            if (!c.ok) report.violations.push_back(c.name + " not positive definite");
            break;
    }
    report.satisfied = report.satisfied && c.ok;
    report.checks.push_back(std::move(c));
}

}  // namespace

ValidationReport validate(const ProblemSpec& spec) {
    ValidationReport report;
    for (int k = 0; k < spec.horizon(); ++k) {
        const auto& s = spec.stage(k);
        const auto q = stage_field("Q", k);
        const auto qb = stage_field("Qbar", k);
        const auto r = stage_field("R", k);
        const auto rb = stage_field("Rbar", k);
        check(report, q, k, Requirement::positive_semidefinite, s.Q);
        check(report, qb, k, Requirement::none, s.Qbar);
        check(report, q + "+" + qb, k, Requirement::positive_semidefinite, s.Q + s.Qbar);
        check(report, r, k, Requirement::positive_definite, s.R);
        check(report, rb, k, Requirement::none, s.Rbar);
        check(report, r + "+" + rb, k, Requirement::positive_definite, s.R + s.Rbar);
    }
    check(report, "G_N", std::nullopt, Requirement::positive_semidefinite, spec.G());
    check(report, "Gbar_N", std::nullopt, Requirement::none, spec.Gbar());
    check(report, "G_N+Gbar_N", std::nullopt, Requirement::positive_semidefinite, spec.G() + spec.Gbar());
    return report;
}

void require_standard_condition(const ProblemSpec& spec) {
    const auto report = validate(spec);
    if (report.satisfied) return;
    std::string msg = "standard condition violated: ";
    for (std::size_t i = 0; i < report.violations.size(); ++i) {
        if (i) msg += "; ";
        msg += report.violations[i];
    }
    throw ValidationError(msg);
}

}  // namespace mflq
