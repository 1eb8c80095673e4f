#include "mflq/problem.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mflq/errors.hpp"

namespace mflq {

namespace {

constexpr double kSymmetryWarnThreshold = 1e-9;
constexpr double kProbabilityTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-10;

void require_shape(const Matrix& mat, Eigen::Index rows, Eigen::Index cols, const std::string& field) {
    if (mat.rows() != rows || mat.cols() != cols) {
        std::ostringstream os;
        os << field << ": expected " << rows << "x" << cols << ", got " << mat.rows() << "x" << mat.cols();
        throw StructuralError(os.str());
    }
    if (!mat.allFinite()) throw StructuralError(field + ": non-finite entry");
}

void symmetrize_into(Matrix& mat, const std::string& field, std::vector<SymmetrizationNote>& notes) {
    const double asym = asymmetry(mat);
    if (asym > kSymmetryWarnThreshold) notes.push_back({field, asym});
    mat = symmetrized(mat);
}

}  // namespace

std::string stage_field(const std::string& base, int k) { return base + "_" + std::to_string(k); }

ProblemSpec::ProblemSpec(int n, int m, std::vector<StageCoefficients> stages, Matrix G, Matrix Gbar)
    : n_(n), m_(m), stages_(std::move(stages)), G_(std::move(G)), Gbar_(std::move(Gbar)) {
    if (n_ <= 0) throw StructuralError("n: state dimension must be positive");
    if (m_ <= 0) throw StructuralError("m: control dimension must be positive");
    if (stages_.empty()) throw StructuralError("N: horizon must be positive");

    for (int k = 0; k < horizon(); ++k) {
        auto& s = stages_[static_cast<std::size_t>(k)];
        require_shape(s.A, n_, n_, stage_field("A", k));
        require_shape(s.Abar, n_, n_, stage_field("Abar", k));
        require_shape(s.C, n_, n_, stage_field("C", k));
        require_shape(s.Cbar, n_, n_, stage_field("Cbar", k));
        require_shape(s.B, n_, m_, stage_field("B", k));
        require_shape(s.Bbar, n_, m_, stage_field("Bbar", k));
        require_shape(s.D, n_, m_, stage_field("D", k));
        require_shape(s.Dbar, n_, m_, stage_field("Dbar", k));
        require_shape(s.Q, n_, n_, stage_field("Q", k));
        require_shape(s.Qbar, n_, n_, stage_field("Qbar", k));
        require_shape(s.R, m_, m_, stage_field("R", k));
        require_shape(s.Rbar, m_, m_, stage_field("Rbar", k));
        symmetrize_into(s.Q, stage_field("Q", k), notes_);
        symmetrize_into(s.Qbar, stage_field("Qbar", k), notes_);
        symmetrize_into(s.R, stage_field("R", k), notes_);
        symmetrize_into(s.Rbar, stage_field("Rbar", k), notes_);
    }
    require_shape(G_, n_, n_, "G_N");
    require_shape(Gbar_, n_, n_, "Gbar_N");
    symmetrize_into(G_, "G_N", notes_);
    symmetrize_into(Gbar_, "Gbar_N", notes_);
}

ProblemSpec ProblemSpec::without_mean_field() const {
    auto stages = stages_;
    for (auto& s : stages) {
        s.Abar.setZero();
        s.Bbar.setZero();
        s.Cbar.setZero();
        s.Dbar.setZero();
        s.Qbar.setZero();
        s.Rbar.setZero();
    }
    return ProblemSpec(n_, m_, std::move(stages), G_, Matrix::Zero(n_, n_));
}

// ── InitialCondition ────────────────────────────────────────────────────────

InitialCondition InitialCondition::deterministic(Vector zeta) {
    if (zeta.size() == 0) throw ArgumentError("initial: empty zeta");
    if (!zeta.allFinite()) throw ArgumentError("initial: non-finite zeta");
    return InitialCondition(Data{std::move(zeta)});
}

InitialCondition InitialCondition::gaussian(Vector mean, Matrix covariance) {
    if (mean.size() == 0) throw ArgumentError("initial: empty mean");
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
        throw ArgumentError("initial: covariance must be " + std::to_string(mean.size()) + "x" +
                            std::to_string(mean.size()));
    }
    covariance = symmetrized(covariance);
    if (min_eigenvalue(covariance) < -kPsdTolerance) throw ArgumentError("initial: covariance not PSD");
    return InitialCondition(Data{Gaussian{std::move(mean), std::move(covariance)}});
}

InitialCondition InitialCondition::finite_support(std::vector<Atom> atoms) {
    if (atoms.empty()) throw ArgumentError("initial: finite_support needs at least one atom");
    const auto dim = atoms.front().point.size();
    if (dim == 0) throw ArgumentError("initial: empty atom");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].point.size() != dim) {
            throw ArgumentError("initial: atom " + std::to_string(i) + " has inconsistent dimension");
        }
        if (!(atoms[i].probability >= 0.0)) {
            throw ArgumentError("initial: atom " + std::to_string(i) + " has negative probability");
        }
        total += atoms[i].probability;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "initial: probabilities sum to " << total << ", not 1";
        throw ArgumentError(os.str());
    }
    return InitialCondition(Data{std::move(atoms)});
}

InitialCondition::Kind InitialCondition::kind() const noexcept {
    return static_cast<Kind>(data_.index());
}

int InitialCondition::dimension() const noexcept {
    return static_cast<int>(mean().size());
}

Vector InitialCondition::mean() const {
    switch (kind()) {
        case Kind::deterministic: return std::get<Vector>(data_);
        case Kind::gaussian: return std::get<Gaussian>(data_).mean;
        case Kind::finite_support: {
            const auto& atoms = std::get<std::vector<Atom>>(data_);
            Vector mu = Vector::Zero(atoms.front().point.size());
            for (const auto& a : atoms) mu += a.probability * a.point;
            return mu;
        }
    }
    return {};
}

Matrix InitialCondition::second_moment() const {
    switch (kind()) {
        case Kind::deterministic: {
            const auto& z = std::get<Vector>(data_);
            return z * z.transpose();
        }
        case Kind::gaussian: {
            const auto& g = std::get<Gaussian>(data_);
            return g.covariance + g.mean * g.mean.transpose();
        }
        case Kind::finite_support: {
            const auto& atoms = std::get<std::vector<Atom>>(data_);
            const auto dim = atoms.front().point.size();
            Matrix s = Matrix::Zero(dim, dim);
            for (const auto& a : atoms) s += a.probability * a.point * a.point.transpose();
            return s;
        }
    }
    return {};
}

Matrix InitialCondition::covariance() const {
    switch (kind()) {
        case Kind::deterministic: {
            const auto dim = std::get<Vector>(data_).size();
            return Matrix::Zero(dim, dim);
        }
        case Kind::gaussian: return std::get<Gaussian>(data_).covariance;
        case Kind::finite_support: {
            // Centered sum keeps the result PSD up to rounding.
            const auto& atoms = std::get<std::vector<Atom>>(data_);
            const Vector mu = mean();
            Matrix c = Matrix::Zero(mu.size(), mu.size());
            for (const auto& a : atoms) {
                const Vector d = a.point - mu;
                c += a.probability * d * d.transpose();
            }
            return c;
        }
    }
    return {};
}

std::vector<InitialCondition::Atom> InitialCondition::support() const {
    switch (kind()) {
        case Kind::deterministic: return {Atom{std::get<Vector>(data_), 1.0}};
        case Kind::finite_support: return std::get<std::vector<Atom>>(data_);
        case Kind::gaussian: break;
    }
    throw ArgumentError("initial: gaussian initial condition has infinite support");
}

const Vector& InitialCondition::gaussian_mean() const {
    if (kind() != Kind::gaussian) throw ArgumentError("initial: not gaussian");
    return std::get<Gaussian>(data_).mean;
}

const Matrix& InitialCondition::gaussian_covariance() const {
    if (kind() != Kind::gaussian) throw ArgumentError("initial: not gaussian");
    return std::get<Gaussian>(data_).covariance;
}

// ── FeedbackPolicy ──────────────────────────────────────────────────────────

FeedbackPolicy::FeedbackPolicy(std::vector<Matrix> L, std::vector<Matrix> M) : L_(std::move(L)), M_(std::move(M)) {
    if (L_.size() != M_.size()) throw StructuralError("policy: L and M sequences differ in length");
    if (L_.empty()) throw StructuralError("policy: empty gain sequence");
    for (std::size_t k = 0; k < L_.size(); ++k) {
        if (L_[k].rows() != L_.front().rows() || L_[k].cols() != L_.front().cols() ||
            M_[k].rows() != L_.front().rows() || M_[k].cols() != L_.front().cols()) {
            throw StructuralError("policy: inconsistent gain shape at stage " + std::to_string(k));
        }
    }
}

FeedbackPolicy FeedbackPolicy::zero(int n, int m, int horizon) {
    std::vector<Matrix> gains(static_cast<std::size_t>(horizon), Matrix::Zero(m, n));
    return FeedbackPolicy(gains, gains);
}

void FeedbackPolicy::check_compatible(const ProblemSpec& spec) const {
    if (horizon() != spec.horizon()) {
        throw StructuralError("policy: has " + std::to_string(horizon()) + " stages, problem has N=" +
                              std::to_string(spec.horizon()));
    }
    for (int k = 0; k < horizon(); ++k) {
        if (L(k).rows() != spec.m() || L(k).cols() != spec.n()) {
            throw StructuralError(stage_field("L", k) + ": expected " + std::to_string(spec.m()) + "x" +
                                  std::to_string(spec.n()));
        }
    }
}

}  // namespace mflq
