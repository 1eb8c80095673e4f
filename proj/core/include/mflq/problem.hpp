#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mflq/linalg.hpp"

namespace mflq {

/// Coefficients of one stage k of
///   x_{k+1} = (A x + Abar Ex + B u + Bbar Eu) + (C x + Cbar Ex + D u + Dbar Eu) w_k
/// and of the stage cost  xᵀQx + (Ex)ᵀQbar(Ex) + uᵀRu + (Eu)ᵀRbar(Eu).
struct StageCoefficients {
    Matrix A, Abar, C, Cbar;  // n×n
    Matrix B, Bbar, D, Dbar;  // n×m
    Matrix Q, Qbar;           // n×n, symmetric
    Matrix R, Rbar;           // m×m, symmetric

    friend bool operator==(const StageCoefficients&, const StageCoefficients&) = default;
};

/// Asymmetry removed from a weight matrix when it was symmetrized on construction.
struct SymmetrizationNote {
    std::string field;
    double asymmetry;
};

/// A finite-horizon mean-field LQ problem. Immutable once constructed.
///
/// Construction checks every shape against (n, m, N) and replaces each weight
/// matrix M by (M + Mᵀ)/2. Asymmetries above 1e-9 are kept as notes so callers
/// can surface a warning.
class ProblemSpec {
public:
    ProblemSpec(int n, int m, std::vector<StageCoefficients> stages, Matrix G, Matrix Gbar);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(stages_.size()); }

    [[nodiscard]] const StageCoefficients& stage(int k) const { return stages_.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] const std::vector<StageCoefficients>& stages() const noexcept { return stages_; }
    [[nodiscard]] const Matrix& G() const noexcept { return G_; }
    [[nodiscard]] const Matrix& Gbar() const noexcept { return Gbar_; }

    [[nodiscard]] const std::vector<SymmetrizationNote>& symmetrization_notes() const noexcept { return notes_; }

    /// Same instance with every barred coefficient and weight set to zero.
    [[nodiscard]] ProblemSpec without_mean_field() const;

    friend bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
        return a.n_ == b.n_ && a.m_ == b.m_ && a.stages_ == b.stages_ && a.G_ == b.G_ && a.Gbar_ == b.Gbar_;
    }

private:
    int n_;
    int m_;
    std::vector<StageCoefficients> stages_;
    Matrix G_, Gbar_;
    std::vector<SymmetrizationNote> notes_;
};

/// Distribution of the initial state ζ. Only its first two moments enter the
/// optimal cost; the oracle additionally needs finite support.
class InitialCondition {
public:
    enum class Kind { deterministic, gaussian, finite_support };

    struct Atom {
        Vector point;
        double probability;
    };

    static InitialCondition deterministic(Vector zeta);
    static InitialCondition gaussian(Vector mean, Matrix covariance);
    static InitialCondition finite_support(std::vector<Atom> atoms);

    [[nodiscard]] Kind kind() const noexcept;
    [[nodiscard]] int dimension() const noexcept;

    /// Eζ
    [[nodiscard]] Vector mean() const;
    /// E[ζζᵀ]
    [[nodiscard]] Matrix second_moment() const;
    /// E[ζζᵀ] − Eζ(Eζ)ᵀ
    [[nodiscard]] Matrix covariance() const;

    /// Atoms of a finitely supported ζ (a deterministic ζ is one atom of mass 1).
    /// Throws ArgumentError for the gaussian kind.
    [[nodiscard]] std::vector<Atom> support() const;

    /// Raw parameters of the gaussian kind; throws ArgumentError otherwise.
    [[nodiscard]] const Vector& gaussian_mean() const;
    [[nodiscard]] const Matrix& gaussian_covariance() const;

private:
    struct Gaussian {
        Vector mean;
        Matrix covariance;
    };
    using Data = std::variant<Vector, Gaussian, std::vector<Atom>>;

    explicit InitialCondition(Data data) : data_(std::move(data)) {}

    Data data_;
};

/// Linear feedback u_k = M_k Ex_k + L_k (x_k − Ex_k).
class FeedbackPolicy {
public:
    FeedbackPolicy(std::vector<Matrix> L, std::vector<Matrix> M);

    static FeedbackPolicy zero(int n, int m, int horizon);

    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(L_.size()); }
    [[nodiscard]] const Matrix& L(int k) const { return L_.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] const Matrix& M(int k) const { return M_.at(static_cast<std::size_t>(k)); }
    /// Gain on Ex_k when the control is written u = L x + Lbar Ex, i.e. M_k − L_k.
    [[nodiscard]] Matrix Lbar(int k) const { return M(k) - L(k); }

    /// Throws StructuralError unless the gains are m×n and there are N of them.
    void check_compatible(const ProblemSpec& spec) const;

private:
    std::vector<Matrix> L_;
    std::vector<Matrix> M_;
};

/// Name of a stage-indexed field as used in messages, e.g. "R_0" or "Qbar_3".
std::string stage_field(const std::string& base, int k);

}  // namespace mflq
