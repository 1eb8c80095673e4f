#include "mflq/linalg.hpp"

#include "mflq/errors.hpp"

namespace mflq {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double asymmetry(const Matrix& m) { return max_abs(m - m.transpose()); }

double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

Matrix spd_solve(const Matrix& w, const Matrix& rhs, const std::string& what) {
    Eigen::LLT<Matrix> llt(w);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(what + " is not positive definite (Cholesky factorization failed)");
    }
    return llt.solve(rhs);
}

}  // namespace mflq
