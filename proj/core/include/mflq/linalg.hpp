#pragma once

#include <Eigen/Dense>

#include <string>

namespace mflq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Max-abs entry (the entrywise infinity norm used for all tolerances here).
double max_abs(const Matrix& m);

/// ‖M − Mᵀ‖ in max-abs entry.
double asymmetry(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of a square matrix.
double min_eigenvalue(const Matrix& m);

/// Solves W·X = rhs for symmetric positive definite W with a Cholesky factorization.
/// Throws NumericalError carrying `what` when W is not numerically positive definite.
Matrix spd_solve(const Matrix& w, const Matrix& rhs, const std::string& what);

}  // namespace mflq
