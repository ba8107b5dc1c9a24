#pragma once

#include "robustq/mdp.hpp"

namespace robustq {

// Continuous Lyapunov equation  M X + X M^T + Q = 0.

/// Dense solve of (I (x) M + M (x) I) vec(X) = -vec(Q). O(n^6); meant for
/// n up to a few dozen and as a cross-check of the Schur route.
Matrix solve_lyapunov_kronecker(const Matrix& m, const Matrix& q);

/// Bartels-Stewart on the complex Schur form of M. O(n^3).
Matrix solve_lyapunov_schur(const Matrix& m, const Matrix& q);

/// Kronecker route for n <= kKroneckerMaxDim, Schur route otherwise.
inline constexpr Eigen::Index kKroneckerMaxDim = 32;
Matrix solve_lyapunov(const Matrix& m, const Matrix& q);

double lyapunov_residual(const Matrix& m, const Matrix& q, const Matrix& x);

/// Largest real part over the spectrum.
double max_real_eigenvalue(const Matrix& m);
inline bool is_hurwitz(const Matrix& m) { return max_real_eigenvalue(m) < 0.0; }

}  // namespace robustq
