#include "robustq/lyapunov.hpp"

#include "robustq/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <limits>

namespace robustq {

namespace {

using Index = Eigen::Index;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

void check_square(const Matrix& m, const Matrix& q) {
  if (m.rows() != m.cols() || q.rows() != m.rows() || q.cols() != m.cols())
    throw Error(Errc::ShapeMismatch, "Lyapunov operands must be square and of equal size");
}

}  // namespace

Matrix solve_lyapunov_kronecker(const Matrix& m, const Matrix& q) {
  check_square(m, q);
  const Index n = m.rows();
  Matrix k = Matrix::Zero(n * n, n * n);
  // Column-major vec: vec(M X) = (I (x) M) vec X, vec(X M^T) = (M (x) I) vec X.
  for (Index j = 0; j < n; ++j) k.block(j * n, j * n, n, n) += m;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) k.block(i * n, j * n, n, n).diagonal().array() += m(i, j);

  Eigen::FullPivLU<Matrix> lu(k);
  if (!lu.isInvertible()) throw Error(Errc::SingularSystem, "Kronecker Lyapunov operator is singular");
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
  const Vector x = lu.solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

Matrix solve_lyapunov_schur(const Matrix& m, const Matrix& q) {
  check_square(m, q);
  const Index n = m.rows();
  Eigen::ComplexSchur<Matrix> schur(m);
  if (schur.info() != Eigen::Success) throw Error(Errc::SingularSystem, "Schur decomposition failed");
  const CMatrix& u = schur.matrixU();
  const CMatrix& t = schur.matrixT();

  // T Y + Y T^H = C with C = -U^H Q U, solved column by column from the right.
  const CMatrix c = -(u.adjoint() * q.cast<std::complex<double>>() * u);
  CMatrix y = CMatrix::Zero(n, n);
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  for (Index j = n - 1; j >= 0; --j) {
    CVector rhs = c.col(j);
    for (Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
    CMatrix shifted = t;
    shifted.diagonal().array() += std::conj(t(j, j));
    if (shifted.diagonal().cwiseAbs().minCoeff() <= 1e-14 * scale)
      throw Error(Errc::SingularSystem, "Lyapunov operator is singular (eigenvalues sum to zero)");
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (u * y * u.adjoint()).real();
}

Matrix solve_lyapunov(const Matrix& m, const Matrix& q) {
  return m.rows() <= kKroneckerMaxDim ? solve_lyapunov_kronecker(m, q) : solve_lyapunov_schur(m, q);
}

double lyapunov_residual(const Matrix& m, const Matrix& q, const Matrix& x) {
  return (m * x + x * m.transpose() + q).cwiseAbs().maxCoeff();
}

double max_real_eigenvalue(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace robustq
