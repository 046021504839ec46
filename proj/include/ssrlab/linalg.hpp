#pragma once

// Small dense complex kernels shared by the operator, superselection and
// commitment layers. Everything here is desk scale (dims in the tens), so
// plain Eigen dense decompositions are used throughout.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

#include "ssrlab/errors.hpp"
#include "ssrlab/rng.hpp"

namespace ssrlab {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_unitary(const Matrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  Matrix d = m.adjoint() * m - Matrix::Identity(m.rows(), m.cols());
  return max_abs(d) <= tol;
}

// Eigenvalues of a Hermitian matrix, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// (1/2) * trace norm of (a - b) for Hermitian a, b.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  const Eigen::VectorXd ev = hermitian_eigenvalues(a - b);
  return 0.5 * ev.cwiseAbs().sum();
}

// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double state_fidelity(const Matrix& rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Matrix sqrt_rho = es.eigenvectors() *
                    ev.cwiseSqrt().asDiagonal() *
                    es.eigenvectors().adjoint();
  Matrix inner = sqrt_rho * sigma * sqrt_rho;
  Eigen::VectorXd iv = hermitian_eigenvalues(inner).cwiseMax(0.0);
  const double root_sum = iv.cwiseSqrt().sum();
  return root_sum * root_sum;
}

// Sum of singular values (nuclear norm).
inline double nuclear_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

// Unitary maximizing |tr(U m)|, i.e. U = V W^dagger for m = W S V^dagger.
inline Matrix maximizing_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().adjoint();
}

// Extends the orthonormal columns of `basis` (possibly none) to a full
// orthonormal basis of C^dim by Gram-Schmidt over the standard basis in
// index order. Deterministic for reproducible unitary completions.
inline std::vector<Vector> complete_orthonormal_basis(
    std::vector<Vector> basis, int dim) {
  for (int e = 0; e < dim && static_cast<int>(basis.size()) < dim; ++e) {
    Vector v = Vector::Zero(dim);
    v(e) = 1.0;
    for (const Vector& u : basis) v -= u * (u.dot(v));
    const double n = v.norm();
    if (n > 1e-8) basis.push_back(v / n);
  }
  if (static_cast<int>(basis.size()) != dim)
    throw InternalError("orthonormal completion failed");
  return basis;
}

// Haar-distributed random unitary (Ginibre + QR with phase fix).
inline Matrix random_unitary(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = rng.complex_gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    Cplx d = r(c, c);
    const double a = std::abs(d);
    q.col(c) *= (a > 1e-300 ? d / a : Cplx(1.0, 0.0));
  }
  return q;
}

}  // namespace ssrlab
