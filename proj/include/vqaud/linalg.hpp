#pragma once

// Dense complex linear algebra kernel.
//
// Every operator in the library (Hamiltonians, superoperators, circuit
// unitaries, density matrices) is carried by ComplexMatrix. Dimensions stay
// small (<= 64 in practice), so everything is dense.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace vqaud {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr cplx kI{0.0, 1.0};

class LinalgError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

inline bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const cplx z = a.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw LinalgError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + ", expected square");
  }
}

/// Kronecker product. Entry (i*b.rows()+k, j*b.cols()+l) is a(i,j)*b(k,l).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  constexpr auto kMax = std::numeric_limits<Eigen::Index>::max();
  if ((b.rows() != 0 && a.rows() > kMax / b.rows()) ||
      (b.cols() != 0 && a.cols() > kMax / b.cols())) {
    throw LinalgError("kron: dimension overflow");
  }
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

struct SvdResult {
  ComplexMatrix u;
  RealVector sigma;  // descending
  ComplexMatrix v;
};

/// Full SVD a = u * diag(sigma) * v^dagger with square unitary factors.
inline SvdResult svd(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  if (!all_finite(out.u) || !all_finite(out.v) || !out.sigma.allFinite()) {
    throw LinalgError("svd: decomposition did not converge to finite factors");
  }
  return out;
}

inline RealVector singular_values(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> solver(a);
  return solver.singularValues();
}

/// Matrix exponential by scaling and squaring with a Pade core.
inline ComplexMatrix expm(const ComplexMatrix& a) {
  require_square(a, "expm");
  if (a.rows() == 0) return a;
  ComplexMatrix out = a.exp();
  if (!all_finite(out)) throw LinalgError("expm: non-finite result");
  return out;
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

inline double spectral_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

inline bool is_unitary(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a.adjoint() * a - identity(a.rows())).norm() <= tol;
}

inline bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).norm() <= tol;
}

/// Smallest eigenvalue of the Hermitian part of a.
inline double min_hermitian_eigenvalue(const ComplexMatrix& a) {
  require_square(a, "min_hermitian_eigenvalue");
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline unsigned log2_exact(std::size_t n) {
  unsigned k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

}  // namespace vqaud
