#pragma once

#include <cmath>

#include "vqaud/linalg.hpp"
#include "vqaud/rng.hpp"

namespace vqaud::testing {

inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return m;
}

inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index n) { return random_matrix(rng, n, n); }

inline ComplexVector random_vector(Rng& rng, Eigen::Index n) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return v;
}

inline ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n) {
  const ComplexMatrix a = random_matrix(rng, n);
  return 0.5 * (a + a.adjoint());
}

inline ComplexMatrix random_density(Rng& rng, Eigen::Index n) {
  const ComplexMatrix a = random_matrix(rng, n);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

inline ComplexMatrix random_pure(Rng& rng, Eigen::Index n) {
  ComplexVector v = random_vector(rng, n);
  v.normalize();
  return v * v.adjoint();
}

/// Random matrix rescaled to spectral norm `norm`.
inline ComplexMatrix random_contraction(Rng& rng, Eigen::Index n, double norm = 0.95) {
  const ComplexMatrix a = random_matrix(rng, n);
  return a * (norm / spectral_norm(a));
}

inline double max_abs(const ComplexMatrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace vqaud::testing
