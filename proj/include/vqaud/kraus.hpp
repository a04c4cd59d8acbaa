#pragma once

// Operator-sum evolution rho -> sum_k M_k rho M_k^dagger realized through
// dilations: rho is split into a pure-state ensemble, each M_k is dilated at
// alpha = 1, every (k, i) pair is one circuit run, and rho(t) is reassembled
// classically.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vqaud/circuit.hpp"
#include "vqaud/dilation.hpp"
#include "vqaud/linalg.hpp"

namespace vqaud {

struct EnsembleMember {
  double prob = 0.0;
  ComplexVector state;
};

inline constexpr double kEnsembleDropTol = 1e-12;

/// Spectral ensemble of a density matrix; eigenvalues below 1e-12 are dropped.
inline std::vector<EnsembleMember> ensemble_decompose(const ComplexMatrix& rho) {
  require_square(rho, "ensemble_decompose");
  if (!is_hermitian(rho, 1e-10)) throw std::invalid_argument("ensemble_decompose: rho is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-10) throw std::invalid_argument("ensemble_decompose: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
  std::vector<EnsembleMember> out;
  for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) {
    const double p = es.eigenvalues()(k);
    if (p < -1e-10) throw std::invalid_argument("ensemble_decompose: rho is not positive semidefinite");
    if (p > kEnsembleDropTol) out.push_back({p, es.eigenvectors().col(k)});
  }
  return out;
}

inline ComplexMatrix ensemble_density(std::span<const EnsembleMember> ens) {
  if (ens.empty()) throw std::invalid_argument("ensemble_density: empty ensemble");
  const Eigen::Index n = ens.front().state.size();
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  for (const auto& m : ens) rho += m.prob * m.state * m.state.adjoint();
  return rho;
}

/// ||sum_k M_k^dagger M_k - I||_F <= tol.
inline bool kraus_completeness_check(std::span<const ComplexMatrix> ops, double tol = 1e-10) {
  if (ops.empty()) return false;
  const Eigen::Index n = ops.front().cols();
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  for (const auto& m : ops) {
    if (m.rows() != ops.front().rows() || m.cols() != n) throw std::invalid_argument("kraus: operators differ in shape");
    acc += m.adjoint() * m;
  }
  return (acc - identity(n)).norm() <= tol;
}

/// M0 = diag(1, sqrt(e^{-gamma t^2})), M1 = sqrt(1 - e^{-gamma t^2}) |0><1|.
inline std::vector<ComplexMatrix> amplitude_damping_kraus(double gamma, double t) {
  if (!(gamma >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("amplitude_damping_kraus: gamma and t must be >= 0");
  const double decay = std::exp(-gamma * t * t);
  ComplexMatrix m0 = ComplexMatrix::Zero(2, 2), m1 = ComplexMatrix::Zero(2, 2);
  m0(0, 0) = 1.0;
  m0(1, 1) = std::sqrt(decay);
  m1(0, 1) = std::sqrt(1.0 - decay);
  return {m0, m1};
}

/// sum_k M_k rho M_k^dagger, evaluated directly.
inline ComplexMatrix apply_kraus(std::span<const ComplexMatrix> ops, const ComplexMatrix& rho) {
  if (ops.empty()) throw std::invalid_argument("apply_kraus: no operators");
  ComplexMatrix out = ComplexMatrix::Zero(ops.front().rows(), ops.front().rows());
  for (const auto& m : ops) out += m * rho * m.adjoint();
  return out;
}

using Dilator = std::function<DilationResult(const ComplexMatrix&)>;

inline Dilator sz_nagy_dilator() {
  return [](const ComplexMatrix& m) { return sz_nagy_dilate(m, 1.0); };
}

/// Variational dilation of each operator at alpha = 1 on the given ansatz.
inline Dilator vqaud_dilator(ParamCircuit ansatz, VqaudOptions opts) {
  return [ansatz = std::move(ansatz), opts = std::move(opts)](const ComplexMatrix& m) {
    return vqaud_dilate(m, 1.0, ansatz, opts);
  };
}

struct KrausRun {
  ComplexMatrix rho;
  std::vector<DilationResult> dilations;  // one per operator
  double max_leak = 0.0;                  // largest ancilla norm over all (k, i) runs
};

inline KrausRun kraus_evolve_via_dilation(std::span<const ComplexMatrix> ops, const ComplexMatrix& rho,
                                          const Dilator& dilate) {
  if (!kraus_completeness_check(ops)) throw std::invalid_argument("kraus_evolve: operators are not complete");
  for (const auto& m : ops) {
    if (!check_scaling(m, 1.0)) throw ScalingError("kraus_evolve: Kraus operator has singular value above 1");
  }
  const auto ensemble = ensemble_decompose(rho);
  KrausRun run;
  run.rho = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& m : ops) {
    run.dilations.push_back(dilate(m));
    for (const auto& member : ensemble) {
      const EmbedOutput e = embed_and_apply(run.dilations.back(), member.state);
      run.rho += member.prob * e.out * e.out.adjoint();
      run.max_leak = std::max(run.max_leak, e.leak);
    }
  }
  return run;
}

}  // namespace vqaud
