#pragma once

// Measurement-based cost functions, simulated from exact probabilities plus
// seeded sampling: Choi-state fidelity, direct fidelity estimation over Pauli
// strings, SWAP-test overlap, probe-state regression, and shot sampling.

#include <algorithm>
#include <limits>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vqaud/linalg.hpp"
#include "vqaud/rng.hpp"

namespace vqaud {

class EstimatorError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Unit-trace density matrix on the doubled space (d^2 x d^2).
struct ChoiState {
  ComplexMatrix matrix;
};

/// (I (x) M)|Phi+><Phi+|(I (x) M)^dagger normalized to unit trace, with
/// |Phi+> = sum_j |j>|j> / sqrt(d).
inline ChoiState choi_of_operator(const ComplexMatrix& m) {
  require_square(m, "choi_of_operator");
  const Eigen::Index d = m.rows();
  ComplexVector psi(d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k) psi(j * d + k) = m(k, j);
  const double nrm = psi.squaredNorm();
  if (!(nrm > 0.0)) throw EstimatorError("choi_of_operator: zero operator");
  return {psi * psi.adjoint() / nrm};
}

namespace detail {

inline void require_same_dims(const ChoiState& a, const ChoiState& b, const char* what) {
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols())
    throw EstimatorError(std::string(what) + ": dimension mismatch");
}

// Eigenvalues within rounding of zero are treated as zero before the square
// root, so rank-deficient states keep an exact zero spectrum.
inline Eigen::VectorXd clipped_sqrt(const Eigen::VectorXd& ev) {
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double floor = 16.0 * static_cast<double>(ev.size()) * std::numeric_limits<double>::epsilon() * scale;
  return ev.unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
}

inline Eigen::MatrixXcd psd_sqrt(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()));
  const Eigen::VectorXd ev = clipped_sqrt(es.eigenvalues());
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double uhlmann_fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  const Eigen::MatrixXcd s = detail::psd_sqrt(rho);
  const Eigen::MatrixXcd inner = s * Eigen::MatrixXcd(sigma) * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double tr = detail::clipped_sqrt(es.eigenvalues()).sum();
  return tr * tr;
}

inline double choi_fidelity_cost(const ChoiState& var, const ChoiState& target) {
  detail::require_same_dims(var, target, "choi_fidelity_cost");
  return 1.0 - uhlmann_fidelity(var.matrix, target.matrix);
}

// ---------------------------------------------------------------------------
// Direct fidelity estimation
//
// A Pauli string on q qubits is encoded by bit masks (x, z): qubit j carries
// I, X, Z, Y for (x_j, z_j) = (0,0), (1,0), (0,1), (1,1), with qubit 0 in the
// most significant bit. The basis is orthogonal, Tr(PQ) = 2^q delta_PQ.

struct PauliString {
  std::size_t x = 0;
  std::size_t z = 0;
};

/// Tr(rho P) for Hermitian rho on 2^q levels; real up to rounding.
inline double pauli_expectation(const ComplexMatrix& rho, PauliString p) {
  const auto dim = static_cast<std::size_t>(rho.rows());
  const int y_count = std::popcount(p.x & p.z);
  // P|i> = i^{#Y} (-1)^{popcount(i & z)} |i ^ x>
  cplx acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double sign = (std::popcount(i & p.z) & 1) ? -1.0 : 1.0;
    acc += sign * rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i ^ p.x));
  }
  static constexpr cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return (kPhase[y_count & 3] * acc).real();
}

/// Tr(rho P) for every string, indexed by (x << q) | z.
inline std::vector<double> pauli_spectrum(const ComplexMatrix& rho) {
  require_square(rho, "pauli_spectrum");
  const auto dim = static_cast<std::size_t>(rho.rows());
  if (!is_power_of_two(dim)) throw EstimatorError("pauli_spectrum: dimension is not a power of two");
  const unsigned q = log2_exact(dim);
  std::vector<double> out(dim * dim);
  for (std::size_t x = 0; x < dim; ++x)
    for (std::size_t z = 0; z < dim; ++z) out[(x << q) | z] = pauli_expectation(rho, {x, z});
  return out;
}

struct DfeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(samples)
  std::size_t samples = 0;
};

/// sum_P w_P mu_P with w_P = chi_M(P)^2 / sum_Q chi_M(Q)^2, mu_P = chi_theta(P) / chi_M(P);
/// equals Tr(Phi_theta Phi_M) / Tr(Phi_M^2).
inline double dfe_exhaustive(const ChoiState& target, const ChoiState& var) {
  detail::require_same_dims(target, var, "dfe_exhaustive");
  const auto chi_m = pauli_spectrum(target.matrix);
  const auto chi_v = pauli_spectrum(var.matrix);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < chi_m.size(); ++k) {
    num += chi_m[k] * chi_v[k];
    den += chi_m[k] * chi_m[k];
  }
  if (!(den > 0.0)) throw EstimatorError("dfe: target has no Pauli weight");
  return num / den;
}

/// Importance-sampled estimate: P drawn with probability w_P, value mu_P.
inline DfeEstimate dfe_estimate(const ChoiState& target, const ChoiState& var, std::size_t samples,
                                std::uint64_t seed) {
  detail::require_same_dims(target, var, "dfe_estimate");
  if (samples < 1) throw EstimatorError("dfe_estimate: samples must be >= 1");
  const auto chi_m = pauli_spectrum(target.matrix);
  const auto chi_v = pauli_spectrum(var.matrix);
  std::vector<double> w(chi_m.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = chi_m[k] * chi_m[k];
  const auto cdf = Rng::cumulative_sum(w);
  if (!(cdf.back() > 0.0)) throw EstimatorError("dfe: target has no Pauli weight");

  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t k = rng.categorical(cdf);
    while (w[k] == 0.0) k = rng.categorical(cdf);  // zero-weight strings sit on CDF plateaus
    const double mu = chi_v[k] / chi_m[k];
    sum += mu;
    sum_sq += mu * mu;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var_s = samples > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var_s / n), samples};
}

// ---------------------------------------------------------------------------
// SWAP test

/// Ancilla-zero probability of the SWAP test, 1/2 + Tr(ab)/2.
inline double swap_test_probability(const ChoiState& a, const ChoiState& b) {
  detail::require_same_dims(a, b, "swap_test");
  const double p = 0.5 + 0.5 * (a.matrix.cwiseProduct(b.matrix.transpose())).sum().real();
  if (p < -1e-10 || p > 1.0 + 1e-10) throw EstimatorError("swap_test: probability outside [0, 1]; inputs are not states");
  return std::clamp(p, 0.0, 1.0);
}

/// 2 * (fraction of ancilla-zero outcomes) - 1, an unbiased estimate of Tr(ab).
inline double swap_test_overlap(const ChoiState& a, const ChoiState& b, std::size_t shots, std::uint64_t seed) {
  if (shots < 1) throw EstimatorError("swap_test: shots must be >= 1");
  const double p = swap_test_probability(a, b);
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < shots; ++s) hits += rng.bernoulli(p) ? 1 : 0;
  return 2.0 * static_cast<double>(hits) / static_cast<double>(shots) - 1.0;
}

// ---------------------------------------------------------------------------
// Regression cost

/// (1/K) sum_k ||(var_block - alpha M) psi_k||^2.
inline double regression_cost(const ComplexMatrix& var_block, const ComplexMatrix& target, double alpha,
                              std::span<const ComplexVector> probes) {
  if (probes.empty()) throw EstimatorError("regression_cost: no probe states");
  if (var_block.rows() != target.rows() || var_block.cols() != target.cols())
    throw EstimatorError("regression_cost: block and target dimensions differ");
  const ComplexMatrix diff = var_block - alpha * target;
  double acc = 0.0;
  for (const auto& psi : probes) {
    if (psi.size() != diff.cols()) throw EstimatorError("regression_cost: probe dimension mismatch");
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw EstimatorError("regression_cost: probes must be unit vectors");
    acc += (diff * psi).squaredNorm();
  }
  return acc / static_cast<double>(probes.size());
}

inline std::vector<ComplexVector> computational_basis(Eigen::Index dim) {
  std::vector<ComplexVector> out;
  out.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index k = 0; k < dim; ++k) out.push_back(ComplexVector::Unit(dim, k));
  return out;
}

// ---------------------------------------------------------------------------
// Shot sampling

inline constexpr double kProbabilityClip = 1e-10;

/// Probability vector from a diagonal: entries in [-clip, 0) are zeroed, lower
/// values are rejected, and the result is renormalized.
inline std::vector<double> probabilities_from(std::span<const double> diag) {
  std::vector<double> p(diag.begin(), diag.end());
  double total = 0.0;
  for (auto& v : p) {
    if (!std::isfinite(v) || v < -kProbabilityClip) throw EstimatorError("sample_populations: negative probability");
    v = std::max(v, 0.0);
    total += v;
  }
  if (!(total > 0.0)) throw EstimatorError("sample_populations: zero total probability");
  for (auto& v : p) v /= total;
  return p;
}

/// Multinomial draw of `shots` outcomes; returns frequencies (counts / shots).
inline std::vector<double> sample_populations(std::span<const double> probs, std::size_t shots, std::uint64_t seed) {
  if (shots < 1) throw EstimatorError("sample_populations: shots must be >= 1");
  const auto p = probabilities_from(probs);
  const auto cdf = Rng::cumulative_sum(p);
  std::vector<std::size_t> counts(p.size(), 0);
  Rng rng(seed);
  for (std::size_t s = 0; s < shots; ++s) {
    std::size_t k = rng.categorical(cdf);
    while (p[k] == 0.0) k = rng.categorical(cdf);
    ++counts[k];
  }
  std::vector<double> freq(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) freq[k] = static_cast<double>(counts[k]) / static_cast<double>(shots);
  return freq;
}

inline std::vector<double> sample_populations(const ComplexMatrix& rho, std::size_t shots, std::uint64_t seed) {
  require_square(rho, "sample_populations");
  std::vector<double> diag(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index i = 0; i < rho.rows(); ++i) diag[static_cast<std::size_t>(i)] = rho(i, i).real();
  return sample_populations(diag, shots, seed);
}

inline std::vector<double> sample_populations(const ComplexVector& state, std::size_t shots, std::uint64_t seed) {
  std::vector<double> diag(static_cast<std::size_t>(state.size()));
  for (Eigen::Index i = 0; i < state.size(); ++i) diag[static_cast<std::size_t>(i)] = std::norm(state(i));
  return sample_populations(diag, shots, seed);
}

}  // namespace vqaud
