#pragma once

// Unitary dilation backends: variational (VQAUD), exact Sz.-Nagy, and the
// four-term linear combination of unitaries; plus Taylor-series propagators
// for single-optimization stepping.

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vqaud/circuit.hpp"
#include "vqaud/linalg.hpp"
#include "vqaud/lindblad.hpp"
#include "vqaud/optimizer.hpp"
#include "vqaud/rng.hpp"

namespace vqaud {

class ScalingError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class DilationMethod { vqaud, sz_nagy, lcu };

inline std::string_view method_name(DilationMethod m) {
  switch (m) {
    case DilationMethod::vqaud: return "vqaud";
    case DilationMethod::sz_nagy: return "sz_nagy";
    case DilationMethod::lcu: return "lcu";
  }
  return "?";
}

inline DilationMethod parse_method(std::string_view s) {
  for (auto m : {DilationMethod::vqaud, DilationMethod::sz_nagy, DilationMethod::lcu})
    if (method_name(m) == s) return m;
  throw std::invalid_argument("unknown dilation method '" + std::string(s) + "'");
}

struct DilationResult {
  ComplexMatrix unitary;
  double alpha = 1.0;
  std::size_t block_dim = 0;  // l, the dimension of the dilated operator
  double residual = 0.0;      // ||top-left l x l block - alpha M||_F
  DilationMethod method = DilationMethod::vqaud;
  std::optional<GateCounts> counts;  // vqaud only
  std::vector<double> theta;         // vqaud only
  bool converged = true;
  std::size_t iterations = 0;
};

/// Zero-pads a square matrix to dim x dim (top-left placement).
inline ComplexMatrix zero_pad(const ComplexMatrix& m, Eigen::Index dim) {
  if (dim < m.rows() || dim < m.cols()) throw std::invalid_argument("zero_pad: target smaller than input");
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

/// Frobenius distance between the top-left block of u and target.
inline double block_residual(const ComplexMatrix& u, const ComplexMatrix& target) {
  if (target.rows() > u.rows() || target.cols() > u.cols()) throw std::invalid_argument("block_residual: block larger than unitary");
  return (u.topLeftCorner(target.rows(), target.cols()) - target).norm();
}

inline bool check_scaling(const ComplexMatrix& m, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ScalingError("alpha must lie in (0, 1]");
  return alpha * spectral_norm(m) <= 1.0 + 1e-12;
}

/// Largest alpha in (0, 1] that makes alpha M a contraction.
inline double max_admissible_alpha(const ComplexMatrix& m) {
  const double s = spectral_norm(m);
  return s <= 1.0 ? 1.0 : 1.0 / s;
}

// ---------------------------------------------------------------------------
// VQAUD

/// ||U^(l)(theta) - target||_F where U^(l) is the top-left l x l block.
inline double vqaud_cost(const ParamCircuit& c, std::span<const double> theta, const ComplexMatrix& target) {
  if (static_cast<std::size_t>(target.rows()) > c.dim()) throw CircuitError("vqaud_cost: block larger than circuit dimension");
  require_square(target, "vqaud_cost");
  return std::sqrt(block_residual_sq_and_gradient(c, theta, target, {}));
}

enum class GradientMode { adjoint, finite_difference };

struct VqaudOptions {
  BfgsOptions bfgs{};
  GradientMode gradient = GradientMode::adjoint;
  std::vector<double> theta0;  // empty: drawn uniform in [-pi, pi] from bfgs.seed
};

/// Objective C(theta) with its gradient dC = d(C^2) / 2C.
inline CostGradFn vqaud_objective(const ParamCircuit& c, const ComplexMatrix& target, GradientMode mode,
                                  double fd_step) {
  if (mode == GradientMode::finite_difference) {
    return with_fd_gradient([&c, &target](std::span<const double> x) { return vqaud_cost(c, x, target); },
                            fd_step);
  }
  return [&c, &target](std::span<const double> x, std::span<double> grad) {
    const double sq = block_residual_sq_and_gradient(c, x, target, grad);
    const double cost = std::sqrt(sq);
    if (!grad.empty()) {
      const double scale = cost > 0.0 ? 0.5 / cost : 0.0;
      for (auto& gi : grad) gi *= scale;
    }
    return cost;
  };
}

inline DilationResult vqaud_dilate(const ComplexMatrix& target, double alpha, const ParamCircuit& ansatz,
                                   const VqaudOptions& opts = {}) {
  require_square(target, "vqaud_dilate");
  if (!check_scaling(target, alpha)) throw ScalingError("vqaud_dilate: alpha * sigma_max(M) exceeds 1");
  ansatz.validate();
  const auto l = static_cast<std::size_t>(target.rows());
  if (ansatz.dim() < 2 * l) {
    throw CircuitError("vqaud_dilate: ansatz dimension " + std::to_string(ansatz.dim()) + " is below 2 x block " +
                       std::to_string(l));
  }
  const ComplexMatrix scaled = alpha * target;

  std::vector<double> theta0 = opts.theta0;
  if (theta0.empty()) {
    Rng rng(opts.bfgs.seed);
    theta0.resize(ansatz.param_count());
    for (auto& v : theta0) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
  }
  const auto objective = vqaud_objective(ansatz, scaled, opts.gradient, opts.bfgs.fd_step);
  const OptimResult opt = bfgs_minimize_with_gradient(objective, theta0, opts.bfgs);

  DilationResult out;
  out.unitary = circuit_unitary(ansatz, opt.theta_star);
  out.alpha = alpha;
  out.block_dim = l;
  out.residual = block_residual(out.unitary, scaled);
  out.method = DilationMethod::vqaud;
  out.counts = gate_counts(ansatz);
  out.theta = opt.theta_star;
  out.converged = opt.converged;
  out.iterations = opt.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Sz.-Nagy

/// [[alpha M, -U D U^dag], [V D V^dag, V Sigma U^dag]] with alpha M = U Sigma V^dag
/// and D = sqrt(I - Sigma^2).
inline DilationResult sz_nagy_dilate(const ComplexMatrix& m, double alpha) {
  require_square(m, "sz_nagy_dilate");
  if (!check_scaling(m, alpha)) throw ScalingError("sz_nagy_dilate: alpha * sigma_max(M) exceeds 1");
  const ComplexMatrix a = alpha * m;
  const auto dec = svd(a);
  const Eigen::Index l = m.rows();
  ComplexVector defect(l);
  // 1 - sigma^2 at rounding level would otherwise become a defect of order 1e-8.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i < l; ++i) {
    const double gap = 1.0 - dec.sigma(i) * dec.sigma(i);
    defect(i) = gap > floor ? std::sqrt(gap) : 0.0;
  }
  const ComplexMatrix sigma = dec.sigma.cast<cplx>().asDiagonal();
  ComplexMatrix u(2 * l, 2 * l);
  u.topLeftCorner(l, l) = a;
  u.topRightCorner(l, l) = -dec.u * defect.asDiagonal() * dec.u.adjoint();
  u.bottomLeftCorner(l, l) = dec.v * defect.asDiagonal() * dec.v.adjoint();
  u.bottomRightCorner(l, l) = dec.v * sigma * dec.u.adjoint();

  DilationResult out;
  out.unitary = std::move(u);
  out.alpha = alpha;
  out.block_dim = static_cast<std::size_t>(l);
  out.residual = block_residual(out.unitary, a);
  out.method = DilationMethod::sz_nagy;
  return out;
}

/// Direct sum u (+) I up to dim; used to place a dilation on whole qubits.
inline ComplexMatrix embed_unitary(const ComplexMatrix& u, Eigen::Index dim) {
  if (dim < u.rows()) throw std::invalid_argument("embed_unitary: target smaller than input");
  ComplexMatrix out = identity(dim);
  out.topLeftCorner(u.rows(), u.cols()) = u;
  return out;
}

struct EmbedOutput {
  ComplexVector out;  // first l components of U (v (+) 0), divided by alpha
  double leak = 0.0;  // norm of all discarded components
};

inline EmbedOutput embed_and_apply(const DilationResult& d, const ComplexVector& v) {
  const auto l = static_cast<Eigen::Index>(d.block_dim);
  if (v.size() != l) throw std::invalid_argument("embed_and_apply: vector length does not match the block");
  if (!v.allFinite()) throw std::invalid_argument("embed_and_apply: non-finite input");
  ComplexVector padded = ComplexVector::Zero(d.unitary.cols());
  padded.head(l) = v;
  const ComplexVector full = d.unitary * padded;
  return {full.head(l) / d.alpha, full.tail(full.size() - l).norm()};
}

// ---------------------------------------------------------------------------
// Linear combination of unitaries

struct LcuTerm {
  cplx coeff;
  ComplexMatrix unitary;
};

/// M ~ (1/2eps)(i e^{-i eps S} - i e^{i eps S} + e^{eps A} - e^{-eps A}),
/// S = (M + M^dag)/2, A = (M - M^dag)/2.
inline std::vector<LcuTerm> lcu_decompose(const ComplexMatrix& m, double epsilon) {
  require_square(m, "lcu_decompose");
  if (!(epsilon > 0.0)) throw std::invalid_argument("lcu_decompose: epsilon must be positive");
  const ComplexMatrix s = 0.5 * (m + m.adjoint());
  const ComplexMatrix a = 0.5 * (m - m.adjoint());
  const double k = 1.0 / (2.0 * epsilon);
  return {
      {cplx(0.0, k), expm(-kI * epsilon * s)},
      {cplx(0.0, -k), expm(kI * epsilon * s)},
      {cplx(k, 0.0), expm(cplx(epsilon, 0.0) * a)},
      {cplx(-k, 0.0), expm(cplx(-epsilon, 0.0) * a)},
  };
}

inline ComplexMatrix lcu_matrix(std::span<const LcuTerm> terms) {
  if (terms.empty()) throw std::invalid_argument("lcu_matrix: no terms");
  ComplexMatrix out = ComplexMatrix::Zero(terms.front().unitary.rows(), terms.front().unitary.cols());
  for (const auto& t : terms) out += t.coeff * t.unitary;
  return out;
}

inline ComplexVector lcu_apply(std::span<const LcuTerm> terms, const ComplexVector& v) {
  if (terms.empty()) throw std::invalid_argument("lcu_apply: no terms");
  ComplexVector out = ComplexVector::Zero(v.size());
  for (const auto& t : terms) {
    if (t.unitary.cols() != v.size()) throw std::invalid_argument("lcu_apply: dimension mismatch");
    out += t.coeff * (t.unitary * v);
  }
  return out;
}

/// Block encoding of a four-term LCU on two ancilla qubits (most significant):
/// W = (P^dag (x) I) SELECT (P (x) I) with P|0> = sum_k sqrt(|c_k| / s)|k>,
/// s = sum_k |c_k|, and coefficient phases folded into SELECT. The top-left
/// block is sum_k c_k U_k / s. Blocks of non-power-of-two size are embedded
/// in the next power of two first.
inline ComplexMatrix lcu_block_encoding(std::span<const LcuTerm> terms) {
  if (terms.size() != 4) throw std::invalid_argument("lcu_block_encoding: expected four terms");
  const Eigen::Index l = terms.front().unitary.rows();
  const auto d = static_cast<Eigen::Index>(next_power_of_two(static_cast<std::size_t>(l)));
  double s = 0.0;
  for (const auto& t : terms) s += std::abs(t.coeff);
  if (!(s > 0.0)) throw std::invalid_argument("lcu_block_encoding: zero coefficients");

  // Householder reflection swapping e0 and the (real, unit) amplitude vector.
  Eigen::Vector4d amp;
  for (int k = 0; k < 4; ++k) amp(k) = std::sqrt(std::abs(terms[static_cast<std::size_t>(k)].coeff) / s);
  Eigen::Vector4d w = Eigen::Vector4d::Unit(0) - amp;
  Eigen::Matrix4d prep = Eigen::Matrix4d::Identity();
  if (w.norm() > 1e-15) prep -= 2.0 * w * w.transpose() / w.squaredNorm();

  ComplexMatrix select = ComplexMatrix::Zero(4 * d, 4 * d);
  for (Eigen::Index k = 0; k < 4; ++k) {
    const auto& t = terms[static_cast<std::size_t>(k)];
    const cplx phase = std::polar(1.0, std::arg(t.coeff));
    select.block(k * d, k * d, d, d) = phase * embed_unitary(t.unitary, d);
  }
  const ComplexMatrix p = kron(prep.cast<cplx>(), identity(d));
  return p.adjoint() * select * p;
}

/// LCU backend as a dilation: the block-encoding unitary with effective
/// alpha = 1 / sum|c_k| = epsilon / 2. The residual is the truncation error
/// of the decomposition at that scale.
inline DilationResult lcu_dilate(const ComplexMatrix& m, double epsilon) {
  const auto terms = lcu_decompose(m, epsilon);
  double s = 0.0;
  for (const auto& t : terms) s += std::abs(t.coeff);
  DilationResult out;
  out.unitary = lcu_block_encoding(terms);
  out.alpha = 1.0 / s;
  out.block_dim = static_cast<std::size_t>(m.rows());
  out.residual = block_residual(out.unitary, out.alpha * m);
  out.method = DilationMethod::lcu;
  return out;
}

/// Populations rho_ii recovered from the output density sigma of a dilated
/// step applied to the normalized input vec(rho0) / ||vec(rho0)||.
/// Amplitude k = i + i n carries alpha (M vec rho0)_k / ||vec rho0|| and the
/// population is non-negative, so rho_ii = sqrt(sigma_kk) ||vec rho0|| / alpha.
/// Leakage is not renormalized away.
inline std::vector<double> block_populations(std::span<const double> output_probs, std::size_t n, double alpha,
                                             double input_norm) {
  if (output_probs.size() < n * n) throw std::invalid_argument("block_populations: output register too small");
  std::vector<double> pops(n);
  for (std::size_t i = 0; i < n; ++i) pops[i] = std::sqrt(std::max(0.0, output_probs[i + i * n])) * input_norm / alpha;
  return pops;
}

inline std::vector<double> diagonal_of(const ComplexMatrix& sigma) {
  std::vector<double> out(static_cast<std::size_t>(sigma.rows()));
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) out[static_cast<std::size_t>(i)] = sigma(i, i).real();
  return out;
}

// ---------------------------------------------------------------------------
// Taylor propagation

inline ComplexMatrix taylor_propagator(const ComplexMatrix& liouvillian, double dt, std::size_t order) {
  require_square(liouvillian, "taylor_propagator");
  if (!(dt >= 0.0)) throw std::invalid_argument("taylor_propagator: dt must be non-negative");
  const ComplexMatrix x = liouvillian * cplx(dt, 0.0);
  ComplexMatrix term = identity(x.rows());
  ComplexMatrix sum = term;
  for (std::size_t n = 1; n <= order; ++n) {
    term = (term * x / static_cast<double>(n)).eval();
    sum += term;
  }
  return sum;
}

/// ||R_N||_2 <= ||L dt||_2^{N+1} / (N+1)! * exp(||L dt||_2).
inline double taylor_remainder_bound(const ComplexMatrix& liouvillian, double dt, std::size_t order) {
  if (!(dt >= 0.0)) throw std::invalid_argument("taylor_remainder_bound: dt must be non-negative");
  const double x = spectral_norm(liouvillian * cplx(dt, 0.0));
  const double n1 = static_cast<double>(order + 1);
  return std::exp(n1 * std::log(x) - std::lgamma(n1 + 1.0) + x);
}

/// Applies the same dilated step repeatedly, renormalizing the trace after
/// each application. Returns rho at steps 0..steps.
inline std::vector<ComplexMatrix> repeated_step_evolve(const DilationResult& d, const ComplexMatrix& rho0,
                                                       std::size_t steps) {
  const auto n = static_cast<std::size_t>(rho0.rows());
  if (n * n != d.block_dim) throw std::invalid_argument("repeated_step_evolve: dilation block does not match rho");
  std::vector<ComplexMatrix> out{rho0};
  out.reserve(steps + 1);
  ComplexMatrix rho = rho0;
  for (std::size_t k = 0; k < steps; ++k) {
    ComplexMatrix next = devectorize(embed_and_apply(d, vectorize(rho)).out);
    const cplx tr = next.trace();
    if (std::abs(tr) < 1e-6) throw std::runtime_error("repeated_step_evolve: trace collapsed (excessive leakage)");
    rho = next / tr;
    out.push_back(rho);
  }
  return out;
}

}  // namespace vqaud
