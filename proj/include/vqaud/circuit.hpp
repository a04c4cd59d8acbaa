#pragma once

// Parameterized circuits over n qubits.
//
// Conventions (shared with the circuit and parameter file formats):
//   * R_A(theta) = exp(-i theta A / 2) for A in {X, Y, Z}.
//   * The gate list is in application order: U = G_N ... G_2 G_1.
//   * Qubit 0 is the most significant bit of the basis index.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vqaud/linalg.hpp"

namespace vqaud {

class CircuitError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class GateKind { RX, RY, RZ, H, X, CNOT, CZ, SWAP };

inline constexpr bool is_rotation(GateKind k) { return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ; }

inline constexpr std::size_t arity(GateKind k) {
  return (k == GateKind::CNOT || k == GateKind::CZ || k == GateKind::SWAP) ? 2 : 1;
}

inline std::string_view gate_name(GateKind k) {
  switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::SWAP: return "SWAP";
  }
  return "?";
}

inline GateKind parse_gate_kind(std::string_view s) {
  for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::H, GateKind::X, GateKind::CNOT,
                     GateKind::CZ, GateKind::SWAP}) {
    if (gate_name(k) == s) return k;
  }
  throw CircuitError("unknown gate kind '" + std::string(s) + "'");
}

struct Gate {
  GateKind kind = GateKind::H;
  std::vector<std::size_t> targets;
  std::optional<std::size_t> slot;
};

struct GateCounts {
  std::size_t single = 0;
  std::size_t two_qubit = 0;
  std::size_t qubits = 0;

  friend GateCounts operator+(const GateCounts& a, const GateCounts& b) {
    return {a.single + b.single, a.two_qubit + b.two_qubit, std::max(a.qubits, b.qubits)};
  }
  friend bool operator==(const GateCounts&, const GateCounts&) = default;
};

class ParamCircuit {
public:
  ParamCircuit() = default;
  explicit ParamCircuit(std::size_t qubits) : qubits_(qubits) {
    if (qubits == 0 || qubits > 10) throw CircuitError("circuit: qubit count must be in [1, 10]");
  }

  std::size_t qubits() const { return qubits_; }
  std::size_t dim() const { return std::size_t{1} << qubits_; }
  std::size_t param_count() const { return param_count_; }
  const std::vector<Gate>& gates() const { return gates_; }

  /// Appends a fixed gate.
  ParamCircuit& add(GateKind kind, std::vector<std::size_t> targets) {
    if (is_rotation(kind)) throw CircuitError("circuit: rotation gates need a parameter slot");
    push({kind, std::move(targets), std::nullopt});
    return *this;
  }

  /// Appends a rotation bound to a fresh parameter slot; returns the slot.
  std::size_t add_rotation(GateKind kind, std::size_t qubit) {
    const std::size_t slot = param_count_;
    add_rotation(kind, qubit, slot);
    return slot;
  }

  /// Appends a rotation bound to an explicit slot (slots may be shared).
  ParamCircuit& add_rotation(GateKind kind, std::size_t qubit, std::size_t slot) {
    if (!is_rotation(kind)) throw CircuitError("circuit: fixed gates take no parameter slot");
    push({kind, {qubit}, slot});
    param_count_ = std::max(param_count_, slot + 1);
    return *this;
  }

  /// Checks target ranges and that every slot below param_count is used.
  void validate() const {
    std::vector<bool> used(param_count_, false);
    for (const auto& g : gates_) {
      check_gate(g);
      if (g.slot) used[*g.slot] = true;
    }
    for (std::size_t s = 0; s < used.size(); ++s) {
      if (!used[s]) throw CircuitError("circuit: parameter slot " + std::to_string(s) + " is never referenced");
    }
  }

  /// Gates of `other` appended after this circuit's, slots offset past ours.
  ParamCircuit concat(const ParamCircuit& other) const {
    if (other.qubits_ != qubits_) throw CircuitError("circuit: concat requires equal qubit counts");
    ParamCircuit out = *this;
    for (Gate g : other.gates_) {
      if (g.slot) {
        g.slot = *g.slot + param_count_;
        out.param_count_ = std::max(out.param_count_, *g.slot + 1);
      }
      out.gates_.push_back(std::move(g));
    }
    return out;
  }

private:
  void check_gate(const Gate& g) const {
    if (g.targets.size() != arity(g.kind)) throw CircuitError("circuit: wrong number of targets for " + std::string(gate_name(g.kind)));
    for (auto q : g.targets)
      if (q >= qubits_) throw CircuitError("circuit: target qubit out of range");
    if (g.targets.size() == 2 && g.targets[0] == g.targets[1]) throw CircuitError("circuit: targets must be distinct");
    if (is_rotation(g.kind) != g.slot.has_value()) throw CircuitError("circuit: slot/kind mismatch");
  }

  void push(Gate g) {
    check_gate(g);
    gates_.push_back(std::move(g));
  }

  std::size_t qubits_ = 0;
  std::size_t param_count_ = 0;
  std::vector<Gate> gates_;
};

struct NoiseModel {
  double dephasing_prob = 0.0;   // lambda
  double amp_damping_prob = 0.0; // omega

  void validate() const {
    if (!(dephasing_prob >= 0.0 && dephasing_prob <= 1.0)) throw CircuitError("noise: dephasing probability outside [0,1]");
    if (!(amp_damping_prob >= 0.0 && amp_damping_prob <= 1.0)) throw CircuitError("noise: amplitude damping probability outside [0,1]");
  }
  bool is_zero() const { return dephasing_prob == 0.0 && amp_damping_prob == 0.0; }
};

// ---------------------------------------------------------------------------
// Gate kernels. Gates act on the rows of a dim x k row-major block.

namespace detail {

struct Mat2 {
  cplx a, b, c, d;  // [[a, b], [c, d]]
};

inline Mat2 single_qubit_matrix(GateKind kind, double theta) {
  const double ch = std::cos(0.5 * theta), sh = std::sin(0.5 * theta);
  constexpr double r = 0.70710678118654752440;
  switch (kind) {
    case GateKind::RX: return {ch, cplx(0, -sh), cplx(0, -sh), ch};
    case GateKind::RY: return {ch, -sh, sh, ch};
    case GateKind::RZ: return {cplx(ch, -sh), 0.0, 0.0, cplx(ch, sh)};
    case GateKind::H: return {r, r, r, -r};
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    default: throw CircuitError("single_qubit_matrix: not a single-qubit gate");
  }
}

inline std::size_t bit_of(std::size_t qubits, std::size_t q) { return std::size_t{1} << (qubits - 1 - q); }

inline void apply_mat2_rows(ComplexMatrix& w, std::size_t qubits, std::size_t q, const Mat2& m) {
  const std::size_t bit = bit_of(qubits, q);
  const auto dim = static_cast<std::size_t>(w.rows());
  const auto k = static_cast<std::size_t>(w.cols());
  cplx* data = w.data();
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & bit) continue;
    cplx* r0 = data + i * k;
    cplx* r1 = data + (i | bit) * k;
    for (std::size_t j = 0; j < k; ++j) {
      const cplx x0 = r0[j], x1 = r1[j];
      r0[j] = m.a * x0 + m.b * x1;
      r1[j] = m.c * x0 + m.d * x1;
    }
  }
}

inline void swap_rows(ComplexMatrix& w, std::size_t i, std::size_t j) {
  const auto k = static_cast<std::size_t>(w.cols());
  std::swap_ranges(w.data() + i * k, w.data() + (i + 1) * k, w.data() + j * k);
}

inline void apply_two_qubit_rows(ComplexMatrix& w, std::size_t qubits, GateKind kind, std::size_t q0, std::size_t q1) {
  const std::size_t b0 = bit_of(qubits, q0), b1 = bit_of(qubits, q1);
  const auto dim = static_cast<std::size_t>(w.rows());
  const auto k = static_cast<std::size_t>(w.cols());
  switch (kind) {
    case GateKind::CNOT:
      for (std::size_t i = 0; i < dim; ++i)
        if ((i & b0) && !(i & b1)) swap_rows(w, i, i | b1);
      break;
    case GateKind::CZ:
      for (std::size_t i = 0; i < dim; ++i)
        if ((i & b0) && (i & b1))
          for (std::size_t j = 0; j < k; ++j) w.data()[i * k + j] = -w.data()[i * k + j];
      break;
    case GateKind::SWAP:
      for (std::size_t i = 0; i < dim; ++i)
        if ((i & b0) && !(i & b1)) swap_rows(w, i, (i & ~b0) | b1);
      break;
    default: throw CircuitError("apply_two_qubit_rows: not a two-qubit gate");
  }
}

/// Applies g (or its inverse) to the rows of w.
inline void apply_gate_rows(ComplexMatrix& w, std::size_t qubits, const Gate& g, std::span<const double> theta,
                            bool inverse = false) {
  if (arity(g.kind) == 2) {
    apply_two_qubit_rows(w, qubits, g.kind, g.targets[0], g.targets[1]);
    return;
  }
  double angle = g.slot ? theta[*g.slot] : 0.0;
  if (inverse) angle = -angle;
  apply_mat2_rows(w, qubits, g.targets[0], single_qubit_matrix(g.kind, angle));
}

/// Rows of w multiplied by -i/2 * A for the rotation axis A of g.
inline void apply_generator_rows(ComplexMatrix& w, std::size_t qubits, const Gate& g) {
  const cplx h(0.0, -0.5);
  switch (g.kind) {
    case GateKind::RX: apply_mat2_rows(w, qubits, g.targets[0], {0.0, h, h, 0.0}); break;
    case GateKind::RY: apply_mat2_rows(w, qubits, g.targets[0], {0.0, -h * kI, h * kI, 0.0}); break;
    case GateKind::RZ: apply_mat2_rows(w, qubits, g.targets[0], {h, 0.0, 0.0, -h}); break;
    default: throw CircuitError("apply_generator_rows: not a rotation");
  }
}

inline void check_theta(const ParamCircuit& c, std::span<const double> theta) {
  if (theta.size() != c.param_count()) {
    throw CircuitError("circuit: expected " + std::to_string(c.param_count()) + " parameters, got " +
                       std::to_string(theta.size()));
  }
}

}  // namespace detail

/// Full 2^n x 2^n unitary of the circuit at theta.
inline ComplexMatrix circuit_unitary(const ParamCircuit& c, std::span<const double> theta) {
  detail::check_theta(c, theta);
  ComplexMatrix w = identity(static_cast<Eigen::Index>(c.dim()));
  for (const auto& g : c.gates()) detail::apply_gate_rows(w, c.qubits(), g, theta);
  return w;
}

/// First `cols` columns of the circuit unitary (U applied to e_0 ... e_{cols-1}).
inline ComplexMatrix circuit_columns(const ParamCircuit& c, std::span<const double> theta, std::size_t cols) {
  detail::check_theta(c, theta);
  if (cols > c.dim()) throw CircuitError("circuit_columns: more columns than the circuit dimension");
  const auto d = static_cast<Eigen::Index>(c.dim());
  ComplexMatrix w = ComplexMatrix::Identity(d, static_cast<Eigen::Index>(cols));
  for (const auto& g : c.gates()) detail::apply_gate_rows(w, c.qubits(), g, theta);
  return w;
}

/// Squared Frobenius distance between the top-left block of U(theta) and
/// `target`, plus its exact gradient by reverse-mode sweep over the gate list.
inline double block_residual_sq_and_gradient(const ParamCircuit& c, std::span<const double> theta,
                                             const ComplexMatrix& target, std::span<double> grad) {
  const auto l = static_cast<std::size_t>(target.rows());
  ComplexMatrix phi = circuit_columns(c, theta, l);
  ComplexMatrix lam = ComplexMatrix::Zero(phi.rows(), phi.cols());
  lam.topRows(target.rows()) = phi.topRows(target.rows()) - target;
  const double cost_sq = lam.squaredNorm();
  if (grad.empty()) return cost_sq;
  if (grad.size() != c.param_count()) throw CircuitError("gradient buffer has the wrong size");
  std::fill(grad.begin(), grad.end(), 0.0);
  ComplexMatrix scratch;
  const auto& gates = c.gates();
  for (std::size_t k = gates.size(); k-- > 0;) {
    const Gate& g = gates[k];
    if (g.slot) {
      scratch = phi;
      detail::apply_generator_rows(scratch, c.qubits(), g);
      grad[*g.slot] += 2.0 * (lam.conjugate().cwiseProduct(scratch)).sum().real();
    }
    detail::apply_gate_rows(phi, c.qubits(), g, theta, /*inverse=*/true);
    detail::apply_gate_rows(lam, c.qubits(), g, theta, /*inverse=*/true);
  }
  return cost_sq;
}

inline GateCounts gate_counts(const ParamCircuit& c) {
  GateCounts out{0, 0, c.qubits()};
  for (const auto& g : c.gates()) (arity(g.kind) == 1 ? out.single : out.two_qubit) += 1;
  return out;
}

// ---------------------------------------------------------------------------
// Ansatz builders

/// Per layer: RZ RY RZ on each of 3 qubits, then two CNOTs. The CNOT pair
/// rotates with the layer index: (0,1)(1,2), then (1,2)(2,0), then (2,0)(0,1).
/// A fixed (0,1)(1,2) ladder stalls near residual 0.26 on the damped Rabi
/// propagator at 4 layers; the rotating ladder reaches ~1e-4 with the same counts.
inline ParamCircuit build_two_level_ansatz(std::size_t layers) {
  if (layers < 1) throw CircuitError("two-level ansatz: layers must be >= 1");
  ParamCircuit c(3);
  for (std::size_t layer = 0; layer < layers; ++layer) {
    for (std::size_t q = 0; q < 3; ++q) {
      c.add_rotation(GateKind::RZ, q);
      c.add_rotation(GateKind::RY, q);
      c.add_rotation(GateKind::RZ, q);
    }
    const std::size_t first = layer % 3;
    c.add(GateKind::CNOT, {first, (first + 1) % 3});
    c.add(GateKind::CNOT, {(first + 1) % 3, (first + 2) % 3});
  }
  return c;
}

using QubitPair = std::pair<std::size_t, std::size_t>;

/// Per block: RY RZ on every qubit, then CZ on each listed pair.
inline ParamCircuit build_multilevel_ansatz(std::size_t qubits, std::size_t blocks, std::span<const QubitPair> pairs) {
  ParamCircuit c(qubits);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t q = 0; q < qubits; ++q) {
      c.add_rotation(GateKind::RY, q);
      c.add_rotation(GateKind::RZ, q);
    }
    for (const auto& [a, bq] : pairs) c.add(GateKind::CZ, {a, bq});
  }
  return c;
}

/// RY RZ on every qubit, then `entanglers` units of CZ(a, b) followed by RY RZ
/// on a and b. Unit k uses pairs[k % pairs.size()].
/// Counts: 2*qubits + 4*entanglers single-qubit gates, `entanglers` CZ gates,
/// so 5 qubits with 25 / 49 units give 110/25 and 206/49.
inline ParamCircuit build_sequential_ansatz(std::size_t qubits, std::size_t entanglers, std::span<const QubitPair> pairs) {
  if (entanglers > 0 && pairs.empty()) throw CircuitError("sequential ansatz: empty pair list");
  ParamCircuit c(qubits);
  for (std::size_t q = 0; q < qubits; ++q) {
    c.add_rotation(GateKind::RY, q);
    c.add_rotation(GateKind::RZ, q);
  }
  for (std::size_t k = 0; k < entanglers; ++k) {
    const auto [a, b] = pairs[k % pairs.size()];
    c.add(GateKind::CZ, {a, b});
    for (auto q : {a, b}) {
      c.add_rotation(GateKind::RY, q);
      c.add_rotation(GateKind::RZ, q);
    }
  }
  return c;
}

/// Nearest-neighbour chain plus every next-nearest pair, e.g. for 5 qubits:
/// (0,1) (1,2) (2,3) (3,4) (0,2) (1,3) (2,4).
inline std::vector<QubitPair> default_entangler_pairs(std::size_t qubits) {
  std::vector<QubitPair> pairs;
  for (std::size_t q = 0; q + 1 < qubits; ++q) pairs.emplace_back(q, q + 1);
  for (std::size_t q = 0; q + 2 < qubits; ++q) pairs.emplace_back(q, q + 2);
  return pairs;
}

// ---------------------------------------------------------------------------
// Noisy density-matrix execution

namespace detail {

/// rho <- G rho G^dagger for a gate g.
inline void conjugate_by_gate(ComplexMatrix& rho, std::size_t qubits, const Gate& g, std::span<const double> theta) {
  apply_gate_rows(rho, qubits, g, theta);
  rho.adjointInPlace();
  apply_gate_rows(rho, qubits, g, theta);
  rho.adjointInPlace();
}

inline void dephase(ComplexMatrix& rho, std::size_t qubits, std::size_t q, double lambda) {
  if (lambda == 0.0) return;
  const std::size_t bit = bit_of(qubits, q);
  const double f = 1.0 - 2.0 * lambda;
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
      if (((static_cast<std::size_t>(i) ^ static_cast<std::size_t>(j)) & bit) != 0) rho(i, j) *= f;
}

inline void amplitude_damp(ComplexMatrix& rho, std::size_t qubits, std::size_t q, double omega) {
  if (omega == 0.0) return;
  const std::size_t bit = bit_of(qubits, q);
  const double keep = std::sqrt(1.0 - omega);
  const auto dim = static_cast<std::size_t>(rho.rows());
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const bool a = i & bit, b = j & bit;
      if (!a && !b) {
        rho(i, j) += omega * rho(i | bit, j | bit);
      } else if (a && b) {
        rho(i, j) *= (1.0 - omega);
      } else {
        rho(i, j) *= keep;
      }
    }
  }
}

inline void gate_noise(ComplexMatrix& rho, std::size_t qubits, std::size_t q, const NoiseModel& noise) {
  dephase(rho, qubits, q, noise.dephasing_prob);
  amplitude_damp(rho, qubits, q, noise.amp_damping_prob);
}

}  // namespace detail

/// Runs the circuit on rho_in; after each gate, every participating qubit
/// gets the dephasing channel and then the amplitude-damping channel.
inline ComplexMatrix apply_noisy(const ParamCircuit& c, std::span<const double> theta, const ComplexMatrix& rho_in,
                                 const NoiseModel& noise) {
  detail::check_theta(c, theta);
  noise.validate();
  const auto d = static_cast<Eigen::Index>(c.dim());
  if (rho_in.rows() != d || rho_in.cols() != d) throw CircuitError("apply_noisy: density matrix dimension mismatch");
  ComplexMatrix rho = rho_in;
  for (const auto& g : c.gates()) {
    detail::conjugate_by_gate(rho, c.qubits(), g, theta);
    if (noise.is_zero()) continue;
    for (auto q : g.targets) detail::gate_noise(rho, c.qubits(), q, noise);
  }
  return rho;
}

/// Noise model for a dense unitary whose gate-level decomposition is not built:
/// U is split into K = max(1, two_qubit) equal fractional powers U^(1/K); after
/// each slice one two-qubit gate's noise lands on a round-robin neighbour pair,
/// and the single-qubit gate budget is spread evenly over the slices on
/// round-robin qubits.
inline ComplexMatrix apply_unitary_with_sliced_noise(const ComplexMatrix& u, const ComplexMatrix& rho_in,
                                                     const NoiseModel& noise, const GateCounts& budget) {
  noise.validate();
  require_square(u, "sliced noise");
  if (!is_power_of_two(static_cast<std::size_t>(u.rows()))) throw CircuitError("sliced noise: dimension is not a power of two");
  const std::size_t qubits = log2_exact(static_cast<std::size_t>(u.rows()));
  const std::size_t slices = std::max<std::size_t>(1, budget.two_qubit);
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur{Eigen::MatrixXcd(u)};
  const Eigen::MatrixXcd q = schur.matrixU();
  Eigen::VectorXcd root(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const cplx ev = schur.matrixT()(i, i);
    root(i) = std::polar(1.0, std::arg(ev) / static_cast<double>(slices));
  }
  const ComplexMatrix step = q * root.asDiagonal() * q.adjoint();
  ComplexMatrix rho = rho_in;
  std::size_t pair_cursor = 0, single_cursor = 0, singles_done = 0;
  for (std::size_t s = 0; s < slices; ++s) {
    rho = (step * rho * step.adjoint()).eval();
    if (noise.is_zero()) continue;
    if (budget.two_qubit > 0 && qubits > 1) {
      const std::size_t a = pair_cursor % qubits, b = (pair_cursor + 1) % qubits;
      detail::gate_noise(rho, qubits, a, noise);
      detail::gate_noise(rho, qubits, b, noise);
      ++pair_cursor;
    }
    const std::size_t singles_target = (s + 1) * budget.single / slices;
    for (; singles_done < singles_target; ++singles_done) {
      detail::gate_noise(rho, qubits, single_cursor % qubits, noise);
      ++single_cursor;
    }
  }
  return rho;
}

}  // namespace vqaud
