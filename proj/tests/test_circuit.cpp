#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"
#include "vqaud/circuit.hpp"

using namespace vqaud;
using vqaud::testing::max_abs;
using vqaud::testing::random_density;

namespace {

std::vector<double> random_theta(Rng& rng, std::size_t n) {
  std::vector<double> t(n);
  for (auto& x : t) x = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return t;
}

// Permutation matrix of CNOT(control, target); qubit 0 is the most significant bit.
ComplexMatrix cnot_matrix(std::size_t qubits, std::size_t control, std::size_t target) {
  const std::size_t dim = std::size_t{1} << qubits;
  const std::size_t cb = std::size_t{1} << (qubits - 1 - control), tb = std::size_t{1} << (qubits - 1 - target);
  ComplexMatrix p = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) p(static_cast<Eigen::Index>((i & cb) ? i ^ tb : i), static_cast<Eigen::Index>(i)) = 1.0;
  return p;
}

ComplexMatrix cz_matrix(std::size_t qubits, std::size_t a, std::size_t b) {
  const std::size_t dim = std::size_t{1} << qubits;
  const std::size_t ab = std::size_t{1} << (qubits - 1 - a), bb = std::size_t{1} << (qubits - 1 - b);
  ComplexMatrix p = identity(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    if ((i & ab) && (i & bb)) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -1.0;
  return p;
}

std::vector<ParamCircuit> all_builders() {
  const auto pairs = default_entangler_pairs(4);
  return {build_two_level_ansatz(2), build_multilevel_ansatz(4, 2, pairs), build_sequential_ansatz(4, 6, pairs)};
}

}  // namespace

TEST(CircuitUnitary, EmptyCircuitIsIdentity) {
  const ParamCircuit c(2);
  EXPECT_EQ(max_abs(circuit_unitary(c, {}) - identity(4)), 0.0);
}

TEST(CircuitUnitary, RyPi) {
  ParamCircuit c(1);
  c.add_rotation(GateKind::RY, 0);
  const std::vector<double> theta{std::numbers::pi};
  ComplexMatrix expected(2, 2);
  expected << 0.0, -1.0, 1.0, 0.0;
  EXPECT_LT(max_abs(circuit_unitary(c, theta) - expected), 1e-15);
}

TEST(CircuitUnitary, RotationConventions) {
  const double a = 0.37;
  for (auto kind : {GateKind::RX, GateKind::RY, GateKind::RZ}) {
    ParamCircuit c(1);
    c.add_rotation(kind, 0);
    ComplexMatrix pauli = ComplexMatrix::Zero(2, 2);
    if (kind == GateKind::RX) pauli << 0.0, 1.0, 1.0, 0.0;
    if (kind == GateKind::RY) pauli << 0.0, -kI, kI, 0.0;
    if (kind == GateKind::RZ) pauli << 1.0, 0.0, 0.0, -1.0;
    const std::vector<double> theta{a};
    EXPECT_LT(max_abs(circuit_unitary(c, theta) - expm(-kI * (a / 2) * pauli)), 1e-14);
  }
}

TEST(CircuitUnitary, TwoQubitGatesMatchPermutations) {
  ParamCircuit c(3);
  c.add(GateKind::CNOT, {2, 0});
  EXPECT_LT(max_abs(circuit_unitary(c, {}) - cnot_matrix(3, 2, 0)), 1e-15);
  ParamCircuit z(3);
  z.add(GateKind::CZ, {0, 2});
  EXPECT_LT(max_abs(circuit_unitary(z, {}) - cz_matrix(3, 0, 2)), 1e-15);
}

TEST(CircuitUnitary, CnotInvolution) {
  ParamCircuit c(2);
  c.add(GateKind::CNOT, {0, 1}).add(GateKind::CNOT, {0, 1});
  EXPECT_LT(max_abs(circuit_unitary(c, {}) - identity(4)), 1e-15);
}

TEST(CircuitUnitary, GateOrderIsLeftToRight) {
  ParamCircuit c(2);
  c.add(GateKind::H, {0}).add(GateKind::CNOT, {0, 1});
  ComplexMatrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  h /= std::sqrt(2.0);
  const ComplexMatrix expected = cnot_matrix(2, 0, 1) * kron(h, identity(2));
  EXPECT_LT(max_abs(circuit_unitary(c, {}) - expected), 1e-15);
}

TEST(CircuitUnitary, UnitaryForRandomTheta) {
  Rng rng(31);
  for (const auto& c : all_builders()) {
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(is_unitary(circuit_unitary(c, random_theta(rng, c.param_count())), 1e-10));
  }
}

TEST(CircuitUnitary, ThetaLengthChecked) {
  const auto c = build_two_level_ansatz(1);
  EXPECT_THROW(circuit_unitary(c, std::vector<double>(3)), CircuitError);
}

TEST(CircuitUnitary, ColumnsMatchFullUnitary) {
  Rng rng(32);
  const auto c = build_two_level_ansatz(3);
  const auto theta = random_theta(rng, c.param_count());
  EXPECT_LT(max_abs(circuit_columns(c, theta, 4) - circuit_unitary(c, theta).leftCols(4)), 1e-14);
}

TEST(CircuitUnitary, FiniteDifferenceDerivativesAgree) {
  // Forward and central differences of every entry agree for each slot.
  Rng rng(33);
  const auto c = build_two_level_ansatz(1);
  auto theta = random_theta(rng, c.param_count());
  const double h = 1e-5;
  for (std::size_t s = 0; s < theta.size(); ++s) {
    const double t0 = theta[s];
    const ComplexMatrix u0 = circuit_unitary(c, theta);
    theta[s] = t0 + h;
    const ComplexMatrix up = circuit_unitary(c, theta);
    theta[s] = t0 - h;
    const ComplexMatrix um = circuit_unitary(c, theta);
    theta[s] = t0;
    EXPECT_LT(max_abs((up - u0) / h - (up - um) / (2 * h)), 1e-5);
    // Each rotation angle enters as exp(-i theta P / 2): the derivative has norm <= 1/2 per entry block.
    EXPECT_LT(max_abs((up - um) / (2 * h)), 0.5 + 1e-6);
  }
}

TEST(CircuitUnitary, AdjointGradientMatchesFiniteDifference) {
  Rng rng(34);
  for (const auto& c : all_builders()) {
    const auto theta = random_theta(rng, c.param_count());
    const ComplexMatrix target = 0.5 * vqaud::testing::random_contraction(rng, 4);
    std::vector<double> grad(theta.size());
    const double sq = block_residual_sq_and_gradient(c, theta, target, grad);
    const ComplexMatrix u = circuit_unitary(c, theta);
    EXPECT_NEAR(sq, (u.topLeftCorner(4, 4) - target).squaredNorm(), 1e-12);
    auto x = theta;
    for (std::size_t s = 0; s < x.size(); ++s) {
      const double h = 1e-6, t0 = x[s];
      x[s] = t0 + h;
      const double fp = (circuit_unitary(c, x).topLeftCorner(4, 4) - target).squaredNorm();
      x[s] = t0 - h;
      const double fm = (circuit_unitary(c, x).topLeftCorner(4, 4) - target).squaredNorm();
      x[s] = t0;
      EXPECT_NEAR(grad[s], (fp - fm) / (2 * h), 1e-7);
    }
  }
}

TEST(TwoLevelAnsatz, Counts) {
  EXPECT_EQ(gate_counts(build_two_level_ansatz(4)), (GateCounts{36, 8, 3}));
  EXPECT_EQ(gate_counts(build_two_level_ansatz(1)), (GateCounts{9, 2, 3}));
  EXPECT_EQ(build_two_level_ansatz(4).param_count(), 36u);
}

TEST(TwoLevelAnsatz, ZeroAnglesGiveTheEntanglerProduct) {
  const auto c = build_two_level_ansatz(4);
  ComplexMatrix expected = identity(8);
  for (std::size_t layer = 0; layer < 4; ++layer) {
    const std::size_t f = layer % 3;
    expected = cnot_matrix(3, (f + 1) % 3, (f + 2) % 3) * cnot_matrix(3, f, (f + 1) % 3) * expected;
  }
  EXPECT_LT(max_abs(circuit_unitary(c, std::vector<double>(c.param_count(), 0.0)) - expected), 1e-15);
}

TEST(MultilevelAnsatz, CountsAndZeroAngles) {
  const std::vector<QubitPair> one{{0, 1}};
  const auto c = build_multilevel_ansatz(5, 1, one);
  EXPECT_EQ(gate_counts(c), (GateCounts{10, 1, 5}));
  for (std::size_t b : {1u, 2u, 5u}) EXPECT_EQ(build_multilevel_ansatz(5, b, one).param_count(), 10 * b);
  const auto pairs = default_entangler_pairs(3);
  const auto z = build_multilevel_ansatz(3, 2, pairs);
  ComplexMatrix expected = identity(8);
  for (int b = 0; b < 2; ++b)
    for (const auto& [p, q] : pairs) expected = cz_matrix(3, p, q) * expected;
  EXPECT_LT(max_abs(circuit_unitary(z, std::vector<double>(z.param_count(), 0.0)) - expected), 1e-15);
}

TEST(SequentialAnsatz, Counts) {
  const auto pairs = default_entangler_pairs(5);
  EXPECT_EQ(pairs.size(), 7u);
  EXPECT_EQ(gate_counts(build_sequential_ansatz(5, 25, pairs)), (GateCounts{110, 25, 5}));
  EXPECT_EQ(gate_counts(build_sequential_ansatz(5, 49, pairs)), (GateCounts{206, 49, 5}));
  EXPECT_EQ(gate_counts(build_sequential_ansatz(5, 41, pairs)), (GateCounts{174, 41, 5}));
  EXPECT_EQ(gate_counts(build_sequential_ansatz(5, 57, pairs)), (GateCounts{238, 57, 5}));
  EXPECT_THROW(build_sequential_ansatz(5, 3, std::vector<QubitPair>{}), CircuitError);
}

TEST(GateCounts, EmptyAndConcatenation) {
  EXPECT_EQ(gate_counts(ParamCircuit(4)), (GateCounts{0, 0, 4}));
  const auto a = build_two_level_ansatz(2), b = build_two_level_ansatz(3);
  EXPECT_EQ(gate_counts(a.concat(b)), gate_counts(a) + gate_counts(b));
  EXPECT_EQ(a.concat(b).param_count(), a.param_count() + b.param_count());
}

TEST(CircuitValidation, RejectsBadGates) {
  ParamCircuit c(2);
  EXPECT_THROW(c.add(GateKind::CNOT, {0, 0}), CircuitError);
  EXPECT_THROW(c.add(GateKind::H, {2}), CircuitError);
  EXPECT_THROW(c.add(GateKind::RX, {0}), CircuitError);
  EXPECT_THROW(ParamCircuit(0), CircuitError);
  c.add_rotation(GateKind::RY, 0, 2);
  EXPECT_THROW(c.validate(), CircuitError);  // slots 0 and 1 unused
}

TEST(Noise, ZeroNoiseIsConjugation) {
  Rng rng(35);
  for (const auto& c : all_builders()) {
    const auto theta = random_theta(rng, c.param_count());
    const auto d = static_cast<Eigen::Index>(c.dim());
    const ComplexMatrix rho = random_density(rng, d);
    const ComplexMatrix u = circuit_unitary(c, theta);
    EXPECT_LT(max_abs(apply_noisy(c, theta, rho, NoiseModel{}) - u * rho * u.adjoint()), 1e-12);
  }
}

TEST(Noise, FullDampingAfterX) {
  ParamCircuit c(1);
  c.add(GateKind::X, {0});
  const ComplexMatrix out = apply_noisy(c, {}, [] {
    ComplexMatrix r = ComplexMatrix::Zero(2, 2);
    r(0, 0) = 1.0;
    return r;
  }(), NoiseModel{0.0, 1.0});
  EXPECT_NEAR(out(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(out(1, 1)), 0.0, 1e-15);
}

TEST(Noise, DephasingScalesCoherences) {
  ParamCircuit c(1);
  c.add(GateKind::H, {0});
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  const double lambda = 0.2;
  const ComplexMatrix out = apply_noisy(c, {}, rho, NoiseModel{lambda, 0.0});
  EXPECT_NEAR(out(0, 1).real(), 0.5 * (1.0 - 2.0 * lambda), 1e-15);
  EXPECT_NEAR(out(0, 0).real(), 0.5, 1e-15);
}

TEST(Noise, TraceAndPositivityPreserved) {
  Rng rng(36);
  const auto c = build_two_level_ansatz(2);
  for (double lambda : {0.0, 0.1, 0.5, 1.0}) {
    for (double omega : {0.0, 0.3, 1.0}) {
      const auto theta = random_theta(rng, c.param_count());
      const ComplexMatrix out = apply_noisy(c, theta, random_density(rng, 8), NoiseModel{lambda, omega});
      EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
      EXPECT_TRUE(is_hermitian(out, 1e-12));
      EXPECT_GE(min_hermitian_eigenvalue(out), -1e-10);
    }
  }
  EXPECT_THROW(apply_noisy(c, random_theta(rng, c.param_count()), random_density(rng, 8), NoiseModel{1.5, 0.0}),
               CircuitError);
}

TEST(Noise, SlicedUnitaryNoise) {
  Rng rng(37);
  const auto c = build_two_level_ansatz(2);
  const ComplexMatrix u = circuit_unitary(c, random_theta(rng, c.param_count()));
  const ComplexMatrix rho = random_density(rng, 8);
  const GateCounts budget{20, 6, 3};
  EXPECT_LT(max_abs(apply_unitary_with_sliced_noise(u, rho, NoiseModel{}, budget) - u * rho * u.adjoint()), 1e-10);
  const ComplexMatrix noisy = apply_unitary_with_sliced_noise(u, rho, NoiseModel{0.05, 0.02}, budget);
  EXPECT_NEAR(noisy.trace().real(), 1.0, 1e-12);
  EXPECT_GE(min_hermitian_eigenvalue(noisy), -1e-10);
  EXPECT_GT(max_abs(noisy - u * rho * u.adjoint()), 1e-3);
}
