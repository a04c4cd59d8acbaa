#pragma once

// Vectorized Lindblad generators, propagators and the RK4 reference solver.
//
// Vectorization is column stacking: vec(rho) = (rho_00, rho_10, ..., rho_{n-1,n-1}),
// so vec(A rho B) = (B^T kron A) vec(rho).

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqaud/linalg.hpp"

namespace vqaud {

class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct CollapseTerm {
  ComplexMatrix op;
  double rate = 0.0;
};

struct LindbladModel {
  std::size_t dim = 0;
  ComplexMatrix hamiltonian;
  std::vector<CollapseTerm> collapse_ops;

  void validate() const {
    const auto n = static_cast<Eigen::Index>(dim);
    if (dim == 0) throw ModelError("model: dim must be positive");
    if (hamiltonian.rows() != n || hamiltonian.cols() != n) {
      throw ModelError("model: hamiltonian is not " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (!is_hermitian(hamiltonian, 1e-12)) throw ModelError("model: hamiltonian is not Hermitian");
    for (const auto& c : collapse_ops) {
      if (c.op.rows() != n || c.op.cols() != n) throw ModelError("model: collapse operator dimension mismatch");
      if (!(c.rate >= 0.0)) throw ModelError("model: collapse rates must be non-negative");
    }
  }
};

struct TclParams {
  double gamma0 = 1.0;
  double spectral_width = 0.2;
  double detuning = 1.6;

  void validate() const {
    if (!(gamma0 > 0.0)) throw ModelError("tcl: gamma0 must be positive");
    if (!(spectral_width > 0.0)) throw ModelError("tcl: spectral_width must be positive");
  }
};

// ---------------------------------------------------------------------------
// Vectorization

inline ComplexVector vectorize(const ComplexMatrix& rho) {
  require_square(rho, "vectorize");
  const Eigen::Index n = rho.rows();
  ComplexVector v(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) v(i + n * j) = rho(i, j);
  return v;
}

inline ComplexMatrix devectorize(const ComplexVector& v) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (n * n != v.size()) throw ModelError("devectorize: length " + std::to_string(v.size()) + " is not a perfect square");
  ComplexMatrix rho(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) rho(i, j) = v(i + n * j);
  return rho;
}

/// Row vector vec(I)^dagger; the trace functional on vectorized states.
inline ComplexVector trace_functional(Eigen::Index n) { return vectorize(identity(n)); }

// ---------------------------------------------------------------------------
// Superoperators

inline ComplexMatrix commutator_superop(const ComplexMatrix& h) {
  const ComplexMatrix id = identity(h.rows());
  return -kI * (kron(id, h) - kron(h.transpose(), id));
}

/// D[C] as a superoperator: C* kron C - 1/2 (I kron C^dag C + C^T C* kron I).
inline ComplexMatrix dissipator_superop(const ComplexMatrix& c) {
  const ComplexMatrix id = identity(c.rows());
  const ComplexMatrix cdc = c.adjoint() * c;
  return kron(c.conjugate(), c) - 0.5 * (kron(id, cdc) + kron(cdc.transpose(), id));
}

/// Generator with rates applied bilinearly (rate * D[op]); negative rates are
/// admitted here so time-convolutionless generators can reuse it.
inline ComplexMatrix liouvillian_from_terms(const ComplexMatrix& h, std::span<const CollapseTerm> terms) {
  require_square(h, "liouvillian");
  ComplexMatrix l = commutator_superop(h);
  for (const auto& t : terms) {
    if (t.op.rows() != h.rows() || t.op.cols() != h.cols()) {
      throw ModelError("liouvillian: collapse operator dimension mismatch");
    }
    if (t.rate != 0.0) l += t.rate * dissipator_superop(t.op);
  }
  return l;
}

inline ComplexMatrix build_liouvillian(const LindbladModel& model) {
  model.validate();
  return liouvillian_from_terms(model.hamiltonian, model.collapse_ops);
}

/// Direct evaluation of -i[H,rho] + sum_k g_k (C rho C^dag - 1/2 {C^dag C, rho}).
inline ComplexMatrix lindblad_rhs(const ComplexMatrix& h, std::span<const CollapseTerm> terms,
                                  const ComplexMatrix& rho) {
  ComplexMatrix out = -kI * (h * rho - rho * h);
  for (const auto& t : terms) {
    const ComplexMatrix cdc = t.op.adjoint() * t.op;
    out += t.rate * (t.op * rho * t.op.adjoint() - 0.5 * (cdc * rho + rho * cdc));
  }
  return out;
}

inline ComplexMatrix propagator(const ComplexMatrix& liouvillian, double t) {
  if (!(t >= 0.0)) throw ModelError("propagator: t must be non-negative");
  return expm(liouvillian * cplx(t, 0.0));
}

// ---------------------------------------------------------------------------
// Steady state

struct SteadyState {
  ComplexMatrix rho;        // trace-one zero-eigenvalue state
  ComplexMatrix projector;  // vec(rho) vec(I)^dagger
};

inline SteadyState steady_state(const ComplexMatrix& liouvillian, double rel_tol = 1e-9) {
  require_square(liouvillian, "steady_state");
  const auto dec = svd(liouvillian);
  const Eigen::Index m = dec.sigma.size();
  if (m < 1) throw ModelError("steady_state: empty generator");
  const double tol = rel_tol * std::max(1.0, dec.sigma(0));
  if (dec.sigma(m - 1) > tol) throw ModelError("steady_state: generator has no zero eigenvalue");
  if (m > 1 && dec.sigma(m - 2) <= tol) {
    throw ModelError("steady_state: zero eigenspace is degenerate (" + std::to_string(dec.sigma(m - 2)) + ")");
  }
  ComplexMatrix rho = devectorize(dec.v.col(m - 1));
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-12) throw ModelError("steady_state: null vector is traceless");
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const ComplexVector ones = trace_functional(rho.rows());
  return {rho, vectorize(rho) * ones.adjoint()};
}

inline ComplexMatrix steady_state_propagator(const ComplexMatrix& liouvillian) {
  return steady_state(liouvillian).projector;
}

/// Smallest |Re lambda| over the non-zero eigenvalues of the generator.
inline double relaxation_gap(const ComplexMatrix& liouvillian, double zero_tol = 1e-9) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(liouvillian, false);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx ev = es.eigenvalues()(i);
    if (std::abs(ev) > zero_tol) gap = std::min(gap, std::abs(ev.real()));
  }
  return gap;
}

// ---------------------------------------------------------------------------
// Time-convolutionless (TCL4) damped Jaynes-Cummings model.
//
// The Lamb shift is evaluated with the powers of lambda/Delta multiplied
// through by the Delta^3 prefactor, so Delta = 0 is well defined.

inline double tcl_lamb_shift(const TclParams& p, double t) {
  const double g0 = p.gamma0, l = p.spectral_width, d = p.detuning;
  const double e = std::exp(-l * t);
  const double den = l * l + d * d;
  const double first = g0 * l / den * (d * (1.0 - e * std::cos(d * t)) - l * e * std::sin(d * t));
  const double braces = (d * d * d - 3.0 * l * l * d) * (e - e * std::cos(2.0 * d * t)) -
                        2.0 * (d * d * d * d - l * l * l * l) * t * std::sin(d * t) +
                        4.0 * (d * d * d + l * l * d) * l * t * std::cos(d * t) -
                        l * (3.0 * d * d - l * l) * e * std::sin(2.0 * d * t);
  const double second = -g0 * g0 * l * l * e / (2.0 * den * den * den) * braces;
  return first + second;
}

inline double tcl_decay_rate(const TclParams& p, double t) {
  const double g0 = p.gamma0, l = p.spectral_width, d = p.detuning;
  const double e = std::exp(-l * t);
  const double den = l * l + d * d;
  const double r = d / l;
  const double first = g0 * l * l / den * (1.0 - e * (std::cos(d * t) - r * std::sin(d * t)));
  const double braces = (1.0 - 3.0 * r * r) * (e - e * std::cos(2.0 * d * t)) -
                        2.0 * (1.0 - r * r * r * r) * l * t * std::cos(d * t) +
                        4.0 * (1.0 + r * r) * d * t * std::sin(d * t) +
                        r * (3.0 - r * r) * e * std::sin(2.0 * d * t);
  const double second = g0 * g0 * std::pow(l, 5) * e / (2.0 * den * den * den) * braces;
  return first + second;
}

/// sigma_minus = |0><1| (|1> is the excited state).
inline ComplexMatrix sigma_minus() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

inline ComplexMatrix tcl_liouvillian(const TclParams& p, double t) {
  const ComplexMatrix sm = sigma_minus();
  const ComplexMatrix excited = sm.adjoint() * sm;
  const CollapseTerm term{sm, tcl_decay_rate(p, t)};
  return liouvillian_from_terms(0.5 * tcl_lamb_shift(p, t) * excited, std::span(&term, 1));
}

using GeneratorFn = std::function<ComplexMatrix(double)>;

/// Midpoint product rule prod_k exp(L(t_k + dt/2) dt), later factors on the left.
inline ComplexMatrix time_ordered_propagator(const GeneratorFn& generator, double t0, double t1, std::size_t steps) {
  if (steps < 1) throw ModelError("time_ordered_propagator: steps must be >= 1");
  if (!(t1 >= t0)) throw ModelError("time_ordered_propagator: t1 < t0");
  const ComplexMatrix first = generator(t0);
  ComplexMatrix out = identity(first.rows());
  if (t1 == t0) return out;
  const double dt = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double mid = t0 + (static_cast<double>(k) + 0.5) * dt;
    out = (expm(generator(mid) * cplx(dt, 0.0)) * out).eval();
  }
  return out;
}

inline constexpr double kDefaultStepsPerUnit = 2000.0;

inline std::size_t default_tcl_steps(const TclParams& p, double t) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(kDefaultStepsPerUnit * p.gamma0 * t)));
}

inline ComplexMatrix time_ordered_propagator(const TclParams& p, double t, std::size_t steps) {
  p.validate();
  if (!(t >= 0.0)) throw ModelError("time_ordered_propagator: t must be non-negative");
  return time_ordered_propagator([&p](double s) { return tcl_liouvillian(p, s); }, 0.0, t, steps);
}

/// Frobenius change when the step count is doubled; a posteriori error estimate.
inline double time_ordering_error_estimate(const TclParams& p, double t, std::size_t steps) {
  return (time_ordered_propagator(p, t, 2 * steps) - time_ordered_propagator(p, t, steps)).norm();
}

/// Propagators from 0 to each (ascending) grid time, built incrementally.
inline std::vector<ComplexMatrix> time_ordered_propagators(const TclParams& p, std::span<const double> grid,
                                                           double steps_per_unit = kDefaultStepsPerUnit) {
  p.validate();
  std::vector<ComplexMatrix> out;
  out.reserve(grid.size());
  ComplexMatrix acc = identity(4);
  double prev = 0.0;
  const GeneratorFn gen = [&p](double s) { return tcl_liouvillian(p, s); };
  for (double t : grid) {
    if (t < prev) throw ModelError("time_ordered_propagators: grid must be ascending and non-negative");
    if (t > prev) {
      const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(steps_per_unit * p.gamma0 * (t - prev))));
      acc = (time_ordered_propagator(gen, prev, t, steps) * acc).eval();
    }
    out.push_back(acc);
    prev = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// RK4 reference solver

struct Rk4Options {
  double initial_step = 0.01;
  double tolerance = 1e-8;  // max change under step halving
  int max_halvings = 12;
};

namespace detail {

inline std::vector<ComplexVector> rk4_fixed(const GeneratorFn& generator, const ComplexVector& v0,
                                            std::span<const double> grid, double max_step) {
  std::vector<ComplexVector> out;
  out.reserve(grid.size());
  ComplexVector v = v0;
  out.push_back(v);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double span = grid[g] - grid[g - 1];
    const auto steps = std::max<long>(1, static_cast<long>(std::ceil(span / max_step - 1e-12)));
    const double h = span / static_cast<double>(steps);
    double t = grid[g - 1];
    for (long s = 0; s < steps; ++s) {
      const ComplexMatrix l0 = generator(t);
      const ComplexMatrix lm = generator(t + 0.5 * h);
      const ComplexMatrix l1 = generator(t + h);
      const ComplexVector k1 = l0 * v;
      const ComplexVector k2 = lm * (v + 0.5 * h * k1);
      const ComplexVector k3 = lm * (v + 0.5 * h * k2);
      const ComplexVector k4 = l1 * (v + h * k3);
      v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Classic RK4 on d vec(rho)/dt = L(t) vec(rho), starting at grid[0] from rho0.
/// The step is halved until the grid outputs change by less than the tolerance.
inline std::vector<ComplexMatrix> rk4_solve(const GeneratorFn& generator, const ComplexMatrix& rho0,
                                            std::span<const double> grid, const Rk4Options& opts = {}) {
  if (grid.empty()) throw ModelError("rk4_solve: empty time grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ModelError("rk4_solve: time grid must be ascending");
  const ComplexVector v0 = vectorize(rho0);
  double h = opts.initial_step;
  auto coarse = detail::rk4_fixed(generator, v0, grid, h);
  for (int k = 0; k < opts.max_halvings; ++k) {
    h *= 0.5;
    auto fine = detail::rk4_fixed(generator, v0, grid, h);
    double change = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) change = std::max(change, (fine[i] - coarse[i]).cwiseAbs().maxCoeff());
    coarse = std::move(fine);
    if (change < opts.tolerance) break;
  }
  std::vector<ComplexMatrix> out;
  out.reserve(coarse.size());
  for (const auto& v : coarse) out.push_back(devectorize(v));
  return out;
}

inline std::vector<ComplexMatrix> rk4_solve(const LindbladModel& model, const ComplexMatrix& rho0,
                                            std::span<const double> grid, const Rk4Options& opts = {}) {
  const ComplexMatrix l = build_liouvillian(model);
  return rk4_solve([&l](double) { return l; }, rho0, grid, opts);
}

// ---------------------------------------------------------------------------
// Benchmark models

/// Driven two-level system: H = omega/2 (|0><1| + |1><0|), decay |0><1| at
/// rate gamma and dephasing (|1><1| - |0><0|) at rate gamma_dp.
inline LindbladModel two_level_model(double omega = 1.0, double gamma = 0.1, double gamma_dp = 0.02) {
  LindbladModel m;
  m.dim = 2;
  m.hamiltonian = ComplexMatrix::Zero(2, 2);
  m.hamiltonian(0, 1) = m.hamiltonian(1, 0) = 0.5 * omega;
  ComplexMatrix dephase = ComplexMatrix::Zero(2, 2);
  dephase(0, 0) = -1.0;
  dephase(1, 1) = 1.0;
  m.collapse_ops = {{sigma_minus(), gamma}, {dephase, gamma_dp}};
  return m;
}

/// One ground state |0> coupled to `excited` excited states with equal drive
/// omega and equal decay gamma back to |0>. excited = 2 is the V-type system.
inline LindbladModel ground_coupled_model(std::size_t excited, double omega = 1.0, double gamma = 0.1) {
  const auto n = static_cast<Eigen::Index>(excited + 1);
  LindbladModel m;
  m.dim = excited + 1;
  m.hamiltonian = ComplexMatrix::Zero(n, n);
  for (Eigen::Index e = 1; e < n; ++e) {
    m.hamiltonian(0, e) = m.hamiltonian(e, 0) = 0.5 * omega;
    ComplexMatrix c = ComplexMatrix::Zero(n, n);
    c(0, e) = 1.0;
    m.collapse_ops.push_back({c, gamma});
  }
  return m;
}

inline LindbladModel v_type_three_level(double omega = 1.0, double gamma = 0.1) {
  return ground_coupled_model(2, omega, gamma);
}

inline LindbladModel four_level_model(double omega = 1.0, double gamma = 0.1) {
  return ground_coupled_model(3, omega, gamma);
}

inline ComplexMatrix basis_projector(Eigen::Index n, Eigen::Index k) {
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  p(k, k) = 1.0;
  return p;
}

/// |+><+| for the uniform superposition over n levels.
inline ComplexMatrix uniform_superposition(Eigen::Index n) {
  return ComplexMatrix::Constant(n, n, cplx(1.0 / static_cast<double>(n), 0.0));
}

inline std::vector<double> populations(const ComplexMatrix& rho) {
  std::vector<double> p(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index i = 0; i < rho.rows(); ++i) p[static_cast<std::size_t>(i)] = rho(i, i).real();
  return p;
}

}  // namespace vqaud
