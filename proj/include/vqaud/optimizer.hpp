#pragma once

// BFGS quasi-Newton minimizer with backtracking line search.
//
// Inverse-Hessian recursion, with s = x_{k+1} - x_k and y = g_{k+1} - g_k:
//   H <- (I - s y^T / y^T s) H (I - y s^T / y^T s) + s s^T / y^T s
// The update is skipped when y^T s <= kCurvatureGuard.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "vqaud/rng.hpp"

namespace vqaud {

using CostFn = std::function<double(std::span<const double>)>;
/// Returns f(x); fills grad when it is non-empty.
using CostGradFn = std::function<double(std::span<const double>, std::span<double>)>;

class OptimizerError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class LineSearch {
  armijo,       // eta = 1, 1/2, 1/4, ... until sufficient decrease
  interpolate,  // quadratic-interpolated first trial, then Armijo backtracking
};

struct BfgsOptions {
  std::size_t max_iters = 2000;
  double grad_tol = 1e-8;
  double cost_tol = 1e-12;
  double fd_step = 1e-6;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  LineSearch line_search = LineSearch::armijo;
  double armijo_c1 = 1e-4;
  std::size_t max_backtracks = 50;

  void validate() const {
    if (!(grad_tol > 0.0 && cost_tol > 0.0 && fd_step > 0.0)) throw OptimizerError("bfgs: tolerances must be positive");
    if (restarts < 1) throw OptimizerError("bfgs: restarts must be >= 1");
  }
};

struct OptimResult {
  std::vector<double> theta_star;
  double cost_star = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t restart_index = 0;
  Eigen::MatrixXd inverse_hessian;   // final estimate of the winning restart
  std::vector<double> cost_history;  // accepted iterate costs, starting at f(x0)
};

inline constexpr double kCurvatureGuard = 1e-12;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
inline std::vector<double> fd_gradient(const CostFn& f, std::span<const double> theta, double h) {
  if (!(h > 0.0)) throw OptimizerError("fd_gradient: step must be positive");
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw OptimizerError("fd_gradient: non-finite function value");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline CostGradFn with_fd_gradient(CostFn f, double h) {
  return [f = std::move(f), h](std::span<const double> x, std::span<double> grad) {
    if (!grad.empty()) {
      const auto g = fd_gradient(f, x, h);
      std::copy(g.begin(), g.end(), grad.begin());
    }
    return f(x);
  };
}

/// H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T, rho = 1 / y^T s.
/// Returns false (H untouched) when the curvature guard trips.
inline bool bfgs_inverse_update(Eigen::MatrixXd& h, const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  const double ys = y.dot(s);
  if (!(ys > kCurvatureGuard)) return false;
  const double rho = 1.0 / ys;
  // Expanded form of the product above, O(n^2) instead of O(n^3).
  const Eigen::VectorXd hy = h * y;
  const double yhy = y.dot(hy);
  h.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
  h.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
  h = 0.5 * (h + h.transpose()).eval();
  return true;
}

namespace detail {

inline OptimResult bfgs_single(const CostGradFn& fg, std::vector<double> x0, const BfgsOptions& opts) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  Eigen::VectorXd g(n), g_new(n), x_new(n);
  auto eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    return fg(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
              grad ? std::span<double>(grad->data(), static_cast<std::size_t>(grad->size())) : std::span<double>{});
  };

  OptimResult res;
  double f = eval(x, &g);
  if (!std::isfinite(f)) throw OptimizerError("bfgs: objective not finite at the starting point");
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  res.cost_history.push_back(f);

  std::size_t iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    if (g.norm() <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -h * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h.setIdentity();
      d = -g;
      slope = g.dot(d);
    }

    double eta = 1.0;
    if (opts.line_search == LineSearch::interpolate) {
      const double f1 = eval(x + d, nullptr);
      const double curv = f1 - f - slope;
      if (std::isfinite(f1) && curv > 0.0) eta = std::min(1.0, -slope / (2.0 * curv));
    }
    bool accepted = false;
    double f_new = f;
    for (std::size_t bt = 0; bt <= opts.max_backtracks; ++bt) {
      x_new = x + eta * d;
      f_new = eval(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + opts.armijo_c1 * eta * slope) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // line-search failure: not converged

    eval(x_new, &g_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    bfgs_inverse_update(h, s, y);
    const double df = std::abs(f - f_new);
    x = x_new;
    g = g_new;
    f = f_new;
    res.cost_history.push_back(f);
    if (df <= opts.cost_tol) {
      res.converged = true;
      ++iter;
      break;
    }
  }
  res.iterations = iter;
  res.theta_star.assign(x.data(), x.data() + n);
  res.cost_star = eval(x, nullptr);
  res.inverse_hessian = std::move(h);
  return res;
}

}  // namespace detail

/// Best-of-restarts BFGS with a caller-supplied gradient. Restart 0 starts
/// from theta0; restart r > 0 draws theta uniform in [-pi, pi]^p from seed + r.
inline OptimResult bfgs_minimize_with_gradient(const CostGradFn& fg, std::span<const double> theta0,
                                               const BfgsOptions& opts) {
  opts.validate();
  OptimResult best;
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    std::vector<double> start(theta0.begin(), theta0.end());
    if (r > 0) {
      Rng rng(opts.seed + r);
      for (auto& v : start) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    OptimResult run = detail::bfgs_single(fg, std::move(start), opts);
    run.restart_index = r;
    if (r == 0 || run.cost_star < best.cost_star) best = std::move(run);
  }
  return best;
}

/// Same, with central finite-difference gradients at opts.fd_step.
inline OptimResult bfgs_minimize(const CostFn& f, std::span<const double> theta0, const BfgsOptions& opts) {
  opts.validate();
  return bfgs_minimize_with_gradient(with_fd_gradient(f, opts.fd_step), theta0, opts);
}

}  // namespace vqaud
