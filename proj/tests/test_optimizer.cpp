#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "vqaud/optimizer.hpp"
#include "vqaud/rng.hpp"

using namespace vqaud;

namespace {

BfgsOptions single_run() {
  BfgsOptions o;
  o.restarts = 1;
  return o;
}

double rosenbrock(std::span<const double> x) {
  return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

}  // namespace

TEST(FdGradient, QuadraticAndConstant) {
  const CostFn f = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  const std::vector<double> x{1.0, 2.0};
  const auto g = fd_gradient(f, x, 1e-6);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 4.0, 1e-8);
  const auto z = fd_gradient([](std::span<const double>) { return 3.0; }, x, 1e-6);
  EXPECT_EQ(z, (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(fd_gradient(f, x, 0.0), OptimizerError);
}

TEST(FdGradient, RandomQuarticMatchesSymbolicDerivative) {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    double c[3][5];
    for (auto& row : c)
      for (auto& v : row) v = rng.uniform(-1.0, 1.0);
    const CostFn f = [&c](std::span<const double> x) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 5; ++k) s += c[i][k] * std::pow(x[i], k);
      return s + x[0] * x[1] * x[2];
    };
    std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto g = fd_gradient(f, x, 1e-5);
    for (int i = 0; i < 3; ++i) {
      double d = 0.0;
      for (int k = 1; k < 5; ++k) d += k * c[i][k] * std::pow(x[i], k - 1);
      d += x[(i + 1) % 3] * x[(i + 2) % 3];
      EXPECT_NEAR(g[i], d, 1e-5);
    }
  }
}

TEST(Bfgs, ShiftedSphereConvergesFast) {
  Rng rng(42);
  for (std::size_t p : {1u, 3u, 6u}) {
    std::vector<double> c(p), x0(p);
    for (auto& v : c) v = rng.uniform(-2, 2);
    for (auto& v : x0) v = rng.uniform(-2, 2);
    const CostGradFn fg = [&c](std::span<const double> x, std::span<double> g) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        s += (x[i] - c[i]) * (x[i] - c[i]);
        if (!g.empty()) g[i] = 2.0 * (x[i] - c[i]);
      }
      return s;
    };
    BfgsOptions o = single_run();
    o.line_search = LineSearch::interpolate;
    const auto r = bfgs_minimize_with_gradient(fg, x0, o);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, p + 2);
    for (std::size_t i = 0; i < p; ++i) EXPECT_NEAR(r.theta_star[i], c[i], 1e-8);
  }
}

TEST(Bfgs, Rosenbrock) {
  BfgsOptions o = single_run();
  o.max_iters = 5000;
  o.cost_tol = 1e-20;
  const std::vector<double> x0{-1.2, 1.0};
  const auto r = bfgs_minimize(rosenbrock, x0, o);
  EXPECT_NEAR(r.theta_star[0], 1.0, 1e-6);
  EXPECT_NEAR(r.theta_star[1], 1.0, 1e-6);
}

TEST(Bfgs, ConstantFunctionStopsImmediately) {
  const std::vector<double> x0{0.3, -0.7};
  const auto r = bfgs_minimize([](std::span<const double>) { return 5.0; }, x0, single_run());
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.theta_star, x0);
}

TEST(Bfgs, AcceptedCostsNeverIncrease) {
  const std::vector<double> x0{-1.2, 1.0};
  BfgsOptions o = single_run();
  o.max_iters = 200;
  for (auto ls : {LineSearch::armijo, LineSearch::interpolate}) {
    o.line_search = ls;
    const auto r = bfgs_minimize(rosenbrock, x0, o);
    ASSERT_GE(r.cost_history.size(), 2u);
    for (std::size_t k = 1; k < r.cost_history.size(); ++k) EXPECT_LE(r.cost_history[k], r.cost_history[k - 1]);
  }
}

TEST(Bfgs, InverseHessianStaysSymmetricPositiveDefinite) {
  const std::vector<double> x0{-1.2, 1.0};
  BfgsOptions o = single_run();
  for (std::size_t iters : {3u, 10u, 40u}) {
    o.max_iters = iters;
    const auto r = bfgs_minimize(rosenbrock, x0, o);
    const Eigen::MatrixXd& h = r.inverse_hessian;
    EXPECT_LE((h - h.transpose()).norm(), 1e-10);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Bfgs, InverseUpdateSatisfiesSecantAndGuard) {
  Rng rng(43);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd s(4), y(4);
  for (int i = 0; i < 4; ++i) s(i) = rng.uniform(-1, 1), y(i) = s(i) + 0.1 * rng.uniform(-1, 1);
  ASSERT_TRUE(bfgs_inverse_update(h, s, y));
  EXPECT_LT((h * y - s).norm(), 1e-12);
  // Reference: the product form of the same update.
  const double rho = 1.0 / y.dot(s);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd ref = (id - rho * s * y.transpose()) * (id - rho * y * s.transpose()) + rho * s * s.transpose();
  EXPECT_LT((h - ref).norm(), 1e-12);
  Eigen::MatrixXd untouched = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_FALSE(bfgs_inverse_update(untouched, s, -s));
  EXPECT_EQ(untouched, Eigen::MatrixXd::Identity(4, 4));
}

TEST(Bfgs, QuadraticRecoversTrueInverseHessian) {
  Rng rng(44);
  for (int p = 2; p <= 5; ++p) {
    // SPD A with spectrum in [1, 3], so the exact line step never exceeds 1.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) q(i, j) = rng.uniform(-1, 1);
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ();
    Eigen::VectorXd ev(p);
    for (int i = 0; i < p; ++i) ev(i) = 1.0 + 2.0 * i / (p - 1);
    const Eigen::MatrixXd a = basis * ev.asDiagonal() * basis.transpose();
    const CostGradFn fg = [&a](std::span<const double> x, std::span<double> g) {
      const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
      const Eigen::VectorXd av = a * v;
      if (!g.empty()) Eigen::Map<Eigen::VectorXd>(g.data(), av.size()) = av;
      return 0.5 * v.dot(av);
    };
    std::vector<double> x0(static_cast<std::size_t>(p));
    for (auto& v : x0) v = rng.uniform(-1, 1);
    BfgsOptions o = single_run();
    o.line_search = LineSearch::interpolate;
    o.grad_tol = 1e-12;
    o.cost_tol = 1e-30;
    const auto r = bfgs_minimize_with_gradient(fg, x0, o);
    EXPECT_LT((r.inverse_hessian - a.inverse()).norm(), 1e-6) << "p=" << p;
  }
}

TEST(Bfgs, DeterministicAcrossRuns) {
  BfgsOptions o;
  o.restarts = 4;
  o.seed = 9;
  o.max_iters = 50;
  const std::vector<double> x0{-1.2, 1.0};
  const auto a = bfgs_minimize(rosenbrock, x0, o);
  const auto b = bfgs_minimize(rosenbrock, x0, o);
  EXPECT_EQ(a.theta_star, b.theta_star);
  EXPECT_EQ(a.cost_star, b.cost_star);
  EXPECT_EQ(a.restart_index, b.restart_index);
}

TEST(Bfgs, RestartsNeverWorseThanTheFirstRun) {
  const std::vector<double> x0{-1.2, 1.0};
  BfgsOptions one = single_run();
  one.max_iters = 15;
  BfgsOptions many = one;
  many.restarts = 6;
  EXPECT_LE(bfgs_minimize(rosenbrock, x0, many).cost_star, bfgs_minimize(rosenbrock, x0, one).cost_star);
}

TEST(Bfgs, RejectsBadOptions) {
  BfgsOptions o;
  o.restarts = 0;
  const std::vector<double> x0{0.0};
  EXPECT_THROW(bfgs_minimize(rosenbrock, x0, o), OptimizerError);
  o = BfgsOptions{};
  o.grad_tol = -1;
  EXPECT_THROW(bfgs_minimize(rosenbrock, x0, o), OptimizerError);
}
