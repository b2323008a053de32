#include <random>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "medial/lbfgs.hpp"

using namespace medial;

TEST_CASE("random SPD quadratic reaches the linear-solve minimizer") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 12;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  const Eigen::MatrixXd a = m * m.transpose() + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = g(rng);
  const Eigen::VectorXd expected = a.ldlt().solve(b);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  LbfgsOptions opt;
  opt.grad_tol = 1e-10;
  opt.max_iterations = 500;
  const auto res = lbfgs_minimize(
      x,
      [&](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
        grad = a * v - b;
        return 0.5 * v.dot(a * v) - b.dot(v);
      },
      opt);
  CHECK(res.converged);
  CHECK((x - expected).norm() < 1e-8);
}

TEST_CASE("Rosenbrock from the classic start") {
  Eigen::VectorXd x(2);
  x << -1.2, 1.0;
  LbfgsOptions opt;
  opt.grad_tol = 1e-9;
  opt.max_iterations = 1000;
  const auto res = lbfgs_minimize(
      x,
      [](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
        const double a = 1.0 - v(0), b = v(1) - v(0) * v(0);
        grad(0) = -2.0 * a - 400.0 * v(0) * b;
        grad(1) = 200.0 * b;
        return a * a + 100.0 * b * b;
      },
      opt);
  CHECK(res.converged);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] <= res.history[i - 1]);
}

TEST_CASE("steps respect the max-norm cap") {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  std::vector<Eigen::VectorXd> iterates{x};
  LbfgsOptions opt;
  opt.max_step = 0.5;
  opt.max_iterations = 10;
  const Objective fg = [](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
    grad = 2.0 * (v.array() - 100.0).matrix();
    return (v.array() - 100.0).square().sum();
  };
  for (int k = 0; k < 10; ++k) {
    opt.max_iterations = 1;
    lbfgs_minimize(x, fg, opt);
    iterates.push_back(x);
  }
  for (std::size_t k = 1; k < iterates.size(); ++k) {
    CHECK((iterates[k] - iterates[k - 1]).lpNorm<Eigen::Infinity>() <= 0.5 + 1e-12);
    CHECK(iterates[k](0) > iterates[k - 1](0));
  }
}

TEST_CASE("zero gradient or empty problem stops at once") {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(0);
  auto res = lbfgs_minimize(x, [](const Eigen::VectorXd&, Eigen::VectorXd&) { return 1.0; });
  CHECK(res.converged);
  CHECK(res.iterations == 0);

  Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  res = lbfgs_minimize(y, [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
    g.setZero();
    return 2.0;
  });
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  CHECK(y == Eigen::VectorXd::Ones(4));
}
