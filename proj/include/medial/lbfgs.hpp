#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace medial {

struct LbfgsOptions {
  int memory = 7;
  int max_iterations = 100;
  /// Stop when the max-norm of the gradient drops below this.
  double grad_tol = 5e-3;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 20;
  /// Largest allowed max-norm of a single step.
  double max_step = std::numeric_limits<double>::infinity();
};

struct LbfgsResult {
  int iterations = 0;
  int evaluations = 0;
  double f = 0.0;
  double grad_max = 0.0;
  bool converged = false;
  bool line_search_failed = false;
  /// Objective after each accepted step, starting with the initial value.
  std::vector<double> history;
};

/// Objective callback: returns f(x) and writes the gradient into g.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& g)>;

/// Limited-memory BFGS with a strong Wolfe line search. x is updated in place.
LbfgsResult lbfgs_minimize(Eigen::VectorXd& x, const Objective& fg, const LbfgsOptions& options = {});

}  // namespace medial
