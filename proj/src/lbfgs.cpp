#include "medial/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

namespace medial {

namespace {

struct Point {
  double a = 0.0;
  double f = 0.0;
  double dphi = 0.0;
  Eigen::VectorXd x, g;
};

struct LineSearch {
  const Objective& fg;
  const LbfgsOptions& opt;
  const Eigen::VectorXd& x0;
  const Eigen::VectorXd& d;
  double f0, dphi0;
  int evaluations = 0;

  Point eval(double a) {
    Point p;
    p.a = a;
    p.x = x0 + a * d;
    p.g.resize(x0.size());
    p.f = fg(p.x, p.g);
    p.dphi = p.g.dot(d);
    ++evaluations;
    return p;
  }
  bool armijo(const Point& p) const { return p.f <= f0 + opt.c1 * p.a * dphi0 || approximate(p); }
  bool curvature(const Point& p) const { return std::abs(p.dphi) <= -opt.c2 * dphi0; }
  /// Change in f below roundoff: the slope bound (2 c1 - 1) dphi0 >= dphi
  /// certifies the decrease instead.
  bool approximate(const Point& p) const {
    return p.f <= f0 + kFlat * std::abs(f0) && p.dphi <= (2.0 * opt.c1 - 1.0) * dphi0;
  }
  static constexpr double kFlat = 1e-12;

  /// Returns the accepted point; `strong` reports whether both Wolfe conditions hold.
  std::optional<Point> zoom(Point lo, Point hi, bool& strong) {
    for (int i = 0; i < opt.max_line_search; ++i) {
      const double width = hi.a - lo.a;
      double a = 0.5 * (lo.a + hi.a);
      const double denom = 2.0 * (hi.f - lo.f - lo.dphi * width);
      if (denom > 0.0) {
        const double q = lo.a - lo.dphi * width * width / denom;
        const double lo_b = std::min(lo.a, hi.a), hi_b = std::max(lo.a, hi.a);
        const double margin = 0.1 * (hi_b - lo_b);
        if (q > lo_b + margin && q < hi_b - margin) a = q;
      }
      Point p = eval(a);
      if (!armijo(p) || p.f >= lo.f) {
        hi = std::move(p);
        continue;
      }
      if (curvature(p)) {
        strong = true;
        return p;
      }
      if (p.dphi * (hi.a - lo.a) >= 0.0) hi = lo;
      lo = std::move(p);
    }
    strong = false;
    if (lo.a > 0.0) return lo;
    return std::nullopt;
  }

  std::optional<Point> run(double a0, double a_max, bool& strong) {
    Point prev;
    prev.a = 0.0;
    prev.f = f0;
    prev.dphi = dphi0;
    prev.x = x0;
    double a = std::min(a0, a_max);
    for (int i = 0; i < opt.max_line_search; ++i) {
      Point p = eval(a);
      if (!armijo(p) || (i > 0 && p.f >= prev.f)) return zoom(std::move(prev), std::move(p), strong);
      if (curvature(p)) {
        strong = true;
        return p;
      }
      if (p.dphi >= 0.0) return zoom(std::move(p), std::move(prev), strong);
      if (a >= a_max) {
        strong = false;
        return p;
      }
      prev = std::move(p);
      a = std::min(2.0 * a, a_max);
    }
    strong = false;
    if (prev.a > 0.0) return prev;
    return std::nullopt;
  }
};

}  // namespace

LbfgsResult lbfgs_minimize(Eigen::VectorXd& x, const Objective& fg, const LbfgsOptions& opt) {
  LbfgsResult res;
  Eigen::VectorXd g(x.size());
  double f = fg(x, g);
  res.evaluations = 1;
  res.history.push_back(f);
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int it = 0; it < opt.max_iterations; ++it) {
    res.grad_max = x.size() > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
    if (res.grad_max < opt.grad_tol) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = -g;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int k = m - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd d = std::move(q);
    double dphi0 = g.dot(d);
    if (!(dphi0 < 0.0)) {
      d = -g;
      dphi0 = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    const double dmax = d.lpNorm<Eigen::Infinity>();
    const double a_max = std::isfinite(opt.max_step) ? opt.max_step / dmax : std::numeric_limits<double>::infinity();
    const double a0 = s_hist.empty() ? 1.0 / dmax : 1.0;

    LineSearch ls{fg, opt, x, d, f, dphi0};
    bool strong = false;
    auto p = ls.run(a0, a_max, strong);
    res.evaluations += ls.evaluations;
    if (!p || !(p->f < f || (p->a > 0.0 && ls.approximate(*p)))) {
      res.line_search_failed = true;
      break;
    }
    if (!strong) res.line_search_failed = true;
    Eigen::VectorXd s = p->x - x;
    Eigen::VectorXd y = p->g - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * std::sqrt(s.squaredNorm() * y.squaredNorm())) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(p->x);
    g = std::move(p->g);
    f = p->f;
    res.history.push_back(f);
    res.iterations = it + 1;
  }
  res.f = f;
  res.grad_max = x.size() > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
  if (res.grad_max < opt.grad_tol) res.converged = true;
  return res;
}

}  // namespace medial
