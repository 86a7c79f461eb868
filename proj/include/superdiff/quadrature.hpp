#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "superdiff/error.hpp"

namespace superdiff::quad {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
  /// Throw NumericError instead of returning an unconverged result.
  bool throw_on_failure = true;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Gauss–Kronrod 7/15 on one panel. Returns (kronrod, |kronrod − gauss|).
template <class F>
std::pair<double, double> gk15(F&& f, double a, double b) {
  static constexpr double xgk[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wgk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kron = wgk[7] * fc;
  double gauss = wg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kron += wgk[j] * fsum;
    if (j % 2 == 1) gauss += wg[j / 2] * fsum;
  }
  return {kron * half, std::abs((kron - gauss) * half)};
}

/// Globally adaptive integration over [breaks.front(), breaks.back()], with the
/// interior points of `breaks` as forced panel boundaries.
template <class F>
Result integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  Result res;
  if (breaks.size() < 2) return res;
  std::priority_queue<Panel> heap;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    if (!(b > a)) continue;
    auto [v, e] = gk15(f, a, b);
    res.evaluations += 15;
    heap.push({a, b, v, e});
    total += v;
    total_err += e;
  }
  auto done = [&] {
    return total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  };
  while (!heap.empty() && !done() && static_cast<int>(heap.size()) < opt.max_intervals) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel resolved to machine precision; keep its error and stop splitting it.
      heap.push({worst.a, worst.b, worst.value, 0.0});
      total_err -= worst.error;
      continue;
    }
    auto [v1, e1] = gk15(f, worst.a, mid);
    auto [v2, e2] = gk15(f, mid, worst.b);
    res.evaluations += 30;
    total += v1 + v2 - worst.value;
    total_err += e1 + e2 - worst.error;
    heap.push({worst.a, mid, v1, e1});
    heap.push({mid, worst.b, v2, e2});
  }
  // Re-sum to limit drift from the running updates.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = total_err;
  res.converged = std::isfinite(total) &&
                  total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  if (!res.converged && opt.throw_on_failure) {
    throw NumericError("adaptive quadrature did not reach tolerance (estimate " +
                           std::to_string(total) + ", error " + std::to_string(total_err) + ")",
                       total, total_err);
  }
  return res;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  const double br[2] = {a, b};
  return integrate(std::forward<F>(f), std::span<const double>(br, 2), opt);
}

/// Sorted, deduplicated break list clipped to [lo, hi].
std::vector<double> make_breaks(double lo, double hi, std::vector<double> interior);

/// Gauss–Legendre nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule gauss_legendre(int n);

}  // namespace superdiff::quad
