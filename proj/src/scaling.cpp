#include "superdiff/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superdiff/error.hpp"
#include "superdiff/quadrature.hpp"

namespace superdiff::scaling {
namespace {

struct LineFit {
  double slope, intercept, slope_se, intercept_se, chi2;
};

LineFit weighted_line(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit: abscissae are degenerate");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_se = std::sqrt(1.0 / sxx);
  f.intercept_se = std::sqrt(1.0 / sw + mx * mx / sxx);
  f.chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.chi2 += w[i] * r * r;
  }
  return f;
}

/// ∫ e^{a u} u^{−b} du from the canonical lower limit to U.
double log_integral(double a, double b, double upper) {
  quad::Options opt;
  opt.rel_tol = 1e-13;
  opt.max_intervals = 20000;
  if (b < 1.0) {
    // u = w^{1/(1−b)} removes the endpoint singularity: integrand e^{a u}/(1−b).
    const double e = 1.0 / (1.0 - b);
    const double wmax = std::pow(upper, 1.0 - b);
    if (a == 0.0) return wmax * e;
    auto f = [&](double w) { return e * std::exp(a * std::pow(w, e)); };
    return quad::integrate(f, 0.0, wmax, opt).value;
  }
  const double lo = std::log(2.0);
  auto f = [&](double u) { return std::exp(a * u) * std::pow(u, -b); };
  return quad::integrate(f, lo, upper, opt).value;
}

void validate_series(const MsdSeries& s, std::size_t min_points) {
  if (s.times.size() != s.values.size())
    throw ConfigError("series: times and values differ in length");
  if (!s.std_errors.empty() && s.std_errors.size() != s.times.size())
    throw ConfigError("series: std_errors length mismatch");
  if (s.times.size() < min_points)
    throw ConfigError("series: need at least " + std::to_string(min_points) + " points");
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (!(s.times[i] > 0.0) || !std::isfinite(s.times[i]))
      throw ConfigError("series: times must be positive");
    if (i > 0 && !(s.times[i] > s.times[i - 1]))
      throw ConfigError("series: times must be strictly increasing");
    if (!std::isfinite(s.values[i])) throw DomainError("series: non-finite value");
    if (s.values[i] < 0.0) throw DomainError("series: negative value");
  }
}

/// 1 − e^{−x}(1+x), accurate for small x.
double one_minus_exp_poly(double x) {
  if (x < 1e-2) {
    double term = x * x / 2.0, sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += term * (k - 1);
      term *= -x / (k + 1);
    }
    return sum;
  }
  return -std::expm1(-x) - x * std::exp(-x);
}

}  // namespace

ScalingAnsatz aw_exponents(int d, bool isotropic) {
  if (d < 1 || d > 3) throw DomainError("aw_exponents: d must be 1, 2 or 3");
  if (!isotropic && d != 2) throw DomainError("aw_exponents: anisotropic case defined for d = 2 only");
  if (!isotropic) return {0.5, 1.0 / 3.0, 2, false};
  switch (d) {
    case 1: return {2.0 / 3.0, 0.0, 1, true};
    case 2: return {0.5, 0.25, 2, true};
    default: return {0.5, 0.0, 3, true};
  }
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw ConfigError("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

AwResidual aw_residual(const ScalingAnsatz& z, std::span<const double> t) {
  if (t.size() < 3) throw ConfigError("aw_residual: need at least 3 grid times");
  if (!(t.front() > std::exp(1.0))) throw ConfigError("aw_residual: grid must start above e");
  if (!(t.back() / t.front() >= 1e6 * (1.0 - 1e-12)))
    throw ConfigError("aw_residual: grid must span at least 6 decades");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ConfigError("aw_residual: grid must be increasing");
  if (z.d < 1 || z.d > 3) throw DomainError("aw_residual: d must be 1, 2 or 3");

  const double a = z.isotropic ? 1.0 - z.d * z.nu : 0.5 - z.nu;
  const double b = z.isotropic ? z.d * z.gamma : z.gamma;
  AwResidual res;
  std::vector<double> x(t.size()), w(t.size(), 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double u = std::log(t[i]);
    const double integral = log_integral(a, b, u);
    if (!(integral > 0.0)) throw NumericError("aw_residual: nonpositive consistency integral");
    const double log_l = 2.0 * z.nu * u + 2.0 * z.gamma * std::log(u);
    const double log_r = u + std::log(integral);
    res.log_ratio.push_back(log_l - log_r);
    res.r_over_t.push_back(integral);
    x[i] = std::log(u);
  }
  const LineFit f = weighted_line(x, res.log_ratio, w);
  res.slope = f.slope;
  res.intercept = f.intercept;
  return res;
}

LaplaceResult laplace_msd(const MsdSeries& s, double lambda, const LaplaceOptions& opt) {
  validate_series(s, 2);
  if (!(lambda > 0.0)) throw DomainError("laplace_msd: lambda must be positive");
  const double t_max = s.times.back();
  if (lambda * t_max < 5.0)
    throw DomainError("laplace_msd: lambda too small for the series span; minimum admissible lambda is " +
                      std::to_string(5.0 / t_max));

  // Exact integral of the piecewise-linear interpolant times e^{−λt}.
  double body = 0.0;
  double t0 = 0.0, e0 = 0.0;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double t1 = s.times[i], e1 = s.values[i];
    const double dt = t1 - t0;
    const double x = lambda * dt;
    const double decay = std::exp(-lambda * t0);
    const double m0 = -std::expm1(-x) / lambda;
    const double m1 = one_minus_exp_poly(x) / (lambda * lambda);
    body += decay * (e0 * m0 + (e1 - e0) / dt * m1);
    t0 = t1;
    e0 = e1;
  }

  // Tail fitted over the last decade.
  double num = 0.0, den = 0.0;
  auto shape = [&](double t) {
    return opt.tail == TailModel::Linear ? t : t * std::pow(std::log(t), opt.tail_gamma);
  };
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (s.times[i] < 0.1 * t_max) continue;
    const double f = shape(s.times[i]);
    num += f * s.values[i];
    den += f * f;
  }
  const double amp = num / den;
  double tail;
  if (opt.tail == TailModel::Linear) {
    tail = amp * std::exp(-lambda * t_max) * (t_max / lambda + 1.0 / (lambda * lambda));
  } else {
    if (!(t_max > 1.0)) throw DomainError("laplace_msd: log-power tail needs t_max > 1");
    quad::Options q;
    q.rel_tol = 1e-12;
    // Integrate in s = λ(t − t_max) to keep the scale O(1).
    auto f = [&](double u) {
      const double tt = t_max + u / lambda;
      return shape(tt) * std::exp(-u);
    };
    tail = amp * std::exp(-lambda * t_max) / lambda * quad::integrate(f, 0.0, 80.0, q).value;
  }
  LaplaceResult r;
  r.lambda = lambda;
  r.value = body + tail;
  r.tail_fraction = r.value > 0.0 ? tail / r.value : 0.0;
  return r;
}

ExponentFit fit_exponents(const MsdSeries& s) {
  validate_series(s, 10);
  if (!(s.times.front() > 1.0)) throw DomainError("fit_exponents: times must exceed 1");
  if (s.times.back() / s.times.front() < 100.0 * (1.0 - 1e-12))
    throw ConfigError("fit_exponents: series must span at least 2 decades");
  const std::size_t n = s.times.size();
  std::vector<double> x(n), y(n), w(n, 1.0);
  bool weighted = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s.values[i] > 0.0)) throw DomainError("fit_exponents: values must be positive");
    x[i] = std::log(std::log(s.times[i]));
    y[i] = std::log(s.values[i] / s.times[i]);
    if (!s.std_errors.empty() && s.std_errors[i] > 0.0) weighted = true;
  }
  if (weighted) {
    for (std::size_t i = 0; i < n; ++i) {
      const double rel = s.std_errors[i] / s.values[i];
      if (!(rel > 0.0)) throw DomainError("fit_exponents: mixed zero and nonzero standard errors");
      w[i] = 1.0 / (rel * rel);
    }
  }
  const LineFit f = weighted_line(x, y, w);
  // Inflate by the reduced chi-square when the scatter exceeds the stated errors
  // (always the case for unit weights).
  const double dof = static_cast<double>(n) - 2.0;
  const double scale = weighted ? std::max(1.0, std::sqrt(f.chi2 / dof)) : std::sqrt(f.chi2 / dof);
  ExponentFit out;
  out.points = static_cast<int>(n);
  out.gamma = f.slope;
  out.gamma_ci = 1.96 * f.slope_se * scale;
  out.amplitude = std::exp(f.intercept);
  out.amplitude_ci = out.amplitude * 1.96 * f.intercept_se * scale;
  out.chi2 = f.chi2;
  return out;
}

}  // namespace superdiff::scaling
