#pragma once

#include <span>
#include <vector>

namespace superdiff::scaling {

/// α(t) = t^ν (log t)^γ in dimension d.
struct ScalingAnsatz {
  double nu = 0.5;
  double gamma = 0.25;
  int d = 2;
  bool isotropic = true;
};

/// Self-consistent exponents: d=1 → (2/3, 0), d=2 → (1/2, 1/4),
/// d=3 → (1/2, 0), d=2 anisotropic → (1/2, 1/3). Anything else throws DomainError.
ScalingAnsatz aw_exponents(int d, bool isotropic = true);

struct AwResidual {
  double slope = 0.0;
  double intercept = 0.0;
  /// log(L/R) at each grid time, L = α², R = t∫α^{−d} (or t∫(α s^{1/2})^{−1}).
  std::vector<double> log_ratio;
  /// R(t)/t.
  std::vector<double> r_over_t;
};

/// Least-squares fit of log(L/R) against log log t over `t_grid`.
/// The grid must start above e and span at least 6 decades.
AwResidual aw_residual(const ScalingAnsatz& ansatz, std::span<const double> t_grid);

/// n log-spaced times in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

struct MsdSeries {
  std::vector<double> times;
  std::vector<double> values;
  /// Optional; empty or all zero means unweighted fits.
  std::vector<double> std_errors;
};

enum class TailModel { Linear, LogPower };

struct LaplaceOptions {
  TailModel tail = TailModel::Linear;
  /// Exponent of the a·t(log t)^γ tail model.
  double tail_gamma = 0.5;
};

struct LaplaceResult {
  double lambda = 0.0;
  double value = 0.0;
  /// Share of `value` contributed by the extrapolated tail beyond the last time.
  double tail_fraction = 0.0;
};

/// Ê(λ) = ∫₀^∞ E(t)e^{−λt} dt for E piecewise linear through (0,0) and the
/// series, plus a fitted tail over the last decade. Requires λ·t_max ≥ 5.
LaplaceResult laplace_msd(const MsdSeries& series, double lambda, const LaplaceOptions& opt = {});

struct ExponentFit {
  double gamma = 0.0;
  /// Half-width of the 95% interval on gamma.
  double gamma_ci = 0.0;
  double amplitude = 0.0;
  double amplitude_ci = 0.0;
  double chi2 = 0.0;
  int points = 0;
};

/// Weighted least squares of log(E/t) = log a + γ log log t. Needs ≥ 10 points
/// over ≥ 2 decades with t > 1.
ExponentFit fit_exponents(const MsdSeries& series);

}  // namespace superdiff::scaling
