#include <doctest.h>

#include <cmath>
#include <functional>

#include "superdiff/error.hpp"
#include "superdiff/quadrature.hpp"
#include "superdiff/scaling.hpp"

using namespace superdiff;
using namespace superdiff::scaling;

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

MsdSeries synthetic(double lo, double hi, int n, const std::function<double(double)>& e) {
  MsdSeries s;
  s.times = log_grid(lo, hi, n);
  for (double t : s.times) s.values.push_back(e(t));
  return s;
}

}  // namespace

TEST_CASE("self-consistent exponent table") {
  auto check = [](int d, bool iso, double nu, double gamma) {
    const auto a = aw_exponents(d, iso);
    CHECK(a.nu == nu);
    CHECK(a.gamma == gamma);
    CHECK(a.d == d);
    CHECK(a.isotropic == iso);
  };
  check(1, true, 2.0 / 3.0, 0.0);
  check(2, true, 0.5, 0.25);
  check(3, true, 0.5, 0.0);
  check(2, false, 0.5, 1.0 / 3.0);
  CHECK_THROWS_AS(aw_exponents(0), DomainError);
  CHECK_THROWS_AS(aw_exponents(4), DomainError);
  CHECK_THROWS_AS(aw_exponents(3, false), DomainError);
}

TEST_CASE("consistency residual of the two-dimensional isotropic ansatz") {
  const auto grid = log_grid(1e2, 1e14, 64);
  const auto r = aw_residual(aw_exponents(2), grid);
  CHECK(std::abs(r.slope) < 0.02);
  CHECK(r.log_ratio.size() == grid.size());
  ScalingAnsatz bad = aw_exponents(2);
  bad.gamma = 0.35;
  CHECK(std::abs(aw_residual(bad, grid).slope) > 0.05);
}

TEST_CASE("every table entry is self-consistent") {
  const auto grid = log_grid(1e8, 1e40, 64);
  for (auto [d, iso] : {std::pair{1, true}, {2, true}, {3, true}, {2, false}}) {
    const auto a = aw_exponents(d, iso);
    CAPTURE(d);
    CHECK(std::abs(aw_residual(a, grid).slope) < 0.02);
    ScalingAnsatz p = a;
    p.gamma += 0.1;
    CHECK(std::abs(aw_residual(p, grid).slope) > 0.05);
  }
}

TEST_CASE("three-dimensional Brownian ansatz has R(t)/t converging") {
  const auto r = aw_residual(aw_exponents(3), log_grid(1e8, 1e40, 33));
  const double last = r.r_over_t.back();
  CHECK(std::abs(r.r_over_t[r.r_over_t.size() - 2] / last - 1.0) < 1e-3);
  CHECK(last > 0.0);
}

TEST_CASE("aw_residual preconditions") {
  const auto a = aw_exponents(2);
  CHECK_THROWS_AS(aw_residual(a, log_grid(2.0, 1e10, 10)), ConfigError);
  CHECK_THROWS_AS(aw_residual(a, log_grid(10.0, 1e5, 10)), ConfigError);
  std::vector<double> bad = log_grid(10.0, 1e10, 10);
  std::swap(bad[3], bad[4]);
  CHECK_THROWS_AS(aw_residual(a, bad), ConfigError);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), ConfigError);
}

TEST_CASE("Laplace transform of a Brownian series") {
  const auto s = synthetic(0.01, 1e3, 200, [](double t) { return 4.0 * t; });
  for (double lambda : {0.01, 0.03, 0.1}) {
    const auto r = laplace_msd(s, lambda);
    CHECK(std::abs(r.value * lambda * lambda / 4.0 - 1.0) < 0.01);
    CHECK(r.tail_fraction >= 0.0);
    CHECK(r.tail_fraction < 1.0);
    CHECK(r.lambda == lambda);
  }
  try {
    laplace_msd(s, 1e-3);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("0.005") != std::string::npos);
  }
  CHECK_THROWS_AS(laplace_msd(s, 0.0), DomainError);
}

TEST_CASE("Laplace transform of t log t") {
  // ∫ t log t e^{−λt} dt = (1 − γ_E − log λ)/λ².
  const auto s = synthetic(1.01, 1e6, 2000, [](double t) { return t * std::log(t); });
  for (double lambda : {1e-2, 1e-3, 1e-4}) {
    const auto r = laplace_msd(s, lambda);
    const double exact = (1.0 - kEulerGamma - std::log(lambda)) / (lambda * lambda);
    CHECK(std::abs(r.value / exact - 1.0) < 2e-3);
    CHECK(std::abs(r.value * lambda * lambda / std::abs(std::log(lambda)) - 1.0) < 0.1);
  }
  LaplaceOptions o;
  o.tail = TailModel::LogPower;
  o.tail_gamma = 1.0;
  const auto short_series = synthetic(1.01, 1e3, 600, [](double t) { return t * std::log(t); });
  const double lambda = 5e-3;
  const double exact = (1.0 - kEulerGamma - std::log(lambda)) / (lambda * lambda);
  const auto lin = laplace_msd(short_series, lambda);
  const auto lp = laplace_msd(short_series, lambda, o);
  CHECK(std::abs(lp.value / exact - 1.0) < std::abs(lin.value / exact - 1.0));
}

TEST_CASE("laplace_msd is linear in the series") {
  const auto a = synthetic(0.1, 1e4, 300, [](double t) { return 4.0 * t + std::sqrt(t); });
  const auto b = synthetic(0.1, 1e4, 300, [](double t) { return t * std::log1p(t); });
  MsdSeries c = a;
  for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] = 2.5 * a.values[i] - 0.75 * b.values[i];
  for (double lambda : {1e-3, 1e-2}) {
    const double la = laplace_msd(a, lambda).value;
    const double lb = laplace_msd(b, lambda).value;
    const double lc = laplace_msd(c, lambda).value;
    CHECK(std::abs(lc - (2.5 * la - 0.75 * lb)) <= 1e-12 * std::abs(lc));
  }
}

TEST_CASE("fit_exponents recovers exact models") {
  const auto a = synthetic(10.0, 1e6, 40, [](double t) { return 3.0 * t * std::sqrt(std::log(t)); });
  const auto fa = fit_exponents(a);
  CHECK(std::abs(fa.gamma - 0.5) < 0.01);
  CHECK(fa.amplitude == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fa.points == 40);
  const auto b = synthetic(10.0, 1e6, 40, [](double t) { return 4.0 * t; });
  const auto fb = fit_exponents(b);
  CHECK(std::abs(fb.gamma) < 0.01);
}

TEST_CASE("fit_exponents confidence intervals and scale equivariance") {
  MsdSeries s = synthetic(10.0, 1e4, 20, [](double t) { return 2.0 * t * std::pow(std::log(t), 0.3); });
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double wobble = 1.0 + 0.01 * ((i % 3 == 0) ? 1.0 : -0.5);
    s.values[i] *= wobble;
    s.std_errors.push_back(0.01 * s.values[i]);
  }
  const auto f = fit_exponents(s);
  CHECK(f.gamma_ci > 0.0);
  CHECK(std::abs(f.gamma - 0.3) < f.gamma_ci);
  MsdSeries k = s;
  for (std::size_t i = 0; i < k.values.size(); ++i) {
    k.values[i] *= 7.0;
    k.std_errors[i] *= 7.0;
  }
  const auto g = fit_exponents(k);
  CHECK(std::abs(g.gamma - f.gamma) < 1e-10);
  CHECK(std::abs(g.amplitude / f.amplitude - 7.0) < 1e-10 * 7.0);
}

TEST_CASE("fit_exponents preconditions") {
  auto s = synthetic(10.0, 1e4, 20, [](double t) { return 4.0 * t; });
  MsdSeries neg = s;
  neg.values[5] = -1.0;
  CHECK_THROWS_AS(fit_exponents(neg), DomainError);
  CHECK_THROWS_AS(fit_exponents(synthetic(10.0, 1e4, 9, [](double t) { return t; })), ConfigError);
  CHECK_THROWS_AS(fit_exponents(synthetic(10.0, 500.0, 20, [](double t) { return t; })), ConfigError);
  CHECK_THROWS_AS(fit_exponents(synthetic(0.5, 1e4, 20, [](double t) { return t; })), DomainError);
}
