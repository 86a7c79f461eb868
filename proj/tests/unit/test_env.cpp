#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "superdiff/covariance.hpp"
#include "superdiff/error.hpp"
#include "superdiff/field.hpp"
#include "superdiff/rng.hpp"

using namespace superdiff;
using namespace superdiff::env;

namespace {

// Unit Gaussian: K_grad = −∂∂Φ with Φ'(r) = −(1 − e^{−r²/2})/(2πr), and
// K_grad + K_curl = V·I.
Mat2 oracle_covariance(EnvModel model, Vec2 x) {
  const double r = norm(x);
  const double e = std::exp(-0.5 * r * r);
  const double d1 = -(1.0 - e) / (2.0 * oracle::kPi * r);
  const double d2 = -(e - (1.0 - e) / (r * r)) / (2.0 * oracle::kPi);
  const double xs[2] = {x.x, x.y};
  Mat2 k{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double u = xs[a] * xs[b] / (r * r);
      const double delta = a == b ? 1.0 : 0.0;
      k[a][b] = -(d2 * u + d1 / r * (delta - u));
      if (model == EnvModel::CurlGFF) k[a][b] = delta * e / (2.0 * oracle::kPi) - k[a][b];
    }
  return k;
}

}  // namespace

TEST_CASE("mollifier invariants") {
  const auto m = Mollifier::gaussian();
  CHECK(m.v_hat(0.0) == 1.0);
  for (double p : {0.0, 0.3, 1.0, 2.5, 7.0}) {
    CHECK(m.v_hat(p) >= 0.0);
    CHECK(m.u_hat(p) * m.u_hat(p) == doctest::Approx(m.v_hat(p)).epsilon(1e-15));
    CHECK(m.v_hat(Vec2{p, 0.0}) == m.v_hat(Vec2{0.0, p}));
  }
  // ∫V = V̂(0) = 1
  const double mass =
      quad::integrate([&](double r) { return 2 * oracle::kPi * r * m.v(Vec2{r, 0}); }, 0.0, 40.0).value;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // ∇V against central differences
  const Vec2 x{0.7, -0.4};
  const double h = 1e-5;
  const Vec2 g = m.grad_v(x);
  CHECK(g.x == doctest::Approx((m.v({x.x + h, x.y}) - m.v({x.x - h, x.y})) / (2 * h)).epsilon(1e-8));
  CHECK(g.y == doctest::Approx((m.v({x.x, x.y + h}) - m.v({x.x, x.y - h})) / (2 * h)).epsilon(1e-8));
  CHECK(m.grad_v(Vec2{}) == Vec2{});

  const auto s = Mollifier::sharp_cutoff(2.0);
  CHECK(s.v_hat(1.9) == 1.0);
  CHECK(s.v_hat(2.1) == 0.0);
  CHECK(s.v(Vec2{}) == doctest::Approx(4.0 / (4.0 * oracle::kPi)));
  CHECK_THROWS_AS(Mollifier::gaussian(-1.0), ConfigError);
}

TEST_CASE("spectral covariance examples") {
  const auto g = Mollifier::gaussian();
  auto k = spectral_covariance({EnvModel::GradientGFF, g}, {1.0, 0.0});
  CHECK(k[0][0] == doctest::Approx(std::exp(-0.5)));
  CHECK(k[0][1] == 0.0);
  CHECK(k[1][1] == 0.0);
  k = spectral_covariance({EnvModel::CurlGFF, g}, {1.0, 0.0});
  CHECK(k[0][0] == 0.0);
  CHECK(k[1][1] == doctest::Approx(std::exp(-0.5)));
  k = spectral_covariance({EnvModel::ScalarAniso, g}, {0.0, 2.0});
  CHECK(k[0][0] == doctest::Approx(std::exp(-2.0)));
  CHECK(k[1][1] == 0.0);
  CHECK_THROWS_AS(spectral_covariance({EnvModel::GradientGFF, g}, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(spectral_covariance({EnvModel::CurlGFF, g}, {0.0, 0.0}), DomainError);
}

TEST_CASE("spectral covariance is PSD and the two projectors sum to the identity") {
  const auto g = Mollifier::gaussian();
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto [a, b] = rng::normal_pair(3, 0, i);
    const Vec2 p{2 * a, 2 * b};
    for (auto model : {EnvModel::GradientGFF, EnvModel::CurlGFF, EnvModel::ScalarAniso}) {
      const Mat2 k = spectral_covariance({model, g}, p);
      CHECK(k[0][1] == k[1][0]);
      const double tr = k[0][0] + k[1][1];
      const double det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
      const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
      CHECK(tr / 2 - disc >= -1e-12);
    }
    const Mat2 kg = spectral_covariance({EnvModel::GradientGFF, g}, p);
    const Mat2 kc = spectral_covariance({EnvModel::CurlGFF, g}, p);
    const double v = g.v_hat(p);
    CHECK(std::abs(kg[0][0] + kc[0][0] - v) < 1e-12);
    CHECK(std::abs(kg[1][1] + kc[1][1] - v) < 1e-12);
    CHECK(std::abs(kg[0][1] + kc[0][1]) < 1e-12);
  }
}

TEST_CASE("real-space covariance at the origin is c/2 times the identity") {
  // c = (2π)⁻² ∫ V̂ = 1/(2π) for the unit Gaussian.
  const double c = 1.0 / (2.0 * oracle::kPi);
  for (auto model : {EnvModel::GradientGFF, EnvModel::CurlGFF}) {
    const Mat2 k = real_space_covariance({model, Mollifier::gaussian()}, {0.0, 0.0});
    CHECK(k[0][0] == doctest::Approx(c / 2).epsilon(1e-10));
    CHECK(k[1][1] == doctest::Approx(c / 2).epsilon(1e-10));
    CHECK(std::abs(k[0][1]) < 1e-14);
  }
}

TEST_CASE("real-space covariance of the scalar model is V") {
  const auto g = Mollifier::gaussian();
  for (Vec2 x : {Vec2{0, 0}, Vec2{1, 0}, Vec2{0.5, -1.5}, Vec2{2, 2}}) {
    const Mat2 k = real_space_covariance({EnvModel::ScalarAniso, g}, x);
    CHECK(k[0][0] == doctest::Approx(g.v(x)).epsilon(1e-9));
    CHECK(k[1][1] == 0.0);
    CHECK(k[0][1] == 0.0);
  }
}

TEST_CASE("real-space covariance matches the closed form for the Gaussian") {
  for (auto model : {EnvModel::GradientGFF, EnvModel::CurlGFF}) {
    for (Vec2 x : {Vec2{1.0, 0.0}, Vec2{0.7, 1.3}, Vec2{-2.0, 0.5}}) {
      const Mat2 k = real_space_covariance({model, Mollifier::gaussian()}, x);
      const Mat2 o = oracle_covariance(model, x);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(std::abs(k[a][b] - o[a][b]) < 1e-11);
    }
  }
}

TEST_CASE("sample_field preconditions") {
  const CovarianceSpec spec{EnvModel::CurlGFF, Mollifier::gaussian()};
  CHECK_THROWS_AS(sample_field(spec, 64.0, 15, 1), ConfigError);
  CHECK_THROWS_AS(sample_field(spec, 64.0, 8, 1), ConfigError);
  CHECK_THROWS_AS(sample_field(spec, 64.0, 0, 1), ConfigError);
  CHECK_THROWS_AS(sample_field(spec, -1.0, 64, 1), ConfigError);
  CHECK_THROWS_AS(sample_field(spec, 9.0, 64, 1), ConfigError);
}

TEST_CASE("field constraints hold mode by mode") {
  const auto g = Mollifier::gaussian();
  const auto curl = sample_field({EnvModel::CurlGFF, g}, 64.0, 256, 7);
  CHECK(max_spectral_divergence(curl) < 1e-12);
  CHECK(max_spectral_rotation(curl) > 1e-3);
  const auto grad = sample_field({EnvModel::GradientGFF, g}, 64.0, 256, 7);
  CHECK(max_spectral_rotation(grad) < 1e-12);
  CHECK(max_spectral_divergence(grad) > 1e-3);
  const auto scalar = sample_field({EnvModel::ScalarAniso, g}, 32.0, 64, 7);
  for (double v : scalar.component(1)) CHECK(v == 0.0);
}

TEST_CASE("retained modes are Hermitian and reproduce the grid") {
  const auto f = sample_field({EnvModel::GradientGFF, Mollifier::gaussian()}, 32.0, 32, 11);
  const int n = f.grid_count(), stride = n / 2 + 1;
  const auto m = f.modes(0);
  CHECK(m[0] == std::complex<double>(0.0, 0.0));
  for (int k1 = 1; k1 < n; ++k1)
    CHECK(m[static_cast<std::size_t>(k1) * stride] ==
          std::conj(m[static_cast<std::size_t>(n - k1) * stride]));
  // Direct evaluation of Σ ω̂(p) e^{ip·x} at one node.
  const int i1 = 5, i2 = 9;
  const Vec2 x = f.node(i1, i2);
  double direct = 0.0;
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < stride; ++k2) {
      const auto w = m[static_cast<std::size_t>(k1) * stride + k2];
      const double mult = (k2 == 0 || k2 == n / 2) ? 1.0 : 2.0;
      direct += mult * std::real(w * std::exp(std::complex<double>(0.0, dot(f.wavevector(k1, k2), x))));
    }
  CHECK(direct == doctest::Approx(f.value(0, i1, i2)).epsilon(1e-10));
}

TEST_CASE("sampling is reproducible per seed") {
  const CovarianceSpec spec{EnvModel::CurlGFF, Mollifier::gaussian()};
  const auto a = sample_field(spec, 32.0, 64, 5);
  const auto b = sample_field(spec, 32.0, 64, 5);
  const auto c = sample_field(spec, 32.0, 64, 6);
  CHECK(std::equal(a.component(0).begin(), a.component(0).end(), b.component(0).begin()));
  CHECK_FALSE(std::equal(a.component(0).begin(), a.component(0).end(), c.component(0).begin()));
}

TEST_CASE("evaluate_field interpolates bilinearly on the torus") {
  const auto f = sample_field({EnvModel::CurlGFF, Mollifier::gaussian()}, 32.0, 64, 3);
  for (int i : {0, 7, 63})
    for (int j : {0, 12, 63}) {
      const Vec2 v = evaluate_field(f, f.node(i, j));
      CHECK(v.x == f.value(0, i, j));
      CHECK(v.y == f.value(1, i, j));
    }
  const Vec2 x{3.3, -7.9};
  const Vec2 a = evaluate_field(f, x);
  const Vec2 b = evaluate_field(f, {x.x + 32.0, x.y});
  const Vec2 c = evaluate_field(f, {x.x - 64.0, x.y + 320.0});
  CHECK(a.x == doctest::Approx(b.x).epsilon(1e-12));
  CHECK(a.y == doctest::Approx(c.y).epsilon(1e-12));
  // midpoint of a cell is the mean of its corners
  const double h = f.spacing();
  const Vec2 mid = evaluate_field(f, {2.5 * h, 4.5 * h});
  const double mean = 0.25 * (f.value(0, 2, 4) + f.value(0, 2, 5) + f.value(0, 3, 4) + f.value(0, 3, 5));
  CHECK(mid.x == doctest::Approx(mean).epsilon(1e-13));

  const auto k = FieldSample::constant(16.0, 16, {0.25, -2.0});
  for (Vec2 y : {Vec2{0.1, 0.2}, Vec2{-100.3, 7.77}, Vec2{15.99, 15.99}}) {
    const Vec2 v = evaluate_field(k, y);
    CHECK(v.x == doctest::Approx(0.25));
    CHECK(v.y == doctest::Approx(-2.0));
  }
}

TEST_CASE("field CSV and binary round trips") {
  const auto f = sample_field({EnvModel::GradientGFF, Mollifier::gaussian()}, 24.0, 16, 99);
  std::ostringstream csv;
  write_csv(f, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "x,y,omega1,omega2");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 16 * 16);

  std::stringstream bin;
  write_binary(f, bin);
  CHECK(bin.str().size() == 32 + 2 * 16 * 16 * 8);
  const auto g = read_binary(bin);
  CHECK(g.box_size() == f.box_size());
  CHECK(g.grid_count() == f.grid_count());
  CHECK(g.model() == f.model());
  CHECK(g.seed() == f.seed());
  for (int k = 0; k < 2; ++k)
    CHECK(std::equal(f.component(k).begin(), f.component(k).end(), g.component(k).begin()));
  for (std::size_t i = 0; i < f.modes(0).size(); ++i) CHECK(std::abs(f.modes(0)[i] - g.modes(0)[i]) < 1e-14);

  std::string truncated = bin.str();
  truncated.resize(100);
  std::istringstream bad(truncated);
  CHECK_THROWS_AS(read_binary(bad), IoError);
  CHECK_THROWS_AS(read_binary(std::string("/nonexistent/field.bin")), IoError);
}
