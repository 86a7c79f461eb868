#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "superdiff/covariance.hpp"

namespace superdiff::env {

/// Periodic-grid realization of a two-component drift field on the torus
/// [0, L)². Grid values are stored row-major with index i₁·N + i₂, where node
/// (i₁, i₂) sits at x = (i₁, i₂)·L/N. Fourier modes are kept as the half
/// spectrum index k₁·(N/2+1) + k₂ with wavevector p = 2π/L·(k̃₁, k₂), k̃₁ the
/// signed frequency of k₁. The field is ω(x) = Σ_p ω̂(p) e^{ip·x}.
class FieldSample {
 public:
  FieldSample(EnvModel model, double box_size, int grid_count, std::uint64_t seed,
              std::vector<double> omega1, std::vector<double> omega2,
              std::vector<std::complex<double>> modes1, std::vector<std::complex<double>> modes2);

  /// Field equal to `value` everywhere (no random modes).
  static FieldSample constant(double box_size, int grid_count, Vec2 value,
                              EnvModel model = EnvModel::CurlGFF);

  EnvModel model() const noexcept { return model_; }
  double box_size() const noexcept { return box_; }
  int grid_count() const noexcept { return n_; }
  double spacing() const noexcept { return box_ / n_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Component k ∈ {0, 1} (ω₁, ω₂) as an N×N row-major array.
  std::span<const double> component(int k) const noexcept { return k == 0 ? omega1_ : omega2_; }
  std::span<const std::complex<double>> modes(int k) const noexcept {
    return k == 0 ? modes1_ : modes2_;
  }
  double value(int k, int i1, int i2) const noexcept {
    return component(k)[static_cast<std::size_t>(i1) * n_ + i2];
  }
  Vec2 node(int i1, int i2) const noexcept { return {i1 * spacing(), i2 * spacing()}; }
  /// Wavevector of half-spectrum entry (k₁, k₂).
  Vec2 wavevector(int k1, int k2) const noexcept;

 private:
  EnvModel model_;
  double box_;
  int n_;
  std::uint64_t seed_;
  std::vector<double> omega1_, omega2_;
  std::vector<std::complex<double>> modes1_, modes2_;
};

/// Spectral synthesis of a sample of the stationary Gaussian law π on the
/// torus. Mode p ≠ 0 gets ω̂(p) = (i) e(p) Û(p) ξ_p / L with ξ_p a unit complex
/// Gaussian drawn from stream (seed, mode index) and ξ_{−p} = conj(ξ_p); the
/// zero mode and the Nyquist rows are set to 0.
/// Requires N even, N ≥ 16 and L > 10σ.
FieldSample sample_field(const CovarianceSpec& spec, double box_size, int grid_count,
                         std::uint64_t seed);

/// Bilinear interpolation of the grid at x (wrapped into the box).
Vec2 evaluate_field(const FieldSample& sample, Vec2 x);

/// max over modes of |p·ω̂(p)| (divergence) or |p̃·ω̂(p)| (rotation).
double max_spectral_divergence(const FieldSample& sample);
double max_spectral_rotation(const FieldSample& sample);

/// CSV with header "x,y,omega1,omega2", one row per node, 17 significant digits.
void write_csv(const FieldSample& sample, std::ostream& out);
void write_csv(const FieldSample& sample, const std::string& path);

/// Little-endian binary dump: f64 L, i64 N, i64 model id, u64 seed, then
/// ω₁ and ω₂ as N×N row-major f64 arrays.
void write_binary(const FieldSample& sample, std::ostream& out);
void write_binary(const FieldSample& sample, const std::string& path);
/// Reads a binary dump; Fourier modes are recomputed from the grid.
FieldSample read_binary(std::istream& in);
FieldSample read_binary(const std::string& path);

}  // namespace superdiff::env
