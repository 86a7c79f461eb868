#include "superdiff/mollifier.hpp"

#include <cmath>
#include <limits>

#include "superdiff/error.hpp"

namespace superdiff::env {

Mollifier Mollifier::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("mollifier: sigma must be positive");
  return Mollifier(Shape::Gaussian, sigma, std::numeric_limits<double>::infinity());
}

Mollifier Mollifier::sharp_cutoff(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ConfigError("mollifier: cutoff radius must be positive");
  return Mollifier(Shape::SharpCutoff, 1.0 / radius, radius);
}

double Mollifier::v_hat(double p_abs) const noexcept {
  if (shape_ == Shape::Gaussian) return std::exp(-0.5 * sigma_ * sigma_ * p_abs * p_abs);
  return p_abs < radius_ ? 1.0 : 0.0;
}

double Mollifier::u_hat(double p_abs) const noexcept {
  if (shape_ == Shape::Gaussian) return std::exp(-0.25 * sigma_ * sigma_ * p_abs * p_abs);
  return p_abs < radius_ ? 1.0 : 0.0;
}

double Mollifier::v(Vec2 x) const {
  const double r = norm(x);
  if (shape_ == Shape::Gaussian) {
    const double s2 = sigma_ * sigma_;
    return std::exp(-0.5 * r * r / s2) / (2.0 * kPi * s2);
  }
  // (2π)⁻² ∫_{|p|<R} e^{-ip·x} dp = R J₁(R r) / (2π r)
  if (r == 0.0) return radius_ * radius_ / (4.0 * kPi);
  return radius_ * std::cyl_bessel_j(1.0, radius_ * r) / (2.0 * kPi * r);
}

Vec2 Mollifier::grad_v(Vec2 x) const {
  const double r = norm(x);
  if (shape_ == Shape::Gaussian) {
    const double s2 = sigma_ * sigma_;
    return (-v(x) / s2) * x;
  }
  if (r == 0.0) return {};
  // d/dr [R J₁(Rr)/(2πr)] = −R² J₂(Rr)/(2πr)
  const double dvdr = -radius_ * radius_ * std::cyl_bessel_j(2.0, radius_ * r) / (2.0 * kPi * r);
  return (dvdr / r) * x;
}

double Mollifier::spectral_cutoff(double tail) const {
  if (!(tail > 0.0 && tail < 1.0)) throw ConfigError("spectral_cutoff: tail must be in (0,1)");
  if (shape_ == Shape::SharpCutoff) return radius_;
  return std::sqrt(2.0 * std::log(1.0 / tail)) / sigma_;
}

double Mollifier::spatial_cutoff(double tail) const {
  if (shape_ == Shape::SharpCutoff)
    throw DomainError("spatial_cutoff: sharp-cutoff mollifier has no compact spatial decay");
  return sigma_ * std::sqrt(2.0 * std::log(1.0 / tail));
}

}  // namespace superdiff::env
