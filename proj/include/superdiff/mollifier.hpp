#pragma once

#include "superdiff/types.hpp"

namespace superdiff::env {

/// Spherically symmetric, positive definite approximate delta function V with
/// spectral square root U (V = U∗U). Fourier convention V̂(p) = ∫ e^{ip·x} V(x) dx.
class Mollifier {
 public:
  enum class Shape {
    Gaussian,     ///< V̂(p) = exp(−σ²|p|²/2)
    SharpCutoff,  ///< V̂(p) = 1 on |p| < R, 0 outside (quadrature oracles only)
  };

  static Mollifier gaussian(double sigma = 1.0);
  static Mollifier sharp_cutoff(double radius);

  Shape shape() const noexcept { return shape_; }
  /// Length scale σ (Gaussian) or 1/R (sharp cutoff).
  double sigma() const noexcept { return sigma_; }
  double cutoff_radius() const noexcept { return radius_; }

  double v_hat(double p_abs) const noexcept;
  double v_hat(Vec2 p) const noexcept { return v_hat(norm(p)); }
  double u_hat(double p_abs) const noexcept;
  double u_hat(Vec2 p) const noexcept { return u_hat(norm(p)); }

  /// Real-space kernel V(x).
  double v(Vec2 x) const;
  /// ∇V(x).
  Vec2 grad_v(Vec2 x) const;

  /// Smallest |p| beyond which V̂ < tail (R itself for the sharp cutoff).
  double spectral_cutoff(double tail = 1e-12) const;
  /// |x| beyond which |V|, |∇V| are below tail relative to V(0) (Gaussian only).
  double spatial_cutoff(double tail = 1e-16) const;

 private:
  Mollifier(Shape shape, double sigma, double radius) : shape_(shape), sigma_(sigma), radius_(radius) {}

  Shape shape_;
  double sigma_;
  double radius_;
};

}  // namespace superdiff::env
