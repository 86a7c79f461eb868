#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "superdiff/interpolation.hpp"
#include "superdiff/mollifier.hpp"
#include "superdiff/types.hpp"

namespace superdiff::var {

struct QuadConfig {
  /// Radial cutoff; 0 picks the |p| where V̂ drops below 1e-13.
  double p_max = 0.0;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
  /// Uniform angular points for 2D integrals of general test functions.
  int angular_points = 64;
};

/// Cutoff actually used for a mollifier under `quad`.
double radial_cutoff(const env::Mollifier& mollifier, const QuadConfig& quad);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// h(x) = 1/(x log(x + 1/x)) and its derivative. x ≤ 0 throws DomainError.
double h_func(double x);
double h_prime(double x);

/// D(λ,|p|) = 4∫ V̂(q) (p×q)²/(|p|²|q|²) /(λ+|p−q|²) dq.
Estimate D_dcgf(double lambda, double p_abs, const env::Mollifier& mollifier,
                const QuadConfig& quad = {});
/// D(λ,|p|) = 4∫ V̂(q) 1{|p−q| ≥ |p|/3} /(λ+|p−q|²) dq.
Estimate D_srbp(double lambda, double p_abs, const env::Mollifier& mollifier,
                const QuadConfig& quad = {});
/// D(λ,|p|) = 4∫ V̂(q) /(λ+|p−q|²) dq.
Estimate D_aniso(double lambda, double p_abs, const env::Mollifier& mollifier,
                 const QuadConfig& quad = {});
/// Dispatch on the model.
Estimate D_kernel(Model model, double lambda, double p_abs, const env::Mollifier& mollifier,
                  const QuadConfig& quad = {});

/// Cubic interpolant of log D against log |p| on log-spaced nodes in
/// [1e-3·√λ, p_max]; clamped outside the node range.
class DProfile {
 public:
  DProfile(Model model, double lambda, const env::Mollifier& mollifier, const QuadConfig& quad = {},
           int nodes = 64);
  /// D ≡ 0.
  static DProfile zero(double lambda);

  double operator()(double p_abs) const;
  double lambda() const noexcept { return lambda_; }
  /// Largest quadrature error estimate at the nodes, relative to the node value.
  double max_rel_error() const noexcept { return max_rel_error_; }

 private:
  DProfile() = default;
  double lambda_ = 0.0;
  bool zero_ = false;
  CubicSpline spline_;
  double max_rel_error_ = 0.0;
};

class TestFunction {
 public:
  enum class Kind { OptimalDCGF, SRBPChoice, AnisoOptimal, Custom };
  using Value = std::function<double(Vec2)>;
  using Gradient = std::function<Vec2(Vec2)>;

  /// v̂*(p) = c p₁ h(λ+|p|²).
  static TestFunction srbp_choice(double c, double lambda);
  /// v̂*(p) = p₂/(λ + (1+D)|p|²).
  static TestFunction optimal_dcgf(std::shared_ptr<const DProfile> d);
  /// û*(p) = 1/(λ + |p|² + D p₁²).
  static TestFunction aniso_optimal(std::shared_ptr<const DProfile> d);
  /// Caller-supplied v̂ (or û for the anisotropic model). The gradient is only
  /// needed for the SRBP J′₃₂ term. Antisymmetric test functions are checked
  /// at construction when `antisymmetric` is set.
  static TestFunction custom(Value value, Gradient gradient = {}, bool antisymmetric = true);

  Kind kind() const noexcept { return kind_; }
  double operator()(Vec2 p) const { return value_(p); }
  Vec2 gradient(Vec2 p) const;
  bool has_gradient() const noexcept { return static_cast<bool>(gradient_); }
  /// c·v̂.
  TestFunction scaled(double c) const;

 private:
  TestFunction(Kind kind, Value value, Gradient gradient)
      : kind_(kind), value_(std::move(value)), gradient_(std::move(gradient)) {}
  Kind kind_;
  Value value_;
  Gradient gradient_;
};

struct BoundQuery {
  double lambda = 1e-2;
  Model model = Model::DCGF;
  env::Mollifier mollifier = env::Mollifier::gaussian();
  QuadConfig quad{};
  /// SRBP test-function amplitude; negative optimizes over the 17-point grid 10^{−4+k/4}.
  double c = -1.0;
  /// Anisotropic-bound constant C; ≤ 0 fits it from D_aniso.
  double aniso_C = 0.0;
  /// Force D ≡ 0 in the DCGF lower bound.
  bool suppress_d = false;
};

struct FunctionalValues {
  double J1 = 0.0;
  double J2 = 0.0;
  /// DCGF/anisotropic: Schwarz bound ∫V̂ D v̂² (resp. ∫V̂ D p₁² û²). SRBP: J31 bound.
  double J3 = 0.0;
  /// SRBP only: ¼∫V̂|p|² sup_{|r−p|<|p|/3}|∇v̂(r)|² on the ring sample.
  double J32_prime = 0.0;
  /// SRBP only: same with the radial envelope 34 h(λ+4|p|²/9)².
  double J32_envelope = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  /// Anisotropic only: polar closed-form value of the lower-bound integral.
  double lower_bound_polar = 0.0;
  double aniso_C = 0.0;
  double best_c = 0.0;
  /// Sum of quadrature error estimates.
  double error = 0.0;
};

/// J-functionals of an arbitrary test function by 2D quadrature (radial
/// Gauss–Kronrod, uniform angular trapezoid). J3 uses the model's Schwarz
/// bound with D interpolated from a DProfile.
FunctionalValues functionals(const BoundQuery& query, const TestFunction& v);

/// Direct J3 double integral on a tensor Gauss–Legendre polar grid with
/// `radial` × `angular` points per variable (low-resolution cross-check).
double j3_direct(const BoundQuery& query, const TestFunction& v, int radial = 24,
                 int angular = 32);

/// ∫ V̂(p)(λ+(1+D)|p|²)⁻¹ dp, plus J1, J2, J3 of v̂* = p₂/(λ+(1+D)|p|²).
FunctionalValues lower_bound_dcgf(const BoundQuery& query);
/// max over c of 2J1 − J2 − J31 − J′32 for v̂* = c p₁ h(λ+|p|²).
FunctionalValues lower_bound_srbp(const BoundQuery& query);
/// ∫_{|p|<1/2} V̂(p)/(λ + |p|² + C p₁²|log λ|) dp in 2D, with its polar closed form.
FunctionalValues lower_bound_aniso(const BoundQuery& query);
/// sup over v̂ of 2J1 − J2: ∫ V̂(p) w(p)/(λ+|p|²) dp with axis weight w = p_k²/|p|²
/// for the rank-1 models and 1 for the anisotropic model.
Estimate upper_bound(const BoundQuery& query);
/// Lower bound for the model, with upper_bound filled in.
FunctionalValues evaluate_bounds(const BoundQuery& query);

/// max_i values[i]/reference[i]; reference entries must be positive.
double fit_bound_constant(std::span<const double> values, std::span<const double> reference);
/// C = max D_aniso(λ,|p|)/|log λ| over λ ∈ {1e-8,…,1e-1}, |p| ∈ [1e-4, 1/2].
double fit_aniso_constant(const env::Mollifier& mollifier, const QuadConfig& quad = {});

}  // namespace superdiff::var
