#pragma once

#include "superdiff/mollifier.hpp"
#include "superdiff/types.hpp"

namespace superdiff::env {

/// Stationary environment laws. Integer values are the on-disk model ids.
enum class EnvModel {
  GradientGFF = 0,  ///< isotropic SRBP: gradient of the mollified massless GFF
  CurlGFF = 1,      ///< DCGF: curl of the mollified massless GFF
  ScalarAniso = 2,  ///< anisotropic SRBP: scalar field with covariance V, ω₂ ≡ 0
};

std::string_view to_string(EnvModel m) noexcept;
EnvModel environment_for(Model m) noexcept;

struct CovarianceSpec {
  EnvModel model = EnvModel::GradientGFF;
  Mollifier mollifier = Mollifier::gaussian();
};

/// Unit polarization e(p) with K̂(p) = V̂(p) e eᵀ: p/|p|, p̃/|p| or e₁.
/// Throws DomainError at p = 0 for the two rank-1 projector models.
Vec2 polarization(EnvModel model, Vec2 p);

/// K̂_{kl}(p).
Mat2 spectral_covariance(const CovarianceSpec& spec, Vec2 p);

struct RealSpaceOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_intervals = 2000;
};

/// K_{kl}(x) = (2π)⁻² ∫ K̂_{kl}(p) e^{−ip·x} dp by radial adaptive quadrature with
/// a trapezoid rule in angle. Throws NumericError if the tolerance is not met.
Mat2 real_space_covariance(const CovarianceSpec& spec, Vec2 x, const RealSpaceOptions& opt = {});

}  // namespace superdiff::env
