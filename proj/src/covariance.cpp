#include "superdiff/covariance.hpp"

#include <cmath>
#include <vector>

#include "superdiff/error.hpp"
#include "superdiff/quadrature.hpp"

namespace superdiff {

std::string_view to_string(Model m) noexcept {
  switch (m) {
    case Model::SRBP: return "srbp";
    case Model::SRBP_aniso: return "srbp_aniso";
    case Model::DCGF: return "dcgf";
  }
  return "?";
}

Model parse_model(std::string_view name) {
  if (name == "srbp") return Model::SRBP;
  if (name == "srbp_aniso" || name == "srbp-aniso" || name == "aniso") return Model::SRBP_aniso;
  if (name == "dcgf") return Model::DCGF;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected srbp, srbp_aniso, dcgf)");
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace env {

std::string_view to_string(EnvModel m) noexcept {
  switch (m) {
    case EnvModel::GradientGFF: return "gradient_gff";
    case EnvModel::CurlGFF: return "curl_gff";
    case EnvModel::ScalarAniso: return "scalar_aniso";
  }
  return "?";
}

EnvModel environment_for(Model m) noexcept {
  switch (m) {
    case Model::SRBP: return EnvModel::GradientGFF;
    case Model::SRBP_aniso: return EnvModel::ScalarAniso;
    case Model::DCGF: return EnvModel::CurlGFF;
  }
  return EnvModel::GradientGFF;
}

Vec2 polarization(EnvModel model, Vec2 p) {
  if (model == EnvModel::ScalarAniso) return {1.0, 0.0};
  const double r = norm(p);
  if (r == 0.0)
    throw DomainError("spectral covariance: p = 0 excluded (p_k p_l/|p|^2 has no limit)");
  const Vec2 e = (1.0 / r) * p;
  return model == EnvModel::GradientGFF ? e : tilde(e);
}

Mat2 spectral_covariance(const CovarianceSpec& spec, Vec2 p) {
  const Vec2 e = polarization(spec.model, p);
  const double vh = spec.mollifier.v_hat(p);
  if (spec.model == EnvModel::ScalarAniso) return Mat2{{{vh, 0.0}, {0.0, 0.0}}};
  const double off = vh * e.x * e.y;
  return Mat2{{{vh * e.x * e.x, off}, {off, vh * e.y * e.y}}};
}

Mat2 real_space_covariance(const CovarianceSpec& spec, Vec2 x, const RealSpaceOptions& opt) {
  const double xr = norm(x);
  const double p_max = spec.mollifier.spectral_cutoff(1e-17);
  quad::Options qo;
  qo.rel_tol = opt.rel_tol;
  qo.abs_tol = opt.abs_tol;
  qo.max_intervals = opt.max_intervals;

  // Angular integral of e_k e_l cos(r x·ê(θ)); the trapezoid rule is spectrally
  // accurate once the node count exceeds the Bessel bandwidth ~ r|x|.
  auto angular = [&](double r, int k, int l) {
    const int n = 2 * static_cast<int>(std::ceil(r * xr)) + 64;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double th = 2.0 * kPi * j / n;
      const Vec2 dir{std::cos(th), std::sin(th)};
      Vec2 e = dir;
      if (spec.model == EnvModel::CurlGFF) e = tilde(dir);
      if (spec.model == EnvModel::ScalarAniso) e = {1.0, 0.0};
      const double ek = k == 0 ? e.x : e.y;
      const double el = l == 0 ? e.x : e.y;
      sum += ek * el * std::cos(r * dot(x, dir));
    }
    return sum * 2.0 * kPi / n;
  };

  Mat2 out{};
  const std::vector<double> breaks = quad::make_breaks(0.0, p_max, {0.25 * p_max, 0.5 * p_max});
  for (int k = 0; k < 2; ++k) {
    for (int l = k; l < 2; ++l) {
      if (spec.model == EnvModel::ScalarAniso && (k != 0 || l != 0)) continue;
      auto f = [&](double r) { return r * spec.mollifier.v_hat(r) * angular(r, k, l); };
      const quad::Result res = quad::integrate(f, breaks, qo);
      out[k][l] = res.value / (4.0 * kPi * kPi);
      out[l][k] = out[k][l];
    }
  }
  return out;
}

}  // namespace env
}  // namespace superdiff
