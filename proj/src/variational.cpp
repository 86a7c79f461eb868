#include "superdiff/variational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "superdiff/error.hpp"
#include "superdiff/parallel.hpp"
#include "superdiff/quadrature.hpp"
#include "superdiff/rng.hpp"

namespace superdiff::var {
namespace {

constexpr double kTwoPi = 2.0 * kPi;

quad::Options options(const QuadConfig& q) {
  quad::Options o;
  o.rel_tol = q.rel_tol;
  o.max_intervals = q.max_intervals;
  return o;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
}

/// Panel boundaries resolving the scales √λ·10^k and the mollifier scale.
std::vector<double> radial_breaks(double lambda, double p_max, std::vector<double> extra = {}) {
  const double s = std::sqrt(lambda);
  for (int k = -3; k <= 3; ++k) extra.push_back(s * std::pow(10.0, k));
  extra.push_back(1.0);
  return quad::make_breaks(0.0, p_max, std::move(extra));
}

/// Extra breaks around a near-singular point r = P of width √λ.
void add_peak_breaks(std::vector<double>& b, double p, double lambda) {
  const double s = std::sqrt(lambda);
  b.push_back(p);
  for (double w : {s, 10.0 * s, 100.0 * s}) {
    b.push_back(p - w);
    b.push_back(p + w);
  }
}

Estimate as_estimate(const quad::Result& r) { return {r.value, r.error}; }

/// (λ+(P−r)²)(λ+(P+r)²) = a² − b² without cancellation.
double disc_product(double lambda, double p, double r) {
  return (lambda + (p - r) * (p - r)) * (lambda + (p + r) * (p + r));
}

}  // namespace

double radial_cutoff(const env::Mollifier& mollifier, const QuadConfig& quad) {
  if (quad.p_max > 0.0) return quad.p_max;
  return mollifier.spectral_cutoff(1e-13);
}

double h_func(double x) {
  if (!(x > 0.0)) throw DomainError("h: argument must be positive");
  const double g = x >= 1.0 ? std::log(x) + std::log1p(1.0 / (x * x)) : -std::log(x) + std::log1p(x * x);
  return 1.0 / (x * g);
}

double h_prime(double x) {
  if (!(x > 0.0)) throw DomainError("h': argument must be positive");
  const double g = x >= 1.0 ? std::log(x) + std::log1p(1.0 / (x * x)) : -std::log(x) + std::log1p(x * x);
  const double x2 = x * x;
  return -(g + (x2 - 1.0) / (x2 + 1.0)) / (x2 * g * g);
}

Estimate D_dcgf(double lambda, double p, const env::Mollifier& m, const QuadConfig& quad) {
  check_lambda(lambda);
  if (!(p > 0.0)) throw DomainError("D: |p| must be positive");
  const double pmax = radial_cutoff(m, quad);
  // ∫₀^{2π} sin²t/(a − b cos t) dt = 2π/(a + √(a²−b²))
  auto f = [&](double r) {
    const double a = lambda + p * p + r * r;
    return 4.0 * r * m.v_hat(r) * kTwoPi / (a + std::sqrt(disc_product(lambda, p, r)));
  };
  std::vector<double> extra;
  add_peak_breaks(extra, p, lambda);
  const auto br = radial_breaks(lambda, pmax, extra);
  return as_estimate(quad::integrate(f, std::span<const double>(br), options(quad)));
}

Estimate D_srbp(double lambda, double p, const env::Mollifier& m, const QuadConfig& quad) {
  check_lambda(lambda);
  if (!(p > 0.0)) throw DomainError("D: |p| must be positive");
  const double pmax = radial_cutoff(m, quad);
  const double p9 = p * p / 9.0;
  auto f = [&](double r) {
    if (r == 0.0) return 0.0;
    const double root = std::sqrt(disc_product(lambda, p, r));
    const double d = p - r;
    double angular;
    if (d * d >= p9) {
      angular = kTwoPi / root;  // whole circle lies outside the excluded disc
    } else {
      // Excluded arc |θ| < θ₀; tan(θ₀/2) from (1 − cos θ₀)/(1 + cos θ₀).
      const double one_minus = p9 - d * d;
      const double one_plus = (p + r) * (p + r) - p9;
      const double tan_half = std::sqrt(one_minus / one_plus);
      const double k = std::sqrt((lambda + (p + r) * (p + r)) / (lambda + d * d));
      angular = 4.0 / root * std::atan(1.0 / (k * tan_half));
    }
    return 4.0 * r * m.v_hat(r) * angular;
  };
  std::vector<double> extra{2.0 * p / 3.0, p, 4.0 * p / 3.0};
  add_peak_breaks(extra, p, lambda);
  const auto br = radial_breaks(lambda, pmax, extra);
  return as_estimate(quad::integrate(f, std::span<const double>(br), options(quad)));
}

Estimate D_aniso(double lambda, double p, const env::Mollifier& m, const QuadConfig& quad) {
  check_lambda(lambda);
  if (!(p > 0.0)) throw DomainError("D: |p| must be positive");
  const double pmax = radial_cutoff(m, quad);
  auto f = [&](double r) {
    return 4.0 * r * m.v_hat(r) * kTwoPi / std::sqrt(disc_product(lambda, p, r));
  };
  std::vector<double> extra;
  add_peak_breaks(extra, p, lambda);
  const auto br = radial_breaks(lambda, pmax, extra);
  return as_estimate(quad::integrate(f, std::span<const double>(br), options(quad)));
}

Estimate D_kernel(Model model, double lambda, double p, const env::Mollifier& m,
                  const QuadConfig& quad) {
  switch (model) {
    case Model::SRBP: return D_srbp(lambda, p, m, quad);
    case Model::SRBP_aniso: return D_aniso(lambda, p, m, quad);
    case Model::DCGF: return D_dcgf(lambda, p, m, quad);
  }
  throw ConfigError("D: unknown model");
}

DProfile::DProfile(Model model, double lambda, const env::Mollifier& m, const QuadConfig& quad,
                   int nodes)
    : lambda_(lambda) {
  check_lambda(lambda);
  if (nodes < 4) throw ConfigError("DProfile: need at least 4 nodes");
  const double lo = std::log(1e-3 * std::sqrt(lambda));
  const double hi = std::log(radial_cutoff(m, quad));
  if (!(hi > lo)) throw ConfigError("DProfile: p_max below the profile start");
  std::vector<double> x(nodes), y(nodes), rel(nodes);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t i) {
    x[i] = lo + (hi - lo) * static_cast<double>(i) / (nodes - 1);
    const Estimate e = D_kernel(model, lambda, std::exp(x[i]), m, quad);
    if (!(e.value > 0.0)) throw NumericError("DProfile: nonpositive D at a node", e.value, e.error);
    y[i] = std::log(e.value);
    rel[i] = e.error / e.value;
  });
  max_rel_error_ = *std::max_element(rel.begin(), rel.end());
  spline_ = CubicSpline(std::move(x), std::move(y));
}

DProfile DProfile::zero(double lambda) {
  DProfile d;
  d.lambda_ = lambda;
  d.zero_ = true;
  return d;
}

double DProfile::operator()(double p) const {
  if (zero_) return 0.0;
  const auto k = spline_.knots();
  const double lp = p > 0.0 ? std::log(p) : k.front();
  return std::exp(spline_(std::max(lp, k.front())));
}

TestFunction TestFunction::srbp_choice(double c, double lambda) {
  check_lambda(lambda);
  return TestFunction(
      Kind::SRBPChoice, [c, lambda](Vec2 p) { return c * p.x * h_func(lambda + norm2(p)); },
      [c, lambda](Vec2 p) {
        const double x = lambda + norm2(p);
        const double h = h_func(x);
        const double hp = h_prime(x);
        return Vec2{c * (h + 2.0 * p.x * p.x * hp), c * 2.0 * p.x * p.y * hp};
      });
}

TestFunction TestFunction::optimal_dcgf(std::shared_ptr<const DProfile> d) {
  if (!d) throw ConfigError("optimal_dcgf: missing D profile");
  return TestFunction(Kind::OptimalDCGF,
                      [d](Vec2 p) {
                        const double r2 = norm2(p);
                        return p.y / (d->lambda() + (1.0 + (*d)(std::sqrt(r2))) * r2);
                      },
                      {});
}

TestFunction TestFunction::aniso_optimal(std::shared_ptr<const DProfile> d) {
  if (!d) throw ConfigError("aniso_optimal: missing D profile");
  return TestFunction(Kind::AnisoOptimal,
                      [d](Vec2 p) {
                        const double r2 = norm2(p);
                        return 1.0 / (d->lambda() + r2 + (*d)(std::sqrt(r2)) * p.x * p.x);
                      },
                      {});
}

TestFunction TestFunction::custom(Value value, Gradient gradient, bool antisymmetric) {
  if (!value) throw ConfigError("custom test function: empty evaluator");
  if (antisymmetric) {
    for (std::uint64_t i = 0; i < 64; ++i) {
      const auto [g1, g2] = rng::normal_pair(0x7e57, 0, i);
      const Vec2 p{g1, g2};
      const double a = value(p);
      const double b = value(-p);
      if (!(std::abs(a + b) <= 1e-12 * std::max(1.0, std::abs(a))))
        throw ConfigError("custom test function violates v(-p) = -v(p)");
    }
  }
  return TestFunction(Kind::Custom, std::move(value), std::move(gradient));
}

Vec2 TestFunction::gradient(Vec2 p) const {
  if (!gradient_) throw ConfigError("test function has no gradient");
  return gradient_(p);
}

TestFunction TestFunction::scaled(double c) const {
  Value v = [f = value_, c](Vec2 p) { return c * f(p); };
  Gradient g;
  if (gradient_) g = [f = gradient_, c](Vec2 p) { return c * f(p); };
  return TestFunction(kind_, std::move(v), std::move(g));
}

namespace {

/// max of |∇v̂|² over the centre and 16 points on each ring of radius
/// |p|/6 and 0.99|p|/3 around p.
double ring_sup_sq(const TestFunction& v, Vec2 p) {
  static const auto dirs = [] {
    std::array<Vec2, 16> d{};
    for (int k = 0; k < 16; ++k) d[k] = {std::cos(kTwoPi * k / 16), std::sin(kTwoPi * k / 16)};
    return d;
  }();
  const double r = norm(p);
  double best = norm2(v.gradient(p));
  for (double rad : {r / 6.0, 0.99 * r / 3.0})
    for (const Vec2& d : dirs) best = std::max(best, norm2(v.gradient(p + rad * d)));
  return best;
}

/// Trapezoid average over the circle of radius r.
template <class F>
double angular_mean(double r, int n, F&& f) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = kTwoPi * j / n;
    s += f(Vec2{r * std::cos(t), r * std::sin(t)});
  }
  return s / n;
}

}  // namespace

FunctionalValues functionals(const BoundQuery& q, const TestFunction& v) {
  check_lambda(q.lambda);
  const double lambda = q.lambda;
  const auto& m = q.mollifier;
  const double pmax = radial_cutoff(m, q.quad);
  const int n = std::max(8, q.quad.angular_points);
  const auto br = radial_breaks(lambda, pmax);
  const std::span<const double> brs(br);
  const auto opt = options(q.quad);
  const bool aniso = q.model == Model::SRBP_aniso;
  FunctionalValues out;

  auto radial = [&](auto&& f) {
    const auto r = quad::integrate([&](double rr) { return rr == 0.0 ? 0.0 : f(rr); }, brs, opt);
    out.error += r.error;
    return kTwoPi * r.value;
  };

  if (!aniso) {
    double finite = std::numeric_limits<double>::infinity();
    try {
      finite = radial([&](double r) {
        return r * m.v_hat(r) / (r * r) * angular_mean(r, n, [&](Vec2 p) {
                 const double x = v(p);
                 return x * x;
               });
      });
    } catch (const NumericError&) {
    }
    if (!std::isfinite(finite)) throw ConfigError("test function has infinite weighted norm");
    out.error = 0.0;
  }

  const int axis = q.model == Model::DCGF ? 1 : 0;
  out.J1 = radial([&](double r) {
    return r * m.v_hat(r) * angular_mean(r, n, [&](Vec2 p) {
             return aniso ? v(p) : (axis == 0 ? p.x : p.y) / (r * r) * v(p);
           });
  });
  out.J2 = radial([&](double r) {
    const double w = aniso ? lambda + r * r : (lambda + r * r) / (r * r);
    return r * m.v_hat(r) * w * angular_mean(r, n, [&](Vec2 p) {
             const double x = v(p);
             return x * x;
           });
  });

  const DProfile d = q.suppress_d ? DProfile::zero(lambda) : DProfile(q.model, lambda, m, q.quad);
  out.J3 = radial([&](double r) {
    return r * m.v_hat(r) * d(r) * angular_mean(r, n, [&](Vec2 p) {
             const double x = v(p);
             return aniso ? p.x * p.x * x * x : x * x;
           });
  });
  if (q.model == Model::SRBP) {
    out.J32_prime = 0.25 * radial([&](double r) {
      return r * m.v_hat(r) * r * r * angular_mean(r, n, [&](Vec2 p) { return ring_sup_sq(v, p); });
    });
  }
  out.lower_bound = 2.0 * out.J1 - out.J2 - out.J3 - out.J32_prime;
  out.upper_bound = upper_bound(q).value;
  return out;
}

double j3_direct(const BoundQuery& q, const TestFunction& v, int radial, int angular) {
  check_lambda(q.lambda);
  if (radial < 2 || angular < 4) throw ConfigError("j3_direct: grid too small");
  const double pmax = radial_cutoff(q.mollifier, q.quad);
  const auto gl = quad::gauss_legendre(radial);
  struct Node {
    Vec2 p;
    double w;   // quadrature weight × V̂(p)
    double v;   // test-function value, or p₁û for the anisotropic model
  };
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(radial) * angular);
  for (int i = 0; i < radial; ++i) {
    const double r = 0.5 * pmax * (gl.nodes[i] + 1.0);
    const double wr = 0.5 * pmax * gl.weights[i] * r * kTwoPi / angular;
    for (int j = 0; j < angular; ++j) {
      const double t = kTwoPi * (j + 0.5) / angular;
      const Vec2 p{r * std::cos(t), r * std::sin(t)};
      const double val = v(p);
      nodes.push_back({p, wr * q.mollifier.v_hat(r),
                       q.model == Model::SRBP_aniso ? p.x * val : val});
    }
  }
  double total = 0.0;
  for (const Node& a : nodes) {
    const double pa2 = norm2(a.p);
    double row = 0.0;
    for (const Node& b : nodes) {
      double geom = 1.0;
      if (q.model == Model::SRBP) {
        const double c = dot(a.p, b.p);
        geom = c * c / (pa2 * norm2(b.p));
      } else if (q.model == Model::DCGF) {
        const double c = cross(a.p, b.p);
        geom = c * c / (pa2 * norm2(b.p));
      }
      const double diff = a.v - b.v;
      row += b.w * geom * diff * diff / (q.lambda + norm2(a.p - b.p));
    }
    total += a.w * row;
  }
  return total;
}

Estimate upper_bound(const BoundQuery& q) {
  check_lambda(q.lambda);
  const double pmax = radial_cutoff(q.mollifier, q.quad);
  const double weight = q.model == Model::SRBP_aniso ? kTwoPi : kPi;
  auto f = [&](double r) { return weight * r * q.mollifier.v_hat(r) / (q.lambda + r * r); };
  const auto br = radial_breaks(q.lambda, pmax);
  return as_estimate(quad::integrate(f, std::span<const double>(br), options(q.quad)));
}

FunctionalValues lower_bound_dcgf(const BoundQuery& q) {
  check_lambda(q.lambda);
  const double lambda = q.lambda;
  const auto& m = q.mollifier;
  const double pmax = radial_cutoff(m, q.quad);
  const auto br = radial_breaks(lambda, pmax);
  const std::span<const double> brs(br);
  const auto opt = options(q.quad);
  const DProfile d = q.suppress_d ? DProfile::zero(lambda) : DProfile(Model::DCGF, lambda, m, q.quad);

  FunctionalValues out;
  auto run = [&](auto&& f) {
    const auto r = quad::integrate(f, brs, opt);
    out.error += r.error;
    return r.value;
  };
  auto den = [&](double r) { return lambda + (1.0 + d(r)) * r * r; };
  out.lower_bound = run([&](double r) { return kTwoPi * r * m.v_hat(r) / den(r); });
  // v̂* = p₂/den: the angular mean of p₂²/|p|² is ½.
  out.J1 = 0.5 * out.lower_bound;
  out.J2 = run([&](double r) {
    const double e = den(r);
    return kPi * r * m.v_hat(r) * (lambda + r * r) / (e * e);
  });
  out.J3 = run([&](double r) {
    const double e = den(r);
    return kPi * r * m.v_hat(r) * d(r) * r * r / (e * e);
  });
  out.error += d.max_rel_error() * out.lower_bound;
  return out;
}

FunctionalValues lower_bound_srbp(const BoundQuery& q) {
  check_lambda(q.lambda);
  const double lambda = q.lambda;
  const auto& m = q.mollifier;
  const double pmax = radial_cutoff(m, q.quad);
  const auto br = radial_breaks(lambda, pmax);
  const std::span<const double> brs(br);
  const auto opt = options(q.quad);
  const DProfile d(Model::SRBP, lambda, m, q.quad);
  const int n = std::max(8, q.quad.angular_points);

  double err = 0.0;
  auto run = [&](auto&& f, const quad::Options& o) {
    const auto r = quad::integrate(f, brs, o);
    err += r.error;
    return r.value;
  };
  // Unit-amplitude pieces; the value at amplitude c is 2c·a − c²·b.
  const double a = run([&](double r) { return kPi * r * m.v_hat(r) * h_func(lambda + r * r); }, opt);
  const double j2 = run(
      [&](double r) {
        const double h = h_func(lambda + r * r);
        return kPi * r * m.v_hat(r) * (lambda + r * r) * h * h;
      },
      opt);
  const double j31 = run(
      [&](double r) {
        const double h = h_func(lambda + r * r);
        return kPi * r * m.v_hat(r) * d(r) * r * r * h * h;
      },
      opt);
  const TestFunction unit = TestFunction::srbp_choice(1.0, lambda);
  // The ring maximum is only piecewise smooth in r; relax the tolerance.
  quad::Options ring_opt = opt;
  ring_opt.rel_tol = std::max(opt.rel_tol, 1e-8);
  ring_opt.max_intervals = std::max(opt.max_intervals, 20000);
  const double j32 = run(
      [&](double r) {
        if (r == 0.0) return 0.0;
        return 0.25 * kTwoPi * r * m.v_hat(r) * r * r *
               angular_mean(r, n, [&](Vec2 p) { return ring_sup_sq(unit, p); });
      },
      ring_opt);
  const double env = run(
      [&](double r) {
        const double h = h_func(lambda + 4.0 * r * r / 9.0);
        return 0.25 * 34.0 * kTwoPi * r * r * r * m.v_hat(r) * h * h;
      },
      opt);
  const double b = j2 + j31 + j32;

  double c = q.c;
  if (c < 0.0) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 16; ++k) {
      const double ck = std::pow(10.0, -4.0 + 0.25 * k);
      const double val = 2.0 * ck * a - ck * ck * b;
      if (val > best) {
        best = val;
        c = ck;
      }
    }
  }
  FunctionalValues out;
  out.best_c = c;
  out.J1 = c * a;
  out.J2 = c * c * j2;
  out.J3 = c * c * j31;
  out.J32_prime = c * c * j32;
  out.J32_envelope = c * c * env;
  out.lower_bound = 2.0 * out.J1 - out.J2 - out.J3 - out.J32_prime;
  out.error = (std::abs(c) + c * c) * err + c * c * d.max_rel_error() * j31;
  return out;
}

FunctionalValues lower_bound_aniso(const BoundQuery& q) {
  check_lambda(q.lambda);
  const double lambda = q.lambda;
  const auto& m = q.mollifier;
  const double C = q.aniso_C > 0.0 ? q.aniso_C : fit_aniso_constant(m, q.quad);
  const double big = C * std::abs(std::log(lambda));
  const auto opt = options(q.quad);
  const double edge = std::min(0.5, radial_cutoff(m, q.quad));
  const auto br = radial_breaks(lambda, edge);
  const std::span<const double> brs(br);

  FunctionalValues out;
  out.aniso_C = C;
  auto run = [&](auto&& f, std::span<const double> b) {
    const auto r = quad::integrate(f, b, opt);
    out.error += r.error;
    return r.value;
  };

  quad::Options inner = opt;
  inner.rel_tol = std::min(1e-12, 1e-2 * opt.rel_tol);
  inner.max_intervals = 2000;
  out.lower_bound = run(
      [&](double r) {
        if (r == 0.0) return 0.0;
        const double a = lambda + r * r;
        const double b = big * r * r;
        // cos²α is symmetric about π/2 and π; integrate one quarter turn.
        const double half_pi = 0.5 * kPi;
        const double split[3] = {0.0, 0.5 * half_pi, half_pi};
        const auto ang = quad::integrate(
            [&](double t) {
              const double c = std::cos(t);
              return 1.0 / (a + b * c * c);
            },
            std::span<const double>(split, 3), inner);
        return r * m.v_hat(r) * 4.0 * ang.value;
      },
      brs);
  out.lower_bound_polar = run(
      [&](double r) {
        const double a = lambda + r * r;
        return kTwoPi * r * m.v_hat(r) / std::sqrt(a * (a + big * r * r));
      },
      brs);

  // Schwarz-bound functionals of û* = 1/(λ + |p|² + D p₁²) over the whole plane,
  // with the angular integrals in closed form.
  const DProfile d(Model::SRBP_aniso, lambda, m, q.quad);
  const double pmax = radial_cutoff(m, q.quad);
  const auto fb = radial_breaks(lambda, pmax);
  const std::span<const double> fbs(fb);
  out.J1 = run(
      [&](double r) {
        const double a = lambda + r * r;
        const double beta = d(r) * r * r;
        return kTwoPi * r * m.v_hat(r) / std::sqrt(a * (a + beta));
      },
      fbs);
  out.J2 = run(
      [&](double r) {
        const double a = lambda + r * r;
        const double beta = d(r) * r * r;
        return r * m.v_hat(r) * a * kPi * (2.0 * a + beta) / std::pow(a * (a + beta), 1.5);
      },
      fbs);
  out.J3 = run(
      [&](double r) {
        const double a = lambda + r * r;
        const double beta = d(r) * r * r;
        return r * m.v_hat(r) * beta * kPi * a / std::pow(a * (a + beta), 1.5);
      },
      fbs);
  return out;
}

FunctionalValues evaluate_bounds(const BoundQuery& q) {
  FunctionalValues out;
  switch (q.model) {
    case Model::DCGF: out = lower_bound_dcgf(q); break;
    case Model::SRBP: out = lower_bound_srbp(q); break;
    case Model::SRBP_aniso: out = lower_bound_aniso(q); break;
  }
  const Estimate up = upper_bound(q);
  out.upper_bound = up.value;
  out.error += up.error;
  return out;
}

double fit_bound_constant(std::span<const double> values, std::span<const double> reference) {
  if (values.size() != reference.size() || values.empty())
    throw ConfigError("fit_bound_constant: size mismatch");
  double c = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(reference[i] > 0.0)) throw DomainError("fit_bound_constant: reference must be positive");
    c = std::max(c, values[i] / reference[i]);
  }
  return c;
}

double fit_aniso_constant(const env::Mollifier& m, const QuadConfig& quad) {
  std::vector<double> vals, refs;
  for (int i = 0; i < 8; ++i) {
    const double lambda = std::pow(10.0, -8.0 + i);
    for (int j = 0; j < 12; ++j) {
      const double p = 1e-4 * std::pow(5e3, j / 11.0);
      vals.push_back(D_aniso(lambda, p, m, quad).value);
      refs.push_back(std::abs(std::log(lambda)));
    }
  }
  return fit_bound_constant(vals, refs);
}

}  // namespace superdiff::var
