#include "superdiff/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superdiff/error.hpp"
#include "superdiff/fft.hpp"
#include "superdiff/parallel.hpp"
#include "superdiff/rng.hpp"

namespace superdiff::dyn {
namespace {

constexpr std::uint64_t kEnvironmentTag = 1;
constexpr std::uint64_t kNoiseTag = 2;

struct Cell {
  int i0, j0, i1, j1;
  double w00, w01, w10, w11;
};

Cell locate(double box, int n, Vec2 x) {
  const double inv_h = n / box;
  const double u = x.x * inv_h;
  const double v = x.y * inv_h;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const double tu = u - fu;
  const double tv = v - fv;
  auto wrap = [n](double f) {
    long long i = static_cast<long long>(f) % n;
    return static_cast<int>(i < 0 ? i + n : i);
  };
  Cell c;
  c.i0 = wrap(fu);
  c.j0 = wrap(fv);
  c.i1 = c.i0 + 1 == n ? 0 : c.i0 + 1;
  c.j1 = c.j0 + 1 == n ? 0 : c.j0 + 1;
  c.w00 = (1.0 - tu) * (1.0 - tv);
  c.w01 = (1.0 - tu) * tv;
  c.w10 = tu * (1.0 - tv);
  c.w11 = tu * tv;
  return c;
}

double interpolate(const std::vector<double>& g, int n, const Cell& c) {
  auto at = [&](int i, int j) { return g[static_cast<std::size_t>(i) * n + j]; };
  return c.w00 * at(c.i0, c.j0) + c.w01 * at(c.i0, c.j1) + c.w10 * at(c.i1, c.j0) +
         c.w11 * at(c.i1, c.j1);
}

}  // namespace

void validate(const SimConfig& c) {
  if (!(c.dt > 0.0 && c.dt <= 0.1)) throw ConfigError("simulate: dt must lie in (0, 0.1]");
  if (!(c.t_max > 0.0) || !std::isfinite(c.t_max))
    throw ConfigError("simulate: t_max must be positive");
  if (c.t_max / c.dt > 1e12) throw ConfigError("simulate: t_max/dt too large");
  if (c.grid_count % 2 != 0 || c.grid_count < 16)
    throw ConfigError("simulate: grid must be even and >= 16");
  if (!(c.box_size > 10.0 * c.mollifier.sigma()))
    throw ConfigError("simulate: box must exceed 10 sigma");
  if (c.ensemble_size < 1) throw ConfigError("simulate: ensemble size must be >= 1");
  if (c.refresh_interval < 1) throw ConfigError("simulate: refresh interval must be >= 1");
  if (c.noise_substeps < 1) throw ConfigError("simulate: noise substeps must be >= 1");
  double prev = 0.0;
  for (double t : c.output_times) {
    if (!(t > prev)) throw ConfigError("simulate: output times must be positive and increasing");
    if (t > c.t_max * (1.0 + 1e-12)) throw ConfigError("simulate: output time beyond t_max");
    prev = t;
  }
}

std::vector<long long> output_steps(const SimConfig& c) {
  std::vector<double> times = c.output_times;
  if (times.empty()) times.push_back(c.t_max);
  std::vector<long long> steps;
  steps.reserve(times.size());
  for (double t : times) {
    const long long n = std::llround(t / c.dt);
    if (n < 1 || std::abs(n * c.dt - t) > 1e-9 * t)
      throw ConfigError("simulate: output time " + std::to_string(t) + " is not a multiple of dt");
    steps.push_back(n);
  }
  return steps;
}

LocalTimeGrid::LocalTimeGrid(double box_size, int grid_count, env::Mollifier mollifier,
                             int refresh_interval)
    : box_(box_size),
      n_(grid_count),
      mollifier_(mollifier),
      refresh_interval_(refresh_interval) {
  if (!(box_size > 0.0) || grid_count < 2 || grid_count % 2 != 0)
    throw ConfigError("local time grid: need L > 0 and even N");
  if (refresh_interval < 1) throw ConfigError("local time grid: refresh interval must be >= 1");
  const std::size_t cells = static_cast<std::size_t>(n_) * n_;
  mass_.assign(cells, 0.0);
  grad1_.assign(cells, 0.0);
  grad2_.assign(cells, 0.0);
  spectrum_.resize(fft::half_size(n_));
  work_.resize(fft::half_size(n_));
  kernel_.assign(fft::half_size(n_), 0.0);
  const int half = n_ / 2;
  const int stride = half + 1;
  const double dk = 2.0 * kPi / box_;
  const double inv_area = 1.0 / (box_ * box_);
  for (int k1 = 0; k1 < n_; ++k1) {
    if (k1 == half) continue;
    const int f1 = k1 <= half ? k1 : k1 - n_;
    for (int k2 = 0; k2 < half; ++k2)
      kernel_[static_cast<std::size_t>(k1) * stride + k2] =
          mollifier_.v_hat(Vec2{dk * f1, dk * k2}) * inv_area;
  }
}

void LocalTimeGrid::deposit(Vec2 x, double mass) {
  const Cell c = locate(box_, n_, x);
  const std::size_t nodes[4] = {static_cast<std::size_t>(c.i0) * n_ + c.j0,
                                static_cast<std::size_t>(c.i0) * n_ + c.j1,
                                static_cast<std::size_t>(c.i1) * n_ + c.j0,
                                static_cast<std::size_t>(c.i1) * n_ + c.j1};
  const double w[4] = {c.w00, c.w01, c.w10, c.w11};
  // Pending deposits are only read while the cache is still current.
  const bool track = cache_valid_ && deposits_since_refresh_ < refresh_interval_;
  for (int k = 0; k < 4; ++k) {
    const double m = mass * w[k];
    mass_[nodes[k]] += m;
    if (!track) continue;
    auto it = std::find_if(pending_.begin(), pending_.end(),
                           [&](const Pending& p) { return p.node == nodes[k]; });
    if (it == pending_.end())
      pending_.push_back({nodes[k], m});
    else
      it->mass += m;
  }
  ++deposits_since_refresh_;
  // Neumaier summation keeps the running total exact to rounding of one add.
  const double y = mass - deposited_comp_;
  const double t = deposited_ + y;
  deposited_comp_ = (t - deposited_) - y;
  deposited_ = t;
}

void LocalTimeGrid::refresh() {
  fft::forward_r2c(n_, mass_, spectrum_);
  const int stride = n_ / 2 + 1;
  const double dk = 2.0 * kPi / box_;
  const std::complex<double> iu(0.0, 1.0);
  for (int axis = 0; axis < 2; ++axis) {
    for (int k1 = 0; k1 < n_; ++k1) {
      const int f1 = k1 <= n_ / 2 ? k1 : k1 - n_;
      for (int k2 = 0; k2 < stride; ++k2) {
        const std::size_t idx = static_cast<std::size_t>(k1) * stride + k2;
        const double p = dk * (axis == 0 ? f1 : k2);
        work_[idx] = iu * (p * kernel_[idx]) * spectrum_[idx];
      }
    }
    fft::inverse_c2r(n_, work_, axis == 0 ? grad1_ : grad2_);
  }
  pending_.clear();
  deposits_since_refresh_ = 0;
  cache_valid_ = true;
}

Vec2 LocalTimeGrid::grad_convolution(Vec2 x) {
  if (!cache_valid_ || deposits_since_refresh_ >= refresh_interval_) refresh();
  const Cell c = locate(box_, n_, x);
  Vec2 g{interpolate(grad1_, n_, c), interpolate(grad2_, n_, c)};
  const double h = box_ / n_;
  for (const Pending& p : pending_) {
    const int i = static_cast<int>(p.node / n_);
    const int j = static_cast<int>(p.node % n_);
    Vec2 d{x.x - i * h, x.y - j * h};
    d.x -= box_ * std::round(d.x / box_);
    d.y -= box_ * std::round(d.y / box_);
    g += p.mass * mollifier_.grad_v(d);
  }
  return g;
}

double LocalTimeGrid::grid_total() const {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : mass_) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

env::FieldSample initial_environment(Model model, double box_size, int grid_count,
                                     std::uint64_t seed, env::Mollifier mollifier) {
  return env::sample_field({env::environment_for(model), mollifier}, box_size, grid_count, seed);
}

std::uint64_t environment_seed(const SimConfig& config, std::uint64_t index) {
  return rng::derive_seed(config.seed, kEnvironmentTag, index);
}

std::uint64_t noise_seed(const SimConfig& config, std::uint64_t index) {
  return rng::derive_seed(config.seed, kNoiseTag, index);
}

Vec2 step_dcgf(Vec2 x, const env::FieldSample& field, double dt, std::pair<double, double> noise) {
  const Vec2 f = env::evaluate_field(field, x);
  const double s = std::sqrt(2.0 * dt);
  return {x.x + f.x * dt + s * noise.first, x.y + f.y * dt + s * noise.second};
}

Vec2 srbp_drift(Model model, Vec2 x, const env::FieldSample* field, LocalTimeGrid& local_time) {
  Vec2 drift = field ? env::evaluate_field(*field, x) : Vec2{};
  drift -= local_time.grad_convolution(x);
  if (model == Model::SRBP_aniso) drift.y = 0.0;
  return drift;
}

Trajectory simulate(const SimConfig& config, std::uint64_t index) {
  validate(config);
  if (!config.environment_enabled) return simulate(config, index, nullptr);
  const auto field = initial_environment(config.model, config.box_size, config.grid_count,
                                         environment_seed(config, index), config.mollifier);
  return simulate(config, index, &field);
}

Trajectory simulate(const SimConfig& config, std::uint64_t index, const env::FieldSample* field) {
  validate(config);
  const auto steps = output_steps(config);
  const long long total = steps.back();
  const bool self_repelling = config.model != Model::DCGF;
  const bool aniso = config.model == Model::SRBP_aniso;
  const bool repulsion = self_repelling && config.self_repulsion_enabled;

  Trajectory traj;
  traj.times.reserve(steps.size());
  for (long long n : steps) traj.times.push_back(n * config.dt);
  traj.positions.reserve(steps.size());
  if (self_repelling)
    traj.local_time.emplace(config.box_size, config.grid_count, config.mollifier,
                            config.refresh_interval);
  if (config.record_path) {
    traj.path.reserve(static_cast<std::size_t>(total));
    traj.noise2.reserve(static_cast<std::size_t>(total));
  }

  const std::uint64_t nseed = noise_seed(config, index);
  const int m = config.noise_substeps;
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  const double dt = config.dt;
  const double amp = std::sqrt(2.0 * dt);
  const double guard2 = 0.0625 * config.box_size * config.box_size;

  Vec2 x{};
  double max_r2 = 0.0;
  std::size_t next = 0;
  for (long long n = 0; n < total; ++n) {
    Vec2 drift = field ? env::evaluate_field(*field, x) : Vec2{};
    if (self_repelling) {
      if (repulsion) drift -= traj.local_time->grad_convolution(x);
      traj.local_time->deposit(x, dt);
    }
    double g1, g2;
    if (m == 1) {
      std::tie(g1, g2) = rng::normal_pair(nseed, 0, static_cast<std::uint64_t>(n));
    } else {
      g1 = g2 = 0.0;
      for (int j = 0; j < m; ++j) {
        const auto [a, b] = rng::normal_pair(nseed, 0, static_cast<std::uint64_t>(n) * m + j);
        g1 += a;
        g2 += b;
      }
      g1 *= inv_sqrt_m;
      g2 *= inv_sqrt_m;
    }
    Vec2 dx{drift.x * dt + amp * g1, amp * g2};
    if (!aniso) dx.y += drift.y * dt;
    if (!(norm2(dx) <= guard2))
      throw InstabilityError("step " + std::to_string(n) + " moved " + std::to_string(norm(dx)) +
                             " > L/4; reduce dt");
    x += dx;
    max_r2 = std::max(max_r2, norm2(x));
    if (config.record_path) {
      traj.path.push_back(x);
      traj.noise2.push_back(dx.y);
    }
    while (next < steps.size() && steps[next] == n + 1) {
      traj.positions.push_back(x);
      ++next;
    }
  }
  traj.steps = total;
  traj.max_excursion = std::sqrt(max_r2);
  return traj;
}

EnsembleStats run_ensemble(const SimConfig& config) {
  validate(config);
  if (config.ensemble_size < 2) throw ConfigError("run_ensemble: ensemble size must be >= 2");
  const auto steps = output_steps(config);
  const std::size_t m = static_cast<std::size_t>(config.ensemble_size);
  std::vector<std::vector<Vec2>> positions(m);
  std::vector<double> excursion(m);

  SimConfig member = config;
  member.record_path = false;
  parallel_for(m, [&](std::size_t i) {
    try {
      Trajectory t = simulate(member, i);
      positions[i] = std::move(t.positions);
      excursion[i] = t.max_excursion;
    } catch (const InstabilityError& e) {
      throw InstabilityError("trajectory " + std::to_string(i) + ": " + e.what());
    }
  });

  EnsembleStats s;
  s.ensemble_size = config.ensemble_size;
  const std::size_t k_count = steps.size();
  for (long long n : steps) s.times.push_back(n * config.dt);
  s.mean_sq.assign(k_count, 0.0);
  s.std_error.assign(k_count, 0.0);
  s.mean_sq1.assign(k_count, 0.0);
  s.mean_sq2.assign(k_count, 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < k_count; ++k) {
    double sum = 0.0, sum1 = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2 x = positions[i][k];
      sum1 += x.x * x.x;
      sum2 += x.y * x.y;
      sum += norm2(x);
    }
    const double mean = sum * inv_m;
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = norm2(positions[i][k]) - mean;
      var += d * d;
    }
    var /= static_cast<double>(m - 1);
    s.mean_sq[k] = mean;
    s.std_error[k] = std::sqrt(var * inv_m);
    s.mean_sq1[k] = sum1 * inv_m;
    s.mean_sq2[k] = sum2 * inv_m;
  }
  const double quarter = 0.25 * config.box_size;
  s.wrap_fraction =
      static_cast<double>(std::count_if(excursion.begin(), excursion.end(),
                                        [&](double r) { return r > quarter; })) *
      inv_m;
  if (config.keep_samples) s.samples = std::move(positions);
  return s;
}

}  // namespace superdiff::dyn
