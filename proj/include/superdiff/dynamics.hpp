#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "superdiff/field.hpp"

namespace superdiff::dyn {

struct SimConfig {
  Model model = Model::DCGF;
  double dt = 0.01;
  double t_max = 100.0;
  /// Recording times; each must be a multiple of dt. Empty means {t_max}.
  std::vector<double> output_times;
  double box_size = 64.0;
  int grid_count = 256;
  std::uint64_t seed = 1;
  int ensemble_size = 100;
  env::Mollifier mollifier = env::Mollifier::gaussian();
  /// Steps between spectral recomputations of ∇V∗ℓ.
  int refresh_interval = 10;
  /// false replaces the initial field F by 0.
  bool environment_enabled = true;
  /// false drops the −∇V∗ℓ force (self-repelling models).
  bool self_repulsion_enabled = true;
  /// Each step's noise is (Σ_j ξ_j)/√m over m consecutive stream draws, so a
  /// run at (dt, m) shares its Brownian path with a run at (dt/m, 1).
  int noise_substeps = 1;
  /// Keep per-step positions and coordinate-2 noise increments (short runs only).
  bool record_path = false;
  /// Keep every trajectory's recorded positions in the ensemble result.
  bool keep_samples = false;
};

/// Throws ConfigError on an inconsistent configuration.
void validate(const SimConfig& config);

/// Step indices n_i with n_i·dt = t_i (output times snapped to the dt lattice).
std::vector<long long> output_steps(const SimConfig& config);

/// Periodic occupation-time accumulator with a lazily refreshed drift cache.
/// Mass is spread bilinearly over the 4 nodes around the deposit point.
class LocalTimeGrid {
 public:
  LocalTimeGrid(double box_size, int grid_count, env::Mollifier mollifier,
                int refresh_interval = 10);

  void deposit(Vec2 x, double mass);
  /// (∇V∗ℓ)(x): cached spectral convolution interpolated at x, plus the exact
  /// kernel contribution of deposits made since the last refresh.
  Vec2 grad_convolution(Vec2 x);
  /// Recomputes the cached convolution from the whole grid.
  void refresh();

  double deposited_mass() const noexcept { return deposited_; }
  /// Compensated sum of the grid values.
  double grid_total() const;
  std::span<const double> values() const noexcept { return mass_; }
  int grid_count() const noexcept { return n_; }
  double box_size() const noexcept { return box_; }

 private:
  double box_;
  int n_;
  env::Mollifier mollifier_;
  int refresh_interval_;
  std::vector<double> mass_;
  std::vector<double> grad1_, grad2_;
  std::vector<std::complex<double>> spectrum_, work_;
  std::vector<double> kernel_;  // i p V̂(p)/L² factor magnitudes per mode
  struct Pending {
    std::size_t node;
    double mass;
  };
  std::vector<Pending> pending_;
  int deposits_since_refresh_ = 0;
  double deposited_ = 0.0;
  double deposited_comp_ = 0.0;
  bool cache_valid_ = false;
};

/// Stationary initial environment for the model (SRBP → GradientGFF,
/// DCGF → CurlGFF, SRBP_aniso → ScalarAniso).
env::FieldSample initial_environment(Model model, double box_size, int grid_count,
                                     std::uint64_t seed,
                                     env::Mollifier mollifier = env::Mollifier::gaussian());

/// Environment and noise seeds of ensemble member `index`.
std::uint64_t environment_seed(const SimConfig& config, std::uint64_t index);
std::uint64_t noise_seed(const SimConfig& config, std::uint64_t index);

/// One Euler–Maruyama step of dX = F(X)dt + √2 dB.
Vec2 step_dcgf(Vec2 x, const env::FieldSample& field, double dt, std::pair<double, double> noise);

/// F(X) − (∇V∗ℓ)(X); for SRBP_aniso only coordinate 1 is kept.
Vec2 srbp_drift(Model model, Vec2 x, const env::FieldSample* field, LocalTimeGrid& local_time);

struct Trajectory {
  std::vector<double> times;
  /// Unwrapped positions at `times`.
  std::vector<Vec2> positions;
  /// Largest distance from the origin reached at any step.
  double max_excursion = 0.0;
  long long steps = 0;
  /// Terminal occupation-time grid, self-repelling models only.
  std::optional<LocalTimeGrid> local_time;
  /// Per-step data when record_path is set: positions after each step and the
  /// √(2dt)·ξ₂ increments of coordinate 2.
  std::vector<Vec2> path;
  std::vector<double> noise2;
};

/// Ensemble member `index` with a fresh stationary environment.
Trajectory simulate(const SimConfig& config, std::uint64_t index = 0);
/// Same with a caller-supplied environment (nullptr means F ≡ 0).
Trajectory simulate(const SimConfig& config, std::uint64_t index, const env::FieldSample* field);

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_sq;    ///< E(t) = mean |X(t)|²
  std::vector<double> std_error;  ///< standard error of E(t)
  std::vector<double> mean_sq1;   ///< E₁(t)
  std::vector<double> mean_sq2;   ///< E₂(t)
  int ensemble_size = 0;
  /// Fraction of trajectories whose excursion exceeded L/4.
  double wrap_fraction = 0.0;
  /// samples[i][k]: position of trajectory i at times[k] (keep_samples only).
  std::vector<std::vector<Vec2>> samples;
};

/// M independent trajectories, run in parallel and reduced in index order.
EnsembleStats run_ensemble(const SimConfig& config);

}  // namespace superdiff::dyn
