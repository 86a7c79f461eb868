#include "superdiff/superdiff.h"

#include <cstdio>
#include <exception>
#include <fstream>
#include <new>
#include <string>

#include "superdiff/dynamics.hpp"
#include "superdiff/error.hpp"
#include "superdiff/field.hpp"
#include "superdiff/scaling.hpp"
#include "superdiff/variational.hpp"

using namespace superdiff;

struct sd_field {
  env::FieldSample sample;
};

struct sd_ensemble {
  dyn::EnsembleStats stats;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_kind;

sd_status fail(const char* kind, const std::string& what, sd_status code) {
  g_kind = kind;
  g_error = what;
  return code;
}

template <class F>
sd_status guarded(F&& f) {
  try {
    f();
    return SD_OK;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::Numeric: return fail(to_string(e.kind()), e.what(), SD_ERR_NUMERIC);
      case ErrorKind::Instability: return fail(to_string(e.kind()), e.what(), SD_ERR_INSTABILITY);
      default: return fail(to_string(e.kind()), e.what(), SD_ERR_USAGE);
    }
  } catch (const std::bad_alloc&) {
    return fail("internal", "out of memory", SD_ERR_NUMERIC);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), SD_ERR_NUMERIC);
  }
}

void require(const void* p, const char* name) {
  if (!p) throw ConfigError(std::string(name) + " is NULL");
}

env::EnvModel env_model(int m) {
  if (m < 0 || m > 2) throw ConfigError("unknown environment model id " + std::to_string(m));
  return static_cast<env::EnvModel>(m);
}

Model model(int m) {
  if (m < 0 || m > 2) throw ConfigError("unknown model id " + std::to_string(m));
  return static_cast<Model>(m);
}

}  // namespace

extern "C" {

const char* sd_version(void) { return SUPERDIFF_VERSION; }
const char* sd_last_error(void) { return g_error.c_str(); }
const char* sd_last_error_kind(void) { return g_kind.c_str(); }

sd_status sd_field_sample(sd_env_model m, double sigma, double box, int grid, uint64_t seed,
                          sd_field** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const env::CovarianceSpec spec{env_model(m), env::Mollifier::gaussian(sigma)};
    *out = new sd_field{env::sample_field(spec, box, grid, seed)};
  });
}

sd_status sd_field_read_binary(const char* path, sd_field** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new sd_field{env::read_binary(std::string(path))};
  });
}

void sd_field_free(sd_field* field) { delete field; }

sd_status sd_field_info(const sd_field* f, double* box, int* grid, int* m, uint64_t* seed) {
  return guarded([&] {
    require(f, "field");
    if (box) *box = f->sample.box_size();
    if (grid) *grid = f->sample.grid_count();
    if (m) *m = static_cast<int>(f->sample.model());
    if (seed) *seed = f->sample.seed();
  });
}

sd_status sd_field_eval(const sd_field* f, double x, double y, double out[2]) {
  return guarded([&] {
    require(f, "field");
    require(out, "out");
    const Vec2 v = env::evaluate_field(f->sample, {x, y});
    out[0] = v.x;
    out[1] = v.y;
  });
}

sd_status sd_field_write_csv(const sd_field* f, const char* path) {
  return guarded([&] {
    require(f, "field");
    require(path, "path");
    env::write_csv(f->sample, std::string(path));
  });
}

sd_status sd_field_write_binary(const sd_field* f, const char* path) {
  return guarded([&] {
    require(f, "field");
    require(path, "path");
    env::write_binary(f->sample, std::string(path));
  });
}

sd_status sd_field_max_constraint_violation(const sd_field* f, double* out) {
  return guarded([&] {
    require(f, "field");
    require(out, "out");
    switch (f->sample.model()) {
      case env::EnvModel::CurlGFF: *out = env::max_spectral_divergence(f->sample); break;
      case env::EnvModel::GradientGFF: *out = env::max_spectral_rotation(f->sample); break;
      case env::EnvModel::ScalarAniso: {
        double m = 0.0;
        for (double v : f->sample.component(1)) m = std::max(m, std::abs(v));
        *out = m;
        break;
      }
    }
  });
}

void sd_sim_config_init(sd_sim_config* c) {
  if (!c) return;
  const dyn::SimConfig d;
  c->model = static_cast<sd_model>(d.model);
  c->dt = d.dt;
  c->t_max = d.t_max;
  c->output_times = nullptr;
  c->n_output_times = 0;
  c->box = d.box_size;
  c->grid = d.grid_count;
  c->seed = d.seed;
  c->ensemble = d.ensemble_size;
  c->sigma = d.mollifier.sigma();
  c->refresh_interval = d.refresh_interval;
  c->environment_enabled = d.environment_enabled;
  c->self_repulsion_enabled = d.self_repulsion_enabled;
  c->noise_substeps = d.noise_substeps;
}

sd_status sd_ensemble_run(const sd_sim_config* c, sd_ensemble** out) {
  return guarded([&] {
    require(c, "config");
    require(out, "out");
    *out = nullptr;
    dyn::SimConfig s;
    s.model = model(c->model);
    s.dt = c->dt;
    s.t_max = c->t_max;
    if (c->n_output_times > 0) {
      require(c->output_times, "output_times");
      s.output_times.assign(c->output_times, c->output_times + c->n_output_times);
    }
    s.box_size = c->box;
    s.grid_count = c->grid;
    s.seed = c->seed;
    s.ensemble_size = c->ensemble;
    s.mollifier = env::Mollifier::gaussian(c->sigma);
    s.refresh_interval = c->refresh_interval;
    s.environment_enabled = c->environment_enabled != 0;
    s.self_repulsion_enabled = c->self_repulsion_enabled != 0;
    s.noise_substeps = c->noise_substeps;
    *out = new sd_ensemble{dyn::run_ensemble(s)};
  });
}

size_t sd_ensemble_rows(const sd_ensemble* e) { return e ? e->stats.times.size() : 0; }

sd_status sd_ensemble_row(const sd_ensemble* en, size_t i, double* t, double* e, double* se,
                          double* e1, double* e2) {
  return guarded([&] {
    require(en, "ensemble");
    const auto& s = en->stats;
    if (i >= s.times.size()) throw ConfigError("row index out of range");
    if (t) *t = s.times[i];
    if (e) *e = s.mean_sq[i];
    if (se) *se = s.std_error[i];
    if (e1) *e1 = s.mean_sq1[i];
    if (e2) *e2 = s.mean_sq2[i];
  });
}

double sd_ensemble_wrap_fraction(const sd_ensemble* e) { return e ? e->stats.wrap_fraction : 0.0; }

sd_status sd_ensemble_write_csv(const sd_ensemble* en, const char* path) {
  return guarded([&] {
    require(en, "ensemble");
    require(path, "path");
    std::ofstream out(path);
    if (!out) throw IoError(std::string("cannot open '") + path + "' for writing");
    out << "t,E_t,stderr,E1_t,E2_t\n";
    const auto& s = en->stats;
    char line[160];
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.times[i], s.mean_sq[i],
                    s.std_error[i], s.mean_sq1[i], s.mean_sq2[i]);
      out << line;
    }
    if (!out) throw IoError(std::string("write failed for '") + path + "'");
  });
}

void sd_ensemble_free(sd_ensemble* e) { delete e; }

void sd_bounds_config_init(sd_bounds_config* c) {
  if (!c) return;
  const var::BoundQuery q;
  c->model = static_cast<sd_model>(q.model);
  c->lambda = q.lambda;
  c->sigma = q.mollifier.sigma();
  c->p_max = q.quad.p_max;
  c->rel_tol = q.quad.rel_tol;
  c->max_intervals = q.quad.max_intervals;
  c->c = q.c;
  c->aniso_C = q.aniso_C;
  c->suppress_d = q.suppress_d;
}

sd_status sd_bounds_evaluate(const sd_bounds_config* c, sd_bounds_row* out) {
  return guarded([&] {
    require(c, "config");
    require(out, "out");
    var::BoundQuery q;
    q.model = model(c->model);
    q.lambda = c->lambda;
    q.mollifier = env::Mollifier::gaussian(c->sigma);
    q.quad.p_max = c->p_max;
    q.quad.rel_tol = c->rel_tol;
    q.quad.max_intervals = c->max_intervals;
    q.c = c->c;
    q.aniso_C = c->aniso_C;
    q.suppress_d = c->suppress_d != 0;
    const var::FunctionalValues v = var::evaluate_bounds(q);
    *out = sd_bounds_row{q.lambda,    v.lower_bound,  v.upper_bound,       v.J1,
                         v.J2,        v.J3,           v.J32_prime,         v.J32_envelope,
                         v.lower_bound_polar, v.aniso_C, v.best_c,         v.error};
  });
}

sd_status sd_aw_exponents(int d, int isotropic, double* nu, double* gamma) {
  return guarded([&] {
    const auto a = scaling::aw_exponents(d, isotropic != 0);
    if (nu) *nu = a.nu;
    if (gamma) *gamma = a.gamma;
  });
}

sd_status sd_aw_residual(double nu, double gamma, int d, int isotropic, const double* t, size_t n,
                         double* slope, double* intercept) {
  return guarded([&] {
    require(t, "t");
    const auto r = scaling::aw_residual({nu, gamma, d, isotropic != 0}, std::span<const double>(t, n));
    if (slope) *slope = r.slope;
    if (intercept) *intercept = r.intercept;
  });
}

sd_status sd_laplace_msd(const double* t, const double* e, size_t n, double lambda,
                         sd_tail_model tail, double tail_gamma, double* value, double* tail_fraction) {
  return guarded([&] {
    require(t, "t");
    require(e, "e");
    scaling::MsdSeries s{{t, t + n}, {e, e + n}, {}};
    scaling::LaplaceOptions opt;
    if (tail != SD_TAIL_LINEAR && tail != SD_TAIL_LOG_POWER) throw ConfigError("unknown tail model");
    opt.tail = tail == SD_TAIL_LINEAR ? scaling::TailModel::Linear : scaling::TailModel::LogPower;
    opt.tail_gamma = tail_gamma;
    const auto r = scaling::laplace_msd(s, lambda, opt);
    if (value) *value = r.value;
    if (tail_fraction) *tail_fraction = r.tail_fraction;
  });
}

sd_status sd_fit_exponents(const double* t, const double* e, const double* se, size_t n,
                           double* gamma, double* gamma_ci, double* amplitude, double* amplitude_ci) {
  return guarded([&] {
    require(t, "t");
    require(e, "e");
    scaling::MsdSeries s{{t, t + n}, {e, e + n}, {}};
    if (se) s.std_errors.assign(se, se + n);
    const auto f = scaling::fit_exponents(s);
    if (gamma) *gamma = f.gamma;
    if (gamma_ci) *gamma_ci = f.gamma_ci;
    if (amplitude) *amplitude = f.amplitude;
    if (amplitude_ci) *amplitude_ci = f.amplitude_ci;
  });
}

}  // extern "C"
