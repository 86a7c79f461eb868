#ifndef SUPERDIFF_SUPERDIFF_H
#define SUPERDIFF_SUPERDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(SUPERDIFF_BUILDING_LIBRARY)
#define SD_API __attribute__((visibility("default")))
#else
#define SD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum {
  SD_OK = 0,
  SD_ERR_USAGE = 2,       /* configuration, domain or I/O error */
  SD_ERR_NUMERIC = 3,     /* quadrature or fit did not converge */
  SD_ERR_INSTABILITY = 4  /* integrator step exceeded L/4 */
} sd_status;

typedef enum { SD_MODEL_SRBP = 0, SD_MODEL_SRBP_ANISO = 1, SD_MODEL_DCGF = 2 } sd_model;

typedef enum { SD_ENV_GRADIENT = 0, SD_ENV_CURL = 1, SD_ENV_SCALAR_ANISO = 2 } sd_env_model;

typedef enum { SD_TAIL_LINEAR = 0, SD_TAIL_LOG_POWER = 1 } sd_tail_model;

typedef struct sd_field sd_field;
typedef struct sd_ensemble sd_ensemble;

SD_API const char* sd_version(void);

/* Message and kind ("config", "domain", "numeric", "instability", "io",
   "internal") of the last failed call on this thread. */
SD_API const char* sd_last_error(void);
SD_API const char* sd_last_error_kind(void);

/* ---- environment fields ---- */

SD_API sd_status sd_field_sample(sd_env_model model, double sigma, double box, int grid,
                                 uint64_t seed, sd_field** out);
SD_API sd_status sd_field_read_binary(const char* path, sd_field** out);
SD_API void sd_field_free(sd_field* field);
SD_API sd_status sd_field_info(const sd_field* field, double* box, int* grid, int* model,
                               uint64_t* seed);
SD_API sd_status sd_field_eval(const sd_field* field, double x, double y, double out[2]);
SD_API sd_status sd_field_write_csv(const sd_field* field, const char* path);
SD_API sd_status sd_field_write_binary(const sd_field* field, const char* path);
/* Largest |p·ω̂(p)| (curl model) or |p̃·ω̂(p)| (gradient model) over all modes;
   largest |ω₂| for the scalar model. */
SD_API sd_status sd_field_max_constraint_violation(const sd_field* field, double* out);

/* ---- ensembles ---- */

typedef struct {
  sd_model model;
  double dt;
  double t_max;
  const double* output_times; /* NULL: record t_max only */
  size_t n_output_times;
  double box;
  int grid;
  uint64_t seed;
  int ensemble;
  double sigma;
  int refresh_interval;
  int environment_enabled;
  int self_repulsion_enabled;
  int noise_substeps;
} sd_sim_config;

SD_API void sd_sim_config_init(sd_sim_config* config);
SD_API sd_status sd_ensemble_run(const sd_sim_config* config, sd_ensemble** out);
SD_API size_t sd_ensemble_rows(const sd_ensemble* ensemble);
SD_API sd_status sd_ensemble_row(const sd_ensemble* ensemble, size_t row, double* t, double* e,
                                 double* std_error, double* e1, double* e2);
SD_API double sd_ensemble_wrap_fraction(const sd_ensemble* ensemble);
/* Columns t,E_t,stderr,E1_t,E2_t. */
SD_API sd_status sd_ensemble_write_csv(const sd_ensemble* ensemble, const char* path);
SD_API void sd_ensemble_free(sd_ensemble* ensemble);

/* ---- variational bounds ---- */

typedef struct {
  sd_model model;
  double lambda;
  double sigma;
  double p_max;     /* 0: automatic */
  double rel_tol;
  int max_intervals;
  double c;         /* SRBP amplitude; negative: optimize */
  double aniso_C;   /* <= 0: fit */
  int suppress_d;
} sd_bounds_config;

typedef struct {
  double lambda;
  double lower_bound;
  double upper_bound;
  double J1;
  double J2;
  double J3;          /* Schwarz bound (DCGF, anisotropic) or J31 bound (SRBP) */
  double J32_prime;
  double J32_envelope;
  double lower_bound_polar;
  double aniso_C;
  double best_c;
  double err_estimate;
} sd_bounds_row;

SD_API void sd_bounds_config_init(sd_bounds_config* config);
SD_API sd_status sd_bounds_evaluate(const sd_bounds_config* config, sd_bounds_row* out);

/* ---- scaling ---- */

SD_API sd_status sd_aw_exponents(int d, int isotropic, double* nu, double* gamma);
SD_API sd_status sd_aw_residual(double nu, double gamma, int d, int isotropic, const double* t,
                                size_t n, double* slope, double* intercept);
SD_API sd_status sd_laplace_msd(const double* t, const double* e, size_t n, double lambda,
                                sd_tail_model tail, double tail_gamma, double* value,
                                double* tail_fraction);
/* std_error may be NULL. */
SD_API sd_status sd_fit_exponents(const double* t, const double* e, const double* std_error,
                                  size_t n, double* gamma, double* gamma_ci, double* amplitude,
                                  double* amplitude_ci);

#ifdef __cplusplus
}
#endif

#endif
