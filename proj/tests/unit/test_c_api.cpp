#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "superdiff/superdiff.h"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / (std::string("sd_capi_") + name)).string();
}

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(sd_version()) > 0);
  sd_field* f = nullptr;
  CHECK(sd_field_sample(SD_ENV_CURL, 1.0, 64.0, 15, 1, &f) == SD_ERR_USAGE);
  CHECK(f == nullptr);
  CHECK(std::string(sd_last_error_kind()) == "config");
  CHECK(std::string(sd_last_error()).find("even") != std::string::npos);
  CHECK(sd_field_sample(SD_ENV_CURL, 1.0, 64.0, 64, 1, nullptr) == SD_ERR_USAGE);
  CHECK(sd_field_read_binary("/nonexistent/file.bin", &f) == SD_ERR_USAGE);
  CHECK(std::string(sd_last_error_kind()) == "io");
}

TEST_CASE("field handles") {
  sd_field* f = nullptr;
  REQUIRE(sd_field_sample(SD_ENV_CURL, 1.0, 32.0, 64, 9, &f) == SD_OK);
  double box = 0;
  int grid = 0, model = -1;
  uint64_t seed = 0;
  REQUIRE(sd_field_info(f, &box, &grid, &model, &seed) == SD_OK);
  CHECK(box == 32.0);
  CHECK(grid == 64);
  CHECK(model == SD_ENV_CURL);
  CHECK(seed == 9);
  double viol = 1.0;
  REQUIRE(sd_field_max_constraint_violation(f, &viol) == SD_OK);
  CHECK(viol < 1e-12);
  double v[2];
  REQUIRE(sd_field_eval(f, 1.5, -2.5, v) == SD_OK);
  double w[2];
  REQUIRE(sd_field_eval(f, 1.5 + 32.0, -2.5, w) == SD_OK);
  CHECK(v[0] == doctest::Approx(w[0]).epsilon(1e-12));

  const std::string bin = temp_path("field.bin");
  REQUIRE(sd_field_write_binary(f, bin.c_str()) == SD_OK);
  sd_field* g = nullptr;
  REQUIRE(sd_field_read_binary(bin.c_str(), &g) == SD_OK);
  REQUIRE(sd_field_eval(g, 1.5, -2.5, w) == SD_OK);
  CHECK(v[0] == w[0]);
  CHECK(v[1] == w[1]);
  const std::string csv = temp_path("field.csv");
  REQUIRE(sd_field_write_csv(f, csv.c_str()) == SD_OK);
  CHECK(slurp(csv).rfind("x,y,omega1,omega2\n", 0) == 0);
  sd_field_free(g);
  sd_field_free(f);
  sd_field_free(nullptr);
  std::filesystem::remove(bin);
  std::filesystem::remove(csv);

  REQUIRE(sd_field_sample(SD_ENV_SCALAR_ANISO, 1.0, 32.0, 64, 9, &f) == SD_OK);
  REQUIRE(sd_field_max_constraint_violation(f, &viol) == SD_OK);
  CHECK(viol == 0.0);
  sd_field_free(f);
}

TEST_CASE("ensembles") {
  sd_sim_config c;
  sd_sim_config_init(&c);
  c.model = SD_MODEL_DCGF;
  c.box = 16.0;
  c.grid = 64;
  c.t_max = 1.0;
  c.ensemble = 50;
  const double times[] = {0.5, 1.0};
  c.output_times = times;
  c.n_output_times = 2;
  sd_ensemble* e = nullptr;
  REQUIRE(sd_ensemble_run(&c, &e) == SD_OK);
  REQUIRE(sd_ensemble_rows(e) == 2);
  double t, m, se, m1, m2;
  REQUIRE(sd_ensemble_row(e, 1, &t, &m, &se, &m1, &m2) == SD_OK);
  CHECK(t == 1.0);
  CHECK(m > 0.0);
  CHECK(std::abs(m - m1 - m2) <= 1e-12 * m);
  CHECK(sd_ensemble_row(e, 2, &t, &m, &se, &m1, &m2) == SD_ERR_USAGE);
  CHECK(sd_ensemble_wrap_fraction(e) >= 0.0);

  const std::string a = temp_path("ens_a.csv"), b = temp_path("ens_b.csv");
  REQUIRE(sd_ensemble_write_csv(e, a.c_str()) == SD_OK);
  sd_ensemble* e2 = nullptr;
  REQUIRE(sd_ensemble_run(&c, &e2) == SD_OK);
  REQUIRE(sd_ensemble_write_csv(e2, b.c_str()) == SD_OK);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("t,E_t,stderr,E1_t,E2_t\n", 0) == 0);
  sd_ensemble_free(e);
  sd_ensemble_free(e2);
  std::filesystem::remove(a);
  std::filesystem::remove(b);

  c.dt = 0.5;
  CHECK(sd_ensemble_run(&c, &e) == SD_ERR_USAGE);
  CHECK(std::string(sd_last_error_kind()) == "config");
}

TEST_CASE("instability maps to its own status") {
  sd_sim_config c;
  sd_sim_config_init(&c);
  c.model = SD_MODEL_SRBP;
  c.box = 11.0;
  c.grid = 16;
  c.dt = 0.1;
  c.t_max = 200.0;
  c.ensemble = 2;
  c.sigma = 0.05;
  sd_ensemble* e = nullptr;
  REQUIRE(sd_ensemble_run(&c, &e) == SD_ERR_INSTABILITY);
  CHECK(e == nullptr);
  CHECK(std::string(sd_last_error_kind()) == "instability");
  CHECK(std::string(sd_last_error()).find("trajectory") != std::string::npos);
}

TEST_CASE("bounds") {
  sd_bounds_config c;
  sd_bounds_config_init(&c);
  c.model = SD_MODEL_DCGF;
  c.lambda = 1e-2;
  sd_bounds_row r;
  REQUIRE(sd_bounds_evaluate(&c, &r) == SD_OK);
  CHECK(r.lambda == 1e-2);
  CHECK(r.lower_bound > 0.0);
  CHECK(r.lower_bound <= r.upper_bound);
  CHECK(std::abs(2 * r.J1 - r.J2 - r.J3 - 0.5 * r.lower_bound) < 1e-8 * r.lower_bound);
  c.lambda = -1.0;
  CHECK(sd_bounds_evaluate(&c, &r) == SD_ERR_USAGE);
  CHECK(std::string(sd_last_error_kind()) == "domain");
  c.lambda = 1e-2;
  c.max_intervals = 2;
  CHECK(sd_bounds_evaluate(&c, &r) == SD_ERR_NUMERIC);
  CHECK(std::string(sd_last_error_kind()) == "numeric");
}

TEST_CASE("scaling") {
  double nu = 0, gamma = 0;
  REQUIRE(sd_aw_exponents(2, 1, &nu, &gamma) == SD_OK);
  CHECK(nu == 0.5);
  CHECK(gamma == 0.25);
  CHECK(sd_aw_exponents(5, 1, &nu, &gamma) == SD_ERR_USAGE);

  std::vector<double> t, e;
  for (int i = 0; i < 64; ++i) t.push_back(1e2 * std::pow(1e12, i / 63.0));
  double slope = 1, icpt = 0;
  REQUIRE(sd_aw_residual(0.5, 0.25, 2, 1, t.data(), t.size(), &slope, &icpt) == SD_OK);
  CHECK(std::abs(slope) < 0.02);

  t.clear();
  for (int i = 0; i < 100; ++i) t.push_back(0.1 * std::pow(1e4, i / 99.0));
  for (double x : t) e.push_back(4.0 * x);
  double val = 0, tail = 0;
  REQUIRE(sd_laplace_msd(t.data(), e.data(), t.size(), 0.01, SD_TAIL_LINEAR, 0.5, &val, &tail) == SD_OK);
  CHECK(std::abs(val * 1e-4 / 4.0 - 1.0) < 0.01);
  CHECK(sd_laplace_msd(t.data(), e.data(), t.size(), 1e-5, SD_TAIL_LINEAR, 0.5, &val, &tail) == SD_ERR_USAGE);

  t.clear();
  e.clear();
  for (int i = 0; i < 30; ++i) t.push_back(10.0 * std::pow(1e4, i / 29.0));
  for (double x : t) e.push_back(3.0 * x * std::sqrt(std::log(x)));
  double g = 0, gci = 0, a = 0, aci = 0;
  REQUIRE(sd_fit_exponents(t.data(), e.data(), nullptr, t.size(), &g, &gci, &a, &aci) == SD_OK);
  CHECK(std::abs(g - 0.5) < 0.01);
  CHECK(a == doctest::Approx(3.0).epsilon(1e-9));
}
