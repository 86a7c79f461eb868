// superdiff command-line driver. Links only the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "superdiff/superdiff.h"

namespace {

using json = nlohmann::json;

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

void check(sd_status s) {
  if (s != SD_OK) throw Failure{static_cast<int>(s), sd_last_error_kind(), sd_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{2, "config", msg}; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int parse_model(const std::string& name) {
  if (name == "srbp") return SD_MODEL_SRBP;
  if (name == "srbp_aniso" || name == "srbp-aniso" || name == "aniso") return SD_MODEL_SRBP_ANISO;
  if (name == "dcgf") return SD_MODEL_DCGF;
  usage_error("unknown model '" + name + "' (expected srbp, srbp_aniso or dcgf)");
}

int parse_env_model(const std::string& name) {
  if (name == "gradient" || name == "srbp") return SD_ENV_GRADIENT;
  if (name == "curl" || name == "dcgf") return SD_ENV_CURL;
  if (name == "scalar" || name == "aniso" || name == "srbp_aniso" || name == "srbp-aniso")
    return SD_ENV_SCALAR_ANISO;
  usage_error("unknown environment model '" + name + "'");
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Failure{2, "io", "cannot open '" + path + "' for writing"};
  return out;
}

void write_manifest(const CLI::App& app, const std::string& out, std::uint64_t seed) {
  auto m = open_out(out + ".manifest.toml");
  m << "# superdiff " << sd_version() << "\n";
  m << "# seed " << seed << "\n";
  m << app.config_to_str(true, false);
}

void emit_json(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump() << "\n";
  } else {
    auto f = open_out(out);
    f << j.dump(2) << "\n";
  }
}

/// Default recording times: up to 24 log-spaced points in [max(1, dt), t_max]
/// snapped to the dt lattice.
std::vector<double> default_times(double dt, double t_max) {
  std::set<long long> steps;
  const double lo = std::max(1.0, dt);
  if (!(t_max > lo)) return {t_max};
  const int n = 24;
  for (int i = 0; i < n; ++i) {
    const double t = lo * std::pow(t_max / lo, static_cast<double>(i) / (n - 1));
    steps.insert(std::max(1LL, std::llround(t / dt)));
  }
  std::vector<double> out;
  for (long long s : steps) out.push_back(static_cast<double>(s) * dt);
  out.back() = std::llround(t_max / dt) * dt;
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Failure{2, "io", "input CSV lacks column '" + name + "'"};
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{2, "io", "cannot open '" + path + "'"};
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Failure{2, "io", "empty input '" + path + "'"};
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.header.push_back(c);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = parse_list(line, "CSV");
    if (row.size() != t.header.size()) throw Failure{2, "io", "ragged CSV row in '" + path + "'"};
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct SampleOpts {
  std::string model = "dcgf";
  double box = 64.0;
  int grid = 256;
  std::uint64_t seed = 1;
  double sigma = 1.0;
  std::string out;
  std::string binary;
};

struct SimOpts {
  std::string model = "dcgf";
  double dt = 0.01;
  double t_max = 100.0;
  int ensemble = 100;
  double box = 64.0;
  int grid = 256;
  std::uint64_t seed = 1;
  double sigma = 1.0;
  std::string output_times;
  int refresh = 10;
  bool no_environment = false;
  bool no_repulsion = false;
  std::string out;
};

struct BoundsOpts {
  std::string model = "dcgf";
  std::string lambda_list = "1e-2,1e-3,1e-4";
  double tol = 1e-10;
  double pmax = 0.0;
  double sigma = 1.0;
  double c = -1.0;
  bool suppress_d = false;
  bool laplace_prefactor = false;
  std::string out;
};

struct ScalingOpts {
  std::string input;
  std::string lambda_list;
  bool fit = false;
  std::vector<std::string> aw_check;
  std::string tail = "linear";
  double tail_gamma = 0.5;
  std::string out;
};

struct AwOpts {
  int d = 2;
  bool iso = false;
  bool aniso = false;
  double t_min = 1e8;
  double t_max = 1e40;
  int points = 64;
  std::string out;
};

json aw_report(int d, bool isotropic, double t_min, double t_max, int points) {
  double nu = 0, gamma = 0;
  check(sd_aw_exponents(d, isotropic, &nu, &gamma));
  if (points < 3 || !(t_min > 0.0) || !(t_max > t_min)) usage_error("aw-check: bad time grid");
  std::vector<double> t(points);
  for (int i = 0; i < points; ++i)
    t[i] = std::exp(std::log(t_min) + (std::log(t_max) - std::log(t_min)) * i / (points - 1));
  double slope = 0, intercept = 0;
  check(sd_aw_residual(nu, gamma, d, isotropic, t.data(), t.size(), &slope, &intercept));
  return json{{"d", d}, {"isotropic", isotropic}, {"nu", nu}, {"gamma", gamma}, {"slope", slope}};
}

void run_sample(const CLI::App& app, const SampleOpts& o) {
  sd_field* raw = nullptr;
  check(sd_field_sample(static_cast<sd_env_model>(parse_env_model(o.model)), o.sigma, o.box, o.grid,
                        o.seed, &raw));
  std::unique_ptr<sd_field, void (*)(sd_field*)> field(raw, sd_field_free);
  double violation = 0.0;
  check(sd_field_max_constraint_violation(field.get(), &violation));
  if (!o.out.empty()) {
    check(sd_field_write_csv(field.get(), o.out.c_str()));
    write_manifest(app, o.out, o.seed);
  }
  if (!o.binary.empty()) check(sd_field_write_binary(field.get(), o.binary.c_str()));
  std::cout << json{{"model", o.model}, {"box", o.box}, {"grid", o.grid}, {"seed", o.seed},
                    {"max_constraint_violation", violation}}
                   .dump()
            << "\n";
}

void run_simulate(const CLI::App& app, const SimOpts& o) {
  sd_sim_config c;
  sd_sim_config_init(&c);
  c.model = static_cast<sd_model>(parse_model(o.model));
  c.dt = o.dt;
  c.t_max = o.t_max;
  c.ensemble = o.ensemble;
  c.box = o.box;
  c.grid = o.grid;
  c.seed = o.seed;
  c.sigma = o.sigma;
  c.refresh_interval = o.refresh;
  c.environment_enabled = !o.no_environment;
  c.self_repulsion_enabled = !o.no_repulsion;
  std::vector<double> times =
      o.output_times.empty() ? default_times(o.dt, o.t_max) : parse_list(o.output_times, "output time");
  c.output_times = times.data();
  c.n_output_times = times.size();
  sd_ensemble* raw = nullptr;
  check(sd_ensemble_run(&c, &raw));
  std::unique_ptr<sd_ensemble, void (*)(sd_ensemble*)> ens(raw, sd_ensemble_free);
  const double wrap = sd_ensemble_wrap_fraction(ens.get());
  if (wrap > 0.0)
    std::cerr << "superdiff: warning: " << fmt(100.0 * wrap)
              << "% of trajectories moved farther than L/4 from the origin\n";
  if (o.out.empty()) {
    std::cout << "t,E_t,stderr,E1_t,E2_t\n";
    for (std::size_t i = 0; i < sd_ensemble_rows(ens.get()); ++i) {
      double t, e, se, e1, e2;
      check(sd_ensemble_row(ens.get(), i, &t, &e, &se, &e1, &e2));
      std::cout << fmt(t) << ',' << fmt(e) << ',' << fmt(se) << ',' << fmt(e1) << ',' << fmt(e2) << "\n";
    }
    return;
  }
  check(sd_ensemble_write_csv(ens.get(), o.out.c_str()));
  write_manifest(app, o.out, o.seed);
}

void run_bounds(const CLI::App& app, const BoundsOpts& o) {
  const int model = parse_model(o.model);
  const auto lambdas = parse_list(o.lambda_list, "lambda");
  if (lambdas.empty()) usage_error("bounds: empty --lambda-list");
  std::vector<std::string> cols{"lambda", "lower_bound", "upper_bound", "J1", "J2"};
  if (model == SD_MODEL_SRBP) {
    cols.insert(cols.end(), {"J31_bound", "J32_prime", "best_c"});
  } else if (model == SD_MODEL_DCGF) {
    cols.push_back("J3_schwarz");
  } else {
    cols.insert(cols.end(), {"J3_schwarz", "lower_bound_polar", "aniso_C"});
  }
  cols.push_back("err_estimate");
  if (o.laplace_prefactor) cols.insert(cols.end(), {"E_hat_lower", "E_hat_upper"});

  std::ostringstream body;
  for (std::size_t i = 0; i < cols.size(); ++i) body << (i ? "," : "") << cols[i];
  body << "\n";
  for (double lambda : lambdas) {
    sd_bounds_config c;
    sd_bounds_config_init(&c);
    c.model = static_cast<sd_model>(model);
    c.lambda = lambda;
    c.sigma = o.sigma;
    c.p_max = o.pmax;
    c.rel_tol = o.tol;
    c.c = o.c;
    c.suppress_d = o.suppress_d;
    sd_bounds_row r;
    check(sd_bounds_evaluate(&c, &r));
    std::vector<double> v{r.lambda, r.lower_bound, r.upper_bound, r.J1, r.J2};
    if (model == SD_MODEL_SRBP) {
      v.insert(v.end(), {r.J3, r.J32_prime, r.best_c});
    } else if (model == SD_MODEL_DCGF) {
      v.push_back(r.J3);
    } else {
      v.insert(v.end(), {r.J3, r.lower_bound_polar, r.aniso_C});
    }
    v.push_back(r.err_estimate);
    if (o.laplace_prefactor) {
      const double s = 1.0 / (lambda * lambda);
      v.insert(v.end(), {s * r.lower_bound, s * r.upper_bound});
    }
    for (std::size_t i = 0; i < v.size(); ++i) body << (i ? "," : "") << fmt(v[i]);
    body << "\n";
  }
  if (o.out.empty()) {
    std::cout << body.str();
    return;
  }
  auto f = open_out(o.out);
  f << body.str();
  f.close();
  write_manifest(app, o.out, 0);
}

void run_scaling(const CLI::App& app, const ScalingOpts& o) {
  json report = json::object();
  if (!o.aw_check.empty()) {
    if (o.aw_check.size() != 2) usage_error("--aw-check takes: <d> iso|aniso");
    int d = 0;
    try {
      d = std::stoi(o.aw_check[0]);
    } catch (const std::exception&) {
      usage_error("--aw-check: dimension must be an integer");
    }
    const std::string& kind = o.aw_check[1];
    if (kind != "iso" && kind != "aniso") usage_error("--aw-check: expected iso or aniso");
    report["aw_slope"] = aw_report(d, kind == "iso", 1e8, 1e40, 64)["slope"];
  }
  const auto lambdas = parse_list(o.lambda_list, "lambda");
  if ((o.fit || !lambdas.empty()) && o.input.empty()) usage_error("scaling: --input is required");
  if (!o.input.empty()) {
    const CsvTable t = read_csv(o.input);
    const std::size_t ct = t.column("t"), ce = t.column("E_t");
    std::size_t cs = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (t.header[i] == "stderr") cs = i;
    std::vector<double> times, values, errors;
    for (const auto& r : t.rows) {
      times.push_back(r[ct]);
      values.push_back(r[ce]);
      errors.push_back(cs < r.size() ? r[cs] : 0.0);
    }
    if (o.fit) {
      // log log t needs t > 1
      std::vector<double> ft, fe, fs;
      for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] > 1.0) {
          ft.push_back(times[i]);
          fe.push_back(values[i]);
          fs.push_back(errors[i]);
        }
      double g, gci, a, aci;
      check(sd_fit_exponents(ft.data(), fe.data(), fs.data(), ft.size(), &g, &gci, &a, &aci));
      report["gamma_hat"] = g;
      report["ci"] = gci;
      report["amplitude"] = a;
      report["amplitude_ci"] = aci;
    }
    if (!lambdas.empty()) {
      if (o.tail != "linear" && o.tail != "logpower") usage_error("--tail: expected linear or logpower");
      const auto tail = o.tail == "linear" ? SD_TAIL_LINEAR : SD_TAIL_LOG_POWER;
      json arr = json::array();
      for (double lambda : lambdas) {
        double v, frac;
        check(sd_laplace_msd(times.data(), values.data(), times.size(), lambda, tail, o.tail_gamma,
                             &v, &frac));
        arr.push_back({{"lambda", lambda}, {"E_hat", v}, {"lambda2_E_hat", v * lambda * lambda},
                       {"tail_fraction", frac}});
      }
      report["laplace"] = arr;
    }
  }
  emit_json(report, o.out);
  if (!o.out.empty()) write_manifest(app, o.out, 0);
}

void run_aw(const CLI::App& app, const AwOpts& o) {
  if (o.iso && o.aniso) usage_error("aw-check: --iso and --aniso are exclusive");
  const json j = aw_report(o.d, !o.aniso, o.t_min, o.t_max, o.points);
  emit_json(j, o.out);
  if (!o.out.empty()) write_manifest(app, o.out, 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"superdiff: tracer-diffusion laboratory"};
  app.set_version_flag("--version", std::string(sd_version()));
  app.set_config("--config", "", "TOML config file; command-line flags override its values");
  app.require_subcommand(1);

  SampleOpts so;
  auto* sample = app.add_subcommand("sample-env", "Sample a stationary environment field")->configurable();
  sample->add_option("--model", so.model, "gradient|curl|scalar (or srbp|dcgf|srbp_aniso)")->capture_default_str();
  sample->add_option("--box", so.box, "Box side L")->capture_default_str();
  sample->add_option("--grid", so.grid, "Grid points N per axis")->capture_default_str();
  sample->add_option("--seed", so.seed, "RNG seed")->capture_default_str();
  sample->add_option("--sigma", so.sigma, "Mollifier length scale")->capture_default_str();
  sample->add_option("--out", so.out, "CSV output (x,y,omega1,omega2)");
  sample->add_option("--binary", so.binary, "Binary grid dump");

  SimOpts mo;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo ensemble")->configurable();
  sim->add_option("--model", mo.model, "srbp|srbp_aniso|dcgf")->capture_default_str();
  sim->add_option("--dt", mo.dt, "Time step")->capture_default_str();
  sim->add_option("--t-max", mo.t_max, "Horizon")->capture_default_str();
  sim->add_option("--ensemble", mo.ensemble, "Ensemble size M")->capture_default_str();
  sim->add_option("--box", mo.box, "Box side L")->capture_default_str();
  sim->add_option("--grid", mo.grid, "Grid points N per axis")->capture_default_str();
  sim->add_option("--seed", mo.seed, "RNG seed")->capture_default_str();
  sim->add_option("--sigma", mo.sigma, "Mollifier length scale")->capture_default_str();
  sim->add_option("--output-times", mo.output_times, "Comma-separated recording times (multiples of dt)");
  sim->add_option("--refresh", mo.refresh, "Steps between spectral drift refreshes")->capture_default_str();
  sim->add_flag("--no-environment", mo.no_environment, "Replace the initial field by 0");
  sim->add_flag("--no-repulsion", mo.no_repulsion, "Drop the local-time force");
  sim->add_option("--out", mo.out, "CSV output (t,E_t,stderr,E1_t,E2_t)");

  BoundsOpts bo;
  auto* bounds = app.add_subcommand("bounds", "Evaluate variational bounds")->configurable();
  bounds->add_option("--model", bo.model, "srbp|srbp_aniso|dcgf")->capture_default_str();
  bounds->add_option("--lambda-list", bo.lambda_list, "Comma-separated lambda values")->capture_default_str();
  bounds->add_option("--tol", bo.tol, "Quadrature relative tolerance")->capture_default_str();
  bounds->add_option("--pmax", bo.pmax, "Radial cutoff (0: automatic)")->capture_default_str();
  bounds->add_option("--sigma", bo.sigma, "Mollifier length scale")->capture_default_str();
  bounds->add_option("--c", bo.c, "SRBP amplitude (negative: optimize)")->capture_default_str();
  bounds->add_flag("--suppress-d", bo.suppress_d, "Force D = 0 (DCGF)");
  bounds->add_flag("--laplace-prefactor", bo.laplace_prefactor, "Append lambda^-2 scaled bounds");
  bounds->add_option("--out", bo.out, "CSV output");

  ScalingOpts co;
  auto* scal = app.add_subcommand("scaling", "Fit and Laplace-transform an E(t) series")->configurable();
  scal->add_option("--input", co.input, "CSV from simulate");
  scal->add_option("--lambda-list", co.lambda_list, "Comma-separated lambda values");
  scal->add_flag("--fit", co.fit, "Fit log(E/t) against log log t");
  scal->add_option("--aw-check", co.aw_check, "<d> iso|aniso")->expected(2);
  scal->add_option("--tail", co.tail, "linear|logpower")->capture_default_str();
  scal->add_option("--tail-gamma", co.tail_gamma, "Exponent of the logpower tail")->capture_default_str();
  scal->add_option("--out", co.out, "JSON output (default stdout)");

  AwOpts ao;
  auto* aw = app.add_subcommand("aw-check", "Scaling-consistency exponents and residual")->configurable();
  aw->add_option("--d", ao.d, "Dimension 1, 2 or 3")->capture_default_str();
  aw->add_flag("--iso", ao.iso, "Isotropic model (default)");
  aw->add_flag("--aniso", ao.aniso, "Anisotropic model (d = 2)");
  aw->add_option("--t-min", ao.t_min, "Grid start")->capture_default_str();
  aw->add_option("--t-max", ao.t_max, "Grid end")->capture_default_str();
  aw->add_option("--points", ao.points, "Grid points")->capture_default_str();
  aw->add_option("--out", ao.out, "JSON output (default stdout)");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::Success& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      throw Failure{2, "usage", e.what()};
    }
    if (*sample) run_sample(app, so);
    if (*sim) run_simulate(app, mo);
    if (*bounds) run_bounds(app, bo);
    if (*scal) run_scaling(app, co);
    if (*aw) run_aw(app, ao);
  } catch (const Failure& f) {
    json msg = f.message;
    std::cerr << "superdiff: error code=" << f.code << " kind=" << f.kind << " msg=" << msg.dump()
              << "\n";
    return f.code;
  } catch (const std::exception& e) {
    json msg = std::string(e.what());
    std::cerr << "superdiff: error code=3 kind=internal msg=" << msg.dump() << "\n";
    return 3;
  }
  return 0;
}
