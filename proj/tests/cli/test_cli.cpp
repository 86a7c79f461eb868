#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("sd_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Cleanup {
  Cleanup() { workdir(); }
  ~Cleanup() {
    std::error_code ec;
    fs::remove_all(workdir(), ec);
  }
} cleanup;

Run cli(const std::string& args) {
  const fs::path o = workdir() / "stdout.txt", e = workdir() / "stderr.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && '" SUPERDIFF_CLI "' " + args + " >'" +
                          o.string() + "' 2>'" + e.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("usage errors exit with 2 and a parsable line") {
  auto r = cli("");
  CHECK(r.code == 2);
  CHECK(r.err.rfind("superdiff: error code=2 kind=usage msg=", 0) == 0);
  r = cli("bounds --bogus");
  CHECK(r.code == 2);
  r = cli("nonsense");
  CHECK(r.code == 2);
  r = cli("bounds --model nope");
  CHECK(r.code == 2);
  CHECK(r.err.find("code=2") != std::string::npos);
  r = cli("--version");
  CHECK(r.code == 0);
  CHECK_FALSE(r.out.empty());
}

TEST_CASE("numeric and instability errors") {
  auto r = cli("bounds --model dcgf --lambda-list 1e-2 --tol 1e-17");
  CHECK(r.code == 3);
  CHECK(r.err.find("kind=numeric") != std::string::npos);
  r = cli("simulate --model srbp --box 11 --grid 16 --dt 0.1 --t-max 200 --sigma 0.05 --ensemble 2");
  CHECK(r.code == 4);
  CHECK(r.err.find("kind=instability") != std::string::npos);
}

TEST_CASE("bounds writes one row per lambda") {
  const auto r = cli("bounds --model dcgf --lambda-list 1e-2,1e-4 --out b.csv");
  REQUIRE(r.code == 0);
  const auto l = lines(slurp(workdir() / "b.csv"));
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "lambda,lower_bound,upper_bound,J1,J2,J3_schwarz,err_estimate");
  CHECK(l[1].rfind("0.01,", 0) == 0);
  CHECK(l[2].rfind("0.0001,", 0) == 0);
  CHECK(fs::exists(workdir() / "b.csv.manifest.toml"));

  const auto p = cli("bounds --model dcgf --lambda-list 1e-2 --laplace-prefactor");
  REQUIRE(p.code == 0);
  CHECK(lines(p.out)[0].find("E_hat_lower,E_hat_upper") != std::string::npos);
}

TEST_CASE("aw-check reports the table exponents") {
  const auto r = cli("aw-check --d 2 --iso");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["nu"].get<double>() == 0.5);
  CHECK(j["gamma"].get<double>() == 0.25);
  CHECK(std::abs(j["slope"].get<double>()) < 0.02);
  const auto a = nlohmann::json::parse(cli("aw-check --d 2 --aniso").out);
  CHECK(a["gamma"].get<double>() == doctest::Approx(1.0 / 3.0));
  CHECK(cli("aw-check --d 3 --aniso").code == 2);
}

TEST_CASE("simulate is deterministic and reproducible from its manifest") {
  const std::string args =
      "simulate --model srbp_aniso --dt 0.01 --t-max 5 --ensemble 40 --box 16 --grid 64 ";
  REQUIRE(cli(args + "--seed 1 --out s1.csv").code == 0);
  REQUIRE(cli(args + "--seed 1 --out s2.csv").code == 0);
  const std::string s1 = slurp(workdir() / "s1.csv");
  CHECK(s1 == slurp(workdir() / "s2.csv"));
  CHECK(lines(s1)[0] == "t,E_t,stderr,E1_t,E2_t");
  CHECK(cli(args + "--seed 2 --out s3.csv").code == 0);
  CHECK(s1 != slurp(workdir() / "s3.csv"));

  fs::rename(workdir() / "s1.csv", workdir() / "s1.orig");
  REQUIRE(cli("--config s1.csv.manifest.toml").code == 0);
  CHECK(slurp(workdir() / "s1.csv") == s1);
}

TEST_CASE("config values are overridden by flags") {
  {
    std::ofstream cfg(workdir() / "run.toml");
    cfg << "[bounds]\nmodel=\"dcgf\"\nlambda-list=\"1e-2,1e-3,1e-4\"\nout=\"c.csv\"\n";
  }
  REQUIRE(cli("--config run.toml").code == 0);
  CHECK(lines(slurp(workdir() / "c.csv")).size() == 4);
  REQUIRE(cli("--config run.toml bounds --lambda-list 1e-2").code == 0);
  CHECK(lines(slurp(workdir() / "c.csv")).size() == 2);
}

TEST_CASE("sample-env summary and outputs") {
  const auto r = cli("sample-env --model curl --box 16 --grid 64 --seed 4 --out f.csv --binary f.bin");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["max_constraint_violation"].get<double>() < 1e-12);
  CHECK(lines(slurp(workdir() / "f.csv")).size() == 64 * 64 + 1);
  CHECK(fs::file_size(workdir() / "f.bin") == 32 + 2 * 64 * 64 * 8);
  const std::string first = slurp(workdir() / "f.csv");
  REQUIRE(cli("sample-env --model curl --box 16 --grid 64 --seed 4 --out f.csv").code == 0);
  CHECK(slurp(workdir() / "f.csv") == first);
}

TEST_CASE("scaling consumes simulate output") {
  REQUIRE(cli("simulate --model dcgf --no-environment --dt 0.1 --t-max 1000 --ensemble 50 --box 16 --grid 16 "
              "--output-times 10,20,40,60,80,100,200,400,600,800,1000 --out m.csv")
              .code == 0);
  const auto r = cli("scaling --input m.csv --lambda-list 0.01,0.1 --fit --aw-check 2 iso");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["laplace"].size() == 2);
  CHECK(j.contains("gamma_hat"));
  CHECK(j.contains("ci"));
  CHECK(std::abs(j["aw_slope"].get<double>()) < 0.02);
  CHECK(cli("scaling --input m.csv --lambda-list 1e-4").code == 2);
  CHECK(cli("scaling --input missing.csv --fit").code == 2);
}
