#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynbc/cli.hpp"
#include "dynbc/errors.hpp"

using namespace dynbc;
using namespace dynbc::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("dynbc_test_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

int run_args(std::vector<std::string> args) {
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::directory_iterator(dir)) m[e.path().filename().string()] = slurp(e.path());
  return m;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse("# comment\nb0 = 0.5\n  N = 4  # trailing\nM = 4\n\npolicies = zero,constant(0.5,0)\n");
  CHECK(c.b0 == 0.5);
  CHECK(c.N == 4);
  REQUIRE(c.policies.size() == 2);
  CHECK(c.policies[1] == "constant(0.5,0)");
  CHECK_THROWS_AS(parse("nope = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("M = 4\nM = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse("N = four\n"), ConfigError);
  CHECK_THROWS_AS(parse("b0\n"), ConfigError);
  try {
    parse("b0 = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "b0 must be positive");
  }
  CHECK(split_policy_list("zero,constant(1,2), feedback(nested_mc)").size() == 3);
}

TEST_CASE("policy names expand and reject unknowns") {
  RunConfig c;
  c.policies = {"constant_grid", "zero"};
  const auto problem = make_problem(c);
  const auto coeffs = make_coefficients(c);
  const auto basis = EigenBasis::build(c.params(), c.N);
  CHECK(make_policies(c, problem, coeffs, basis).size() == 10);
  c.policies = {"bogus"};
  CHECK_THROWS_AS(make_policies(c, problem, coeffs, basis), ConfigError);
}

TEST_CASE("spectrum: one row for N=1, N rows in general") {
  std::ostringstream log;
  RunConfig c;
  c.N = 1;
  auto out = scratch("spec1");
  CHECK(cmd_spectrum(c, out, log) == 0);
  std::vector<std::string> header;
  auto rows = read_csv(out / "spectrum.csv", &header);
  REQUIRE(rows.size() == 1);
  CHECK(header[1] == "lambda");
  CHECK(rows[0][1] < 0.0);
  CHECK(rows[0][1] > -std::numbers::pi * std::numbers::pi);

  c.N = 8;
  out = scratch("spec8");
  CHECK(cmd_spectrum(c, out, log) == 0);
  rows = read_csv(out / "spectrum.csv");
  REQUIRE(rows.size() == 8);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    CHECK(rows[j][1] > rows[j][5]);  // inside its Dirichlet gap
    CHECK(rows[j][1] < rows[j][6]);
    CHECK(rows[j][8] <= 1e-3);
    if (j > 0) CHECK(rows[j][1] < rows[j - 1][1]);
  }
  const auto j = nlohmann::json::parse(slurp(out / "spectrum.json"));
  CHECK(j["passed"] == true);
  CHECK(j["basis"].is_object());
}

TEST_CASE("malformed config exits 2 with a JSON error") {
  const auto dir = scratch("badcfg");
  const auto cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "b0 = -1\n";
  CHECK(run_args({"dynbc", "spectrum", "--config", cfg.string(), "--out", dir.string()}) == 2);
  const auto err = nlohmann::json::parse(slurp(dir / "error.json"));
  CHECK(err["error"] == "ConfigError");
  CHECK(err["message"] == "b0 must be positive");

  std::ofstream(cfg) << "unknown_key = 3\n";
  CHECK(run_args({"dynbc", "simulate", "--config", cfg.string(), "--out", dir.string()}) == 2);
  CHECK(run_args({"dynbc", "frobnicate"}) == 2);
}

TEST_CASE("simulate is byte-identical across reruns and thread counts") {
  RunConfig c;
  c.n_paths = 200;
  c.paths_written = 2;
  std::ostringstream log;
  const auto a = scratch("sim_a"), b = scratch("sim_b");
  CHECK(cmd_simulate(c, a, log) == 0);
  c.threads = 3;
  CHECK(cmd_simulate(c, b, log) == 0);
  const auto fa = dir_bytes(a), fb = dir_bytes(b);
  CHECK(fa.size() == 3);
  CHECK(fa == fb);
  c.seed = 7;
  const auto d = scratch("sim_d");
  CHECK(cmd_simulate(c, d, log) == 0);
  CHECK(dir_bytes(d).at("path_0.csv") != fa.at("path_0.csv"));
}

TEST_CASE("zero-noise simulate gives the semigroup on each coefficient") {
  RunConfig c;
  c.coefficients = "zero";
  c.n_paths = 1;
  std::ostringstream log;
  const auto out = scratch("sim_zero");
  CHECK(cmd_simulate(c, out, log) == 0);
  const auto rows = read_csv(out / "path_0.csv");
  const auto basis = EigenBasis::build(c.params(), c.N);
  REQUIRE(rows.back().size() == static_cast<std::size_t>(c.N) + 1);
  CHECK(rows.back()[0] == doctest::Approx(c.T));
  for (int k = 0; k < c.N; ++k) {
    const double expected = std::exp(basis.mode(k).lambda * c.T) * rows.front()[k + 1];
    CHECK(std::abs(rows.back()[k + 1] - expected) <= 1e-12 * (1.0 + std::abs(rows.front()[k + 1])));
  }
}

TEST_CASE("ensemble variance matches the recursion covariance") {
  RunConfig c;
  c.n_paths = 10000;
  c.paths_written = 0;
  std::ostringstream log;
  const auto out = scratch("sim_ens");
  CHECK(cmd_simulate(c, out, log) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "ensemble.json"));
  const auto basis = EigenBasis::build(c.params(), c.N);
  const auto init = make_initial(c, basis);
  const auto G = galerkin_diffusion(0.0, init, make_coefficients(c), basis, c.M);
  const auto C = recursion_covariance(basis, G, c.M, c.dt, c.sim().steps());
  for (int k = 0; k < c.N; ++k) {
    const double var = j["var_terminal"][k];
    const double se = j["se_var"][k];
    CHECK(std::abs(var - C[k * c.N + k]) <= 3.0 * se);
  }
}

TEST_CASE("control: identical policies tie exactly, traces stay admissible") {
  RunConfig c;
  c.n_paths = 50;
  c.policies = {"zero", "zero"};
  std::ostringstream log;
  auto out = scratch("ctl_zero");
  CHECK(cmd_control(c, out, log) == 0);
  auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  REQUIRE(rep["pairwise"].size() == 1);
  CHECK(rep["pairwise"][0]["diff"].get<double>() == 0.0);
  CHECK(rep["pairwise"][0]["paired_se"].get<double>() == 0.0);

  c.radius = 0.3;
  c.policies = {"zero", "feedback(terminal_proxy)", "constant(2,2)"};
  out = scratch("ctl_radius");
  CHECK(cmd_control(c, out, log) == 0);
  int traces = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().filename().string().rfind("trace_", 0) != 0) continue;
    ++traces;
    std::vector<std::string> header;
    const auto rows = read_csv(e.path(), &header);
    CHECK(header[1] == "z0");
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::hypot(r[1], r[2]));
    CHECK(worst <= c.radius * (1.0 + 1e-12));
  }
  CHECK(traces == 3);
}

TEST_CASE("control: feedback beats zero on the benchmark") {
  RunConfig c;
  c.n_paths = 400;
  std::ostringstream log;
  const auto out = scratch("ctl_bench");
  CHECK(cmd_control(c, out, log) == 0);
  const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  const auto& pw = rep["pairwise"][0];
  CHECK(pw["a"] == "zero");
  CHECK(pw["diff"].get<double>() >= 2.0 * pw["paired_se"].get<double>());
}

TEST_CASE("validate: default passes, form association reported") {
  RunConfig c;
  std::ostringstream log;
  const auto out = scratch("val_default");
  CHECK(cmd_validate(c, out, log) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "validate.json"));
  CHECK(j["passed"] == true);
  bool seen = false;
  for (const auto& r : j["checks"]) {
    if (r["name"] == "form_association") {
      seen = true;
      CHECK(r["measured"].get<double>() < 1e-5);
    }
  }
  CHECK(seen);
  CHECK(log.str().find("PASS hilbert_schmidt_rate") != std::string::npos);
}

TEST_CASE("validate: truncated HS check fails by name") {
  RunConfig c;
  c.hs_modes = 2;
  c.ito_paths = 200;
  std::ostringstream log;
  const auto out = scratch("val_trunc");
  CHECK(cmd_validate(c, out, log) == 1);
  const auto j = nlohmann::json::parse(slurp(out / "validate.json"));
  bool seen = false;
  for (const auto& r : j["checks"]) {
    if (r["name"] == "hilbert_schmidt_rate") {
      seen = true;
      CHECK(r["passed"] == false);
      CHECK(r["detail"].get<std::string>().find("TruncationError") != std::string::npos);
    }
  }
  CHECK(seen);
}
