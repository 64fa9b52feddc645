// One PASS/FAIL line per acceptance criterion, with measured values and
// wall time against the budget. Exit status 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dynbc/cli.hpp"
#include "dynbc/validate.hpp"

using namespace dynbc;
namespace fs = std::filesystem;

namespace {

const std::vector<BoundaryParams> kParamSets{{1.0, 1.0}, {0.5, 2.0}, {10.0, 0.1}};

struct Criterion {
  std::string id;
  std::string title;
  double budget_s;
  std::function<std::vector<CheckResult>()> run;
};

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    m[e.path().filename().string()] = os.str();
  }
  return m;
}

fs::path fresh_dir(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("dynbc_acceptance_" + tag);
  fs::remove_all(p);
  return p;
}

CheckResult rerun_identical(const std::string& name,
                            const std::function<int(const cli::RunConfig&, const fs::path&, std::ostream&)>& cmd,
                            const cli::RunConfig& cfg) {
  std::ostringstream log;
  const auto a = fresh_dir(name + "_a"), b = fresh_dir(name + "_b");
  const int ca = cmd(cfg, a, log), cb = cmd(cfg, b, log);
  const auto fa = dir_bytes(a), fb = dir_bytes(b);
  std::size_t bytes = 0;
  for (const auto& [k, v] : fa) bytes += v.size();
  CheckResult r;
  r.name = name;
  r.passed = ca == 0 && cb == 0 && !fa.empty() && fa == fb;
  r.measured = fa == fb ? 0.0 : 1.0;
  r.threshold = 0.0;
  r.detail = std::to_string(fa.size()) + " files, " + std::to_string(bytes) + " bytes compared";
  return r;
}

std::vector<Criterion> criteria() {
  std::vector<Criterion> out;
  out.push_back({"1", "spectral index brackets", 1.0, [] {
                   return std::vector<CheckResult>{check_index_brackets(kParamSets, 8)};
                 }});
  // Not an acceptance criterion: the gap structure that does hold, reported
  // next to criterion 1 so its failure can be read in context.
  out.push_back({"1b", "spectral gap structure (informational)", 1.0, [] {
                   auto r = check_gap_structure(kParamSets, 8);
                   r.informational = true;
                   return std::vector<CheckResult>{r};
                 }});
  out.push_back({"2", "finite-element eigenpair agreement", 30.0, [] {
                   return check_fd_equivalence(kParamSets, 8, 2000, 1e-3, 1e-2);
                 }});
  out.push_back({"3", "no positive spectrum", 1.0, [] {
                   std::vector<CheckResult> r;
                   for (const auto& p : kParamSets) r.push_back(check_det_positive(p, 200, 1e-3, 1e6));
                   return r;
                 }});
  out.push_back({"4", "orthonormality and form association", 5.0, [] {
                   std::vector<CheckResult> r;
                   for (const auto& p : kParamSets) {
                     const auto basis = EigenBasis::build(p, 8);
                     r.push_back(check_gram(basis, 1e-6));
                     r.push_back(check_form_association(basis, 8, 1e-5));
                   }
                   return r;
                 }});
  out.push_back({"5", "Hilbert-Schmidt rate", 1.0, [] {
                   return std::vector<CheckResult>{check_hs_rate({1.0, 1.0}, 200, 1e-3, 1e-1, 2.0, 41)};
                 }});
  out.push_back({"6", "semigroup vs matrix exponential", 30.0, [] {
                   return std::vector<CheckResult>{check_semigroup_vs_fd({1.0, 1.0}, 16, 2000, 0.1, 1e-3)};
                 }});
  out.push_back({"7", "scheme-level Ito isometry", 120.0, [] {
                   const auto bm = benchmark();
                   const auto basis = EigenBasis::build(bm.params, 8);
                   SimConfig cfg;
                   cfg.N = cfg.M = 8;
                   cfg.dt = 5e-3;
                   cfg.T = 0.5;
                   cfg.seed = 0;
                   return std::vector<CheckResult>{check_ito_isometry(
                       basis, additive_coefficients(0.2, 1.0, 1.0), cfg, benchmark_initial(basis), 10000, 1)};
                 }});
  out.push_back({"8", "strong self-convergence, multiplicative noise", 120.0, [] {
                   const auto basis = EigenBasis::build({1.0, 1.0}, 8);
                   SimConfig cfg;
                   cfg.N = cfg.M = 8;
                   cfg.T = 0.5;
                   cfg.seed = 0;
                   return std::vector<CheckResult>{check_strong_order(multiplicative_coefficients(1.0, 1.0), basis,
                                                                      cfg, benchmark_initial(basis),
                                                                      {4e-3, 2e-3, 1e-3}, 1e-3, 400, 0.5)};
                 }});
  out.push_back({"9", "Hamiltonian oracle", 10.0, [] { return check_hamiltonian_oracle(100, 1e-3, 1); }});
  out.push_back({"10", "policy improvement", 300.0, [] { return check_policy_improvement(4000, 0, 1); }});
  out.push_back({"11", "determinism of simulate and control", 60.0, [] {
                   cli::RunConfig sim;
                   sim.n_paths = 500;
                   sim.paths_written = 3;
                   cli::RunConfig ctl;
                   ctl.n_paths = 200;
                   ctl.policies = {"zero", "constant_grid", "feedback(terminal_proxy)"};
                   return std::vector<CheckResult>{rerun_identical("simulate_rerun", cli::cmd_simulate, sim),
                                                   rerun_identical("control_rerun", cli::cmd_control, ctl)};
                 }});
  return out;
}

}  // namespace

int main() {
  int failed = 0;
  for (const auto& c : criteria()) {
    const auto start = std::chrono::steady_clock::now();
    const auto results = c.run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = !results.empty();
    bool informational = true;
    for (const auto& r : results) {
      ok = ok && r.passed;
      informational = informational && r.informational;
    }
    const bool in_budget = secs <= c.budget_s;
    const bool pass = ok && in_budget;
    if (!pass && !informational) ++failed;
    char timing[96];
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs budget%s", secs, c.budget_s,
                  in_budget ? "" : " (over budget)");
    std::cout << (informational ? (pass ? "INFO-PASS" : "INFO-FAIL") : (pass ? "PASS" : "FAIL")) << " criterion "
              << c.id << ": " << c.title << " [" << timing << "]\n";
    for (const auto& r : results) std::cout << "    " << format_line(r) << '\n';
    std::cout.flush();
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criterion(s) failed") << '\n';
  return failed == 0 ? 0 : 1;
}
