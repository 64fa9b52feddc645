#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dynbc/control.hpp"
#include "dynbc/validate.hpp"

namespace dynbc::cli {

/// Flat key = value run configuration. See README for the schema.
struct RunConfig {
  double b0 = 1.0;
  double b1 = 1.0;
  int N = 8;
  int M = 8;
  double dt = 5e-3;
  double T = 0.5;
  double t0 = 0.0;
  std::uint64_t seed = 0;
  int n_paths = 1000;
  int quad_panels = 64;
  int quad_nodes = 8;

  std::string coefficients = "benchmark";  // zero | additive | multiplicative | benchmark | tabulated
  double gamma = 0.2;
  double h0 = 1.0;
  double h1 = 1.0;
  std::vector<double> f_table;
  std::vector<double> g_table;
  std::string initial = "benchmark";  // benchmark | bump | zero
  int paths_written = 1;

  std::string problem = "benchmark";
  double radius = 1.0;
  std::vector<std::string> policies{"zero", "feedback(terminal_proxy)"};
  int nested_inner_paths = 256;
  int nested_directions = 8;
  double nested_bump = 1e-2;

  int fd_cells = 2000;
  int semigroup_modes = 16;
  int hs_modes = 200;
  double hs_t_min = 1e-3;
  double hs_t_max = 1e-1;
  int ito_paths = 10000;
  int hamiltonian_pairs = 100;

  unsigned threads = 1;
  std::string out = ".";

  BoundaryParams params() const { return BoundaryParams(b0, b1); }
  SimConfig sim() const;
  QuadratureRule quadrature() const;
  /// Throws ConfigError on any constraint violation.
  void validate() const;
};

/// Parses and validates. Lines are `key = value`; `#` starts a comment.
/// Unknown or repeated keys and malformed values raise ConfigError, as do
/// constraint violations (e.g. "b0 must be positive").
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Splits a policy list at top-level commas: "zero,constant(0.5,0)" -> 2 items.
std::vector<std::string> split_policy_list(const std::string& s);

Coefficients make_coefficients(const RunConfig& c);
ModalState make_initial(const RunConfig& c, const EigenBasis& basis);
ControlProblem make_problem(const RunConfig& c);
/// Expands `constant_grid` into the nine constants. Throws ConfigError on
/// unknown names. Problem, coefficients and basis must outlive the policies.
std::vector<Policy> make_policies(const RunConfig& c, const ControlProblem& problem,
                                  const Coefficients& coeffs, const EigenBasis& basis);

/// Each command writes into `out` (created if needed) and returns the exit
/// code: 0 success, 1 invariant failure.
int cmd_spectrum(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_simulate(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_control(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_validate(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);

/// The whole command line: `<tool> spectrum|simulate|control|validate
/// [--config path] [--seed u64] [--out dir] [--threads n]`. Returns the exit
/// code; config errors give 2 with a JSON error record on stderr.
int run(int argc, char** argv);

}  // namespace dynbc::cli
