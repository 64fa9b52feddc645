#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynbc/spde.hpp"

namespace dynbc {

/// Closed ball around the origin or axis-aligned box in R^2.
class AdmissibleSet {
 public:
  enum class Kind { Ball, Box };

  /// Throws DomainError unless radius > 0.
  static AdmissibleSet ball(double radius);
  /// Throws DomainError unless lo < hi on both axes.
  static AdmissibleSet box(Vec2 lo, Vec2 hi);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  Vec2 lower() const { return lo_; }
  Vec2 upper() const { return hi_; }

  /// Euclidean projection onto the set.
  Vec2 project(Vec2 z) const;
  bool contains(Vec2 z, double tol = 1e-12) const;
  /// Bounding box as {lo, hi}.
  std::array<Vec2, 2> bounding_box() const;

 private:
  Kind kind_ = Kind::Ball;
  double radius_ = 1.0;
  Vec2 lo_{-1.0, -1.0};
  Vec2 hi_{1.0, 1.0};
};

using RunningCost = std::function<double(double t, const ModalState& m, Vec2 z)>;
using TerminalCost = std::function<double(const ModalState& m)>;
using TerminalGradient = std::function<std::vector<double>(const ModalState& m)>;
using StateCost = std::function<double(double t, const ModalState& m)>;

struct ControlProblem {
  std::string name = "custom";
  AdmissibleSet Z = AdmissibleSet::ball(1.0);
  RunningCost running_cost;
  TerminalCost terminal_cost;
  /// Optional exact gradient of the terminal cost in modal coordinates.
  TerminalGradient terminal_gradient;
  /// Set for the quadratic family running_cost = state_cost + |z|^2 / 2, which
  /// enables the closed-form Hamiltonian.
  StateCost state_cost;
  double t0 = 0.0;
  double T = 0.5;

  bool quadratic() const { return static_cast<bool>(state_cost); }
};

/// Quadratic family: running cost ell(t, m) + |z|^2 / 2.
ControlProblem quadratic_problem(AdmissibleSet Z, StateCost ell, TerminalCost phi,
                                 TerminalGradient grad_phi, double t0, double T);
ControlProblem general_problem(AdmissibleSet Z, RunningCost running, TerminalCost phi, double t0,
                               double T);

/// Samples |l(t,u,z) - l(t,u',z)| <= C (1 + |u| + |u'|)^m |u - u'| and
/// |l(t,0,z)| <= C on random states of dimension N. Empty string if no
/// violation was found.
std::string spot_check_problem(const ControlProblem& problem, std::size_t N, double C, int m,
                               int samples = 500, std::uint64_t seed = 1);

/// Modal coordinates of Pz = (0, z): z0 e_k(0) + z1 e_k(1).
ModalState immerse_P(Vec2 z, const EigenBasis& basis);

/// p = h(t) * (sum_k grad_k e_k(0), sum_k grad_k e_k(1)), componentwise.
Vec2 boundary_costate(double t, const ModalState& m, const std::vector<double>& grad,
                      const Coefficients& coeffs, const EigenBasis& basis);

/// Modal coordinates of G(t,u) P z, the control drift: h0 z0 e_k(0) + h1 z1 e_k(1).
std::vector<double> control_drift(double t, Vec2 z, const Coefficients& coeffs,
                                  const EigenBasis& basis);

struct GridSearchOptions {
  int points = 101;         // per axis, over the bounding box of Z
  int refine_points = 101;  // per axis, over +-one coarse cell around the best point
  double value_tol = 1e-9;  // relative tolerance for "also a minimizer"
};

struct Minimum {
  double value = 0.0;
  Vec2 argmin{0.0, 0.0};
  double resolution = 0.0;  // spacing of the finest grid used
};

/// Grid search for inf_{z in Z} l(t, m, z) + p.z. Grid points outside Z are
/// projected onto Z first. Throws NonUniqueArgminError when two coarse grid
/// points within tolerance of the minimum lie more than ten coarse cells apart.
Minimum grid_minimize(double t, const ModalState& m, Vec2 p, const ControlProblem& problem,
                      const GridSearchOptions& opts = {});

/// psi(t, m, p); closed form for the quadratic family, grid search otherwise.
double hamiltonian(double t, const ModalState& m, Vec2 p, const ControlProblem& problem);

/// The minimizer of the Hamiltonian; proj_Z(-p) for the quadratic family.
Vec2 gamma_argmin(double t, const ModalState& m, Vec2 p, const ControlProblem& problem);

/// Estimate of the value gradient in modal coordinates.
class GradientProvider {
 public:
  virtual ~GradientProvider() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> gradient(double t, const ModalState& m) const = 0;
};

std::shared_ptr<const GradientProvider> zero_gradient(std::size_t N);

/// exp(lambda (T - t)) grad phi(a_bar), with a_bar the state propagated to T
/// by the linear flow with drift frozen at (t, m). Uses the exact terminal
/// gradient when the problem has one, central differences otherwise.
/// Problem, coefficients and basis must outlive the provider.
std::shared_ptr<const GradientProvider> terminal_proxy(const ControlProblem& problem,
                                                       const Coefficients& coeffs,
                                                       const EigenBasis& basis);

struct NestedMcOptions {
  int inner_paths = 256;
  int directions = 8;  // leading modal directions differentiated
  double bump = 1e-2;  // relative: step is bump (1 + |a_k|)
  std::uint64_t seed = 0;
};

/// Central finite differences of a nested Monte Carlo estimate of the
/// uncontrolled cost-to-go, with common random numbers across the two bumps.
/// Inner noise is keyed by (seed, t, state), so the result is deterministic.
std::shared_ptr<const GradientProvider> nested_mc(const ControlProblem& problem,
                                                  const Coefficients& coeffs,
                                                  const EigenBasis& basis, const SimConfig& config,
                                                  NestedMcOptions opts = {});

/// Uncontrolled cost-to-go estimate from (t, m), the quantity nested_mc
/// differentiates. Returns the mean over `paths` keyed paths.
double cost_to_go(double t, const ModalState& m, const ControlProblem& problem,
                  const ModalStepper& stepper, const SimConfig& config, int paths,
                  std::uint64_t key_seed);

class Policy {
 public:
  enum class Kind { Zero, Constant, OpenLoop, Feedback };

  static Policy zero();
  static Policy constant(Vec2 z);
  static Policy open_loop(std::function<Vec2(double)> schedule, std::string name = "open_loop");
  static Policy feedback(std::shared_ptr<const GradientProvider> provider);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  Policy& rename(std::string n) {
    name_ = std::move(n);
    return *this;
  }

  /// Control applied on [t, t + dt) from state m, always inside problem.Z.
  Vec2 control(double t, const ModalState& m, const ControlProblem& problem,
               const Coefficients& coeffs, const EigenBasis& basis) const;

 private:
  Kind kind_ = Kind::Zero;
  std::string name_ = "zero";
  Vec2 z_{0.0, 0.0};
  std::function<Vec2(double)> schedule_;
  std::shared_ptr<const GradientProvider> provider_;
};

/// Path plus the control applied on each step. controls[i] acts on
/// [times[i], times[i+1]); the final entry repeats the last applied control.
struct ControlledPath {
  PathRecord path;
  std::vector<Vec2> controls;
  double cost = 0.0;
};

/// One controlled path with noise keyed by (config.seed, path_index). The
/// step adds G(t,u) P z dt to the drift; the running cost uses the left
/// endpoint rule.
ControlledPath closed_loop_simulate(const ControlProblem& problem, const Policy& policy,
                                    const SimConfig& config, const Coefficients& coeffs,
                                    const EigenBasis& basis, const ModalState& initial,
                                    std::uint32_t path_index = 0);

/// Realized cost of one path, without recording it.
double path_cost(const ControlProblem& problem, const Policy& policy, const ModalStepper& stepper,
                 const SimConfig& config, const ModalState& initial, std::uint32_t path_index);

struct CostEstimate {
  double J = 0.0;
  double se = 0.0;
  std::vector<double> samples;
};

/// Monte Carlo estimate of J over paths 0..n_paths-1 of config.seed.
CostEstimate cost_J(const Policy& policy, const ControlProblem& problem, const SimConfig& config,
                    const Coefficients& coeffs, const EigenBasis& basis, const ModalState& initial,
                    std::size_t n_paths, unsigned threads = 1);

/// Mean and standard error of a sample, fixed-order reduction.
std::pair<double, double> mean_and_se(const std::vector<double>& x);

struct PairwiseResult {
  std::string a;
  std::string b;
  double diff = 0.0;  // J(a) - J(b)
  double paired_se = 0.0;
  std::string verdict;  // "a", "b" or "tie" at two paired standard errors
};

struct ComparisonReport {
  SimConfig config;
  std::size_t n_paths = 0;
  std::vector<std::string> names;
  std::vector<CostEstimate> estimates;
  std::vector<PairwiseResult> pairwise;
};

/// Evaluates every policy on the same noise paths and reports each pair
/// (i < j). Requires at least two policies.
ComparisonReport compare_policies(const ControlProblem& problem, const std::vector<Policy>& policies,
                                  const SimConfig& config, const Coefficients& coeffs,
                                  const EigenBasis& basis, const ModalState& initial,
                                  std::size_t n_paths, unsigned threads = 1);

/// Paired comparison of two estimates computed on the same paths.
PairwiseResult paired(const std::string& a, const CostEstimate& ea, const std::string& b,
                      const CostEstimate& eb);

/// {policies:[{name, J, se}], pairwise:[{a, b, diff, paired_se, verdict}], seed, config}
nlohmann::json to_json(const ComparisonReport& r);

/// CSV t,z0,z1,a_0..a_{N-1}.
void write_trace_csv(std::ostream& os, const ControlledPath& cp);

/// Built-in benchmark: b0 = b1 = 1, f = 0, g = 0.2, h = (1, 1), running cost
/// |z|^2/2 + |u|_X^2, terminal cost |u|_X^2, Z the unit ball, horizon 0.5,
/// N = M = 8, dt = 5e-3. The initial state is u = 1 with v = (1, 1).
struct Benchmark {
  BoundaryParams params{1.0, 1.0};
  Coefficients coeffs;
  ControlProblem problem;
  SimConfig config;
};

Benchmark benchmark();
ModalState benchmark_initial(const EigenBasis& basis);

/// The nine constant policies z in {-0.5, 0, 0.5}^2.
std::vector<Policy> constant_grid_policies();

}  // namespace dynbc
