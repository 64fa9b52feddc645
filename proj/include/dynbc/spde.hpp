#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynbc/rng.hpp"
#include "dynbc/semigroup.hpp"

namespace dynbc {

using Vec2 = std::array<double, 2>;

/// Drift and diffusion densities of the stochastic evolution.
///
/// The interior drift acts as (F(t,u))(x) = f(t, x, u(x)), the interior noise
/// as multiplication by g(t, x, u(x)), the boundary noise as diag(h(t)).
/// K bounds |f| and |g|; L is their Lipschitz constant in u.
struct Coefficients {
  std::string name = "custom";
  std::function<double(double t, double x, double u)> f;
  std::function<double(double t, double x, double u)> g;
  std::function<Vec2(double t)> h;
  double K = 0.0;
  double L = 0.0;
  // Structural hints that let the simulator skip or cache work. They must be
  // true statements about f, g, h.
  bool drift_zero = false;
  bool diffusion_state_independent = false;
  bool time_independent = false;
};

Coefficients zero_coefficients();
/// f = 0, g = gamma, h = (h0, h1).
Coefficients additive_coefficients(double gamma, double h0, double h1);
/// f = 0.5 sin(u), g = 0.3 + 0.2 sin(u), h = (h0, h1).
Coefficients multiplicative_coefficients(double h0, double h1);
/// Deterministic forcing f = source(x), g = 0, h = 0.
Coefficients source_coefficients(std::function<double(double)> source, double K);
/// Piecewise-linear f(x) and g(x) through equally spaced samples on [0,1].
Coefficients tabulated_coefficients(std::vector<double> f_table, std::vector<double> g_table,
                                    double h0, double h1);

/// Spot-checks boundedness by K and the u-Lipschitz constant L on random
/// points. Returns the first violation found, or an empty string.
std::string spot_check_coefficients(const Coefficients& c, int samples = 2000,
                                    std::uint64_t seed = 1);

struct SimConfig {
  int N = 16;
  int M = 16;
  double dt = 5e-3;
  double T = 0.5;
  double t0 = 0.0;
  std::uint64_t seed = 0;

  /// Throws DomainError on dt <= 0, t0 >= T, N or M < 1, or M > N.
  void validate() const;
  /// Number of steps from t0 to T (the last one possibly short).
  std::size_t steps() const;
  double time(std::size_t i) const;
  double step_size(std::size_t i) const { return time(i + 1) - time(i); }
};

nlohmann::json to_json(const SimConfig& c);

struct PathRecord {
  std::vector<double> times;
  std::vector<ModalState> states;
};

/// F_k = int f(t, x, u(x)) e_k(x) dx with u reconstructed from m. The boundary
/// slot of the drift is zero.
ModalState galerkin_drift(double t, const ModalState& m, const Coefficients& c,
                          const EigenBasis& basis);

/// N x M row-major matrix G_km = <G(t,u) phi_m, phi_k>_X.
std::vector<double> galerkin_diffusion(double t, const ModalState& m, const Coefficients& c,
                                       const EigenBasis& basis, int M);

/// One exponential-Euler step:
/// a_k <- exp(lambda_k dt) (a_k + F_k dt + sum_m G_km dW_m).
ModalState step_exp_euler(double t, const ModalState& m, std::span<const double> dW,
                          const Coefficients& c, const EigenBasis& basis, double dt);

/// Cached exponential-Euler stepper for one (coefficients, basis, M) triple.
/// Shares no mutable state between calls; safe to use from several threads.
class ModalStepper {
 public:
  ModalStepper(const Coefficients& c, const EigenBasis& basis, int M);

  std::size_t modes() const { return basis_->size(); }
  int noise_modes() const { return M_; }
  const EigenBasis& basis() const { return *basis_; }
  const Coefficients& coefficients() const { return *coeffs_; }

  /// Advances m in place over [t, t + dt]. `control_drift`, when non-empty,
  /// is an extra N-vector added to the frozen drift.
  void step(double t, double dt, ModalState& m, std::span<const double> dW,
            std::span<const double> control_drift = {}) const;

  /// Diffusion matrix at (t, m), cached whenever it is constant.
  std::vector<double> diffusion(double t, const ModalState& m) const;

 private:
  const Coefficients* coeffs_;
  const EigenBasis* basis_;
  int M_;
  std::vector<double> cached_G_;
};

/// Writes dW for step i with step size h into the span.
using IncrementSource = std::function<void(std::size_t step, double h, std::span<double> dW)>;

/// sqrt(h) times keyed standard normals.
IncrementSource keyed_increments(NoiseKey key);

/// Coarse increments assembled from `factor` keyed fine increments of size
/// fine_dt, so that refinement levels share one Brownian path.
IncrementSource aggregated_increments(NoiseKey key, int factor, double fine_dt);

/// Simulates one path with noise keyed by (config.seed, path_index).
PathRecord simulate_path(const SimConfig& config, const Coefficients& c, const EigenBasis& basis,
                         const ModalState& initial, std::uint32_t path_index = 0);
PathRecord simulate_path(const SimConfig& config, const ModalStepper& stepper,
                         const ModalState& initial, const IncrementSource& noise);

/// Terminal state only, without recording the trajectory.
ModalState simulate_terminal(const SimConfig& config, const ModalStepper& stepper,
                             const ModalState& initial, const IncrementSource& noise);

struct EnsembleReport {
  SimConfig config;
  std::size_t n_paths = 0;
  std::vector<double> mean;     // E a_k(T)
  std::vector<double> var;      // Var a_k(T)
  std::vector<double> se_mean;  // standard error of mean
  std::vector<double> se_var;   // standard error of var
  std::vector<double> cov;      // N x N row-major
  std::vector<double> se_cov;   // N x N row-major
  double mean_norm = 0.0;       // E |u(T)|_X
  double var_norm = 0.0;
  double se_norm = 0.0;
};

/// Moments of the terminal state over n_paths independent paths. Paths are
/// spread across `threads` workers; the reduction runs in path-index order
/// so the report does not depend on the thread count.
EnsembleReport ensemble_stats(const SimConfig& config, const Coefficients& c,
                              const EigenBasis& basis, const ModalState& initial,
                              std::size_t n_paths, unsigned threads = 1);

/// Moments of a set of samples (rows of width dim), fixed-order reduction.
EnsembleReport summarize(const std::vector<std::vector<double>>& samples);

/// {config, mean_terminal, var_terminal, se, n_paths} plus se_var and the
/// X-norm moments.
nlohmann::json to_json(const EnsembleReport& r);

/// CSV with header t,a_0..a_{N-1}, values at 17 significant digits.
void write_path_csv(std::ostream& os, const PathRecord& path);

/// Runs f(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f);

/// printf("%.17g") formatting used by every text output.
std::string format_double(double x);

}  // namespace dynbc
