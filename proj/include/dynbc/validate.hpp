#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dynbc/control.hpp"
#include "dynbc/spde.hpp"

namespace dynbc {

/// Outcome of one invariant check. `measured` is compared against `threshold`
/// in the direction described by `detail`.
struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  bool informational = false;  // reported, not counted toward the exit status
};

nlohmann::json to_json(const CheckResult& r);
/// "PASS name measured=... threshold=... detail" (or FAIL / INFO).
std::string format_line(const CheckResult& r);

/// Index brackets: lambda_j strictly inside (-pi^2 (j+1)^2, -pi^2 j^2) for
/// every j < N and every parameter pair. measured = number of violations.
CheckResult check_index_brackets(const std::vector<BoundaryParams>& params, int N);

/// Every eigenvalue strictly inside some Dirichlet gap, strictly descending,
/// and exactly K+1 eigenvalues above -pi^2 K^2 for the smallest K with
/// pi^2 K^2 > 4 max(b) + 4 pi^2 (when K+1 <= N). measured = violations.
CheckResult check_gap_structure(const std::vector<BoundaryParams>& params, int N);

/// Spectral vs finite-element eigenpairs on n cells: max relative eigenvalue
/// error (<= value_tol) and max nodal eigenvector error after sign alignment
/// (<= vector_tol). Returns both checks.
std::vector<CheckResult> check_fd_equivalence(const std::vector<BoundaryParams>& params, int N,
                                              int fd_cells, double value_tol = 1e-3,
                                              double vector_tol = 1e-2);

/// det_F > 0 at `samples` log-spaced points of [lo, hi]. measured = min value.
CheckResult check_det_positive(const BoundaryParams& p, int samples = 200, double lo = 1e-3,
                               double hi = 1e6);

/// max |G - I| of the quadrature Gram matrix.
CheckResult check_gram(const EigenBasis& basis, double tol = 1e-6);

/// max_{j,k < modes} |a(phi_j, phi_k) + lambda_j delta_jk|.
CheckResult check_form_association(const EigenBasis& basis, std::size_t modes = 8,
                                   double tol = 1e-5);

/// max/min of sqrt(t) sum exp(2 lambda_j t) over log-spaced t in [t_min, t_max]
/// with `modes` modes. A TruncationError fails the check by name.
CheckResult check_hs_rate(const BoundaryParams& p, int modes, double t_min, double t_max,
                          double factor = 2.0, int points = 41);

/// Relative X error between the modal semigroup and the finite-element
/// matrix exponential at time t on u0 = x(1-x), v0 = 0.
CheckResult check_semigroup_vs_fd(const BoundaryParams& p, int N, int fd_cells, double t = 0.1,
                                  double tol = 1e-3);

/// Exact covariance of a <- D (a + G dW) after `steps` steps from a
/// deterministic start: C <- D (C + dt G G^T) D. G is N x M row-major.
std::vector<double> recursion_covariance(const EigenBasis& basis, const std::vector<double>& G,
                                         int M, double dt, std::size_t steps);

/// Empirical terminal covariance of an additive-noise ensemble versus the
/// recursion covariance; measured = number of entries outside z_max SE.
CheckResult check_ito_isometry(const EigenBasis& basis, const Coefficients& coeffs,
                               const SimConfig& config, const ModalState& initial,
                               std::size_t n_paths, unsigned threads, double z_max = 3.0);

struct StrongConvergence {
  std::vector<double> dts;
  std::vector<double> errors;  // rms |X_dt - X_{dt/2}| between consecutive levels
  std::vector<double> orders;
};

/// Paths at each dt of `dts` (decreasing, each an integer multiple of
/// base_dt) driven by one shared Brownian path per index.
StrongConvergence strong_self_convergence(const Coefficients& coeffs, const EigenBasis& basis,
                                          const SimConfig& config, const ModalState& initial,
                                          const std::vector<double>& dts, double base_dt,
                                          int paths, unsigned threads = 1);

CheckResult check_strong_order(const Coefficients& coeffs, const EigenBasis& basis,
                               const SimConfig& config, const ModalState& initial,
                               const std::vector<double>& dts, double base_dt, int paths,
                               double min_order, unsigned threads = 1);

/// Closed-form psi and Gamma against grid search on `pairs` random
/// (state, costate) pairs for the benchmark problem. Returns both checks.
std::vector<CheckResult> check_hamiltonian_oracle(int pairs = 100, double tol = 1e-3,
                                                  std::uint64_t seed = 1);

/// Benchmark: feedback(terminal_proxy) vs zero and vs the nine constants
/// with common random numbers. Returns both checks.
std::vector<CheckResult> check_policy_improvement(std::size_t n_paths, std::uint64_t seed = 0,
                                                  unsigned threads = 1);

}  // namespace dynbc
