#include "dynbc/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dynbc/errors.hpp"
#include "dynbc/fd_oracle.hpp"

namespace dynbc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

std::string params_tag(const BoundaryParams& p) {
  return "(" + format_double(p.b0) + "," + format_double(p.b1) + ")";
}

CheckResult make(std::string name, bool passed, double measured, double threshold, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.passed = passed;
  r.measured = measured;
  r.threshold = threshold;
  r.detail = std::move(detail);
  return r;
}

CheckResult failed_with(std::string name, const Error& e) {
  return make(std::move(name), false, NAN, NAN, std::string(e.name()) + ": " + e.what());
}

std::string describe(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

nlohmann::json to_json(const CheckResult& r) {
  nlohmann::json j{{"name", r.name}, {"passed", r.passed}, {"detail", r.detail},
                   {"informational", r.informational}};
  j["measured"] = std::isfinite(r.measured) ? nlohmann::json(r.measured) : nlohmann::json(nullptr);
  j["threshold"] = std::isfinite(r.threshold) ? nlohmann::json(r.threshold) : nlohmann::json(nullptr);
  return j;
}

std::string format_line(const CheckResult& r) {
  const char* tag = r.informational ? (r.passed ? "INFO-PASS" : "INFO-FAIL") : (r.passed ? "PASS" : "FAIL");
  return std::string(tag) + " " + r.name + " measured=" + describe(r.measured) +
         " threshold=" + describe(r.threshold) + " " + r.detail;
}

CheckResult check_index_brackets(const std::vector<BoundaryParams>& params, int N) {
  const std::string name = "spectral_index_brackets";
  try {
    int bad = 0;
    std::string first;
    for (const auto& p : params) {
      const auto eig = find_eigenvalues(p, N);
      for (int j = 0; j < N; ++j) {
        const double lo = -kPi2 * (j + 1) * (j + 1);
        const double hi = -kPi2 * j * j;
        if (!(eig[j] > lo && eig[j] < hi)) {
          if (bad == 0) {
            first = params_tag(p) + " j=" + std::to_string(j) + " lambda=" + describe(eig[j]) +
                    " outside (" + describe(lo) + ", " + describe(hi) + ")";
          }
          ++bad;
        }
      }
    }
    return make(name, bad == 0, bad, 0, bad == 0 ? "all inside" : "violations; first: " + first);
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

CheckResult check_gap_structure(const std::vector<BoundaryParams>& params, int N) {
  const std::string name = "spectral_gap_structure";
  try {
    int bad = 0;
    std::string first;
    for (const auto& p : params) {
      const auto eig = find_eigenvalues(p, N);
      for (int j = 0; j < N; ++j) {
        const bool in_gap = dirichlet_gap(eig[j]) >= 0;
        const bool ordered = j == 0 || eig[j] < eig[j - 1];
        if (!in_gap || !ordered) {
          if (bad == 0) first = params_tag(p) + " j=" + std::to_string(j);
          ++bad;
        }
      }
      const int K = static_cast<int>(std::floor(std::sqrt(4.0 * std::max(p.b0, p.b1) + 4.0 * kPi2) / kPi)) + 1;
      if (K + 1 <= N) {
        const int above = static_cast<int>(
            std::count_if(eig.begin(), eig.end(), [&](double l) { return l > -kPi2 * K * K; }));
        if (above != K + 1) {
          if (bad == 0) first = params_tag(p) + " count above -pi^2 K^2 with K=" + std::to_string(K);
          ++bad;
        }
      }
    }
    return make(name, bad == 0, bad, 0,
                bad == 0 ? "each eigenvalue in a Dirichlet gap, K+1 count holds" : "violations; first: " + first);
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

std::vector<CheckResult> check_fd_equivalence(const std::vector<BoundaryParams>& params, int N,
                                              int fd_cells, double value_tol, double vector_tol) {
  try {
    double worst_val = 0.0;
    double worst_vec = 0.0;
    for (const auto& p : params) {
      const auto basis = EigenBasis::build(p, N);
      const auto op = fd::build(fd_cells, p);
      const auto pairs = fd::eigensolve(op, static_cast<std::size_t>(N));
      for (int j = 0; j < N; ++j) {
        const auto& m = basis.mode(j);
        worst_val = std::max(worst_val, std::abs(pairs[j].lambda - m.lambda) / std::abs(m.lambda));
        const auto& v = pairs[j].vec;
        double sign = 1.0, big = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (std::abs(v[i]) > big) {
            big = std::abs(v[i]);
            sign = (v[i] * m.value(op.node(i)) >= 0.0) ? 1.0 : -1.0;
          }
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
          worst_vec = std::max(worst_vec, std::abs(sign * v[i] - m.value(op.node(i))));
        }
      }
    }
    return {make("fd_eigenvalues", worst_val <= value_tol, worst_val, value_tol,
                 "max relative eigenvalue error, n=" + std::to_string(fd_cells)),
            make("fd_eigenvectors", worst_vec <= vector_tol, worst_vec, vector_tol,
                 "max nodal eigenvector error after sign alignment")};
  } catch (const Error& e) {
    return {failed_with("fd_eigenvalues", e), failed_with("fd_eigenvectors", e)};
  }
}

CheckResult check_det_positive(const BoundaryParams& p, int samples, double lo, double hi) {
  const std::string name = "det_F_positive";
  try {
    double mn = INFINITY;
    for (int i = 0; i < samples; ++i) {
      const double lam = lo * std::pow(hi / lo, static_cast<double>(i) / (samples - 1));
      mn = std::min(mn, det_F(lam, p));
    }
    return make(name, mn > 0.0, mn, 0.0, "min over " + std::to_string(samples) + " log-spaced lambda > 0");
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

CheckResult check_gram(const EigenBasis& basis, double tol) {
  const auto G = basis.gram();
  const std::size_t n = basis.size();
  double dev = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) dev = std::max(dev, std::abs(G[j * n + k] - (j == k ? 1.0 : 0.0)));
  return make("gram_orthonormality", dev <= tol, dev, tol, "max |G - I|, N=" + std::to_string(n));
}

CheckResult check_form_association(const EigenBasis& basis, std::size_t modes, double tol) {
  const std::string name = "form_association";
  try {
    const std::size_t n = std::min(modes, basis.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto fj = form_argument_of_mode(basis, j);
      for (std::size_t k = 0; k < n; ++k) {
        const double a = form_a(fj, form_argument_of_mode(basis, k), basis.params(), basis.quad());
        worst = std::max(worst, std::abs(a + (j == k ? basis.mode(j).lambda : 0.0)));
      }
    }
    return make(name, worst <= tol, worst, tol, "max |a(phi_j,phi_k) + lambda_j delta_jk|");
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

CheckResult check_hs_rate(const BoundaryParams& p, int modes, double t_min, double t_max,
                          double factor, int points) {
  const std::string name = "hilbert_schmidt_rate";
  try {
    if (!(t_min > 0.0 && t_max > t_min)) throw DomainError("HS check needs 0 < t_min < t_max");
    const auto basis = EigenBasis::build(p, modes);
    double lo = INFINITY, hi = 0.0;
    for (int i = 0; i < points; ++i) {
      const double t = t_min * std::pow(t_max / t_min, static_cast<double>(i) / (points - 1));
      const double v = std::sqrt(t) * hs_norm_sq(t, basis);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return make(name, hi / lo < factor, hi / lo, factor,
                "max/min of sqrt(t) sum exp(2 lambda t), N=" + std::to_string(modes));
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

CheckResult check_semigroup_vs_fd(const BoundaryParams& p, int N, int fd_cells, double t, double tol) {
  const std::string name = "semigroup_vs_fd";
  try {
    const auto basis = EigenBasis::build(p, N);
    const auto op = fd::build(fd_cells, p);
    const auto dec = fd::full_decomposition(op);
    const auto u0 = [](double x) { return x * (1.0 - x); };
    const auto a = apply_semigroup(t, project(sample_state(u0, 0.0, 0.0, basis.quad()), basis), basis);
    const auto ref = fd::expm_apply(op, dec, t, fd::interpolate(op, u0));
    std::vector<double> diff(op.dofs());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = evaluate(a, basis, op.node(i)) - ref[i];
    const double rel = fd::mass_norm(op, diff) / fd::mass_norm(op, ref);
    return make(name, rel <= tol, rel, tol, "relative X error at t=" + describe(t));
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

std::vector<double> recursion_covariance(const EigenBasis& basis, const std::vector<double>& G, int M,
                                         double dt, std::size_t steps) {
  const std::size_t N = basis.size();
  if (G.size() != N * static_cast<std::size_t>(M)) throw ShapeError("diffusion matrix has the wrong shape");
  std::vector<double> GG(N * N, 0.0), C(N * N, 0.0), D(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      for (int m = 0; m < M; ++m) GG[i * N + j] += G[i * M + m] * G[j * M + m];
  for (std::size_t k = 0; k < N; ++k) D[k] = std::exp(basis.mode(k).lambda * dt);
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) C[i * N + j] = D[i] * D[j] * (C[i * N + j] + dt * GG[i * N + j]);
  return C;
}

CheckResult check_ito_isometry(const EigenBasis& basis, const Coefficients& coeffs, const SimConfig& config,
                               const ModalState& initial, std::size_t n_paths, unsigned threads,
                               double z_max) {
  const std::string name = "ito_isometry";
  try {
    if (!coeffs.drift_zero || !coeffs.diffusion_state_independent) {
      throw DomainError("the recursion oracle needs f = 0 and state-independent diffusion");
    }
    const auto rep = ensemble_stats(config, coeffs, basis, initial, n_paths, threads);
    // The recursion oracle assumes equal steps.
    const std::size_t steps = config.steps();
    if (std::abs(config.step_size(steps - 1) - config.dt) > 1e-12 * config.dt) {
      throw DomainError("the recursion oracle needs (T - t0) to be a multiple of dt");
    }
    const auto G = galerkin_diffusion(config.t0, initial, coeffs, basis, config.M);
    const auto C = recursion_covariance(basis, G, config.M, config.dt, steps);
    int outside = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < C.size(); ++i) {
      const double z = std::abs(rep.cov[i] - C[i]) / rep.se_cov[i];
      worst = std::max(worst, z);
      outside += z > z_max;
    }
    return make(name, outside == 0, outside, 0,
                "entries beyond " + format_double(z_max) + " SE of the recursion covariance (worst z=" +
                    describe(worst) + ", " + std::to_string(n_paths) + " paths)");
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

StrongConvergence strong_self_convergence(const Coefficients& coeffs, const EigenBasis& basis,
                                          const SimConfig& config, const ModalState& initial,
                                          const std::vector<double>& dts, double base_dt, int paths,
                                          unsigned threads) {
  if (dts.size() < 3) throw DomainError("strong order needs at least three step sizes");
  const ModalStepper stepper(coeffs, basis, config.M);
  StrongConvergence out;
  out.dts = dts;
  std::vector<std::vector<ModalState>> terminal(dts.size(), std::vector<ModalState>(paths));
  parallel_for(static_cast<std::size_t>(paths), threads, [&](std::size_t p) {
    const NoiseKey key{config.seed, static_cast<std::uint32_t>(p), 0};
    for (std::size_t l = 0; l < dts.size(); ++l) {
      SimConfig c = config;
      c.dt = dts[l];
      const int factor = static_cast<int>(std::lround(dts[l] / base_dt));
      terminal[l][p] = simulate_terminal(c, stepper, initial, aggregated_increments(key, factor, base_dt));
    }
  });
  for (std::size_t l = 0; l + 1 < dts.size(); ++l) {
    double s = 0.0;
    for (int p = 0; p < paths; ++p) {
      const auto& a = terminal[l][p];
      const auto& b = terminal[l + 1][p];
      for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    out.errors.push_back(std::sqrt(s / paths));
  }
  for (std::size_t l = 0; l + 1 < out.errors.size(); ++l) {
    out.orders.push_back(std::log(out.errors[l] / out.errors[l + 1]) / std::log(dts[l] / dts[l + 1]));
  }
  return out;
}

CheckResult check_strong_order(const Coefficients& coeffs, const EigenBasis& basis, const SimConfig& config,
                               const ModalState& initial, const std::vector<double>& dts, double base_dt,
                               int paths, double min_order, unsigned threads) {
  const std::string name = "strong_order_" + coeffs.name;
  try {
    const auto sc = strong_self_convergence(coeffs, basis, config, initial, dts, base_dt, paths, threads);
    const double order = *std::min_element(sc.orders.begin(), sc.orders.end());
    return make(name, order >= min_order, order, min_order,
                "observed strong order, " + std::to_string(paths) + " shared-noise paths");
  } catch (const Error& e) {
    return failed_with(name, e);
  }
}

std::vector<CheckResult> check_hamiltonian_oracle(int pairs, double tol, std::uint64_t seed) {
  try {
    const Benchmark bm = benchmark();
    const auto& q = bm.problem;
    const auto g = general_problem(q.Z, q.running_cost, q.terminal_cost, q.t0, q.T);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ut(q.t0, q.T);
    double worst_psi = 0.0, worst_z = 0.0;
    for (int i = 0; i < pairs; ++i) {
      ModalState m(static_cast<std::size_t>(bm.config.N));
      for (std::size_t k = 0; k < m.size(); ++k) m[k] = nd(gen);
      // Costates of both regimes: interior and boundary minimizers.
      const double scale = std::exp(nd(gen));
      const Vec2 p{scale * nd(gen), scale * nd(gen)};
      const double t = ut(gen);
      const double psi = hamiltonian(t, m, p, q);
      const Vec2 z = gamma_argmin(t, m, p, q);
      const Minimum mg = grid_minimize(t, m, p, g);
      worst_psi = std::max(worst_psi, std::abs(psi - mg.value));
      worst_z = std::max(worst_z, std::hypot(z[0] - mg.argmin[0], z[1] - mg.argmin[1]));
    }
    const std::string n = std::to_string(pairs) + " random (state, costate) pairs";
    return {make("hamiltonian_value_oracle", worst_psi <= tol, worst_psi, tol, "max |psi closed - grid|, " + n),
            make("hamiltonian_argmin_oracle", worst_z <= tol, worst_z, tol, "max |Gamma closed - grid|, " + n)};
  } catch (const Error& e) {
    return {failed_with("hamiltonian_value_oracle", e), failed_with("hamiltonian_argmin_oracle", e)};
  }
}

std::vector<CheckResult> check_policy_improvement(std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  try {
    Benchmark bm = benchmark();
    bm.config.seed = seed;
    const auto basis = EigenBasis::build(bm.params, bm.config.N);
    const auto init = benchmark_initial(basis);
    std::vector<Policy> pols{Policy::zero(), Policy::feedback(terminal_proxy(bm.problem, bm.coeffs, basis))};
    for (auto& c : constant_grid_policies()) pols.push_back(c);
    const auto r = compare_policies(bm.problem, pols, bm.config, bm.coeffs, basis, init, n_paths, threads);
    const auto vs_zero = paired(r.names[1], r.estimates[1], r.names[0], r.estimates[0]);
    // margin = J(zero) - 2 SE - J(feedback); must be >= 0.
    const double m0 = -vs_zero.diff - 2.0 * vs_zero.paired_se;
    double worst = INFINITY;
    std::string best_name;
    for (std::size_t i = 2; i < pols.size(); ++i) {
      const auto pr = paired(r.names[1], r.estimates[1], r.names[i], r.estimates[i]);
      const double slack = 2.0 * pr.paired_se - pr.diff;  // >= 0 iff J(fb) <= J(c) + 2 SE
      if (slack < worst) {
        worst = slack;
        best_name = r.names[i];
      }
    }
    const std::string j = "J(feedback)=" + describe(r.estimates[1].J) + " J(zero)=" + describe(r.estimates[0].J);
    return {make("policy_improvement_vs_zero", m0 >= 0.0, m0, 0.0,
                 "J(zero) - 2 paired SE - J(feedback); " + j),
            make("policy_vs_constant_grid", worst >= 0.0, worst, 0.0,
                 "min over constants of J(c) + 2 paired SE - J(feedback); tightest " + best_name)};
  } catch (const Error& e) {
    return {failed_with("policy_improvement_vs_zero", e), failed_with("policy_vs_constant_grid", e)};
  }
}

}  // namespace dynbc
