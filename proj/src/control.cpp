#include "dynbc/control.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <random>

#include "dynbc/errors.hpp"

namespace dynbc {

AdmissibleSet AdmissibleSet::ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be positive");
  AdmissibleSet s;
  s.kind_ = Kind::Ball;
  s.radius_ = radius;
  s.lo_ = {-radius, -radius};
  s.hi_ = {radius, radius};
  return s;
}

AdmissibleSet AdmissibleSet::box(Vec2 lo, Vec2 hi) {
  for (int i = 0; i < 2; ++i) {
    if (!(lo[i] < hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
      throw DomainError("box bounds must satisfy lo < hi");
    }
  }
  AdmissibleSet s;
  s.kind_ = Kind::Box;
  s.lo_ = lo;
  s.hi_ = hi;
  s.radius_ = 0.0;
  return s;
}

Vec2 AdmissibleSet::project(Vec2 z) const {
  if (kind_ == Kind::Box) {
    return {std::clamp(z[0], lo_[0], hi_[0]), std::clamp(z[1], lo_[1], hi_[1])};
  }
  const double r = std::hypot(z[0], z[1]);
  if (r <= radius_) return z;
  return {z[0] * radius_ / r, z[1] * radius_ / r};
}

bool AdmissibleSet::contains(Vec2 z, double tol) const {
  if (kind_ == Kind::Box) {
    return z[0] >= lo_[0] - tol && z[0] <= hi_[0] + tol && z[1] >= lo_[1] - tol &&
           z[1] <= hi_[1] + tol;
  }
  return std::hypot(z[0], z[1]) <= radius_ * (1.0 + tol) + tol;
}

std::array<Vec2, 2> AdmissibleSet::bounding_box() const { return {lo_, hi_}; }

ControlProblem quadratic_problem(AdmissibleSet Z, StateCost ell, TerminalCost phi,
                                 TerminalGradient grad_phi, double t0, double T) {
  if (!(t0 < T)) throw DomainError("control horizon needs t0 < T");
  ControlProblem p;
  p.name = "quadratic";
  p.Z = Z;
  p.state_cost = ell;
  p.running_cost = [ell](double t, const ModalState& m, Vec2 z) {
    return ell(t, m) + 0.5 * (z[0] * z[0] + z[1] * z[1]);
  };
  p.terminal_cost = std::move(phi);
  p.terminal_gradient = std::move(grad_phi);
  p.t0 = t0;
  p.T = T;
  return p;
}

ControlProblem general_problem(AdmissibleSet Z, RunningCost running, TerminalCost phi, double t0,
                               double T) {
  if (!(t0 < T)) throw DomainError("control horizon needs t0 < T");
  ControlProblem p;
  p.name = "general";
  p.Z = Z;
  p.running_cost = std::move(running);
  p.terminal_cost = std::move(phi);
  p.t0 = t0;
  p.T = T;
  return p;
}

namespace {

Vec2 random_in(const AdmissibleSet& Z, std::mt19937_64& gen) {
  const auto bb = Z.bounding_box();
  std::uniform_real_distribution<double> u0(bb[0][0], bb[1][0]);
  std::uniform_real_distribution<double> u1(bb[0][1], bb[1][1]);
  return Z.project({u0(gen), u1(gen)});
}

double modal_dist(const ModalState& a, const ModalState& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

std::string spot_check_problem(const ControlProblem& problem, std::size_t N, double C, int m,
                               int samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ut(problem.t0, problem.T);
  for (int i = 0; i < samples; ++i) {
    const double scale = std::exp(nd(gen));
    ModalState u(N), v(N);
    for (std::size_t k = 0; k < N; ++k) {
      u[k] = scale * nd(gen);
      v[k] = scale * nd(gen);
    }
    const double t = ut(gen);
    const Vec2 z = random_in(problem.Z, gen);
    const double d = modal_dist(u, v);
    const double w = std::pow(1.0 + u.norm() + v.norm(), m);
    const double lhs = std::abs(problem.running_cost(t, u, z) - problem.running_cost(t, v, z));
    if (lhs > C * w * d * (1.0 + 1e-12) + 1e-12) return "running cost is not locally Lipschitz with the given weight";
    if (std::abs(problem.running_cost(t, ModalState(N), z)) > C) return "|running cost at u = 0| exceeds C";
  }
  return {};
}

ModalState immerse_P(Vec2 z, const EigenBasis& basis) {
  ModalState out(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto& e = basis.mode(k);
    out[k] = z[0] * e.trace0 + z[1] * e.trace1;
  }
  return out;
}

Vec2 boundary_costate(double t, const ModalState& /*m*/, const std::vector<double>& grad,
                      const Coefficients& coeffs, const EigenBasis& basis) {
  if (grad.size() != basis.size()) throw ShapeError("gradient length does not match the basis");
  double w0 = 0.0, w1 = 0.0;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    w0 += grad[k] * basis.mode(k).trace0;
    w1 += grad[k] * basis.mode(k).trace1;
  }
  const Vec2 h = coeffs.h(t);
  return {h[0] * w0, h[1] * w1};
}

std::vector<double> control_drift(double t, Vec2 z, const Coefficients& coeffs,
                                  const EigenBasis& basis) {
  const Vec2 h = coeffs.h(t);
  const double c0 = h[0] * z[0];
  const double c1 = h[1] * z[1];
  std::vector<double> out(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    out[k] = c0 * basis.mode(k).trace0 + c1 * basis.mode(k).trace1;
  }
  return out;
}

Minimum grid_minimize(double t, const ModalState& m, Vec2 p, const ControlProblem& problem,
                      const GridSearchOptions& opts) {
  if (opts.points < 2 || opts.refine_points < 2) throw DomainError("grid search needs >= 2 points per axis");
  const auto bb = problem.Z.bounding_box();
  const auto objective = [&](Vec2 z) { return problem.running_cost(t, m, z) + p[0] * z[0] + p[1] * z[1]; };

  const double hx = (bb[1][0] - bb[0][0]) / (opts.points - 1);
  const double hy = (bb[1][1] - bb[0][1]) / (opts.points - 1);
  std::vector<std::pair<double, Vec2>> coarse;
  coarse.reserve(static_cast<std::size_t>(opts.points) * opts.points);
  Minimum best;
  best.value = INFINITY;
  for (int i = 0; i < opts.points; ++i) {
    for (int j = 0; j < opts.points; ++j) {
      const Vec2 z = problem.Z.project({bb[0][0] + i * hx, bb[0][1] + j * hy});
      const double v = objective(z);
      coarse.emplace_back(v, z);
      if (v < best.value) {
        best.value = v;
        best.argmin = z;
      }
    }
  }
  const double tol = opts.value_tol * (1.0 + std::abs(best.value));
  const double cell = std::max(hx, hy);
  for (const auto& [v, z] : coarse) {
    if (v <= best.value + tol && std::hypot(z[0] - best.argmin[0], z[1] - best.argmin[1]) > 10.0 * cell) {
      throw NonUniqueArgminError("Hamiltonian minimizer is not unique on the search grid");
    }
  }

  const Vec2 centre = best.argmin;
  const double rx = 2.0 * hx / (opts.refine_points - 1);
  const double ry = 2.0 * hy / (opts.refine_points - 1);
  for (int i = 0; i < opts.refine_points; ++i) {
    for (int j = 0; j < opts.refine_points; ++j) {
      const Vec2 z = problem.Z.project({centre[0] - hx + i * rx, centre[1] - hy + j * ry});
      const double v = objective(z);
      if (v < best.value) {
        best.value = v;
        best.argmin = z;
      }
    }
  }
  best.resolution = std::max(rx, ry);
  return best;
}

double hamiltonian(double t, const ModalState& m, Vec2 p, const ControlProblem& problem) {
  if (!problem.quadratic()) return grid_minimize(t, m, p, problem).value;
  const Vec2 z = problem.Z.project({-p[0], -p[1]});
  return problem.state_cost(t, m) + 0.5 * (z[0] * z[0] + z[1] * z[1]) + p[0] * z[0] + p[1] * z[1];
}

Vec2 gamma_argmin(double t, const ModalState& m, Vec2 p, const ControlProblem& problem) {
  if (!problem.quadratic()) return grid_minimize(t, m, p, problem).argmin;
  return problem.Z.project({-p[0], -p[1]});
}

namespace {

class ZeroGradient final : public GradientProvider {
 public:
  explicit ZeroGradient(std::size_t n) : n_(n) {}
  std::string name() const override { return "zero"; }
  std::vector<double> gradient(double, const ModalState&) const override {
    return std::vector<double>(n_, 0.0);
  }

 private:
  std::size_t n_;
};

std::vector<double> terminal_gradient_of(const ControlProblem& problem, const ModalState& a) {
  if (problem.terminal_gradient) return problem.terminal_gradient(a);
  std::vector<double> g(a.size());
  ModalState x = a;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double h = 1e-6 * (1.0 + std::abs(a[k]));
    x[k] = a[k] + h;
    const double up = problem.terminal_cost(x);
    x[k] = a[k] - h;
    const double dn = problem.terminal_cost(x);
    x[k] = a[k];
    g[k] = (up - dn) / (2.0 * h);
  }
  return g;
}

class TerminalProxy final : public GradientProvider {
 public:
  TerminalProxy(const ControlProblem& p, const Coefficients& c, const EigenBasis& b)
      : problem_(&p), coeffs_(&c), basis_(&b) {}
  std::string name() const override { return "terminal_proxy"; }

  std::vector<double> gradient(double t, const ModalState& m) const override {
    const double tau = std::max(0.0, problem_->T - t);
    const ModalState F = galerkin_drift(t, m, *coeffs_, *basis_);
    ModalState abar(m.size());
    std::vector<double> decay(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double lam = basis_->mode(k).lambda;
      decay[k] = std::exp(lam * tau);
      abar[k] = decay[k] * m[k] + F[k] * std::expm1(lam * tau) / lam;
    }
    std::vector<double> g = terminal_gradient_of(*problem_, abar);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] *= decay[k];
    return g;
  }

 private:
  const ControlProblem* problem_;
  const Coefficients* coeffs_;
  const EigenBasis* basis_;
};

class NestedMc final : public GradientProvider {
 public:
  NestedMc(const ControlProblem& p, const Coefficients& c, const EigenBasis& b, const SimConfig& cfg,
           NestedMcOptions opts)
      : problem_(&p), stepper_(c, b, cfg.M), config_(cfg), opts_(opts) {
    if (opts.inner_paths < 1) throw DomainError("nested_mc needs at least one inner path");
    if (opts.directions < 0) throw DomainError("nested_mc directions must be nonnegative");
    if (!(opts.bump > 0.0)) throw DomainError("nested_mc bump must be positive");
  }
  std::string name() const override { return "nested_mc"; }

  std::vector<double> gradient(double t, const ModalState& m) const override {
    std::vector<double> g(m.size(), 0.0);
    const std::size_t dirs = std::min<std::size_t>(static_cast<std::size_t>(opts_.directions), m.size());
    if (problem_->T - t <= 1e-12 * std::max(1.0, problem_->T)) {
      const auto tg = terminal_gradient_of(*problem_, m);
      for (std::size_t k = 0; k < dirs; ++k) g[k] = tg[k];
      return g;
    }
    std::uint64_t key = mix64(opts_.seed ^ mix64(std::bit_cast<std::uint64_t>(t)));
    for (double v : m.a) key = mix64(key ^ std::bit_cast<std::uint64_t>(v));
    ModalState x = m;
    for (std::size_t k = 0; k < dirs; ++k) {
      const double h = opts_.bump * (1.0 + std::abs(m[k]));
      x[k] = m[k] + h;
      const double up = cost_to_go(t, x, *problem_, stepper_, config_, opts_.inner_paths, key);
      x[k] = m[k] - h;
      const double dn = cost_to_go(t, x, *problem_, stepper_, config_, opts_.inner_paths, key);
      x[k] = m[k];
      g[k] = (up - dn) / (2.0 * h);
    }
    return g;
  }

 private:
  const ControlProblem* problem_;
  ModalStepper stepper_;
  SimConfig config_;
  NestedMcOptions opts_;
};

}  // namespace

std::shared_ptr<const GradientProvider> zero_gradient(std::size_t N) {
  return std::make_shared<ZeroGradient>(N);
}

std::shared_ptr<const GradientProvider> terminal_proxy(const ControlProblem& problem,
                                                       const Coefficients& coeffs,
                                                       const EigenBasis& basis) {
  return std::make_shared<TerminalProxy>(problem, coeffs, basis);
}

std::shared_ptr<const GradientProvider> nested_mc(const ControlProblem& problem,
                                                  const Coefficients& coeffs,
                                                  const EigenBasis& basis, const SimConfig& config,
                                                  NestedMcOptions opts) {
  return std::make_shared<NestedMc>(problem, coeffs, basis, config, opts);
}

double cost_to_go(double t, const ModalState& m, const ControlProblem& problem,
                  const ModalStepper& stepper, const SimConfig& config, int paths,
                  std::uint64_t key_seed) {
  SimConfig inner = config;
  inner.t0 = t;
  inner.T = problem.T;
  // Keep the outer grid: if t sits on it, the inner steps coincide with outer ones.
  const std::size_t n = inner.steps();
  const Vec2 z0{0.0, 0.0};
  std::vector<double> dW(stepper.noise_modes());
  double total = 0.0;
  for (int p = 0; p < paths; ++p) {
    const auto noise = keyed_increments({key_seed, static_cast<std::uint32_t>(p), 1});
    ModalState a = m;
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = inner.time(i);
      const double h = inner.step_size(i);
      running += problem.running_cost(s, a, z0) * h;
      noise(i, h, dW);
      stepper.step(s, h, a, dW);
    }
    total += running + problem.terminal_cost(a);
  }
  return total / paths;
}

Policy Policy::zero() { return Policy{}; }

Policy Policy::constant(Vec2 z) {
  Policy p;
  p.kind_ = Kind::Constant;
  p.z_ = z;
  p.name_ = "constant(" + format_double(z[0]) + "," + format_double(z[1]) + ")";
  return p;
}

Policy Policy::open_loop(std::function<Vec2(double)> schedule, std::string name) {
  Policy p;
  p.kind_ = Kind::OpenLoop;
  p.schedule_ = std::move(schedule);
  p.name_ = std::move(name);
  return p;
}

Policy Policy::feedback(std::shared_ptr<const GradientProvider> provider) {
  if (!provider) throw DomainError("feedback policy needs a gradient provider");
  Policy p;
  p.kind_ = Kind::Feedback;
  p.name_ = "feedback(" + provider->name() + ")";
  p.provider_ = std::move(provider);
  return p;
}

Vec2 Policy::control(double t, const ModalState& m, const ControlProblem& problem,
                     const Coefficients& coeffs, const EigenBasis& basis) const {
  switch (kind_) {
    case Kind::Zero:
      return problem.Z.project({0.0, 0.0});
    case Kind::Constant:
      return problem.Z.project(z_);
    case Kind::OpenLoop:
      return problem.Z.project(schedule_(t));
    case Kind::Feedback: {
      const auto grad = provider_->gradient(t, m);
      const Vec2 p = boundary_costate(t, m, grad, coeffs, basis);
      return problem.Z.project(gamma_argmin(t, m, p, problem));
    }
  }
  return {0.0, 0.0};
}

namespace {

SimConfig horizon_config(const SimConfig& config, const ControlProblem& problem) {
  SimConfig c = config;
  c.t0 = problem.t0;
  c.T = problem.T;
  c.validate();
  return c;
}

// Runs one controlled path; records it when `out` is non-null.
double run_controlled(const ControlProblem& problem, const Policy& policy, const ModalStepper& stepper,
                      const SimConfig& config, const ModalState& initial, std::uint32_t path_index,
                      ControlledPath* out) {
  const SimConfig cfg = horizon_config(config, problem);
  const auto noise = keyed_increments({cfg.seed, path_index, 0});
  const auto& basis = stepper.basis();
  const auto& coeffs = stepper.coefficients();
  const std::size_t n = cfg.steps();
  ModalState a = initial;
  std::vector<double> dW(stepper.noise_modes());
  double running = 0.0;
  if (out) {
    out->path.times.assign(1, cfg.time(0));
    out->path.states.assign(1, a);
    out->controls.clear();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = cfg.time(i);
    const double h = cfg.step_size(i);
    const Vec2 z = policy.control(t, a, problem, coeffs, basis);
    if (!problem.Z.contains(z)) throw ConstraintError("policy emitted a control outside Z");
    running += problem.running_cost(t, a, z) * h;
    const std::vector<double> drift = control_drift(t, z, coeffs, basis);
    const bool inactive = std::all_of(drift.begin(), drift.end(), [](double v) { return v == 0.0; });
    noise(i, h, dW);
    stepper.step(t, h, a, dW, inactive ? std::span<const double>{} : std::span<const double>(drift));
    if (out) {
      out->controls.push_back(z);
      out->path.times.push_back(cfg.time(i + 1));
      out->path.states.push_back(a);
    }
  }
  const double cost = running + problem.terminal_cost(a);
  if (out) {
    out->controls.push_back(out->controls.empty() ? Vec2{0.0, 0.0} : out->controls.back());
    out->cost = cost;
  }
  return cost;
}

}  // namespace

ControlledPath closed_loop_simulate(const ControlProblem& problem, const Policy& policy,
                                    const SimConfig& config, const Coefficients& coeffs,
                                    const EigenBasis& basis, const ModalState& initial,
                                    std::uint32_t path_index) {
  const ModalStepper stepper(coeffs, basis, config.M);
  ControlledPath out;
  run_controlled(problem, policy, stepper, config, initial, path_index, &out);
  return out;
}

double path_cost(const ControlProblem& problem, const Policy& policy, const ModalStepper& stepper,
                 const SimConfig& config, const ModalState& initial, std::uint32_t path_index) {
  return run_controlled(problem, policy, stepper, config, initial, path_index, nullptr);
}

std::pair<double, double> mean_and_se(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw DomainError("standard error needs at least two samples");
  const double shift = x.front();
  double s = 0.0;
  for (double v : x) s += v - shift;
  const double dm = s / static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += ((v - shift) - dm) * ((v - shift) - dm);
  const double var = ss / static_cast<double>(n - 1);
  return {shift + dm, std::sqrt(var / static_cast<double>(n))};
}

CostEstimate cost_J(const Policy& policy, const ControlProblem& problem, const SimConfig& config,
                    const Coefficients& coeffs, const EigenBasis& basis, const ModalState& initial,
                    std::size_t n_paths, unsigned threads) {
  if (n_paths < 2) throw DomainError("cost_J requires n_paths >= 2");
  const ModalStepper stepper(coeffs, basis, config.M);
  CostEstimate e;
  e.samples.assign(n_paths, 0.0);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    e.samples[p] = path_cost(problem, policy, stepper, config, initial, static_cast<std::uint32_t>(p));
  });
  std::tie(e.J, e.se) = mean_and_se(e.samples);
  return e;
}

PairwiseResult paired(const std::string& a, const CostEstimate& ea, const std::string& b,
                      const CostEstimate& eb) {
  if (ea.samples.size() != eb.samples.size()) throw ShapeError("paired comparison needs equal sample counts");
  std::vector<double> d(ea.samples.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = ea.samples[i] - eb.samples[i];
  PairwiseResult r;
  r.a = a;
  r.b = b;
  std::tie(r.diff, r.paired_se) = mean_and_se(d);
  if (r.diff < -2.0 * r.paired_se) {
    r.verdict = "a";
  } else if (r.diff > 2.0 * r.paired_se) {
    r.verdict = "b";
  } else {
    r.verdict = "tie";
  }
  return r;
}

ComparisonReport compare_policies(const ControlProblem& problem, const std::vector<Policy>& policies,
                                  const SimConfig& config, const Coefficients& coeffs,
                                  const EigenBasis& basis, const ModalState& initial,
                                  std::size_t n_paths, unsigned threads) {
  if (policies.size() < 2) throw DomainError("compare_policies needs at least two policies");
  if (n_paths < 2) throw DomainError("compare_policies requires n_paths >= 2");
  const ModalStepper stepper(coeffs, basis, config.M);
  ComparisonReport r;
  r.config = horizon_config(config, problem);
  r.n_paths = n_paths;
  r.estimates.resize(policies.size());
  for (auto& e : r.estimates) e.samples.assign(n_paths, 0.0);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    for (std::size_t i = 0; i < policies.size(); ++i) {
      r.estimates[i].samples[p] =
          path_cost(problem, policies[i], stepper, config, initial, static_cast<std::uint32_t>(p));
    }
  });
  for (std::size_t i = 0; i < policies.size(); ++i) {
    r.names.push_back(policies[i].name());
    std::tie(r.estimates[i].J, r.estimates[i].se) = mean_and_se(r.estimates[i].samples);
  }
  for (std::size_t i = 0; i < policies.size(); ++i)
    for (std::size_t j = i + 1; j < policies.size(); ++j)
      r.pairwise.push_back(paired(r.names[i], r.estimates[i], r.names[j], r.estimates[j]));
  return r;
}

nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json pol = nlohmann::json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    pol.push_back({{"name", r.names[i]}, {"J", r.estimates[i].J}, {"se", r.estimates[i].se}});
  }
  nlohmann::json pw = nlohmann::json::array();
  for (const auto& p : r.pairwise) {
    pw.push_back({{"a", p.a}, {"b", p.b}, {"diff", p.diff}, {"paired_se", p.paired_se}, {"verdict", p.verdict}});
  }
  nlohmann::json cfg = to_json(r.config);
  cfg["n_paths"] = r.n_paths;
  return {{"policies", pol}, {"pairwise", pw}, {"seed", r.config.seed}, {"config", cfg}};
}

void write_trace_csv(std::ostream& os, const ControlledPath& cp) {
  const std::size_t N = cp.path.states.empty() ? 0 : cp.path.states.front().size();
  os << "t,z0,z1";
  for (std::size_t k = 0; k < N; ++k) os << ",a_" << k;
  os << '\n';
  for (std::size_t i = 0; i < cp.path.times.size(); ++i) {
    os << format_double(cp.path.times[i]) << ',' << format_double(cp.controls[i][0]) << ','
       << format_double(cp.controls[i][1]);
    for (double v : cp.path.states[i].a) os << ',' << format_double(v);
    os << '\n';
  }
}

Benchmark benchmark() {
  Benchmark b;
  b.params = BoundaryParams(1.0, 1.0);
  b.coeffs = additive_coefficients(0.2, 1.0, 1.0);
  b.coeffs.name = "benchmark";
  const auto sq = [](const ModalState& m) { return m.norm_sq(); };
  b.problem = quadratic_problem(
      AdmissibleSet::ball(1.0), [sq](double, const ModalState& m) { return sq(m); }, sq,
      [](const ModalState& m) {
        std::vector<double> g(m.size());
        for (std::size_t k = 0; k < m.size(); ++k) g[k] = 2.0 * m[k];
        return g;
      },
      0.0, 0.5);
  b.problem.name = "benchmark";
  b.config.N = 8;
  b.config.M = 8;
  b.config.dt = 5e-3;
  b.config.t0 = 0.0;
  b.config.T = 0.5;
  return b;
}

ModalState benchmark_initial(const EigenBasis& basis) {
  return project(sample_state([](double) { return 1.0; }, 1.0, 1.0, basis.quad()), basis);
}

std::vector<Policy> constant_grid_policies() {
  std::vector<Policy> out;
  for (double z0 : {-0.5, 0.0, 0.5})
    for (double z1 : {-0.5, 0.0, 0.5}) out.push_back(Policy::constant({z0, z1}));
  return out;
}

}  // namespace dynbc
