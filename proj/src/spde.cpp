#include "dynbc/spde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "dynbc/errors.hpp"

namespace dynbc {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Coefficients zero_coefficients() {
  Coefficients c;
  c.name = "zero";
  c.f = [](double, double, double) { return 0.0; };
  c.g = [](double, double, double) { return 0.0; };
  c.h = [](double) { return Vec2{0.0, 0.0}; };
  c.drift_zero = true;
  c.diffusion_state_independent = true;
  c.time_independent = true;
  return c;
}

Coefficients additive_coefficients(double gamma, double h0, double h1) {
  Coefficients c;
  c.name = "additive";
  c.f = [](double, double, double) { return 0.0; };
  c.g = [gamma](double, double, double) { return gamma; };
  c.h = [h0, h1](double) { return Vec2{h0, h1}; };
  c.K = std::max({std::abs(gamma), std::abs(h0), std::abs(h1)});
  c.L = 0.0;
  c.drift_zero = true;
  c.diffusion_state_independent = true;
  c.time_independent = true;
  return c;
}

Coefficients multiplicative_coefficients(double h0, double h1) {
  Coefficients c;
  c.name = "multiplicative";
  c.f = [](double, double, double u) { return 0.5 * std::sin(u); };
  c.g = [](double, double, double u) { return 0.3 + 0.2 * std::sin(u); };
  c.h = [h0, h1](double) { return Vec2{h0, h1}; };
  c.K = std::max({0.5, std::abs(h0), std::abs(h1)});
  c.L = 0.5;
  c.time_independent = true;
  return c;
}

Coefficients source_coefficients(std::function<double(double)> source, double K) {
  Coefficients c;
  c.name = "source";
  c.f = [source = std::move(source)](double, double x, double) { return source(x); };
  c.g = [](double, double, double) { return 0.0; };
  c.h = [](double) { return Vec2{0.0, 0.0}; };
  c.K = K;
  c.L = 0.0;
  c.diffusion_state_independent = true;
  c.time_independent = true;
  return c;
}

namespace {

double piecewise_linear(const std::vector<double>& table, double x) {
  if (table.size() == 1) return table[0];
  const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(table.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), table.size() - 2);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * table[i] + w * table[i + 1];
}

}  // namespace

Coefficients tabulated_coefficients(std::vector<double> f_table, std::vector<double> g_table,
                                    double h0, double h1) {
  if (f_table.empty() || g_table.empty()) throw DomainError("tabulated coefficients need samples");
  Coefficients c;
  c.name = "tabulated";
  double K = std::max(std::abs(h0), std::abs(h1));
  for (double v : f_table) K = std::max(K, std::abs(v));
  for (double v : g_table) K = std::max(K, std::abs(v));
  const bool zero_f = std::all_of(f_table.begin(), f_table.end(), [](double v) { return v == 0.0; });
  c.f = [t = std::move(f_table)](double, double x, double) { return piecewise_linear(t, x); };
  c.g = [t = std::move(g_table)](double, double x, double) { return piecewise_linear(t, x); };
  c.h = [h0, h1](double) { return Vec2{h0, h1}; };
  c.K = K;
  c.L = 0.0;
  c.drift_zero = zero_f;
  c.diffusion_state_independent = true;
  c.time_independent = true;
  return c;
}

std::string spot_check_coefficients(const Coefficients& c, int samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ut(0.0, 10.0);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> nu(0.0, 3.0);
  const double slack = 1e-12;
  for (int i = 0; i < samples; ++i) {
    const double t = ut(gen);
    const double x = ux(gen);
    const double u = nu(gen);
    const double v = nu(gen);
    const double fu = c.f(t, x, u);
    const double gu = c.g(t, x, u);
    if (std::abs(fu) > c.K + slack) return "|f| exceeds K at u = " + format_double(u);
    if (std::abs(gu) > c.K + slack) return "|g| exceeds K at u = " + format_double(u);
    const auto h = c.h(t);
    if (std::abs(h[0]) > c.K + slack || std::abs(h[1]) > c.K + slack) return "|h| exceeds K";
    const double du = std::abs(u - v);
    if (du > 0.0) {
      if (std::abs(fu - c.f(t, x, v)) > c.L * du + slack) return "f is not L-Lipschitz in u";
      if (std::abs(gu - c.g(t, x, v)) > c.L * du + slack) return "g is not L-Lipschitz in u";
    }
  }
  return {};
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(t0 >= 0.0)) throw DomainError("t0 must be nonnegative");
  if (!(t0 < T)) throw DomainError("t0 must be smaller than T");
  if (N < 1) throw DomainError("N must be at least 1");
  if (M < 1) throw DomainError("M must be at least 1");
  if (M > N) throw DomainError("M must not exceed N");
}

std::size_t SimConfig::steps() const {
  const double r = (T - t0) / dt;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(r));
}

double SimConfig::time(std::size_t i) const {
  if (i >= steps()) return T;
  return t0 + static_cast<double>(i) * dt;
}

nlohmann::json to_json(const SimConfig& c) {
  return {{"N", c.N}, {"M", c.M}, {"dt", c.dt}, {"T", c.T}, {"t0", c.t0}, {"seed", c.seed}};
}

ModalState galerkin_drift(double t, const ModalState& m, const Coefficients& c,
                          const EigenBasis& basis) {
  ModalState out(m.size());
  if (c.drift_zero) return out;
  const GridState g = reconstruct(m, basis);
  const auto& q = basis.quad();
  std::vector<double> wf(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) wf[i] = q.weights[i] * c.f(t, q.nodes[i], g.u[i]);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto ek = basis.values(k);
    double s = 0.0;
    for (std::size_t i = 0; i < wf.size(); ++i) s += wf[i] * ek[i];
    out[k] = s;
  }
  return out;
}

std::vector<double> galerkin_diffusion(double t, const ModalState& m, const Coefficients& c,
                                       const EigenBasis& basis, int M) {
  const std::size_t N = m.size();
  if (M < 1 || static_cast<std::size_t>(M) > N) throw ShapeError("galerkin_diffusion requires 1 <= M <= N");
  const auto& q = basis.quad();
  std::vector<double> wg(q.size());
  if (c.diffusion_state_independent) {
    for (std::size_t i = 0; i < q.size(); ++i) wg[i] = q.weights[i] * c.g(t, q.nodes[i], 0.0);
  } else {
    const GridState g = reconstruct(m, basis);
    for (std::size_t i = 0; i < q.size(); ++i) wg[i] = q.weights[i] * c.g(t, q.nodes[i], g.u[i]);
  }
  const Vec2 h = c.h(t);
  std::vector<double> G(N * M, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    const auto ek = basis.values(k);
    for (std::size_t j = 0; j < static_cast<std::size_t>(M); ++j) {
      const auto ej = basis.values(j);
      double s = 0.0;
      for (std::size_t i = 0; i < wg.size(); ++i) s += wg[i] * ej[i] * ek[i];
      const auto& mk = basis.mode(k);
      const auto& mj = basis.mode(j);
      G[k * M + j] = s + h[0] * mj.trace0 * mk.trace0 + h[1] * mj.trace1 * mk.trace1;
    }
  }
  return G;
}

ModalState step_exp_euler(double t, const ModalState& m, std::span<const double> dW,
                          const Coefficients& c, const EigenBasis& basis, double dt) {
  const int M = static_cast<int>(dW.size());
  const ModalState F = galerkin_drift(t, m, c, basis);
  const std::vector<double> G = galerkin_diffusion(t, m, c, basis, M);
  ModalState out(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    double incr = m[k] + dt * F[k];
    double noise = 0.0;
    for (int j = 0; j < M; ++j) noise += G[k * M + j] * dW[j];
    incr += noise;
    out[k] = std::exp(basis.mode(k).lambda * dt) * incr;
  }
  return out;
}

ModalStepper::ModalStepper(const Coefficients& c, const EigenBasis& basis, int M)
    : coeffs_(&c), basis_(&basis), M_(M) {
  if (M < 1 || static_cast<std::size_t>(M) > basis.size()) {
    throw ShapeError("ModalStepper requires 1 <= M <= N");
  }
  if (c.diffusion_state_independent && c.time_independent) {
    cached_G_ = galerkin_diffusion(0.0, ModalState(basis.size()), c, basis, M);
  }
}

std::vector<double> ModalStepper::diffusion(double t, const ModalState& m) const {
  if (!cached_G_.empty()) return cached_G_;
  return galerkin_diffusion(t, m, *coeffs_, *basis_, M_);
}

void ModalStepper::step(double t, double dt, ModalState& m, std::span<const double> dW,
                        std::span<const double> control_drift) const {
  const std::size_t N = m.size();
  if (N != basis_->size()) throw ShapeError("ModalStepper: state size does not match the basis");
  ModalState F = galerkin_drift(t, m, *coeffs_, *basis_);
  const std::vector<double> Gfresh = cached_G_.empty() ? diffusion(t, m) : std::vector<double>{};
  const std::vector<double>& G = cached_G_.empty() ? Gfresh : cached_G_;
  const std::size_t M = static_cast<std::size_t>(M_);
  for (std::size_t k = 0; k < N; ++k) {
    double incr = m[k] + dt * F[k];
    if (!control_drift.empty()) incr += dt * control_drift[k];
    double noise = 0.0;
    for (std::size_t j = 0; j < M; ++j) noise += G[k * M + j] * dW[j];
    incr += noise;
    m[k] = std::exp(basis_->mode(k).lambda * dt) * incr;
  }
}

IncrementSource keyed_increments(NoiseKey key) {
  return [key](std::size_t step, double h, std::span<double> dW) {
    standard_normals(key, static_cast<std::uint32_t>(step), dW);
    const double s = std::sqrt(h);
    for (double& w : dW) w *= s;
  };
}

IncrementSource aggregated_increments(NoiseKey key, int factor, double fine_dt) {
  return [key, factor, fine_dt](std::size_t step, double h, std::span<double> dW) {
    const long fine_steps = std::max(1L, std::lround(h / fine_dt));
    std::vector<double> buf(dW.size());
    std::fill(dW.begin(), dW.end(), 0.0);
    const double s = std::sqrt(fine_dt);
    for (long j = 0; j < fine_steps; ++j) {
      standard_normals(key, static_cast<std::uint32_t>(step * factor + j), buf);
      for (std::size_t m = 0; m < dW.size(); ++m) dW[m] += s * buf[m];
    }
  };
}

PathRecord simulate_path(const SimConfig& config, const ModalStepper& stepper,
                         const ModalState& initial, const IncrementSource& noise) {
  config.validate();
  const std::size_t n = config.steps();
  PathRecord rec;
  rec.times.reserve(n + 1);
  rec.states.reserve(n + 1);
  ModalState m = initial;
  rec.times.push_back(config.time(0));
  rec.states.push_back(m);
  std::vector<double> dW(stepper.noise_modes());
  for (std::size_t i = 0; i < n; ++i) {
    const double t = config.time(i);
    const double h = config.step_size(i);
    noise(i, h, dW);
    stepper.step(t, h, m, dW);
    rec.times.push_back(config.time(i + 1));
    rec.states.push_back(m);
  }
  return rec;
}

PathRecord simulate_path(const SimConfig& config, const Coefficients& c, const EigenBasis& basis,
                         const ModalState& initial, std::uint32_t path_index) {
  const ModalStepper stepper(c, basis, config.M);
  return simulate_path(config, stepper, initial, keyed_increments({config.seed, path_index, 0}));
}

ModalState simulate_terminal(const SimConfig& config, const ModalStepper& stepper,
                             const ModalState& initial, const IncrementSource& noise) {
  config.validate();
  const std::size_t n = config.steps();
  ModalState m = initial;
  std::vector<double> dW(stepper.noise_modes());
  for (std::size_t i = 0; i < n; ++i) {
    const double h = config.step_size(i);
    noise(i, h, dW);
    stepper.step(config.time(i), h, m, dW);
  }
  return m;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

EnsembleReport summarize(const std::vector<std::vector<double>>& samples) {
  EnsembleReport r;
  const std::size_t n = samples.size();
  if (n < 2) throw DomainError("ensemble statistics need at least two samples");
  const std::size_t d = samples.front().size();
  r.n_paths = n;
  // Shift by the first sample so that identical samples give exactly zero spread.
  const std::vector<double>& shift = samples.front();
  std::vector<double> shifted_mean(d, 0.0);
  for (const auto& s : samples)
    for (std::size_t k = 0; k < d; ++k) shifted_mean[k] += s[k] - shift[k];
  for (double& v : shifted_mean) v /= static_cast<double>(n);
  r.mean.resize(d);
  for (std::size_t k = 0; k < d; ++k) r.mean[k] = shift[k] + shifted_mean[k];

  r.cov.assign(d * d, 0.0);
  std::vector<double> prod_sq(d * d, 0.0);
  std::vector<double> dev(d);
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < d; ++k) dev[k] = (s[k] - shift[k]) - shifted_mean[k];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        const double p = dev[a] * dev[b];
        r.cov[a * d + b] += p;
        prod_sq[a * d + b] += p * p;
      }
    }
  }
  const double nn = static_cast<double>(n);
  r.se_cov.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d * d; ++i) {
    const double biased = r.cov[i] / nn;
    r.cov[i] /= (nn - 1.0);
    // Standard error of the mean of the centred products.
    const double second = prod_sq[i] / nn - biased * biased;
    r.se_cov[i] = std::sqrt(std::max(0.0, second) / nn);
  }
  r.var.resize(d);
  r.se_var.resize(d);
  r.se_mean.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    r.var[k] = r.cov[k * d + k];
    r.se_var[k] = r.se_cov[k * d + k];
    r.se_mean[k] = std::sqrt(r.var[k] / nn);
  }
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : samples[i]) s += v * v;
    norms[i] = std::sqrt(s);
  }
  double shifted = 0.0;
  for (double v : norms) shifted += v - norms.front();
  shifted /= nn;
  r.mean_norm = norms.front() + shifted;
  double sv = 0.0;
  for (double v : norms) sv += ((v - norms.front()) - shifted) * ((v - norms.front()) - shifted);
  r.var_norm = sv / (nn - 1.0);
  r.se_norm = std::sqrt(r.var_norm / nn);
  return r;
}

EnsembleReport ensemble_stats(const SimConfig& config, const Coefficients& c,
                              const EigenBasis& basis, const ModalState& initial,
                              std::size_t n_paths, unsigned threads) {
  config.validate();
  if (n_paths < 2) throw DomainError("ensemble_stats requires n_paths >= 2");
  const ModalStepper stepper(c, basis, config.M);
  std::vector<std::vector<double>> terminal(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    const auto noise = keyed_increments({config.seed, static_cast<std::uint32_t>(p), 0});
    terminal[p] = simulate_terminal(config, stepper, initial, noise).a;
  });
  EnsembleReport r = summarize(terminal);
  r.config = config;
  return r;
}

nlohmann::json to_json(const EnsembleReport& r) {
  return {{"config", to_json(r.config)},
          {"mean_terminal", r.mean},
          {"var_terminal", r.var},
          {"se", r.se_mean},
          {"se_var", r.se_var},
          {"mean_norm", r.mean_norm},
          {"var_norm", r.var_norm},
          {"se_norm", r.se_norm},
          {"n_paths", r.n_paths}};
}

void write_path_csv(std::ostream& os, const PathRecord& path) {
  const std::size_t N = path.states.empty() ? 0 : path.states.front().size();
  os << "t";
  for (std::size_t k = 0; k < N; ++k) os << ",a_" << k;
  os << '\n';
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    os << format_double(path.times[i]);
    for (double v : path.states[i].a) os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace dynbc
