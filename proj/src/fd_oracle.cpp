#include "dynbc/fd_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dynbc/errors.hpp"

namespace dynbc::fd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double one_norm(const SymTridiag& a) {
  double best = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = std::abs(a.diag[i]);
    if (i > 0) s += std::abs(a.off[i - 1]);
    if (i + 1 < n) s += std::abs(a.off[i]);
    best = std::max(best, s);
  }
  return best;
}

// Upper bound on the generalized eigenvalues: ||K||_1 / lambda_min(M), with a
// Gershgorin lower bound for the mass matrix.
double spectrum_upper_bound(const DiscreteOperator& op) {
  double mmin = std::numeric_limits<double>::infinity();
  const std::size_t n = op.mass.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = op.mass.diag[i];
    if (i > 0) r -= std::abs(op.mass.off[i - 1]);
    if (i + 1 < n) r -= std::abs(op.mass.off[i]);
    mmin = std::min(mmin, r);
  }
  return 1.01 * one_norm(op.stiffness) / mmin + 1.0;
}

// The i-th smallest generalized eigenvalue (0-based) by bisection on the
// Sturm count, starting from the bracket [lo, hi].
double bisect_eigenvalue(const SymTridiag& k, const SymTridiag& m, std::size_t i, double lo,
                         double hi) {
  for (int iter = 0; iter < 256; ++iter) {
    if (hi - lo <= 2.0 * kEps * std::max(std::abs(lo), std::abs(hi))) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(k, m, mid) > i) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Solves the tridiagonal system (dl, d, du) x = b in place by Gaussian
// elimination with partial pivoting. Exact zero pivots are replaced by a tiny
// multiple of the matrix scale, which is what inverse iteration wants.
void solve_tridiagonal(std::vector<double> dl, std::vector<double> d, std::vector<double> du,
                       std::vector<double>& b, double scale) {
  const std::size_t n = d.size();
  const double tiny = kEps * scale;
  std::vector<double> du2(n > 2 ? n - 2 : 0, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du2[i];
      }
      du[i] = temp;
      const double bt = b[i];
      b[i] = b[i + 1];
      b[i + 1] = bt - fact * b[i + 1];
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t ii = n - 2; ii-- > 0;) {
    b[ii] = (b[ii] - du[ii] * b[ii + 1] - du2[ii] * b[ii + 2]) / d[ii];
  }
}

std::vector<double> inverse_iteration(const DiscreteOperator& op, double mu,
                                      const std::vector<std::vector<double>>& cluster) {
  const std::size_t n = op.dofs();
  std::vector<double> dl(n - 1);
  std::vector<double> d(n);
  std::vector<double> du(n - 1);
  for (std::size_t i = 0; i < n; ++i) d[i] = op.stiffness.diag[i] - mu * op.mass.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dl[i] = du[i] = op.stiffness.off[i] - mu * op.mass.off[i];
  }
  const double scale = one_norm(op.stiffness) + std::abs(mu) * one_norm(op.mass);
  std::vector<double> x(n);
  // Deterministic start vector with components along every eigenvector.
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + 3.7 * static_cast<double>(i));
  for (int iter = 0; iter < 3; ++iter) {
    std::vector<double> rhs = op.mass.apply(x);
    solve_tridiagonal(dl, d, du, rhs, scale);
    for (const auto& y : cluster) {
      const double c = mass_inner(op, rhs, y);
      for (std::size_t i = 0; i < n; ++i) rhs[i] -= c * y[i];
    }
    const double nrm = mass_norm(op, rhs);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / nrm;
  }
  // Fix the sign so that the largest-magnitude component is positive.
  const auto it = std::max_element(x.begin(), x.end(),
                                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (*it < 0.0) {
    for (double& v : x) v = -v;
  }
  return x;
}

void check_residual(const DiscreteOperator& op, double mu, const std::vector<double>& x) {
  const auto kx = op.stiffness.apply(x);
  const auto mx = op.mass.apply(x);
  double r = 0.0;
  double xn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r = std::max(r, std::abs(kx[i] - mu * mx[i]));
    xn = std::max(xn, std::abs(x[i]));
  }
  const double scale = (one_norm(op.stiffness) + std::abs(mu) * one_norm(op.mass)) * xn;
  if (r > 1e-8 * scale) {
    std::ostringstream os;
    os << "fd eigensolve: residual " << r << " exceeds 1e-8 * " << scale << " at mu = " << mu;
    throw ConvergenceError(os.str());
  }
}

// Ascending generalized eigenvalues mu_0..mu_{count-1}.
std::vector<double> smallest_mu(const SymTridiag& k, const SymTridiag& m, std::size_t count,
                                double upper) {
  std::vector<double> mu(count);
  double lo = -1.0;
  for (std::size_t i = 0; i < count; ++i) {
    mu[i] = bisect_eigenvalue(k, m, i, lo, upper);
    lo = mu[i] - 4.0 * kEps * (1.0 + std::abs(mu[i]));
    if (sturm_count(k, m, lo) > i) lo = -1.0;
  }
  return mu;
}

std::vector<EigenPair> eigenpairs(const DiscreteOperator& op, std::size_t N) {
  const std::vector<double> mu = smallest_mu(op.stiffness, op.mass, N, spectrum_upper_bound(op));
  std::vector<EigenPair> out;
  out.reserve(N);
  std::vector<std::vector<double>> cluster;
  for (std::size_t i = 0; i < N; ++i) {
    if (i > 0 && mu[i] - mu[i - 1] >= 1e-5 * std::abs(mu[i])) cluster.clear();
    auto x = inverse_iteration(op, mu[i], cluster);
    check_residual(op, mu[i], x);
    cluster.push_back(x);
    out.push_back({-mu[i], std::move(x)});
  }
  return out;
}

}  // namespace

std::vector<double> SymTridiag::apply(const std::vector<double>& x) const {
  const std::size_t n = diag.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

double SymTridiag::entry_sum() const {
  double s = 0.0;
  for (double d : diag) s += d;
  for (double o : off) s += 2.0 * o;
  return s;
}

DiscreteOperator build(int n, double b0, double b1) {
  if (n < 8) throw DomainError("fd::build requires n >= 8");
  if (!(b0 >= 0.0) || !(b1 >= 0.0)) throw DomainError("fd::build requires b0, b1 >= 0");
  DiscreteOperator op;
  op.n = n;
  op.b0 = b0;
  op.b1 = b1;
  const std::size_t dofs = static_cast<std::size_t>(n) + 1;
  const double h = 1.0 / n;
  op.stiffness.diag.assign(dofs, 0.0);
  op.stiffness.off.assign(dofs - 1, -1.0 / h);
  op.mass.diag.assign(dofs, 0.0);
  op.mass.off.assign(dofs - 1, h / 6.0);
  for (std::size_t e = 0; e + 1 < dofs; ++e) {
    op.stiffness.diag[e] += 1.0 / h;
    op.stiffness.diag[e + 1] += 1.0 / h;
    op.mass.diag[e] += h / 3.0;
    op.mass.diag[e + 1] += h / 3.0;
  }
  op.stiffness.diag.front() += b0;
  op.stiffness.diag.back() += b1;
  op.mass.diag.front() += 1.0;
  op.mass.diag.back() += 1.0;
  return op;
}

DiscreteOperator build(int n, const BoundaryParams& p) { return build(n, p.b0, p.b1); }

std::size_t sturm_count(const SymTridiag& k, const SymTridiag& m, double sigma) {
  const std::size_t n = k.size();
  std::size_t count = 0;
  double d = k.diag[0] - sigma * m.diag[0];
  const double tiny = kEps * (std::abs(k.diag[0]) + std::abs(sigma * m.diag[0]) + 1e-300);
  if (d == 0.0) d = -tiny;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    const double e = k.off[i - 1] - sigma * m.off[i - 1];
    d = (k.diag[i] - sigma * m.diag[i]) - e * e / d;
    if (d == 0.0) d = -tiny;
    if (d < 0.0) ++count;
  }
  return count;
}

std::vector<EigenPair> eigensolve(const DiscreteOperator& op, std::size_t N) {
  if (N > op.dofs()) throw DomainError("fd::eigensolve requires N <= n + 1");
  auto pairs = eigenpairs(op, N);
  if (N <= 256) {
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i; j < N; ++j) {
        const double g = mass_inner(op, pairs[i].vec, pairs[j].vec);
        worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
      }
    }
    if (worst > 1e-8) {
      std::ostringstream os;
      os << "fd eigensolve: mass-orthonormality defect " << worst;
      throw ConvergenceError(os.str());
    }
  }
  return pairs;
}

std::vector<double> eigenvalues(const DiscreteOperator& op, std::size_t N) {
  if (N > op.dofs()) throw DomainError("fd::eigenvalues requires N <= n + 1");
  auto mu = smallest_mu(op.stiffness, op.mass, N, spectrum_upper_bound(op));
  for (double& v : mu) v = -v;
  return mu;
}

std::vector<double> dirichlet_eigenvalues(const DiscreteOperator& op, std::size_t N) {
  SymTridiag k;
  SymTridiag m;
  const std::size_t n = op.dofs();
  k.diag.assign(op.stiffness.diag.begin() + 1, op.stiffness.diag.end() - 1);
  k.off.assign(op.stiffness.off.begin() + 1, op.stiffness.off.end() - 1);
  m.diag.assign(op.mass.diag.begin() + 1, op.mass.diag.end() - 1);
  m.off.assign(op.mass.off.begin() + 1, op.mass.off.end() - 1);
  if (N > n - 2) throw DomainError("fd::dirichlet_eigenvalues requires N <= n - 1");
  auto mu = smallest_mu(k, m, N, spectrum_upper_bound(op));
  for (double& v : mu) v = -v;
  return mu;
}

FullDecomposition full_decomposition(const DiscreteOperator& op) {
  auto pairs = eigenpairs(op, op.dofs());
  FullDecomposition dec;
  dec.lambda.reserve(pairs.size());
  dec.vecs.reserve(pairs.size());
  for (auto& p : pairs) {
    dec.lambda.push_back(p.lambda);
    dec.vecs.push_back(std::move(p.vec));
  }
  return dec;
}

std::vector<double> expm_apply(const DiscreteOperator& op, double t, const std::vector<double>& x) {
  return expm_apply(op, full_decomposition(op), t, x);
}

std::vector<double> expm_apply(const DiscreteOperator& op, const FullDecomposition& dec, double t,
                               const std::vector<double>& x) {
  return affine_flow(op, dec, t, x, std::vector<double>(op.dofs(), 0.0));
}

std::vector<double> affine_flow(const DiscreteOperator& op, const FullDecomposition& dec, double t,
                                const std::vector<double>& x, const std::vector<double>& load) {
  if (!(t >= 0.0)) throw DomainError("fd::expm_apply requires t >= 0");
  if (x.size() != op.dofs() || load.size() != op.dofs()) {
    throw ShapeError("fd::expm_apply: vector length does not match the operator");
  }
  const std::vector<double> mx = op.mass.apply(x);
  std::vector<double> out(op.dofs(), 0.0);
  for (std::size_t k = 0; k < dec.vecs.size(); ++k) {
    const auto& v = dec.vecs[k];
    double c = 0.0;
    double f = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      c += v[i] * mx[i];
      f += v[i] * load[i];
    }
    const double lam = dec.lambda[k];
    // (e^{lam t} - 1) / lam, continuous at lam = 0.
    const double phi = (lam == 0.0) ? t : std::expm1(lam * t) / lam;
    const double coef = std::exp(lam * t) * c + phi * f;
    if (coef == 0.0) continue;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += coef * v[i];
  }
  return out;
}

std::vector<double> interpolate(const DiscreteOperator& op, const std::function<double(double)>& u) {
  std::vector<double> x(op.dofs());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(op.node(i));
  return x;
}

std::vector<double> load_vector(const DiscreteOperator& op, const std::function<double(double)>& f) {
  static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  std::vector<double> b(op.dofs(), 0.0);
  const double h = 1.0 / op.n;
  for (int e = 0; e < op.n; ++e) {
    for (int q = 0; q < 3; ++q) {
      const double xi = 0.5 * (1.0 + gx[q]);  // local coordinate in [0,1]
      const double w = 0.5 * gw[q] * h;
      const double fx = f((e + xi) * h);
      b[e] += w * fx * (1.0 - xi);
      b[e + 1] += w * fx * xi;
    }
  }
  return b;
}

double mass_inner(const DiscreteOperator& op, const std::vector<double>& x,
                  const std::vector<double>& y) {
  const auto my = op.mass.apply(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * my[i];
  return s;
}

double mass_norm(const DiscreteOperator& op, const std::vector<double>& x) {
  return std::sqrt(mass_inner(op, x, x));
}

}  // namespace dynbc::fd
