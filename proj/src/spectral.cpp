#include "dynbc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dynbc/errors.hpp"

namespace dynbc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

bool near_pole(double lambda, double b) {
  return std::abs(lambda + b) <= 64.0 * kEps * (1.0 + std::abs(lambda) + b);
}

// s cot s, with the removable singularity at s = 0 filled in.
double s_cot_s(double s) {
  if (s < 1e-4) return 1.0 - s * s / 3.0;
  return s * std::cos(s) / std::sin(s);
}

// r coth r = r (1 + e^{2r}) / (-1 + e^{2r}), rewritten with e^{-2r} so that
// it stays finite for large r.
double r_coth_r(double r) {
  if (r < 1e-4) return 1.0 + r * r / 3.0;
  const double q = std::exp(-2.0 * r);
  return r * (1.0 + q) / (-std::expm1(-2.0 * r));
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Sign-carrying function used for bracketing: char_regularized on lambda < 0,
// its positive limit sign at lambda = 0.
double bracket_value(double lambda, const BoundaryParams& p) {
  if (lambda == 0.0) return char_shooting(0.0, p);
  return char_regularized(lambda, p);
}

// Bisection down to 1e-6 (1+|lambda|), then Illinois-safeguarded secant down
// to 1e-12 (1+|lambda|). Requires f(lo) f(hi) < 0.
double refine_root(double lo, double hi, double flo, double fhi, const BoundaryParams& p) {
  auto width_tol = [](double a, double b, double rel) {
    return rel * (1.0 + std::max(std::abs(a), std::abs(b)));
  };
  while (hi - lo > width_tol(lo, hi, 1e-6)) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bracket_value(mid, p);
    if (fm == 0.0) return mid;
    if (sgn(fm) == sgn(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  int side = 0;
  for (int iter = 0; iter < 200; ++iter) {
    const double tol = width_tol(lo, hi, 1e-12);
    if (hi - lo <= tol) break;
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    // Keep the probe at least tol/2 inside so the bracket keeps shrinking.
    x = std::clamp(x, lo + 0.5 * tol, hi - 0.5 * tol);
    const double fx = bracket_value(x, p);
    if (fx == 0.0) return x;
    if (sgn(fx) == sgn(flo)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == +1) flo *= 0.5;
      side = +1;
    }
  }
  if (hi - lo > width_tol(lo, hi, 1e-12)) {
    throw BracketError("root refinement did not reach the target width in [" + fmt(lo) +
                       ", " + fmt(hi) + "]");
  }
  return 0.5 * (lo + hi);
}

// Scans gaps 0..K-1 collecting every sign change of the characteristic
// function; returns false when the K+1 count check fails.
bool scan_spectrum(const BoundaryParams& p, int N, int density, std::vector<double>& roots) {
  roots.clear();
  const double bmax = std::max(p.b0, p.b1);
  const double settle = 4.0 * bmax + 4.0 * kPi2;
  const int max_gaps = N + 64 + static_cast<int>(std::ceil(std::sqrt(settle) / kPi));
  for (int k = 0; k < max_gaps; ++k) {
    const double s_hi = kPi * k;        // lambda = -pi^2 k^2 (upper end)
    const double s_lo = kPi * (k + 1);  // lambda = -pi^2 (k+1)^2 (lower end)
    std::vector<double> s_points;
    s_points.reserve(density + 3);
    for (int i = 0; i <= density; ++i) s_points.push_back(s_hi + (s_lo - s_hi) * i / density);
    for (double b : {p.b0, p.b1}) {
      const double sb = std::sqrt(b);
      if (sb > s_hi && sb < s_lo) s_points.push_back(sb);
    }
    std::sort(s_points.begin(), s_points.end());
    s_points.erase(std::unique(s_points.begin(), s_points.end()), s_points.end());

    std::vector<double> lam(s_points.size());
    std::vector<double> val(s_points.size());
    for (std::size_t i = 0; i < s_points.size(); ++i) {
      // Exact Dirichlet points are reproduced from the integer k, not from s^2.
      if (i == 0) {
        lam[i] = -kPi2 * k * k;
      } else if (i + 1 == s_points.size()) {
        lam[i] = -kPi2 * (k + 1) * (k + 1);
      } else {
        lam[i] = -s_points[i] * s_points[i];
      }
      val[i] = bracket_value(lam[i], p);
    }
    if (k > 0 && val.front() == 0.0) {
      throw BracketError("characteristic function vanishes at the Dirichlet point " +
                         fmt(lam.front()));
    }
    for (std::size_t i = 0; i + 1 < s_points.size(); ++i) {
      if (i > 0 && val[i] == 0.0) {
        roots.push_back(lam[i]);
        continue;
      }
      if (sgn(val[i]) * sgn(val[i + 1]) < 0.0) {
        roots.push_back(refine_root(lam[i + 1], lam[i], val[i + 1], val[i], p));
      }
    }
    const int gaps = k + 1;
    if (static_cast<int>(roots.size()) >= N && kPi2 * gaps * gaps > settle) {
      return static_cast<int>(roots.size()) == gaps + 1;
    }
  }
  return false;
}

}  // namespace

BoundaryParams::BoundaryParams(double b0_, double b1_) : b0(b0_), b1(b1_) {
  if (!(b0 > 0.0) || !std::isfinite(b0)) throw DomainError("b0 must be positive");
  if (!(b1 > 0.0) || !std::isfinite(b1)) throw DomainError("b1 must be positive");
}

double EigenMode::value(double x) const {
  return cos_coef * std::cos(freq * x) + sin_coef * std::sin(freq * x);
}

double EigenMode::derivative(double x) const {
  return freq * (-cos_coef * std::sin(freq * x) + sin_coef * std::cos(freq * x));
}

double EigenMode::residual_left(const BoundaryParams& p) const {
  return (lambda + p.b0) * value(0.0) - derivative(0.0);
}

double EigenMode::residual_right(const BoundaryParams& p) const {
  return lambda * value(1.0) + p.b1 * value(1.0) + derivative(1.0);
}

double det_F(double lambda, const BoundaryParams& p) {
  if (near_pole(lambda, p.b0) || near_pole(lambda, p.b1)) {
    throw PoleError("det_F: lambda = " + fmt(lambda) + " is a pole (lambda = -b_i)");
  }
  const double inv_sum = 1.0 / (lambda + p.b0) + 1.0 / (lambda + p.b1);
  const double tail = lambda / ((lambda + p.b0) * (lambda + p.b1));
  if (lambda == 0.0) return 1.0 + inv_sum;
  if (lambda < 0.0) {
    const double s = std::sqrt(-lambda);
    if (s >= 1e-4 && std::abs(std::sin(s)) < 1e-12) {
      throw DirichletPointError("det_F: lambda = " + fmt(lambda) +
                                " is a Dirichlet eigenvalue (sin(sqrt(-lambda)) = 0)");
    }
    return 1.0 + s_cot_s(s) * inv_sum + tail;
  }
  return 1.0 + r_coth_r(std::sqrt(lambda)) * inv_sum + tail;
}

double char_regularized(double lambda, const BoundaryParams& p) {
  if (lambda > 0.0) throw DomainError("char_regularized requires lambda <= 0");
  const double s = std::sqrt(-lambda);
  const double sn = std::sin(s);
  const double cs = std::cos(s);
  return (lambda + p.b0) * (lambda + p.b1) * sn + s * cs * (2.0 * lambda + p.b0 + p.b1) +
         lambda * sn;
}

double char_shooting(double lambda, const BoundaryParams& p) {
  // (lambda+b0)(lambda+b1) S + C (2 lambda + b0 + b1) + lambda S with
  // S = sin(s)/s, C = cos(s) on lambda < 0 and their hyperbolic continuations.
  double S = 1.0;
  double C = 1.0;
  if (lambda < 0.0) {
    const double s = std::sqrt(-lambda);
    S = (s < 1e-4) ? 1.0 - s * s / 6.0 : std::sin(s) / s;
    C = std::cos(s);
  } else if (lambda > 0.0) {
    const double r = std::sqrt(lambda);
    S = (r < 1e-4) ? 1.0 + r * r / 6.0 : std::sinh(r) / r;
    C = std::cosh(r);
  }
  return (lambda + p.b0) * (lambda + p.b1) * S + C * (2.0 * lambda + p.b0 + p.b1) + lambda * S;
}

std::vector<double> find_eigenvalues(const BoundaryParams& p, int N) {
  if (N < 1) throw DomainError("find_eigenvalues requires N >= 1");
  std::vector<double> roots;
  for (int density : {64, 256, 1024}) {
    if (scan_spectrum(p, N, density, roots)) {
      std::sort(roots.begin(), roots.end(), std::greater<>());
      roots.resize(N);
      return roots;
    }
  }
  throw BracketError("root count inconsistent with the Dirichlet gap structure for b0 = " +
                     fmt(p.b0) + ", b1 = " + fmt(p.b1) + " (found " +
                     std::to_string(roots.size()) + ")");
}

int dirichlet_gap(double lambda) {
  if (!(lambda < 0.0)) return -1;
  const double s = std::sqrt(-lambda);
  const int k = static_cast<int>(std::floor(s / kPi));
  for (int c : {k - 1, k, k + 1}) {
    if (c < 0) continue;
    const double hi = -kPi2 * c * c;
    const double lo = -kPi2 * (c + 1) * (c + 1);
    if (lambda > lo && lambda < hi) return c;
  }
  return -1;
}

double closed_form_norm_sq(const EigenMode& m) {
  const double s = m.freq;
  const double a = m.cos_coef;
  const double b = m.sin_coef;
  // int_0^1 cos^2, sin^2 and sin cos of s x.
  const double sin2s_over_4s = std::sin(2.0 * s) / (4.0 * s);
  const double icc = 0.5 + sin2s_over_4s;
  const double iss = 0.5 - sin2s_over_4s;
  const double isc = std::sin(s) * std::sin(s) / (2.0 * s);
  const double interior = a * a * icc + b * b * iss + 2.0 * a * b * isc;
  const double e0 = m.value(0.0);
  const double e1 = m.value(1.0);
  return interior + e0 * e0 + e1 * e1;
}

EigenMode make_mode(int j, double lambda, double B, const BoundaryParams& p) {
  if (!(lambda < 0.0)) throw DomainError("eigenmodes require lambda < 0");
  if (near_pole(lambda, p.b0)) throw DegenerateModeError("mode with lambda = -b0");
  EigenMode m;
  m.j = j;
  m.lambda = lambda;
  m.B = B;
  m.freq = std::sqrt(-lambda);
  m.cos_coef = m.freq * B / (p.b0 + lambda);
  m.sin_coef = B;
  m.trace0 = m.value(0.0);
  m.trace1 = m.value(1.0);
  return m;
}

EigenMode build_mode(double lambda, int j, const BoundaryParams& p) {
  if (!(lambda < 0.0)) throw DomainError("eigenmodes require lambda < 0");
  // Well-conditioned multiple of e_j: s cos(s x) + (b0 + lambda) sin(s x).
  const double beta = p.b0 + lambda;
  EigenMode raw;
  raw.lambda = lambda;
  raw.freq = std::sqrt(-lambda);
  raw.cos_coef = raw.freq;
  raw.sin_coef = beta;
  const double norm = std::sqrt(closed_form_norm_sq(raw));
  const double B = std::abs(beta) / norm;
  if (!(B >= 1e-14)) {
    throw DegenerateModeError("normalization constant B = " + fmt(B) + " for lambda = " +
                              fmt(lambda) + " (lambda ~ -b0)");
  }
  return make_mode(j, lambda, B, p);
}

bool normalization_bound_holds(const EigenMode& m) {
  if (m.freq <= 1.0) return false;
  return m.B > 0.0 && m.B < (1.0 + m.freq) / (-1.0 + m.freq);
}

EigenBasis::EigenBasis(const BoundaryParams& p, std::vector<EigenMode> modes,
                       QuadratureRule quad)
    : params_(p), modes_(std::move(modes)), quad_(std::move(quad)) {
  const std::size_t q = quad_.size();
  values_.resize(modes_.size() * q);
  derivs_.resize(modes_.size() * q);
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    for (std::size_t i = 0; i < q; ++i) {
      values_[k * q + i] = modes_[k].value(quad_.nodes[i]);
      derivs_[k * q + i] = modes_[k].derivative(quad_.nodes[i]);
    }
  }
}

EigenBasis EigenBasis::build(const BoundaryParams& p, int N, QuadratureRule quad) {
  const std::vector<double> eig = find_eigenvalues(p, N);
  std::vector<EigenMode> modes;
  modes.reserve(eig.size());
  for (std::size_t j = 0; j < eig.size(); ++j) {
    modes.push_back(build_mode(eig[j], static_cast<int>(j), p));
  }
  return EigenBasis(p, std::move(modes), std::move(quad));
}

EigenBasis EigenBasis::from_modes(const BoundaryParams& p, std::vector<EigenMode> modes,
                                  QuadratureRule quad) {
  for (std::size_t k = 1; k < modes.size(); ++k) {
    if (!(modes[k].lambda < modes[k - 1].lambda)) {
      throw DomainError("modes must be sorted by decreasing lambda");
    }
  }
  return EigenBasis(p, std::move(modes), std::move(quad));
}

std::vector<double> EigenBasis::gram() const {
  const std::size_t n = modes_.size();
  const std::size_t q = quad_.size();
  std::vector<double> g(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      double sum = 0.0;
      const double* vj = values_.data() + j * q;
      const double* vk = values_.data() + k * q;
      for (std::size_t i = 0; i < q; ++i) sum += quad_.weights[i] * vj[i] * vk[i];
      sum += modes_[j].trace0 * modes_[k].trace0 + modes_[j].trace1 * modes_[k].trace1;
      g[j * n + k] = sum;
      g[k * n + j] = sum;
    }
  }
  return g;
}

std::vector<double> EigenBasis::eigenvalues() const {
  std::vector<double> out;
  out.reserve(modes_.size());
  for (const auto& m : modes_) out.push_back(m.lambda);
  return out;
}

nlohmann::json to_json(const EigenBasis& basis) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : basis.modes()) {
    modes.push_back({{"j", m.j}, {"lambda", m.lambda}, {"B", m.B}});
  }
  return {{"b0", basis.params().b0},
          {"b1", basis.params().b1},
          {"N", basis.size()},
          {"modes", modes}};
}

EigenBasis basis_from_json(const nlohmann::json& j, QuadratureRule quad) {
  const BoundaryParams p(j.at("b0").get<double>(), j.at("b1").get<double>());
  const auto& arr = j.at("modes");
  if (arr.size() != j.at("N").get<std::size_t>()) {
    throw ShapeError("basis JSON: N does not match the number of modes");
  }
  std::vector<EigenMode> modes;
  modes.reserve(arr.size());
  for (const auto& m : arr) {
    modes.push_back(make_mode(m.at("j").get<int>(), m.at("lambda").get<double>(),
                              m.at("B").get<double>(), p));
  }
  return EigenBasis::from_modes(p, std::move(modes), std::move(quad));
}

DirichletMap::DirichletMap(double lambda, double phi0, double phi1)
    : lambda_(lambda), phi0_(phi0), phi1_(phi1) {
  if (lambda == 0.0) {
    branch_ = Branch::Linear;
  } else if (lambda > 0.0) {
    branch_ = Branch::Hyperbolic;
    rate_ = std::sqrt(lambda);
  } else {
    branch_ = Branch::Trigonometric;
    rate_ = std::sqrt(-lambda);
    const double sn = std::sin(rate_);
    if (std::abs(sn) < 1e-12) {
      throw ResonanceError("Dirichlet map undefined at the Dirichlet eigenvalue lambda = " +
                           fmt(lambda));
    }
    coef_sin_ = (phi1 - phi0 * std::cos(rate_)) / sn;
  }
}

double DirichletMap::operator()(double x) const {
  switch (branch_) {
    case Branch::Linear:
      return phi0_ * (1.0 - x) + phi1_ * x;
    case Branch::Hyperbolic: {
      // sinh(r y) / sinh(r) = e^{-r (1-y)} (1 - e^{-2 r y}) / (1 - e^{-2 r})
      const double r = rate_;
      const double denom = -std::expm1(-2.0 * r);
      auto ratio = [&](double y) { return std::exp(-r * (1.0 - y)) * -std::expm1(-2.0 * r * y) / denom; };
      return phi0_ * ratio(1.0 - x) + phi1_ * ratio(x);
    }
    case Branch::Trigonometric:
      return phi0_ * std::cos(rate_ * x) + coef_sin_ * std::sin(rate_ * x);
  }
  return 0.0;
}

double DirichletMap::derivative(double x) const {
  switch (branch_) {
    case Branch::Linear:
      return phi1_ - phi0_;
    case Branch::Hyperbolic: {
      // d/dy sinh(r y)/sinh(r) = r cosh(r y)/sinh(r)
      const double r = rate_;
      const double denom = -std::expm1(-2.0 * r);
      auto dratio = [&](double y) {
        return r * std::exp(-r * (1.0 - y)) * (1.0 + std::exp(-2.0 * r * y)) / denom;
      };
      return -phi0_ * dratio(1.0 - x) + phi1_ * dratio(x);
    }
    case Branch::Trigonometric:
      return rate_ * (-phi0_ * std::sin(rate_ * x) + coef_sin_ * std::cos(rate_ * x));
  }
  return 0.0;
}

DirichletMap dirichlet_map(double lambda, double phi0, double phi1) {
  return DirichletMap(lambda, phi0, phi1);
}

}  // namespace dynbc
