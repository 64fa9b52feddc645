#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynbc/quadrature.hpp"

namespace dynbc {

/// Boundary damping rates of the two endpoint dynamics, dv_i/dt = -b_i v_i + ...
struct BoundaryParams {
  double b0 = 1.0;
  double b1 = 1.0;

  BoundaryParams() = default;
  /// Throws DomainError unless both rates are positive and finite.
  BoundaryParams(double b0_, double b1_);
};

/// Normalized eigenpair phi_j = (e_j, e_j(0), e_j(1)) of the coupled operator.
///
/// e_j(x) = (sqrt(-lambda) B / (b0 + lambda)) cos(sqrt(-lambda) x) + B sin(sqrt(-lambda) x)
struct EigenMode {
  int j = 0;
  double lambda = 0.0;
  double B = 0.0;
  double trace0 = 0.0;
  double trace1 = 0.0;
  double freq = 0.0;      // sqrt(-lambda)
  double cos_coef = 0.0;  // sqrt(-lambda) B / (b0 + lambda)
  double sin_coef = 0.0;  // B

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const { return lambda * value(x); }

  /// (lambda + b0) e(0) - e'(0); zero up to rounding by construction.
  double residual_left(const BoundaryParams& p) const;
  /// lambda e(1) + b1 e(1) + e'(1); zero up to the root tolerance.
  double residual_right(const BoundaryParams& p) const;
};

/// Characteristic determinant Det F(lambda), both branches plus the lambda = 0
/// limit 1 + 1/b0 + 1/b1.
///
/// Throws PoleError for lambda in {-b0, -b1} and DirichletPointError when
/// lambda < 0 hits a zero of sin(sqrt(-lambda)).
double det_F(double lambda, const BoundaryParams& p);

/// Pole-free rescaling (lambda+b0)(lambda+b1) sin(sqrt(-lambda)) det_F(lambda),
/// expanded so that it is an entire function of sqrt(-lambda). Requires
/// lambda <= 0 (DomainError otherwise).
double char_regularized(double lambda, const BoundaryParams& p);

/// Shooting residual char_regularized(lambda) / sqrt(-lambda), continued to
/// lambda >= 0. Positive at lambda = 0 (value b0 b1 + b0 + b1).
double char_shooting(double lambda, const BoundaryParams& p);

/// The N largest eigenvalues, descending. Roots are bracketed by sign changes
/// of char_regularized inside each Dirichlet gap (-pi^2 (k+1)^2, -pi^2 k^2),
/// with extra break points at -b0 and -b1, and refined to a bracket width of
/// 1e-12 (1 + |lambda|). Throws BracketError if the root count stays
/// inconsistent after the refinement schedule.
std::vector<double> find_eigenvalues(const BoundaryParams& p, int N);

/// Index k of the Dirichlet gap (-pi^2 (k+1)^2, -pi^2 k^2) containing lambda,
/// or -1 if lambda >= 0 or lambda sits on a gap endpoint.
int dirichlet_gap(double lambda);

/// Normalized mode for a verified root. B is fixed by the closed-form X-norm.
/// Throws DegenerateModeError when B falls below 1e-14 (lambda ~ -b0).
EigenMode build_mode(double lambda, int j, const BoundaryParams& p);

/// Mode from a stored (lambda, B) pair, as read back from a cache.
EigenMode make_mode(int j, double lambda, double B, const BoundaryParams& p);

/// Closed-form X-norm squared of a mode: int e^2 + e(0)^2 + e(1)^2.
double closed_form_norm_sq(const EigenMode& m);

/// The reported bound 0 < B < (1 + sqrt(-lambda)) / (-1 + sqrt(-lambda)).
/// Only meaningful for sqrt(-lambda) > 1; reported, never enforced.
bool normalization_bound_holds(const EigenMode& m);

/// Ordered orthonormal system of N eigenmodes with their quadrature grid.
/// Immutable after construction; value and derivative tables at the nodes
/// are precomputed.
class EigenBasis {
 public:
  static EigenBasis build(const BoundaryParams& p, int N,
                          QuadratureRule quad = composite_gauss_legendre());
  static EigenBasis from_modes(const BoundaryParams& p, std::vector<EigenMode> modes,
                               QuadratureRule quad = composite_gauss_legendre());

  const BoundaryParams& params() const { return params_; }
  const QuadratureRule& quad() const { return quad_; }
  std::span<const EigenMode> modes() const { return modes_; }
  const EigenMode& mode(std::size_t k) const { return modes_.at(k); }
  std::size_t size() const { return modes_.size(); }
  std::size_t nodes() const { return quad_.size(); }

  /// e_k at the quadrature nodes.
  std::span<const double> values(std::size_t k) const {
    return {values_.data() + k * quad_.size(), quad_.size()};
  }
  /// e_k' at the quadrature nodes.
  std::span<const double> derivatives(std::size_t k) const {
    return {derivs_.data() + k * quad_.size(), quad_.size()};
  }

  /// Gram matrix <phi_j, phi_k>_X by quadrature, row-major N x N.
  std::vector<double> gram() const;

  std::vector<double> eigenvalues() const;

 private:
  EigenBasis(const BoundaryParams& p, std::vector<EigenMode> modes, QuadratureRule quad);

  BoundaryParams params_;
  std::vector<EigenMode> modes_;
  QuadratureRule quad_;
  std::vector<double> values_;
  std::vector<double> derivs_;
};

/// {b0, b1, N, modes: [{j, lambda, B}]}
nlohmann::json to_json(const EigenBasis& basis);
EigenBasis basis_from_json(const nlohmann::json& j,
                           QuadratureRule quad = composite_gauss_legendre());

/// Closed-form solution of (lambda - d^2/dx^2) u = 0 with u(0) = phi0,
/// u(1) = phi1.
class DirichletMap {
 public:
  /// Throws ResonanceError when lambda = -pi^2 k^2.
  DirichletMap(double lambda, double phi0, double phi1);

  double operator()(double x) const;
  double derivative(double x) const;
  double lambda() const { return lambda_; }

 private:
  enum class Branch { Linear, Hyperbolic, Trigonometric };
  Branch branch_;
  double lambda_;
  double phi0_;
  double phi1_;
  double rate_ = 0.0;
  double coef_sin_ = 0.0;
};

DirichletMap dirichlet_map(double lambda, double phi0, double phi1);

}  // namespace dynbc
