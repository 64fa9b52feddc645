#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dynbc/spectral.hpp"

namespace dynbc {

/// Coefficients a_k = <u, phi_k>_X of a coupled state in the eigenbasis.
struct ModalState {
  std::vector<double> a;

  ModalState() = default;
  explicit ModalState(std::size_t n) : a(n, 0.0) {}
  explicit ModalState(std::vector<double> coeffs) : a(std::move(coeffs)) {}

  std::size_t size() const { return a.size(); }
  double& operator[](std::size_t k) { return a[k]; }
  double operator[](std::size_t k) const { return a[k]; }
  /// Euclidean norm of the coefficients, i.e. the X-norm of the represented state.
  double norm() const;
  double norm_sq() const;

  friend bool operator==(const ModalState&, const ModalState&) = default;
};

/// Grid representation of (u, v0, v1): u sampled at the basis quadrature nodes.
struct GridState {
  std::vector<double> u;
  double v0 = 0.0;
  double v1 = 0.0;
};

/// Samples u at the quadrature nodes and attaches the boundary components.
GridState sample_state(const std::function<double(double)>& u, double v0, double v1,
                       const QuadratureRule& quad);

/// X inner product of two grid states by quadrature.
double x_inner(const GridState& f, const GridState& g, const QuadratureRule& quad);

/// a_k = int u e_k + v0 e_k(0) + v1 e_k(1). Throws ShapeError on length mismatch.
ModalState project(const GridState& g, const EigenBasis& basis);

/// u = sum_k a_k e_k at the nodes, v_i = sum_k a_k e_k(i).
GridState reconstruct(const ModalState& m, const EigenBasis& basis);

/// Evaluates the reconstructed interior function at an arbitrary point.
double evaluate(const ModalState& m, const EigenBasis& basis, double x);

/// a_k -> exp(lambda_k t) a_k. Throws DomainError for t < 0.
ModalState apply_semigroup(double t, const ModalState& m, const EigenBasis& basis);

/// Truncated squared Hilbert-Schmidt norm sum_k exp(2 lambda_k t) of the
/// semigroup. Throws TruncationError when exp(2 lambda_{N-1} t) > 1e-8, i.e.
/// when the basis is too small to resolve the tail at this t.
double hs_norm_sq(double t, const EigenBasis& basis);

/// Input of the energy form: derivative samples at the nodes plus the trace
/// values of the interior function and the boundary components.
struct FormArgument {
  std::vector<double> du;
  double u_at0 = 0.0;
  double u_at1 = 0.0;
  double v0 = 0.0;
  double v1 = 0.0;
};

/// Uses the closed-form derivative of mode k.
FormArgument form_argument_of_mode(const EigenBasis& basis, std::size_t k);

/// Spectral differentiation: du = sum_k a_k e_k'.
FormArgument form_argument_from_modal(const ModalState& m, const EigenBasis& basis);

/// a(f, g) = int f' g' + b0 f(0) g(0) + b1 f(1) g(1). Throws ConstraintError
/// when either argument has |u(0) - v0| or |u(1) - v1| above 1e-8, and
/// ShapeError when derivative arrays do not match the quadrature.
double form_a(const FormArgument& f, const FormArgument& g, const BoundaryParams& params,
              const QuadratureRule& quad);

}  // namespace dynbc
