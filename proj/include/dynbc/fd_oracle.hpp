#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dynbc/spectral.hpp"

namespace dynbc::fd {

/// Symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
  std::vector<double> apply(const std::vector<double>& x) const;
  double entry_sum() const;
};

/// P1 finite-element pencil of the energy form on a uniform grid of n cells.
/// Nodal dof 0 and n double as the boundary components v0 and v1, so the
/// constraint u(0) = v0, u(1) = v1 holds by construction. The mass matrix
/// carries the unit point mass of each boundary component.
struct DiscreteOperator {
  int n = 0;
  double b0 = 0.0;
  double b1 = 0.0;
  SymTridiag stiffness;
  SymTridiag mass;

  std::size_t dofs() const { return static_cast<std::size_t>(n) + 1; }
  double node(std::size_t i) const { return static_cast<double>(i) / n; }
};

/// Requires n >= 8 and b0, b1 >= 0 (zero is allowed here so the kernel of
/// the bare Neumann form can be inspected).
DiscreteOperator build(int n, double b0, double b1);
DiscreteOperator build(int n, const BoundaryParams& p);

struct EigenPair {
  double lambda;              // negated generalized eigenvalue, <= 0
  std::vector<double> vec;    // mass-orthonormal nodal vector
};

/// The N generalized eigenpairs of smallest magnitude of
/// stiffness x = -lambda mass x, ordered by decreasing lambda. Eigenvalues
/// come from Sturm-count bisection, vectors from inverse iteration. Throws
/// ConvergenceError when an eigenpair residual or the mass-orthonormality
/// check fails.
std::vector<EigenPair> eigensolve(const DiscreteOperator& op, std::size_t N);

/// Eigenvalues only (same ordering and sign convention as eigensolve).
std::vector<double> eigenvalues(const DiscreteOperator& op, std::size_t N);

/// Eigenvalues of the interior block (both boundary rows and columns
/// removed), i.e. the pure Dirichlet problem.
std::vector<double> dirichlet_eigenvalues(const DiscreteOperator& op, std::size_t N);

/// All n+1 eigenpairs, stored once for repeated matrix-exponential actions.
struct FullDecomposition {
  std::vector<double> lambda;              // decreasing
  std::vector<std::vector<double>> vecs;   // mass-orthonormal
};

FullDecomposition full_decomposition(const DiscreteOperator& op);

/// exp(t G) x for the discrete generator G = -mass^{-1} stiffness.
std::vector<double> expm_apply(const DiscreteOperator& op, double t, const std::vector<double>& x);
std::vector<double> expm_apply(const DiscreteOperator& op, const FullDecomposition& dec, double t,
                               const std::vector<double>& x);

/// exp(t G) x + int_0^t exp((t-s) G) mass^{-1} load ds, the exact flow of the
/// discrete system driven by a constant source with load vector `load`.
std::vector<double> affine_flow(const DiscreteOperator& op, const FullDecomposition& dec, double t,
                                const std::vector<double>& x, const std::vector<double>& load);

/// Nodal interpolant of u; the boundary dofs take u(0), u(1).
std::vector<double> interpolate(const DiscreteOperator& op, const std::function<double(double)>& u);

/// Load vector int f phi_i over the interior (no boundary point contribution),
/// by 3-point Gauss per cell.
std::vector<double> load_vector(const DiscreteOperator& op, const std::function<double(double)>& f);

double mass_inner(const DiscreteOperator& op, const std::vector<double>& x,
                  const std::vector<double>& y);
double mass_norm(const DiscreteOperator& op, const std::vector<double>& x);

/// Number of generalized eigenvalues mu of stiffness - mu mass below sigma.
std::size_t sturm_count(const SymTridiag& k, const SymTridiag& m, double sigma);

}  // namespace dynbc::fd
