#include "dynbc/semigroup.hpp"

#include <cmath>
#include <sstream>

#include "dynbc/errors.hpp"

namespace dynbc {

double ModalState::norm_sq() const {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

double ModalState::norm() const { return std::sqrt(norm_sq()); }

GridState sample_state(const std::function<double(double)>& u, double v0, double v1,
                       const QuadratureRule& quad) {
  GridState g;
  g.u.resize(quad.size());
  for (std::size_t i = 0; i < quad.size(); ++i) g.u[i] = u(quad.nodes[i]);
  g.v0 = v0;
  g.v1 = v1;
  return g;
}

double x_inner(const GridState& f, const GridState& g, const QuadratureRule& quad) {
  if (f.u.size() != quad.size() || g.u.size() != quad.size()) {
    throw ShapeError("grid state does not match the quadrature");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i) s += quad.weights[i] * f.u[i] * g.u[i];
  return s + f.v0 * g.v0 + f.v1 * g.v1;
}

ModalState project(const GridState& g, const EigenBasis& basis) {
  if (g.u.size() != basis.nodes()) {
    std::ostringstream os;
    os << "project: grid state has " << g.u.size() << " samples, basis quadrature has "
       << basis.nodes();
    throw ShapeError(os.str());
  }
  const auto& w = basis.quad().weights;
  ModalState m(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto ek = basis.values(k);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * g.u[i] * ek[i];
    const auto& mode = basis.mode(k);
    m[k] = s + g.v0 * mode.trace0 + g.v1 * mode.trace1;
  }
  return m;
}

GridState reconstruct(const ModalState& m, const EigenBasis& basis) {
  if (m.size() > basis.size()) throw ShapeError("reconstruct: more coefficients than modes");
  GridState g;
  g.u.assign(basis.nodes(), 0.0);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double ak = m[k];
    if (ak == 0.0) continue;
    const auto ek = basis.values(k);
    for (std::size_t i = 0; i < g.u.size(); ++i) g.u[i] += ak * ek[i];
    g.v0 += ak * basis.mode(k).trace0;
    g.v1 += ak * basis.mode(k).trace1;
  }
  return g;
}

double evaluate(const ModalState& m, const EigenBasis& basis, double x) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) s += m[k] * basis.mode(k).value(x);
  return s;
}

ModalState apply_semigroup(double t, const ModalState& m, const EigenBasis& basis) {
  if (!(t >= 0.0)) throw DomainError("apply_semigroup requires t >= 0");
  if (m.size() > basis.size()) throw ShapeError("apply_semigroup: more coefficients than modes");
  ModalState out(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) out[k] = std::exp(basis.mode(k).lambda * t) * m[k];
  return out;
}

double hs_norm_sq(double t, const EigenBasis& basis) {
  if (!(t > 0.0)) throw DomainError("hs_norm_sq requires t > 0");
  const double tail = std::exp(2.0 * basis.mode(basis.size() - 1).lambda * t);
  if (tail > 1e-8) {
    std::ostringstream os;
    os << "hs_norm_sq: last retained term exp(2 lambda_{N-1} t) = " << tail
       << " exceeds 1e-8 at t = " << t << " with N = " << basis.size();
    throw TruncationError(os.str());
  }
  double s = 0.0;
  for (const auto& mode : basis.modes()) s += std::exp(2.0 * mode.lambda * t);
  return s;
}

FormArgument form_argument_of_mode(const EigenBasis& basis, std::size_t k) {
  const auto& mode = basis.mode(k);
  const auto d = basis.derivatives(k);
  FormArgument f;
  f.du.assign(d.begin(), d.end());
  f.u_at0 = mode.value(0.0);
  f.u_at1 = mode.value(1.0);
  f.v0 = mode.trace0;
  f.v1 = mode.trace1;
  return f;
}

FormArgument form_argument_from_modal(const ModalState& m, const EigenBasis& basis) {
  FormArgument f;
  f.du.assign(basis.nodes(), 0.0);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto d = basis.derivatives(k);
    for (std::size_t i = 0; i < f.du.size(); ++i) f.du[i] += m[k] * d[i];
    f.u_at0 += m[k] * basis.mode(k).value(0.0);
    f.u_at1 += m[k] * basis.mode(k).value(1.0);
    f.v0 += m[k] * basis.mode(k).trace0;
    f.v1 += m[k] * basis.mode(k).trace1;
  }
  return f;
}

namespace {

void check_membership(const FormArgument& f, const char* which) {
  const double d0 = std::abs(f.u_at0 - f.v0);
  const double d1 = std::abs(f.u_at1 - f.v1);
  if (d0 > 1e-8 || d1 > 1e-8) {
    std::ostringstream os;
    os << "form_a: argument " << which << " violates u(0) = v0, u(1) = v1 (mismatch " << d0
       << ", " << d1 << ")";
    throw ConstraintError(os.str());
  }
}

}  // namespace

double form_a(const FormArgument& f, const FormArgument& g, const BoundaryParams& params,
              const QuadratureRule& quad) {
  if (f.du.size() != quad.size() || g.du.size() != quad.size()) {
    throw ShapeError("form_a: derivative samples do not match the quadrature");
  }
  check_membership(f, "f");
  check_membership(g, "g");
  double s = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i) s += quad.weights[i] * f.du[i] * g.du[i];
  return s + params.b0 * f.v0 * g.v0 + params.b1 * f.v1 * g.v1;
}

}  // namespace dynbc
