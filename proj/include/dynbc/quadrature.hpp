#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace dynbc {

/// Node/weight arrays of a quadrature rule on [0,1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  double integrate(const std::function<double(double)>& f) const;
};

/// Gauss-Legendre nodes and weights on [-1,1], computed by Newton iteration
/// on P_order. Nodes are returned in increasing order.
QuadratureRule gauss_legendre(int order);

/// Composite Gauss-Legendre on [0,1]: `panels` equal panels with `order`
/// nodes each.
QuadratureRule composite_gauss_legendre(int panels = 64, int order = 8);

}  // namespace dynbc
