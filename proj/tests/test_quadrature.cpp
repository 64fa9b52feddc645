#include <doctest.h>

#include <cmath>

#include "dynbc/quadrature.hpp"

using namespace dynbc;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
  for (int order : {1, 2, 5, 8, 12}) {
    const auto rule = gauss_legendre(order);
    REQUIRE(rule.size() == static_cast<std::size_t>(order));
    for (int deg = 0; deg <= 2 * order - 1; ++deg) {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const double exact = (deg % 2 == 1) ? 0.0 : 2.0 / (deg + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("composite rule on [0,1]") {
  const auto rule = composite_gauss_legendre();
  CHECK(rule.size() == 512);
  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 1; i < rule.size(); ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
  CHECK(rule.nodes.front() > 0.0);
  CHECK(rule.nodes.back() < 1.0);
  // Oscillatory integrand at the resolution of mode 31.
  const double k = 95.0;
  const double exact = std::sin(k) / k;
  CHECK(rule.integrate([&](double x) { return std::cos(k * x); }) == doctest::Approx(exact).epsilon(1e-12));
}
