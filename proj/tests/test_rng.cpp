#include <doctest.h>

#include <cmath>
#include <vector>

#include "dynbc/rng.hpp"

using namespace dynbc;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference values from the Random123 known-answer tests.
  const auto zero = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto ones = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu});
  CHECK(ones == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const auto pi = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
  CHECK(pi == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normals are keyed, prefix-stable and standard") {
  const NoiseKey key{42, 3, 0};
  std::vector<double> a(7);
  std::vector<double> b(12);
  standard_normals(key, 5, a);
  standard_normals(key, 5, b);
  for (std::size_t m = 0; m < a.size(); ++m) CHECK(a[m] == b[m]);
  std::vector<double> c(7);
  standard_normals(NoiseKey{42, 4, 0}, 5, c);
  CHECK(c != a);
  standard_normals(NoiseKey{42, 3, 1}, 5, c);
  CHECK(c != a);
  standard_normals(key, 6, c);
  CHECK(c != a);

  double sum = 0.0;
  double sq = 0.0;
  double quart = 0.0;
  const int n = 200000;
  std::vector<double> buf(8);
  for (int i = 0; i < n / 8; ++i) {
    standard_normals(NoiseKey{9, static_cast<std::uint32_t>(i), 0}, 0, buf);
    for (double x : buf) {
      sum += x;
      sq += x * x;
      quart += x * x * x * x;
    }
  }
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(quart / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}
