#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace dynbc {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// every output block is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Identifies one independent noise stream: a simulation seed, a path index,
/// and a stream tag that separates unrelated consumers sharing a path.
struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint32_t path = 0;
  std::uint32_t stream = 0;
};

/// Fills `out` with i.i.d. standard normals for time step `step`. Entry m
/// depends only on (key, step, m), so truncating or extending `out` never
/// changes the shared prefix.
void standard_normals(const NoiseKey& key, std::uint32_t step, std::span<double> out);

/// Uniform double in [0,1) from the top 53 bits.
double to_unit(std::uint64_t bits);

/// 64-bit mixing (splitmix64 finalizer), used to derive seeds from data.
std::uint64_t mix64(std::uint64_t x);

}  // namespace dynbc
