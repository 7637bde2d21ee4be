#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kvh {

// Sobol sequence (Joe-Kuo direction numbers, dimensions <= 8) with a seeded
// digital-shift scramble. Points are addressable by index, so evaluation
// order never affects the values.
class SobolSequence {
public:
  SobolSequence(int dimension, std::uint64_t seed);

  int dimension() const { return static_cast<int>(shift_.size()); }

  // Fills out[0..dim) with point i in [0, 1)^dim.
  void point(std::uint64_t index, std::span<double> out) const;

private:
  std::vector<std::uint32_t> v_;      // direction numbers, dim * 32
  std::vector<std::uint32_t> shift_;  // per-dimension digital shift
};

// splitmix64: small deterministic seeding helper
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace kvh
