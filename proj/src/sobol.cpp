#include "kvh/sobol.hpp"

#include <bit>

#include "kvh/errors.hpp"

namespace kvh {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

struct JoeKuoEntry {
  int s;            // polynomial degree
  std::uint32_t a;  // interior polynomial coefficients
  std::uint32_t m[5];
};

// Joe-Kuo D6 parameters for dimensions 2..8 (dimension 1 is van der Corput).
constexpr JoeKuoEntry kJoeKuo[] = {
    {1, 0, {1, 0, 0, 0, 0}},  {2, 1, {1, 3, 0, 0, 0}},  {3, 1, {1, 3, 1, 0, 0}}, {3, 2, {1, 1, 1, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0}},  {4, 4, {1, 3, 5, 13, 0}}, {5, 2, {1, 1, 5, 5, 17}},
};

constexpr int kBits = 32;

}  // namespace

SobolSequence::SobolSequence(int dimension, std::uint64_t seed) {
  if (dimension < 1 || dimension > 8)
    fail(ErrorCode::invalid_argument, "sobol: supported dimensions are 1..8");
  v_.assign(static_cast<std::size_t>(dimension) * kBits, 0);
  shift_.assign(dimension, 0);

  // dimension 1: v_k = 2^(32-k-1)
  for (int k = 0; k < kBits; ++k) v_[k] = 1u << (kBits - 1 - k);

  for (int d = 1; d < dimension; ++d) {
    const JoeKuoEntry& e = kJoeKuo[d - 1];
    std::uint32_t m[kBits];
    for (int k = 0; k < e.s; ++k) m[k] = e.m[k];
    for (int k = e.s; k < kBits; ++k) {
      std::uint32_t mk = m[k - e.s] ^ (m[k - e.s] << e.s);
      for (int i = 1; i < e.s; ++i)
        if ((e.a >> (e.s - 1 - i)) & 1u) mk ^= m[k - i] << i;
      m[k] = mk;
    }
    for (int k = 0; k < kBits; ++k) v_[static_cast<std::size_t>(d) * kBits + k] = m[k] << (kBits - 1 - k);
  }

  std::uint64_t state = seed;
  for (int d = 0; d < dimension; ++d) shift_[d] = static_cast<std::uint32_t>(splitmix64(state) >> 32);
}

void SobolSequence::point(std::uint64_t index, std::span<double> out) const {
  const int dim = dimension();
  std::uint64_t gray = index ^ (index >> 1);
  std::uint32_t acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int bit = 0;
  while (gray != 0 && bit < kBits) {
    if (gray & 1u) {
      for (int d = 0; d < dim; ++d) acc[d] ^= v_[static_cast<std::size_t>(d) * kBits + bit];
    }
    gray >>= 1;
    ++bit;
  }
  constexpr double scale = 1.0 / 4294967296.0;  // 2^-32
  for (int d = 0; d < dim; ++d) out[d] = (acc[d] ^ shift_[d]) * scale;
}

}  // namespace kvh
