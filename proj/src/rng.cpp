#include "wnlab/rng.hpp"

#include <cmath>

namespace wnlab {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ stream;
  splitmix64(t);
  return splitmix64(t);
}

std::complex<double> Rng::complex_normal() {
  const double x = normal();
  const double y = normal();
  return {x * M_SQRT1_2, y * M_SQRT1_2};
}

}  // namespace wnlab
