/// @file rng.hpp
/// @brief Counter-based seed derivation and Gaussian draws.
///
/// Every random stream is addressed by (seed, stream): the engine seed is
/// splitmix64 applied to the pair, so sample j of an experiment draws the same
/// numbers regardless of which worker runs it or in what order.
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace wnlab {

/// One splitmix64 output; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Sub-seed for stream `stream` of master seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Stream index for sample `sample` of experiment cell `cell`.
constexpr std::uint64_t cell_stream(std::uint64_t cell, std::uint64_t sample) noexcept {
  return (cell << 40) | sample;
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Standard complex Gaussian (x + iy)/sqrt(2), E|g|^2 = 1.
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace wnlab
