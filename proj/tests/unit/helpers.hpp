#pragma once

#include <vector>

#include "wnlab/field.hpp"
#include "wnlab/rng.hpp"

namespace wnlab::testing {

inline FourierField random_field(int cutoff, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed, 99);
  std::vector<Complex> c(static_cast<std::size_t>(cutoff));
  for (auto& z : c) z = scale * rng.complex_normal();
  return FourierField(std::move(c));
}

inline FourierField cosine(int cutoff) { return single_mode(cutoff, 1, 0.5); }

}  // namespace wnlab::testing
