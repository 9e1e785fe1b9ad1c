#pragma once

#include <random>

#include "bne/box_space.hpp"
#include "bne/linalg.hpp"

namespace bne {

using Rng = std::mt19937_64;

inline Vec sample_box(const BoxSpace& box, Rng& rng) {
  Vec x(box.dim());
  for (int k = 0; k < box.dim(); ++k) {
    std::uniform_real_distribution<double> u(box.lower[k], box.upper[k]);
    x[k] = u(rng);
  }
  return x;
}

inline double sample_unit(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

}  // namespace bne
