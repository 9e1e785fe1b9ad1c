#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

#include "bne/linalg.hpp"

namespace bne {

// Compact axis-aligned box in R^d. Under the coordinatewise order this is a
// complete lattice with top = upper and bottom = lower.
struct BoxSpace {
  Vec lower;
  Vec upper;

  BoxSpace() = default;
  BoxSpace(Vec lo, Vec up) : lower(std::move(lo)), upper(std::move(up)) {
    if (lower.size() != upper.size() || lower.empty())
      throw std::invalid_argument("BoxSpace: lower/upper dimension mismatch");
    for (std::size_t k = 0; k < lower.size(); ++k)
      if (!(lower[k] < upper[k]))
        throw std::invalid_argument("BoxSpace: degenerate interval at coordinate " +
                                    std::to_string(k));
  }

  int dim() const { return static_cast<int>(lower.size()); }

  double diameter() const { return norm2_diff(upper, lower); }

  double volume() const {
    double v = 1.0;
    for (std::size_t k = 0; k < lower.size(); ++k) v *= upper[k] - lower[k];
    return v;
  }

  bool contains(const Vec& x, double tol = 1e-12) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] < lower[k] - tol || x[k] > upper[k] + tol) return false;
    return true;
  }

  Vec clamp(Vec x) const {
    for (std::size_t k = 0; k < x.size(); ++k)
      x[k] = std::min(upper[k], std::max(lower[k], x[k]));
    return x;
  }

  Vec midpoint() const {
    Vec m(lower.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = 0.5 * (lower[k] + upper[k]);
    return m;
  }
};

// Throws a domain error naming the first violated coordinate.
inline void require_inside(const BoxSpace& box, const Vec& x, const std::string& what,
                           double tol = 1e-9) {
  if (static_cast<int>(x.size()) != box.dim())
    throw std::domain_error(what + ": dimension " + std::to_string(x.size()) +
                            " does not match box dimension " + std::to_string(box.dim()));
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < box.lower[k] - tol || x[k] > box.upper[k] + tol)
      throw std::domain_error(what + "[" + std::to_string(k) + "]=" + std::to_string(x[k]) +
                              " outside [" + std::to_string(box.lower[k]) + ", " +
                              std::to_string(box.upper[k]) + "]");
}

inline BoxSpace product_box(const std::vector<BoxSpace>& boxes) {
  Vec lo, up;
  for (const auto& b : boxes) {
    lo.insert(lo.end(), b.lower.begin(), b.lower.end());
    up.insert(up.end(), b.upper.begin(), b.upper.end());
  }
  return BoxSpace(std::move(lo), std::move(up));
}

}  // namespace bne
