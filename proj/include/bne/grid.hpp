#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bne/box_space.hpp"
#include "bne/linalg.hpp"

namespace bne {

// Uniform tensor grid over a box with row-major flat indexing and
// piecewise-multilinear interpolation of node data.
struct TensorGrid {
  BoxSpace box;
  std::vector<int> shape;  // nodes per axis, each >= 2

  TensorGrid() = default;
  TensorGrid(BoxSpace b, std::vector<int> s) : box(std::move(b)), shape(std::move(s)) {
    if (static_cast<int>(shape.size()) != box.dim())
      throw std::invalid_argument("TensorGrid: shape rank does not match box dimension");
    for (int n : shape)
      if (n < 2) throw std::invalid_argument("TensorGrid: need >= 2 nodes per axis");
  }

  std::size_t node_count() const {
    std::size_t t = 1;
    for (int n : shape) t *= static_cast<std::size_t>(n);
    return t;
  }

  double spacing(int axis) const {
    return (box.upper[axis] - box.lower[axis]) / (shape[axis] - 1);
  }

  double max_spacing() const {
    double h = 0.0;
    for (int k = 0; k < box.dim(); ++k) h = std::max(h, spacing(k));
    return h;
  }

  Vec node_coord(std::size_t flat) const {
    const int d = box.dim();
    Vec p(d);
    for (int k = d - 1; k >= 0; --k) {
      const std::size_t n = static_cast<std::size_t>(shape[k]);
      p[k] = box.lower[k] + spacing(k) * static_cast<double>(flat % n);
      flat /= n;
    }
    return p;
  }

  std::size_t flat_index(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int k = 0; k < box.dim(); ++k) f = f * shape[k] + idx[k];
    return f;
  }

  // Interpolation stencil: the 2^d surrounding nodes with their weights.
  void stencil(const Vec& x, std::vector<std::size_t>& flats, std::vector<double>& weights) const {
    const int d = box.dim();
    std::vector<int> base(d);
    std::vector<double> frac(d);
    for (int k = 0; k < d; ++k) {
      const double t = (x[k] - box.lower[k]) / spacing(k);
      int b = static_cast<int>(std::floor(t));
      b = std::max(0, std::min(shape[k] - 2, b));
      base[k] = b;
      frac[k] = std::min(1.0, std::max(0.0, t - b));
    }
    const std::size_t corners = std::size_t{1} << d;
    flats.resize(corners);
    weights.resize(corners);
    std::vector<int> idx(d);
    for (std::size_t c = 0; c < corners; ++c) {
      double w = 1.0;
      for (int k = 0; k < d; ++k) {
        const bool hi = (c >> k) & 1u;
        idx[k] = base[k] + (hi ? 1 : 0);
        w *= hi ? frac[k] : 1.0 - frac[k];
      }
      flats[c] = flat_index(idx);
      weights[c] = w;
    }
  }

  double interpolate(const std::vector<double>& values, const Vec& x) const {
    std::vector<std::size_t> f;
    std::vector<double> w;
    stencil(x, f, w);
    double s = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) s += w[c] * values[f[c]];
    return s;
  }

  Vec interpolate_vec(const std::vector<Vec>& values, const Vec& x) const {
    std::vector<std::size_t> f;
    std::vector<double> w;
    stencil(x, f, w);
    Vec s(values.front().size(), 0.0);
    for (std::size_t c = 0; c < f.size(); ++c)
      for (std::size_t k = 0; k < s.size(); ++k) s[k] += w[c] * values[f[c]][k];
    return s;
  }

  // Exact integral of the multilinear interpolant (trapezoid weights).
  double integrate(const std::vector<double>& values) const {
    double s = 0.0;
    for (std::size_t flat = 0; flat < node_count(); ++flat)
      s += trapezoid_weight(flat) * values[flat];
    return s;
  }

  double trapezoid_weight(std::size_t flat) const {
    const int d = box.dim();
    double w = 1.0;
    for (int k = d - 1; k >= 0; --k) {
      const std::size_t n = static_cast<std::size_t>(shape[k]);
      const std::size_t i = flat % n;
      w *= spacing(k) * ((i == 0 || i + 1 == n) ? 0.5 : 1.0);
      flat /= n;
    }
    return w;
  }
};

}  // namespace bne
