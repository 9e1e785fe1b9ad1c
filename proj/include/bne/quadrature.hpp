#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bne/box_space.hpp"
#include "bne/linalg.hpp"

namespace bne {

enum class QuadKind { GaussLegendre, Trapezoid };

// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration on P_n.
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1 nodes");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int k = 0; k < m; ++k) {
    double z = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[k] = -z;
    x[n - 1 - k] = z;
    w[k] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - k] = w[k];
  }
}

inline void nodes_1d(QuadKind kind, int n, double lo, double hi, std::vector<double>& x,
                     std::vector<double>& w) {
  if (kind == QuadKind::GaussLegendre) {
    std::vector<double> xr, wr;
    gauss_legendre_01(n, xr, wr);
    x.resize(n);
    w.resize(n);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int k = 0; k < n; ++k) {
      x[k] = mid + half * xr[k];
      w[k] = half * wr[k];
    }
  } else {
    if (n < 2) throw std::invalid_argument("trapezoid rule: need n >= 2 nodes");
    x.resize(n);
    w.resize(n);
    const double h = (hi - lo) / (n - 1);
    for (int k = 0; k < n; ++k) {
      x[k] = lo + k * h;
      w[k] = (k == 0 || k == n - 1) ? 0.5 * h : h;
    }
  }
}

// Tensor quadrature over a box w.r.t. the Lebesgue measure.
struct TensorRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;

  static TensorRule build(const BoxSpace& box, QuadKind kind, int points_per_axis) {
    const int d = box.dim();
    std::vector<std::vector<double>> ax(d), aw(d);
    for (int k = 0; k < d; ++k)
      nodes_1d(kind, points_per_axis, box.lower[k], box.upper[k], ax[k], aw[k]);
    TensorRule rule;
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= ax[k].size();
    rule.nodes.reserve(total);
    rule.weights.reserve(total);
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      Vec p(d);
      double w = 1.0;
      for (int k = 0; k < d; ++k) {
        p[k] = ax[k][idx[k]];
        w *= aw[k][idx[k]];
      }
      rule.nodes.push_back(std::move(p));
      rule.weights.push_back(w);
      for (int k = d - 1; k >= 0; --k) {
        if (++idx[k] < ax[k].size()) break;
        idx[k] = 0;
      }
    }
    return rule;
  }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k]);
    return s;
  }
};

// User-facing quadrature settings; the tensor rule over a concrete box is
// instantiated on demand.
struct QuadratureRule {
  QuadKind kind = QuadKind::GaussLegendre;
  int points_per_axis = 32;

  TensorRule over(const BoxSpace& box) const {
    return TensorRule::build(box, kind, points_per_axis);
  }
};

}  // namespace bne
