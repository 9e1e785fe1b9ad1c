#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bne/box_space.hpp"
#include "bne/density.hpp"
#include "bne/game.hpp"
#include "bne/linalg.hpp"
#include "bne/strategy.hpp"

namespace bne {

// Discrete stand-in for a probability distribution on a box: one mass per
// grid cell, concentrated at the cell center.
struct GriddedMeasure {
  BoxSpace box;
  std::vector<int> cells;     // cells per axis
  std::vector<double> mass;   // row-major, non-negative, sums to one

  int dim() const { return box.dim(); }

  std::size_t cell_count() const {
    std::size_t t = 1;
    for (int n : cells) t *= static_cast<std::size_t>(n);
    return t;
  }

  double width(int axis) const { return (box.upper[axis] - box.lower[axis]) / cells[axis]; }

  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < dim(); ++k) v *= width(k);
    return v;
  }

  Vec center(std::size_t flat) const {
    const int d = dim();
    Vec p(d);
    for (int k = d - 1; k >= 0; --k) {
      const std::size_t n = static_cast<std::size_t>(cells[k]);
      p[k] = box.lower[k] + width(k) * (static_cast<double>(flat % n) + 0.5);
      flat /= n;
    }
    return p;
  }

  static GriddedMeasure from_function(const BoxSpace& box, std::vector<int> cells,
                                      const std::function<double(const Vec&)>& density) {
    GriddedMeasure m;
    m.box = box;
    m.cells = std::move(cells);
    if (static_cast<int>(m.cells.size()) != box.dim())
      throw std::invalid_argument("GriddedMeasure: cell rank does not match box dimension");
    for (int n : m.cells)
      if (n < 1) throw std::invalid_argument("GriddedMeasure: need >= 1 cell per axis");
    m.mass.resize(m.cell_count());
    const double vol = m.cell_volume();
    double total = 0.0;
    for (std::size_t k = 0; k < m.mass.size(); ++k) {
      const double q = density(m.center(k));
      if (q < 0.0) throw std::invalid_argument("GriddedMeasure: negative density value");
      m.mass[k] = q * vol;
      total += m.mass[k];
    }
    if (!(total > 0.0)) throw std::invalid_argument("GriddedMeasure: zero total mass");
    for (double& x : m.mass) x /= total;
    return m;
  }

  static GriddedMeasure from_density(const DensityModel& density, std::vector<int> cells) {
    const BoxSpace full = product_box(density.type_boxes());
    return from_function(full, std::move(cells), [&](const Vec& t) { return density.joint(t); });
  }

  bool same_support(const GriddedMeasure& o) const {
    if (cells != o.cells || box.dim() != o.box.dim()) return false;
    for (int k = 0; k < box.dim(); ++k)
      if (std::abs(box.lower[k] - o.box.lower[k]) > 1e-12 ||
          std::abs(box.upper[k] - o.box.upper[k]) > 1e-12)
        return false;
    return true;
  }
};

namespace detail {

inline void require_same_support(const GriddedMeasure& a, const GriddedMeasure& b,
                                 const char* op) {
  if (!a.same_support(b))
    throw std::invalid_argument(std::string(op) + ": measures live on different supports");
}

struct TransportCertificate {
  double cost = 0.0;
  double min_reduced_cost = 0.0;  // >= -1e-9 certifies optimality
  int pivots = 0;
};

// Exact balanced transportation problem on point supports, solved by the
// transportation simplex with potential-based optimality certification.
inline TransportCertificate solve_transport(std::vector<double> supply,
                                            std::vector<double> demand,
                                            const std::vector<Vec>& src,
                                            const std::vector<Vec>& dst) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  TransportCertificate out;
  if (m == 0 || n == 0) return out;
  auto cost = [&](int i, int j) { return norm2_diff(src[i], dst[j]); };
  if (m == 1 && n == 1) {
    out.cost = supply[0] * cost(0, 0);
    return out;
  }

  // Tiny supply perturbation removes degeneracy; exact flows are recomputed
  // on the final basis tree afterwards.
  const std::vector<double> supply0 = supply;
  const std::vector<double> demand0 = demand;
  double extra = 0.0;
  for (int i = 0; i < m; ++i) {
    const double e = 1e-11 * (i + 1) / m;
    supply[i] += e;
    extra += e;
  }
  double ssum = 0.0, dsum = 0.0;
  for (double s : supply) ssum += s;
  for (double d : demand) dsum += d;
  demand[n - 1] += ssum - dsum;

  // Northwest-corner starting basis: exactly m + n - 1 arcs.
  std::vector<int> arc_row, arc_col;
  std::vector<double> arc_flow;
  arc_row.reserve(m + n - 1);
  {
    int i = 0, j = 0;
    std::vector<double> s = supply, d = demand;
    while (arc_row.size() + 1 < static_cast<std::size_t>(m + n)) {
      const double t = std::min(s[i], d[j]);
      arc_row.push_back(i);
      arc_col.push_back(j);
      arc_flow.push_back(t);
      s[i] -= t;
      d[j] -= t;
      if (s[i] <= d[j] && i + 1 < m)
        ++i;
      else
        ++j;
    }
  }

  const int nodes = m + n;
  std::vector<std::vector<int>> adj(nodes);
  auto rebuild_adj = [&] {
    for (auto& a : adj) a.clear();
    for (int a = 0; a < static_cast<int>(arc_row.size()); ++a) {
      adj[arc_row[a]].push_back(a);
      adj[m + arc_col[a]].push_back(a);
    }
  };
  rebuild_adj();

  std::vector<double> u(m), v(n);
  auto compute_potentials = [&] {
    std::vector<char> seen(nodes, 0);
    std::queue<int> q;
    u[0] = 0.0;
    seen[0] = 1;
    q.push(0);
    while (!q.empty()) {
      const int w = q.front();
      q.pop();
      for (int a : adj[w]) {
        const int r = arc_row[a], c = m + arc_col[a];
        const int other = (w == r) ? c : r;
        if (seen[other]) continue;
        if (other >= m)
          v[other - m] = cost(arc_row[a], arc_col[a]) - u[r];
        else
          u[other] = cost(arc_row[a], arc_col[a]) - v[arc_col[a]];
        seen[other] = 1;
        q.push(other);
      }
    }
  };

  const int max_pivots = 200 * (m + n) + 1000;
  int pivot = 0;
  for (; pivot < max_pivots; ++pivot) {
    compute_potentials();
    int bi = -1, bj = -1;
    double best = -1e-11;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double rc = cost(i, j) - u[i] - v[j];
        if (rc < best) {
          best = rc;
          bi = i;
          bj = j;
        }
      }
    if (bi < 0) break;

    // Tree path from source bi to sink bj; cycle = path + entering arc.
    std::vector<int> parent_arc(nodes, -1), parent_node(nodes, -1);
    std::vector<char> seen(nodes, 0);
    std::queue<int> q;
    seen[bi] = 1;
    q.push(bi);
    while (!q.empty() && !seen[m + bj]) {
      const int w = q.front();
      q.pop();
      for (int a : adj[w]) {
        const int r = arc_row[a], c = m + arc_col[a];
        const int other = (w == r) ? c : r;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_arc[other] = a;
        parent_node[other] = w;
        q.push(other);
      }
    }
    if (!seen[m + bj])
      throw std::runtime_error("transport: basis lost connectivity");
    std::vector<int> path;
    for (int w = m + bj; w != bi; w = parent_node[w]) path.push_back(parent_arc[w]);
    std::reverse(path.begin(), path.end());

    // Walking source -> sink, odd-position arcs shed flow, even gain it.
    double t = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2)
      if (arc_flow[path[k]] < t) {
        t = arc_flow[path[k]];
        leave = path[k];
      }
    for (std::size_t k = 0; k < path.size(); ++k)
      arc_flow[path[k]] += (k % 2 == 0) ? -t : t;
    arc_row[leave] = bi;
    arc_col[leave] = bj;
    arc_flow[leave] = t;
    rebuild_adj();
  }
  out.pivots = pivot;
  if (pivot >= max_pivots)
    throw std::runtime_error("transport: pivot cap exceeded without optimality certificate");

  compute_potentials();
  double min_rc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) min_rc = std::min(min_rc, cost(i, j) - u[i] - v[j]);
  out.min_reduced_cost = min_rc;

  // Exact flows on the final basis with the unperturbed data (leaf stripping).
  std::vector<double> req(nodes);
  for (int i = 0; i < m; ++i) req[i] = supply0[i];
  for (int j = 0; j < n; ++j) req[m + j] = demand0[j];
  std::vector<int> deg(nodes, 0);
  std::vector<char> arc_done(arc_row.size(), 0);
  for (auto& a : adj) deg[&a - adj.data()] = static_cast<int>(a.size());
  std::queue<int> leaves;
  for (int w = 0; w < nodes; ++w)
    if (deg[w] == 1) leaves.push(w);
  double total_cost = 0.0;
  std::vector<char> node_done(nodes, 0);
  while (!leaves.empty()) {
    const int w = leaves.front();
    leaves.pop();
    if (node_done[w]) continue;
    node_done[w] = 1;
    int arc = -1;
    for (int a : adj[w])
      if (!arc_done[a]) arc = a;
    if (arc < 0) continue;
    arc_done[arc] = 1;
    const double f = req[w];
    const int other = (w == arc_row[arc]) ? m + arc_col[arc] : arc_row[arc];
    req[other] -= f;
    total_cost += std::max(0.0, f) * cost(arc_row[arc], arc_col[arc]);
    if (--deg[other] == 1) leaves.push(other);
    --deg[w];
  }
  out.cost = total_cost;
  return out;
}

}  // namespace detail

// Wasserstein-1 distance. One-dimensional supports use the exact CDF-difference
// integral; higher dimensions solve the exact transport problem on cell
// centers after cancelling common mass.
inline double w1(const GriddedMeasure& a, const GriddedMeasure& b) {
  detail::require_same_support(a, b, "w1");
  if (a.dim() == 1) {
    double cum = 0.0, dist = 0.0;
    const double h = a.width(0);
    for (std::size_t k = 0; k + 1 < a.mass.size(); ++k) {
      cum += a.mass[k] - b.mass[k];
      dist += std::abs(cum) * h;
    }
    return dist;
  }
  for (int n : a.cells)
    if (n > 64)
      throw std::invalid_argument("w1: transport size guard exceeded (max 64 cells per axis)");
  std::vector<double> supply, demand;
  std::vector<Vec> src, dst;
  for (std::size_t k = 0; k < a.mass.size(); ++k) {
    const double d = a.mass[k] - b.mass[k];
    if (d > 1e-15) {
      supply.push_back(d);
      src.push_back(a.center(k));
    } else if (d < -1e-15) {
      demand.push_back(-d);
      dst.push_back(a.center(k));
    }
  }
  const auto cert = detail::solve_transport(supply, demand, src, dst);
  if (cert.min_reduced_cost < -1e-9)
    throw std::runtime_error("w1: transport plan failed the optimality certificate");
  return cert.cost;
}

inline double tv(const GriddedMeasure& a, const GriddedMeasure& b) {
  detail::require_same_support(a, b, "tv");
  double s = 0.0;
  for (std::size_t k = 0; k < a.mass.size(); ++k) s += std::abs(a.mass[k] - b.mass[k]);
  return 0.5 * s;
}

struct KlReport {
  double value = 0.0;
  double floored_mass = 0.0;  // mass of a-cells where b fell below the floor
  bool reliable = true;       // false when flooring touched > 0.1% of mass
};

// KL divergence sum a log(a/b) with a 1e-12 floor on b and flooring telemetry.
inline KlReport kl(const GriddedMeasure& a, const GriddedMeasure& b) {
  detail::require_same_support(a, b, "kl");
  constexpr double floor = 1e-12;
  KlReport rep;
  for (std::size_t k = 0; k < a.mass.size(); ++k) {
    if (a.mass[k] <= 0.0) continue;
    double q = b.mass[k];
    if (q < floor) {
      rep.floored_mass += a.mass[k];
      q = floor;
    }
    rep.value += a.mass[k] * std::log(a.mass[k] / q);
  }
  rep.value = std::max(0.0, rep.value);
  rep.reliable = rep.floored_mass <= 1e-3;
  return rep;
}

enum class PerturbKind { Direct, Mixture };

// A base distribution and its perturbation, either the alternative itself or
// the mixture (1 - eps) base + eps alternative.
struct PerturbationSpec {
  DensityModel base;
  DensityModel alternative;
  PerturbKind kind = PerturbKind::Direct;
  double eps = 0.0;

  DensityModel perturbed() const {
    return kind == PerturbKind::Mixture ? DensityModel::mixture(base, alternative, eps)
                                        : alternative;
  }
};

enum class Metric { W1, TV, KL };

inline Metric metric_from_string(const std::string& s) {
  if (s == "w1") return Metric::W1;
  if (s == "tv") return Metric::TV;
  if (s == "kl") return Metric::KL;
  throw std::invalid_argument("metric must be one of w1, tv, kl; got '" + s + "'");
}

namespace detail {

// Axis bookkeeping for slicing player i's own coordinates out of the joint.
struct SliceLayout {
  std::vector<int> own_axes, rival_axes;

  static SliceLayout of(const DensityModel& d, int i) {
    SliceLayout lay;
    for (int k = 0; k < d.total_dim(); ++k) {
      if (k >= d.offset(i) && k < d.offset(i) + d.dim(i))
        lay.own_axes.push_back(k);
      else
        lay.rival_axes.push_back(k);
    }
    return lay;
  }
};

inline std::size_t flat_from_axes(const GriddedMeasure& joint, const std::vector<int>& axes_a,
                                  const std::vector<std::size_t>& idx_a,
                                  const std::vector<int>& axes_b,
                                  const std::vector<std::size_t>& idx_b) {
  std::vector<std::size_t> idx(joint.dim());
  for (std::size_t k = 0; k < axes_a.size(); ++k) idx[axes_a[k]] = idx_a[k];
  for (std::size_t k = 0; k < axes_b.size(); ++k) idx[axes_b[k]] = idx_b[k];
  std::size_t f = 0;
  for (int k = 0; k < joint.dim(); ++k)
    f = f * static_cast<std::size_t>(joint.cells[k]) + idx[k];
  return f;
}

inline void enumerate_multi(const std::vector<int>& sizes,
                            const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(sizes.size(), 0);
  while (true) {
    fn(idx);
    int k = static_cast<int>(sizes.size()) - 1;
    for (; k >= 0; --k) {
      if (++idx[k] < static_cast<std::size_t>(sizes[k])) break;
      idx[k] = 0;
    }
    if (k < 0) break;
  }
}

}  // namespace detail

// Conditional slice of a joint gridded measure: fix player i's own cell and
// renormalize the rival-cell masses. Returns the own-cell marginal mass too,
// so the tower identity holds exactly at grid level.
struct ConditionalSlices {
  std::vector<GriddedMeasure> conditionals;  // one per own cell, row-major
  std::vector<double> own_marginal;          // own-cell masses
  std::vector<Vec> own_centers;
};

inline ConditionalSlices conditional_slices(const GriddedMeasure& joint, const DensityModel& d,
                                            int i) {
  const detail::SliceLayout lay = detail::SliceLayout::of(d, i);
  BoxSpace rival_box;
  {
    Vec lo, hi;
    for (int ax : lay.rival_axes) {
      lo.push_back(joint.box.lower[ax]);
      hi.push_back(joint.box.upper[ax]);
    }
    rival_box = BoxSpace(lo, hi);
  }
  std::vector<int> own_sizes, rival_sizes;
  for (int ax : lay.own_axes) own_sizes.push_back(joint.cells[ax]);
  for (int ax : lay.rival_axes) rival_sizes.push_back(joint.cells[ax]);

  ConditionalSlices out;
  detail::enumerate_multi(own_sizes, [&](const std::vector<std::size_t>& oi) {
    GriddedMeasure cond;
    cond.box = rival_box;
    cond.cells = rival_sizes;
    cond.mass.reserve(cond.cell_count());
    double total = 0.0;
    detail::enumerate_multi(rival_sizes, [&](const std::vector<std::size_t>& ri) {
      const double m =
          joint.mass[detail::flat_from_axes(joint, lay.own_axes, oi, lay.rival_axes, ri)];
      cond.mass.push_back(m);
      total += m;
    });
    out.own_marginal.push_back(total);
    if (total > 0.0)
      for (double& m : cond.mass) m /= total;
    Vec center;
    for (std::size_t k = 0; k < lay.own_axes.size(); ++k) {
      const int ax = lay.own_axes[k];
      center.push_back(joint.box.lower[ax] + joint.width(ax) * (static_cast<double>(oi[k]) + 0.5));
    }
    out.own_centers.push_back(center);
    out.conditionals.push_back(std::move(cond));
  });
  return out;
}

struct ConditionalDistanceProfile {
  std::vector<Vec> nodes;          // own-cell centers
  std::vector<int> shape;          // own cells per axis
  std::vector<double> values;      // distance per node
  double aggregate = 0.0;          // L^p(eta_i) average over own cells
  double max = 0.0;
};

// d(eta_i(.|theta_i), mu_i(.|theta_i)) at every own cell of the divergence
// grid, with the base own-marginal as the averaging weight.
inline ConditionalDistanceProfile conditional_distance_profile(const GameSpec& game,
                                                               const PerturbationSpec& spec,
                                                               int i, Metric metric, PNorm p,
                                                               int cells_per_axis = 32) {
  const DensityModel mu = spec.perturbed();
  const std::vector<int> cells(game.density.total_dim(), cells_per_axis);
  const GriddedMeasure ja = GriddedMeasure::from_density(spec.base, cells);
  const GriddedMeasure jb = GriddedMeasure::from_density(mu, cells);
  const ConditionalSlices sa = conditional_slices(ja, spec.base, i);
  const ConditionalSlices sb = conditional_slices(jb, mu, i);

  ConditionalDistanceProfile out;
  out.nodes = sa.own_centers;
  out.shape.assign(game.players[i].type_space.dim(), cells_per_axis);
  double acc = 0.0;
  for (std::size_t k = 0; k < sa.conditionals.size(); ++k) {
    if (!(sa.own_marginal[k] > 0.0) || !(sb.own_marginal[k] > 0.0))
      throw std::domain_error("conditional_distance_profile: zero own-marginal cell " +
                              std::to_string(k));
    double d = 0.0;
    switch (metric) {
      case Metric::W1: d = w1(sa.conditionals[k], sb.conditionals[k]); break;
      case Metric::TV: d = tv(sa.conditionals[k], sb.conditionals[k]); break;
      case Metric::KL: d = kl(sa.conditionals[k], sb.conditionals[k]).value; break;
    }
    out.values.push_back(d);
    out.max = std::max(out.max, d);
    switch (p) {
      case PNorm::One: acc += sa.own_marginal[k] * d; break;
      case PNorm::Two: acc += sa.own_marginal[k] * d * d; break;
      case PNorm::Inf: break;
    }
  }
  out.aggregate = p == PNorm::Inf ? out.max : (p == PNorm::Two ? std::sqrt(acc) : acc);
  return out;
}

}  // namespace bne
