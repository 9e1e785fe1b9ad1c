#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bne/game.hpp"
#include "bne/grid.hpp"
#include "bne/quadrature.hpp"

namespace bne {

enum class PNorm { One, Two, Inf };

inline PNorm pnorm_from_string(const std::string& s) {
  if (s == "1") return PNorm::One;
  if (s == "2") return PNorm::Two;
  if (s == "inf") return PNorm::Inf;
  throw std::invalid_argument("p-norm must be one of 1, 2, inf; got '" + s + "'");
}

// Gridded strategy function f_i: Theta_i -> A_i. Node values live in the
// action box; evaluation interpolates multilinearly and clamps.
struct StrategyGrid {
  TensorGrid grid;          // over the player's type box
  BoxSpace action_box;
  std::vector<Vec> values;  // action per node, row-major

  StrategyGrid() = default;
  StrategyGrid(TensorGrid g, BoxSpace ab, std::vector<Vec> v)
      : grid(std::move(g)), action_box(std::move(ab)), values(std::move(v)) {
    if (values.size() != grid.node_count())
      throw std::invalid_argument("StrategyGrid: value count does not match grid");
    for (const auto& a : values)
      if (!action_box.contains(a, 1e-9))
        throw std::invalid_argument("StrategyGrid: node value outside action box");
  }

  static StrategyGrid constant(const BoxSpace& type_box, const BoxSpace& action_box,
                               const Vec& v, const std::vector<int>& shape) {
    TensorGrid g(type_box, shape);
    return StrategyGrid(g, action_box, std::vector<Vec>(g.node_count(), v));
  }

  Vec eval(const Vec& theta_i) const {
    require_inside(grid.box, theta_i, "theta_i");
    return action_box.clamp(grid.interpolate_vec(values, theta_i));
  }

  std::size_t node_count() const { return grid.node_count(); }
};

struct StrategyProfile {
  std::vector<StrategyGrid> grids;  // one per player

  int n() const { return static_cast<int>(grids.size()); }
};

// Greatest / least constant profiles (the lattice top and bottom).
inline std::pair<StrategyProfile, StrategyProfile> top_bottom(const GameSpec& game,
                                                              int nodes_per_axis = 2) {
  StrategyProfile top, bottom;
  for (int i = 0; i < game.n(); ++i) {
    std::vector<int> shape(game.players[i].type_space.dim(), nodes_per_axis);
    top.grids.push_back(StrategyGrid::constant(game.players[i].type_space,
                                               game.players[i].action_space,
                                               game.players[i].action_space.upper, shape));
    bottom.grids.push_back(StrategyGrid::constant(game.players[i].type_space,
                                                  game.players[i].action_space,
                                                  game.players[i].action_space.lower, shape));
  }
  return {std::move(top), std::move(bottom)};
}

struct NormReport {
  std::vector<double> per_player;
  double max = 0.0;
};

// || f_i - g_i ||_{L^p(eta_i)} per player and the profile max. The integral is
// quadrature against the own-type marginal; p = inf takes the max over the
// union of quadrature and grid nodes.
inline NormReport lp_norm_diff(const StrategyProfile& f, const StrategyProfile& g, PNorm p,
                               const GameSpec& game,
                               const QuadratureRule& rule = QuadratureRule{}) {
  if (f.n() != g.n()) throw std::invalid_argument("lp_norm_diff: profile sizes differ");
  NormReport rep;
  for (int i = 0; i < f.n(); ++i) {
    const StrategyGrid& fi = f.grids[i];
    const StrategyGrid& gi = g.grids[i];
    if (fi.grid.shape != gi.grid.shape)
      throw std::invalid_argument("lp_norm_diff: grid shape mismatch at player " +
                                  std::to_string(i));
    double acc = 0.0;
    if (p == PNorm::Inf) {
      for (std::size_t k = 0; k < fi.node_count(); ++k)
        acc = std::max(acc, norm2_diff(fi.values[k], gi.values[k]));
      const TensorRule tr = rule.over(game.players[i].type_space);
      for (const Vec& node : tr.nodes)
        acc = std::max(acc, norm2_diff(fi.eval(node), gi.eval(node)));
    } else {
      const TensorRule tr = rule.over(game.players[i].type_space);
      const double pw = (p == PNorm::One) ? 1.0 : 2.0;
      for (std::size_t k = 0; k < tr.nodes.size(); ++k) {
        const double d = norm2_diff(fi.eval(tr.nodes[k]), gi.eval(tr.nodes[k]));
        acc += tr.weights[k] * game.density.marginal(i, tr.nodes[k]) * std::pow(d, pw);
      }
      acc = (p == PNorm::One) ? acc : std::sqrt(std::max(0.0, acc));
    }
    rep.per_player.push_back(acc);
    rep.max = std::max(rep.max, acc);
  }
  return rep;
}

struct MonotoneWitness {
  bool monotone = true;
  std::size_t node_a = 0, node_b = 0;  // violating pair when monotone is false
  int axis = -1;
};

// True iff node values are coordinatewise non-decreasing along every grid
// axis direction, up to slack.
inline MonotoneWitness is_monotone(const StrategyGrid& s, double slack = 1e-9) {
  const TensorGrid& g = s.grid;
  const int d = g.box.dim();
  std::size_t stride = 1;
  std::vector<std::size_t> strides(d);
  for (int ax = d - 1; ax >= 0; --ax) {
    strides[ax] = stride;
    stride *= static_cast<std::size_t>(g.shape[ax]);
  }
  for (std::size_t flat = 0; flat < g.node_count(); ++flat) {
    std::size_t rem = flat;
    for (int ax = d - 1; ax >= 0; --ax) {
      const std::size_t idx = rem % g.shape[ax];
      rem /= g.shape[ax];
      if (idx + 1 == static_cast<std::size_t>(g.shape[ax])) continue;
      const std::size_t next = flat + strides[ax];
      for (std::size_t k = 0; k < s.values[flat].size(); ++k)
        if (s.values[next][k] < s.values[flat][k] - slack)
          return {false, flat, next, ax};
    }
  }
  return {};
}

// Coordinatewise node comparison of two profiles, f <= g + slack.
inline bool profile_leq(const StrategyProfile& f, const StrategyProfile& g,
                        double slack = 1e-9) {
  for (int i = 0; i < f.n(); ++i)
    for (std::size_t k = 0; k < f.grids[i].node_count(); ++k)
      for (std::size_t c = 0; c < f.grids[i].values[k].size(); ++c)
        if (f.grids[i].values[k][c] > g.grids[i].values[k][c] + slack) return false;
  return true;
}

inline double profile_max_node_diff(const StrategyProfile& f, const StrategyProfile& g) {
  double m = 0.0;
  for (int i = 0; i < f.n(); ++i)
    for (std::size_t k = 0; k < f.grids[i].node_count(); ++k)
      m = std::max(m, norm2_diff(f.grids[i].values[k], g.grids[i].values[k]));
  return m;
}

}  // namespace bne
