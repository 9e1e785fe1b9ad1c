#pragma once

#include <stdexcept>
#include <vector>

#include "bne/game.hpp"
#include "bne/quadrature.hpp"
#include "bne/strategy.hpp"

namespace bne {

namespace detail {

// Offsets of each rival player's block inside the concatenated theta_{-i}.
inline std::vector<int> rival_offsets(const GameSpec& game, int i) {
  std::vector<int> off(game.n(), -1);
  int o = 0;
  for (int j = 0; j < game.n(); ++j) {
    if (j == i) continue;
    off[j] = o;
    o += game.players[j].type_space.dim();
  }
  return off;
}

inline void check_rival_dim(const GameSpec& game, int i) {
  if (game.rival_type_dim(i) > 4)
    throw std::invalid_argument(
        "tensor quadrature supports rival-type dimension <= 4; player " + std::to_string(i) +
        " faces dimension " + std::to_string(game.rival_type_dim(i)));
}

}  // namespace detail

// Quadrature approximation of the conditional expectation
//   integral of u_i(a_i, f_{-i}(theta_{-i}), theta) d eta_i(theta_{-i}|theta_i).
// The rule must cover the rival type box of player i.
inline double expected_utility(const GameSpec& game, int i, const Vec& a_i,
                               const StrategyProfile& f, const Vec& theta_i,
                               const TensorRule& rule) {
  detail::check_rival_dim(game, i);
  const auto off = detail::rival_offsets(game, i);
  ActionProfile a(game.n());
  a[i] = a_i;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Vec& tmi = rule.nodes[k];
    for (int j = 0; j < game.n(); ++j) {
      if (j == i) continue;
      const int d = game.players[j].type_space.dim();
      a[j] = f.grids[j].eval(Vec(tmi.begin() + off[j], tmi.begin() + off[j] + d));
    }
    const double q = game.density.conditional(i, theta_i, tmi);
    acc += rule.weights[k] * q *
           game.utility.value(i, a, game.density.assemble_theta(i, theta_i, tmi));
  }
  return acc;
}

inline Vec expected_grad(const GameSpec& game, int i, const Vec& a_i, const StrategyProfile& f,
                         const Vec& theta_i, const TensorRule& rule) {
  detail::check_rival_dim(game, i);
  const auto off = detail::rival_offsets(game, i);
  ActionProfile a(game.n());
  a[i] = a_i;
  Vec acc(a_i.size(), 0.0);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Vec& tmi = rule.nodes[k];
    for (int j = 0; j < game.n(); ++j) {
      if (j == i) continue;
      const int d = game.players[j].type_space.dim();
      a[j] = f.grids[j].eval(Vec(tmi.begin() + off[j], tmi.begin() + off[j] + d));
    }
    const double q = game.density.conditional(i, theta_i, tmi);
    const Vec g = game.utility.grad(i, a, game.density.assemble_theta(i, theta_i, tmi));
    const double w = rule.weights[k] * q;
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += w * g[c];
  }
  return acc;
}

inline double expected_utility(const GameSpec& game, int i, const Vec& a_i,
                               const StrategyProfile& f, const Vec& theta_i,
                               const QuadratureRule& rule) {
  return expected_utility(game, i, a_i, f, theta_i, rule.over(game.rival_type_box(i)));
}

inline Vec expected_grad(const GameSpec& game, int i, const Vec& a_i, const StrategyProfile& f,
                         const Vec& theta_i, const QuadratureRule& rule) {
  return expected_grad(game, i, a_i, f, theta_i, rule.over(game.rival_type_box(i)));
}

}  // namespace bne
