#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "bne/best_response.hpp"
#include "bne/equilibrium.hpp"
#include "bne/expectation.hpp"
#include "bne/game.hpp"
#include "bne/games.hpp"

namespace testutil {

using bne::ActionProfile;
using bne::GameSpec;
using bne::Vec;

// Central finite-difference gradient of the utility in a_i, h = 1e-5.
inline Vec fd_utility_grad(const GameSpec& game, int i, const ActionProfile& a,
                           const Vec& theta, double h = 1e-5) {
  Vec g(a[i].size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    ActionProfile ap = a, am = a;
    ap[i][k] += h;
    am[i][k] -= h;
    g[k] = (game.utility.value(i, ap, theta) - game.utility.value(i, am, theta)) / (2.0 * h);
  }
  return g;
}

inline Vec fd_expected_grad(const GameSpec& game, int i, const Vec& a_i,
                            const bne::StrategyProfile& f, const Vec& theta_i,
                            const bne::TensorRule& rule, double h = 1e-5) {
  Vec g(a_i.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    Vec ap = a_i, am = a_i;
    ap[k] += h;
    am[k] -= h;
    g[k] = (bne::expected_utility(game, i, ap, f, theta_i, rule) -
            bne::expected_utility(game, i, am, f, theta_i, rule)) /
           (2.0 * h);
  }
  return g;
}

// Golden-section maximizer of a scalar unimodal function on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol = 1e-10) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// 201-point scan with parabolic refinement through the best bracket; exact for
// quadratic objectives up to the bracket resolution.
inline double scan_max(const std::function<double(double)>& f, double lo, double hi,
                       int points = 201) {
  int best = 0;
  double fbest = f(lo);
  const double h = (hi - lo) / (points - 1);
  std::vector<double> vals(points);
  vals[0] = fbest;
  for (int k = 1; k < points; ++k) {
    vals[k] = f(lo + h * k);
    if (vals[k] > fbest) {
      fbest = vals[k];
      best = k;
    }
  }
  if (best == 0 || best == points - 1) return lo + h * best;
  const double denom = vals[best - 1] - 2.0 * vals[best] + vals[best + 1];
  if (denom >= 0.0) return lo + h * best;
  const double shift = 0.5 * (vals[best - 1] - vals[best + 1]) / denom;
  return lo + h * (best + std::max(-1.0, std::min(1.0, shift)));
}

// Two-player quadratic game with strategic complements (positive cross term)
// and increasing responses in type; satisfies the sampled order conditions.
inline GameSpec complements_game(double w = 0.5, double s = 3.0) {
  bne::PlayerSpaces p{bne::BoxSpace({0.0}, {1.0}), bne::BoxSpace({0.0}, {2.0})};
  return GameSpec({p, p},
                  bne::UtilityModel::general_quadratic({1.0, 1.0}, {1.0, 1.0}, {s, s},
                                                       {{0.0, w}, {w, 0.0}}),
                  bne::DensityModel::product_uniform({p.type_space, p.type_space}));
}

inline GameSpec complements_game_fgm(double rho = 0.4, double w = 0.5, double s = 3.0) {
  bne::PlayerSpaces p{bne::BoxSpace({0.0}, {1.0}), bne::BoxSpace({0.0}, {2.0})};
  return GameSpec({p, p},
                  bne::UtilityModel::general_quadratic({1.0, 1.0}, {1.0, 1.0}, {s, s},
                                                       {{0.0, w}, {w, 0.0}}),
                  bne::DensityModel::fgm(rho));
}

// The duopoly utility re-wrapped as a custom (non-certified) model, to force
// the sampled moduli and projected-gradient paths.
inline GameSpec cournot2_custom(double rho = 0.3, double alpha = 10.0, double beta = 1.0,
                                double c = 1.0) {
  const GameSpec base = bne::cournot2(rho, alpha, beta, c);
  const bne::UtilityModel quad = base.utility;
  auto value = [quad](int i, const ActionProfile& a, const Vec& th) {
    return quad.value(i, a, th);
  };
  auto grad = [quad](int i, const ActionProfile& a, const Vec& th) {
    return quad.grad(i, a, th);
  };
  return GameSpec(base.players, bne::UtilityModel::custom(value, grad), base.density);
}

// Exhaustive best-response iteration on a coarse node grid with a scanned
// action search; independent of the library solver path.
inline bne::StrategyProfile brute_force_equilibrium(const GameSpec& game, int nodes,
                                                    const bne::QuadratureRule& rule,
                                                    double tol = 1e-9, int max_iter = 300) {
  bne::StrategyProfile f = bne::midpoint_profile(game, nodes);
  std::vector<bne::TensorRule> rival_rules;
  for (int i = 0; i < game.n(); ++i) rival_rules.push_back(rule.over(game.rival_type_box(i)));
  for (int it = 0; it < max_iter; ++it) {
    bne::StrategyProfile next = f;
    for (int i = 0; i < game.n(); ++i) {
      const auto& abox = game.players[i].action_space;
      for (std::size_t k = 0; k < f.grids[i].node_count(); ++k) {
        const Vec t = f.grids[i].grid.node_coord(k);
        const double a =
            scan_max([&](double x) { return bne::expected_utility(game, i, {x}, f, t,
                                                                  rival_rules[i]); },
                     abox.lower[0], abox.upper[0]);
        next.grids[i].values[k] = {a};
      }
    }
    const double change = bne::profile_max_node_diff(next, f);
    f = std::move(next);
    if (change <= tol) break;
  }
  return f;
}

}  // namespace testutil
