#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bne/best_response.hpp"
#include "bne/expectation.hpp"
#include "bne/strategy.hpp"

namespace bne {

enum class SolveMethod { Contraction, MonotoneFromTop, MonotoneFromBottom };
enum class MonotoneDirection { FromTop, FromBottom };

struct EquilibriumResult {
  StrategyProfile profile;
  int iterations = 0;
  double residual = 0.0;                  // ||f^{k+1} - f^k||_{inf, L^p}
  std::optional<double> certificate;      // residual * alpha / (1 - alpha)
  SolveMethod method = SolveMethod::Contraction;
  std::vector<double> trace;              // per-iteration residuals
};

// One application of the best-response operator: every node of every player's
// grid is replaced by the best response against the rivals' current profile.
inline StrategyProfile apply_psi(const GameSpec& game, const StrategyProfile& f,
                                 const QuadratureRule& rule, double tol = 1e-10) {
  StrategyProfile out = f;
  for (int i = 0; i < game.n(); ++i) {
    const TensorRule rival_rule = rule.over(game.rival_type_box(i));
    BestResponseOptions opts;
    opts.tol = tol;
    for (std::size_t k = 0; k < f.grids[i].node_count(); ++k) {
      const Vec theta_i = f.grids[i].grid.node_coord(k);
      try {
        out.grids[i].values[k] = best_response_point(game, i, f, theta_i, rival_rule, opts);
      } catch (const SolverError& e) {
        std::ostringstream msg;
        msg << e.what() << " (player " << i << ", node " << k << ")";
        throw SolverError(msg.str(), e.residual);
      }
    }
  }
  return out;
}

inline StrategyProfile midpoint_profile(const GameSpec& game, int grid_nodes) {
  StrategyProfile f;
  for (int i = 0; i < game.n(); ++i) {
    std::vector<int> shape(game.players[i].type_space.dim(), grid_nodes);
    f.grids.push_back(StrategyGrid::constant(game.players[i].type_space,
                                             game.players[i].action_space,
                                             game.players[i].action_space.midpoint(), shape));
  }
  return f;
}

struct ContractionSettings {
  int grid_nodes = 101;
  QuadratureRule rule;
  PNorm p = PNorm::Inf;
  double eps_target = 1e-6;
  int max_iter = 200;
  double br_tol = 1e-10;
};

// Banach iteration f^{k+1} = Psi(f^k) from the box-midpoint profile. When a
// contraction certificate (alpha < 1) is available the stopping residual is
// chosen so the returned profile is within eps_target of the fixed point.
inline EquilibriumResult solve_contraction(const GameSpec& game, const ContractionSettings& s,
                                           const ModuliReport* moduli = nullptr,
                                           const StrategyProfile* start = nullptr) {
  const bool certified = moduli != nullptr && moduli->contraction_ok;
  const double alpha = certified ? moduli->alpha : 0.0;
  double threshold = s.eps_target;
  if (certified && alpha > 0.0) threshold = s.eps_target * (1.0 - alpha) / alpha;

  EquilibriumResult res;
  res.method = SolveMethod::Contraction;
  StrategyProfile f = start != nullptr ? *start : midpoint_profile(game, s.grid_nodes);
  for (int k = 0; k < s.max_iter; ++k) {
    StrategyProfile next = apply_psi(game, f, s.rule, s.br_tol);
    const double r = lp_norm_diff(next, f, s.p, game, s.rule).max;
    res.trace.push_back(r);
    f = std::move(next);
    res.iterations = k + 1;
    res.residual = r;
    if (r <= threshold) {
      res.profile = std::move(f);
      if (certified && alpha > 0.0) res.certificate = r * alpha / (1.0 - alpha);
      return res;
    }
  }
  std::ostringstream msg;
  msg << "contraction iteration did not reach residual " << threshold << " in " << s.max_iter
      << " iterations (last residual " << res.residual << ")";
  throw SolverError(msg.str(), res.residual);
}

struct MonotoneSettings {
  int grid_nodes = 101;
  QuadratureRule rule;
  double tol = 1e-8;           // node-wise max change stopping rule
  int max_iter = 500;
  double br_tol = 1e-10;
  double order_slack = 1e-9;
  bool override_order_check = false;
};

struct OrderConditionCheck {
  bool supermodular_pass = true;
  bool trivially_supermodular = true;       // all z_i = 1
  bool increasing_in_type = true;           // increasing differences in (a_i, theta_i)
  bool increasing_in_rivals = true;         // increasing differences in (a_i, f_{-i})
  std::string witness;
  std::string note;                         // e.g. direction flag for decreasing responses
  int samples = 0;
};

// Sampled evidence for the lattice conditions: supermodularity in own action
// (trivial for scalar actions), and increasing differences in (a_i, theta_i)
// and in (a_i, rival shift). Report-only; never throws.
inline OrderConditionCheck check_order_conditions(const GameSpec& game, int samples = 200,
                                                  unsigned seed = 0,
                                                  const QuadratureRule& rule = {}) {
  OrderConditionCheck rep;
  rep.samples = samples;
  Rng rng(seed);
  const double tol = 1e-9;
  const BoxSpace full_theta = game.full_type_box();

  for (int i = 0; i < game.n(); ++i) {
    const BoxSpace& abox = game.players[i].action_space;
    const int z = abox.dim();
    if (z >= 2) {
      rep.trivially_supermodular = false;
      // Cross-partial sign pattern via central differences of the gradient.
      for (int t = 0; t < samples; ++t) {
        ActionProfile a(game.n());
        for (int j = 0; j < game.n(); ++j) a[j] = sample_box(game.players[j].action_space, rng);
        const Vec theta = sample_box(full_theta, rng);
        for (int k = 0; k < z; ++k)
          for (int l = 0; l < z; ++l) {
            if (k == l) continue;
            const double h = 1e-5 * (abox.upper[l] - abox.lower[l]);
            ActionProfile ap = a, am = a;
            ap[i][l] = std::min(abox.upper[l], a[i][l] + h);
            am[i][l] = std::max(abox.lower[l], a[i][l] - h);
            const double cross = (game.utility.grad(i, ap, theta)[k] -
                                  game.utility.grad(i, am, theta)[k]) /
                                 (ap[i][l] - am[i][l]);
            if (cross < -tol) {
              rep.supermodular_pass = false;
              if (rep.witness.empty()) {
                std::ostringstream w;
                w << "player " << i << " cross-partial d2u/da" << k << "da" << l << " = "
                  << cross << " < 0";
                rep.witness = w.str();
              }
            }
          }
      }
    }

    // Increasing differences sampled on the expected utility, with constant
    // rival shifts standing in for rival strategy increases.
    const TensorRule rival_rule = rule.over(game.rival_type_box(i));
    const auto& tbox = game.players[i].type_space;
    for (int t = 0; t < std::max(8, samples / 8); ++t) {
      StrategyProfile f = detail::random_profile(game, 3, rng);
      Vec th1 = sample_box(tbox, rng), th2 = sample_box(tbox, rng);
      for (int k = 0; k < tbox.dim(); ++k)
        if (th1[k] > th2[k]) std::swap(th1[k], th2[k]);
      Vec a1 = sample_box(abox, rng), a2 = sample_box(abox, rng);
      for (int k = 0; k < z; ++k)
        if (a1[k] > a2[k]) std::swap(a1[k], a2[k]);
      if (norm2_diff(a1, a2) < 1e-9 || norm2_diff(th1, th2) < 1e-9) continue;

      const double d_low = expected_utility(game, i, a2, f, th1, rival_rule) -
                           expected_utility(game, i, a1, f, th1, rival_rule);
      const double d_high = expected_utility(game, i, a2, f, th2, rival_rule) -
                           expected_utility(game, i, a1, f, th2, rival_rule);
      if (d_high < d_low - 1e-7) rep.increasing_in_type = false;

      // Shift every rival strategy up by a constant fraction of its box.
      StrategyProfile g = f;
      for (int j = 0; j < game.n(); ++j) {
        if (j == i) continue;
        for (auto& v : g.grids[j].values)
          for (int k = 0; k < static_cast<int>(v.size()); ++k)
            v[k] = std::min(game.players[j].action_space.upper[k],
                            v[k] + 0.1 * (game.players[j].action_space.upper[k] -
                                          game.players[j].action_space.lower[k]));
      }
      const double r_low = expected_utility(game, i, a2, f, th1, rival_rule) -
                           expected_utility(game, i, a1, f, th1, rival_rule);
      const double r_high = expected_utility(game, i, a2, g, th1, rival_rule) -
                            expected_utility(game, i, a1, g, th1, rival_rule);
      if (r_high < r_low - 1e-7) rep.increasing_in_rivals = false;
    }
  }
  if (!rep.increasing_in_type)
    rep.note = "increasing differences in (a_i, theta_i) fail: responses decrease in type";
  return rep;
}

// Monotone lattice iteration from the top (or bottom) constant profile. The
// trajectory must be node-wise monotone; a violation signals that the game
// lacks the required order structure.
inline EquilibriumResult solve_monotone(const GameSpec& game, MonotoneDirection dir,
                                        const MonotoneSettings& s) {
  if (!s.override_order_check) {
    const OrderConditionCheck check = check_order_conditions(game, 64, 0, s.rule);
    if (!check.supermodular_pass || !check.increasing_in_rivals)
      throw std::runtime_error(
          "order-condition check failed (" +
          (check.witness.empty() ? std::string("rival increasing differences") : check.witness) +
          "); pass override to iterate anyway");
  }
  auto [top, bottom] = top_bottom(game, s.grid_nodes);
  StrategyProfile f = dir == MonotoneDirection::FromTop ? top : bottom;

  EquilibriumResult res;
  res.method = dir == MonotoneDirection::FromTop ? SolveMethod::MonotoneFromTop
                                                 : SolveMethod::MonotoneFromBottom;
  for (int k = 0; k < s.max_iter; ++k) {
    StrategyProfile next = apply_psi(game, f, s.rule, s.br_tol);
    const bool ordered = dir == MonotoneDirection::FromTop
                             ? profile_leq(next, f, s.order_slack)
                             : profile_leq(f, next, s.order_slack);
    if (!ordered)
      throw std::runtime_error(
          "monotone trajectory violated the node-wise order at iteration " + std::to_string(k) +
          "; the game lacks the lattice structure this iteration needs");
    const double change = profile_max_node_diff(next, f);
    res.trace.push_back(change);
    f = std::move(next);
    res.iterations = k + 1;
    res.residual = change;
    if (change <= s.tol) {
      res.profile = std::move(f);
      return res;
    }
  }
  throw SolverError("monotone iteration did not converge; last node-wise change " +
                        std::to_string(res.residual),
                    res.residual);
}

}  // namespace bne
