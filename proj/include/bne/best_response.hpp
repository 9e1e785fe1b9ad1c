#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bne/expectation.hpp"
#include "bne/game.hpp"
#include "bne/sampling.hpp"
#include "bne/strategy.hpp"

namespace bne {

// All constants the contraction and stability theorems consume.
struct ModuliReport {
  enum class Source { Analytic, Sampled };

  std::vector<double> sigma;            // strong concavity per player
  std::vector<std::vector<double>> tau; // blockwise rival moduli, tau[i][i] = 0
  std::vector<double> kappa;            // own-type moduli of the expected gradient
  std::vector<double> gamma;            // conditional-density Lipschitz moduli
  std::vector<double> rho_rival;        // rival-type gradient moduli (varrho)
  std::vector<double> tau_agg;          // sqrt(sum_j tau_ij^2)
  double beta = 0.0;                    // max_i kappa_i / sigma_i
  double alpha = 0.0;                   // max_i sum_{j != i} tau_ij / sigma_i
  bool contraction_ok = false;
  Source source = Source::Analytic;
  double safety_factor = 1.0;           // 1.05 on sampled extrema

  double tau_row_sum(int i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < tau[i].size(); ++j) s += tau[i][j];
    return s;
  }
};

struct SolverError : std::runtime_error {
  double residual;
  SolverError(const std::string& msg, double res) : std::runtime_error(msg), residual(res) {}
};

namespace detail {

// Absolute bound on any feasible action coordinate of player j.
inline double action_absmax(const GameSpec& game, int j) {
  double m = 0.0;
  const auto& box = game.players[j].action_space;
  for (int k = 0; k < box.dim(); ++k)
    m = std::max(m, std::max(std::abs(box.lower[k]), std::abs(box.upper[k])));
  return m;
}

// integral over Theta_{-i} of sum_j tau_ij |f_j(theta_j)| (Lebesgue measure);
// with f = top this is the uniform bound used by the own-type modulus.
inline double cross_weight_integral(const GameSpec& game, int i,
                                    const std::vector<double>& tau_row,
                                    const StrategyProfile* hint) {
  const double vol = game.rival_type_box(i).volume();
  if (hint == nullptr) {
    double s = 0.0;
    for (int j = 0; j < game.n(); ++j)
      if (j != i) s += tau_row[j] * action_absmax(game, j);
    return s * vol;
  }
  double s = 0.0;
  for (int j = 0; j < game.n(); ++j) {
    if (j == i) continue;
    const TensorRule tr = TensorRule::build(game.players[j].type_space, QuadKind::GaussLegendre, 16);
    double integral = 0.0;
    for (std::size_t k = 0; k < tr.nodes.size(); ++k)
      integral += tr.weights[k] * norm2(hint->grids[j].eval(tr.nodes[k]));
    double rest = 1.0;
    for (int l = 0; l < game.n(); ++l)
      if (l != i && l != j) rest *= game.players[l].type_space.volume();
    s += tau_row[j] * integral * rest;
  }
  return s;
}

inline double sampled_conditional_lipschitz(const GameSpec& game, int i, int budget, Rng& rng) {
  const BoxSpace ti = game.players[i].type_space;
  const BoxSpace tmi = game.rival_type_box(i);
  double quot = 0.0;
  for (int t = 0; t < budget; ++t) {
    const Vec a = sample_box(ti, rng), b = sample_box(ti, rng);
    const Vec r = sample_box(tmi, rng);
    const double d = norm2_diff(a, b);
    if (d < 1e-10) continue;
    quot = std::max(quot,
                    std::abs(game.density.conditional(i, a, r) - game.density.conditional(i, b, r)) / d);
  }
  return quot;
}

}  // namespace detail

// Estimates (analytically where possible, by sampling otherwise) every modulus
// the theorems need, plus the contraction verdict. The hint profile sharpens
// the own-type modulus; without one the lattice top provides a uniform bound.
inline ModuliReport estimate_moduli(const GameSpec& game, const StrategyProfile* hint = nullptr,
                                    int budget = 1000, unsigned seed = 0) {
  const int n = game.n();
  ModuliReport rep;
  rep.sigma.assign(n, 0.0);
  rep.tau.assign(n, std::vector<double>(n, 0.0));
  rep.kappa.assign(n, 0.0);
  rep.gamma.assign(n, 0.0);
  rep.rho_rival.assign(n, 0.0);
  rep.tau_agg.assign(n, 0.0);

  Rng rng(seed);
  const bool quad = game.utility.quadratic();
  bool analytic_density = true;
  for (int i = 0; i < n; ++i)
    if (!game.density.conditional_lipschitz(i)) analytic_density = false;

  const double safety = 1.05;
  rep.source = (quad && analytic_density) ? ModuliReport::Source::Analytic
                                          : ModuliReport::Source::Sampled;
  rep.safety_factor = rep.source == ModuliReport::Source::Analytic ? 1.0 : safety;

  for (int i = 0; i < n; ++i) {
    if (quad) {
      rep.sigma[i] = game.utility.curvature(i);
      for (int j = 0; j < n; ++j) rep.tau[i][j] = game.utility.cross_modulus(i, j);
      rep.rho_rival[i] = 0.0;
    } else {
      // Sampled monotonicity and Lipschitz quotients on the raw utility gradient.
      const BoxSpace ai = game.players[i].action_space;
      const BoxSpace full_theta = game.full_type_box();
      double sigma_min = std::numeric_limits<double>::infinity();
      std::vector<double> tau_max(n, 0.0);
      double rho_max = 0.0;
      for (int t = 0; t < budget; ++t) {
        ActionProfile a(n);
        for (int j = 0; j < n; ++j) a[j] = sample_box(game.players[j].action_space, rng);
        const Vec theta = sample_box(full_theta, rng);

        ActionProfile a2 = a;
        a2[i] = sample_box(ai, rng);
        const double da = norm2_diff(a[i], a2[i]);
        if (da > 1e-10) {
          const Vec g1 = game.utility.grad(i, a, theta);
          const Vec g2 = game.utility.grad(i, a2, theta);
          double inner = 0.0;
          for (std::size_t k = 0; k < g1.size(); ++k)
            inner += (g1[k] - g2[k]) * (a[i][k] - a2[i][k]);
          sigma_min = std::min(sigma_min, -inner / (da * da));
        }
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          ActionProfile aj = a;
          aj[j] = sample_box(game.players[j].action_space, rng);
          const double dj = norm2_diff(a[j], aj[j]);
          if (dj > 1e-10)
            tau_max[j] = std::max(tau_max[j],
                                  norm2_diff(game.utility.grad(i, a, theta),
                                             game.utility.grad(i, aj, theta)) / dj);
        }
        Vec theta2 = theta;
        const Vec rmi = sample_box(game.rival_type_box(i), rng);
        {
          int mi = 0;
          for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const int o = game.density.offset(j), d = game.density.dim(j);
            for (int k = 0; k < d; ++k) theta2[o + k] = rmi[mi++];
          }
        }
        const double dmi = norm2_diff(game.density.slice_rivals(i, theta),
                                      game.density.slice_rivals(i, theta2));
        if (dmi > 1e-10)
          rho_max = std::max(rho_max, norm2_diff(game.utility.grad(i, a, theta),
                                                 game.utility.grad(i, a, theta2)) / dmi);
      }
      if (!(sigma_min > 0.0))
        throw std::runtime_error("strong-concavity violation: sampled monotonicity quotient " +
                                 std::to_string(sigma_min) + " for player " + std::to_string(i));
      rep.sigma[i] = sigma_min / safety;
      for (int j = 0; j < n; ++j) rep.tau[i][j] = (j == i) ? 0.0 : tau_max[j] * safety;
      rep.rho_rival[i] = rho_max * safety;
    }

    const auto g = game.density.conditional_lipschitz(i);
    rep.gamma[i] = g ? *g : detail::sampled_conditional_lipschitz(game, i, budget, rng) * safety;

    if (quad) {
      rep.kappa[i] = game.utility.own_type_modulus(i) +
                     rep.gamma[i] * detail::cross_weight_integral(game, i, rep.tau[i], hint);
    } else {
      // General form: integrated own-type modulus plus max-gradient times the
      // density variation over the rival box.
      const BoxSpace full_theta = game.full_type_box();
      double nu_max = 0.0, grad_max = 0.0;
      for (int t = 0; t < budget; ++t) {
        ActionProfile a(n);
        for (int j = 0; j < n; ++j) a[j] = sample_box(game.players[j].action_space, rng);
        Vec theta = sample_box(full_theta, rng);
        grad_max = std::max(grad_max, norm2(game.utility.grad(i, a, theta)));
        Vec theta2 = theta;
        const Vec own = sample_box(game.players[i].type_space, rng);
        for (int k = 0; k < game.density.dim(i); ++k)
          theta2[game.density.offset(i) + k] = own[k];
        const double di = norm2_diff(game.density.slice_own(i, theta),
                                     game.density.slice_own(i, theta2));
        if (di > 1e-10)
          nu_max = std::max(nu_max, norm2_diff(game.utility.grad(i, a, theta),
                                               game.utility.grad(i, a, theta2)) / di);
      }
      rep.kappa[i] = nu_max * safety +
                     grad_max * safety * rep.gamma[i] * game.rival_type_box(i).volume();
    }
  }

  for (int i = 0; i < n; ++i) {
    double s2 = 0.0;
    for (int j = 0; j < n; ++j) s2 += rep.tau[i][j] * rep.tau[i][j];
    rep.tau_agg[i] = std::sqrt(s2);
    rep.beta = std::max(rep.beta, rep.kappa[i] / rep.sigma[i]);
    rep.alpha = std::max(rep.alpha, rep.tau_row_sum(i) / rep.sigma[i]);
  }
  rep.contraction_ok = rep.alpha < 1.0;
  return rep;
}

struct BestResponseOptions {
  double tol = 1e-10;
  int max_iter = 20000;
  double grad_lipschitz = 0.0;  // 0 = estimate by sampling (custom utilities only)
  Vec start;                    // PGA starting point; empty = action-box midpoint
};

namespace detail {

inline double estimate_grad_lipschitz(const GameSpec& game, int i) {
  Rng rng(0x5eedULL + static_cast<unsigned long long>(i));
  double quot = 0.0;
  const BoxSpace full_theta = game.full_type_box();
  for (int t = 0; t < 256; ++t) {
    ActionProfile a(game.n());
    for (int j = 0; j < game.n(); ++j) a[j] = sample_box(game.players[j].action_space, rng);
    ActionProfile a2 = a;
    a2[i] = sample_box(game.players[i].action_space, rng);
    const Vec theta = sample_box(full_theta, rng);
    const double d = norm2_diff(a[i], a2[i]);
    if (d > 1e-10)
      quot = std::max(quot, norm2_diff(game.utility.grad(i, a, theta),
                                       game.utility.grad(i, a2, theta)) / d);
  }
  if (!(quot > 0.0)) quot = 1.0;
  return quot * 1.2;
}

}  // namespace detail

// argmax of the expected utility over the action box. Quadratic utilities are
// solved exactly from one gradient evaluation; custom ones run projected
// gradient ascent with fixed step 1/L.
inline Vec best_response_point(const GameSpec& game, int i, const StrategyProfile& f,
                               const Vec& theta_i, const TensorRule& rule,
                               const BestResponseOptions& opts = {}) {
  const BoxSpace& abox = game.players[i].action_space;
  if (game.utility.quadratic()) {
    const Vec a0 = abox.midpoint();
    const Vec g = expected_grad(game, i, a0, f, theta_i, rule);
    const double sigma = game.utility.curvature(i);
    Vec a = a0;
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += g[k] / sigma;
    return abox.clamp(a);
  }
  const double L = opts.grad_lipschitz > 0.0 ? opts.grad_lipschitz
                                             : detail::estimate_grad_lipschitz(game, i);
  Vec a = opts.start.empty() ? abox.midpoint() : abox.clamp(opts.start);
  double residual = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vec g = expected_grad(game, i, a, f, theta_i, rule);
    Vec next = a;
    for (std::size_t k = 0; k < a.size(); ++k) next[k] += g[k] / L;
    next = abox.clamp(next);
    residual = norm2_diff(next, a);
    a = std::move(next);
    if (residual <= opts.tol) return a;
  }
  std::ostringstream msg;
  msg << "best response for player " << i << " did not converge: residual " << residual
      << " after " << opts.max_iter << " iterations";
  throw SolverError(msg.str(), residual);
}

inline Vec best_response_point(const GameSpec& game, int i, const StrategyProfile& f,
                               const Vec& theta_i, const QuadratureRule& rule,
                               const BestResponseOptions& opts = {}) {
  return best_response_point(game, i, f, theta_i, rule.over(game.rival_type_box(i)), opts);
}

struct LipschitzCheckReport {
  double max_own_ratio = 0.0;    // max over trials of ||dA*|| / ((kappa/sigma) ||dtheta||)
  double max_rival_ratio = 0.0;  // same for the blockwise L^p bound
  bool pass = true;
  std::string witness;
  int trials = 0;
};

namespace detail {

inline StrategyProfile random_profile(const GameSpec& game, int nodes, Rng& rng) {
  StrategyProfile f;
  for (int j = 0; j < game.n(); ++j) {
    TensorGrid g(game.players[j].type_space,
                 std::vector<int>(game.players[j].type_space.dim(), nodes));
    std::vector<Vec> vals(g.node_count());
    for (auto& v : vals) v = sample_box(game.players[j].action_space, rng);
    f.grids.push_back(StrategyGrid(g, game.players[j].action_space, vals));
  }
  return f;
}

}  // namespace detail

// Property check of the response-function Lipschitz bounds: own-type modulus
// kappa_i/sigma_i and blockwise rival moduli tau_ij/sigma_i in L^p.
inline LipschitzCheckReport lipschitz_response_check(const GameSpec& game,
                                                     const ModuliReport& moduli, int trials,
                                                     unsigned seed = 0,
                                                     const QuadratureRule& rule = {},
                                                     double tol = 1e-6) {
  Rng rng(seed);
  LipschitzCheckReport rep;
  rep.trials = trials;
  std::vector<TensorRule> rival_rules;
  for (int i = 0; i < game.n(); ++i)
    rival_rules.push_back(rule.over(game.rival_type_box(i)));

  for (int t = 0; t < trials; ++t) {
    const int i = static_cast<int>(rng() % static_cast<unsigned long long>(game.n()));
    const StrategyProfile f = detail::random_profile(game, 4, rng);

    // Own-type bound.
    const Vec t1 = sample_box(game.players[i].type_space, rng);
    const Vec t2 = sample_box(game.players[i].type_space, rng);
    const double dth = norm2_diff(t1, t2);
    if (dth > 1e-9) {
      const Vec b1 = best_response_point(game, i, f, t1, rival_rules[i]);
      const Vec b2 = best_response_point(game, i, f, t2, rival_rules[i]);
      const double lhs = norm2_diff(b1, b2);
      const double rhs = (moduli.kappa[i] / moduli.sigma[i]) * dth;
      if (rhs > 0.0) rep.max_own_ratio = std::max(rep.max_own_ratio, lhs / rhs);
      if (lhs > rhs + tol) {
        rep.pass = false;
        if (rep.witness.empty())
          rep.witness = "own-type bound violated for player " + std::to_string(i) + ": " +
                        std::to_string(lhs) + " > " + std::to_string(rhs);
      }
    }

    // Blockwise rival bound in L^1, L^2, L^inf.
    const StrategyProfile g = detail::random_profile(game, 4, rng);
    const TensorRule own_rule = rule.over(game.players[i].type_space);
    const NormReport d1 = lp_norm_diff(f, g, PNorm::One, game, rule);
    const NormReport d2 = lp_norm_diff(f, g, PNorm::Two, game, rule);
    const NormReport dinf = lp_norm_diff(f, g, PNorm::Inf, game, rule);
    std::vector<double> lhs_acc{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < own_rule.nodes.size(); ++k) {
      const Vec bf = best_response_point(game, i, f, own_rule.nodes[k], rival_rules[i]);
      const Vec bg = best_response_point(game, i, g, own_rule.nodes[k], rival_rules[i]);
      const double d = norm2_diff(bf, bg);
      const double w = own_rule.weights[k] * game.density.marginal(i, own_rule.nodes[k]);
      lhs_acc[0] += w * d;
      lhs_acc[1] += w * d * d;
      lhs_acc[2] = std::max(lhs_acc[2], d);
    }
    lhs_acc[1] = std::sqrt(std::max(0.0, lhs_acc[1]));
    const NormReport* rhs_norms[3] = {&d1, &d2, &dinf};
    for (int p = 0; p < 3; ++p) {
      double rhs = 0.0;
      for (int j = 0; j < game.n(); ++j)
        if (j != i) rhs += (moduli.tau[i][j] / moduli.sigma[i]) * rhs_norms[p]->per_player[j];
      if (rhs > 0.0) rep.max_rival_ratio = std::max(rep.max_rival_ratio, lhs_acc[p] / rhs);
      if (lhs_acc[p] > rhs + tol) {
        rep.pass = false;
        if (rep.witness.empty())
          rep.witness = "blockwise bound violated for player " + std::to_string(i) +
                        " at p index " + std::to_string(p) + ": " + std::to_string(lhs_acc[p]) +
                        " > " + std::to_string(rhs);
      }
    }
  }
  return rep;
}

}  // namespace bne
