#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bne/divergences.hpp"
#include "bne/equilibrium.hpp"

namespace bne {

struct AdmissibilityReport {
  std::vector<double> C;      // second-moment likelihood-ratio bounds per player
  bool admissible = true;     // equivalence on the grid and finite C
  std::string witness;        // first offending cell, when not admissible
};

// The admissible-class constants: C_i = max over own cells of the conditional
// second moment of lambda(theta) / lambda_i(theta_i), with lambda the cellwise
// likelihood ratio of the perturbation against the base.
inline AdmissibilityReport check_admissibility(const GameSpec& game, const PerturbationSpec& spec,
                                               int cells_per_axis = 32) {
  const DensityModel mu = spec.perturbed();
  const std::vector<int> cells(game.density.total_dim(), cells_per_axis);
  const GriddedMeasure ja = GriddedMeasure::from_density(spec.base, cells);
  const GriddedMeasure jb = GriddedMeasure::from_density(mu, cells);

  AdmissibilityReport rep;
  for (std::size_t k = 0; k < ja.mass.size(); ++k) {
    if (ja.mass[k] > 0.0 && jb.mass[k] > 0.0) continue;
    rep.admissible = false;
    if (rep.witness.empty()) {
      std::ostringstream w;
      w << "cell " << k << " has zero mass under the "
        << (ja.mass[k] > 0.0 ? "perturbation" : "base") << " density";
      rep.witness = w.str();
    }
  }
  for (int i = 0; i < game.n(); ++i) {
    const ConditionalSlices sa = conditional_slices(ja, spec.base, i);
    const ConditionalSlices sb = conditional_slices(jb, mu, i);
    double ci = 0.0;
    for (std::size_t o = 0; o < sa.conditionals.size(); ++o) {
      if (!(sa.own_marginal[o] > 0.0) || !(sb.own_marginal[o] > 0.0)) continue;
      const double lam_i = sb.own_marginal[o] / sa.own_marginal[o];
      double s = 0.0;
      const auto& ma = sa.conditionals[o].mass;
      const auto& mb = sb.conditionals[o].mass;
      for (std::size_t r = 0; r < ma.size(); ++r) {
        if (!(ma[r] > 0.0)) continue;
        const double lam = (mb[r] * lam_i) / ma[r];  // joint ratio at the cell
        s += ma[r] * (lam / lam_i) * (lam / lam_i);
      }
      ci = std::max(ci, s);
    }
    rep.C.push_back(ci);
  }
  return rep;
}

struct StabilitySettings {
  int grid_nodes = 101;
  QuadratureRule rule;
  double eps_target = 1e-8;
  int max_iter = 200;
  int divergence_cells = 32;
};

struct SweepRow {
  double eps = 0.0;
  double drift_inf = 0.0;
  double drift_l2 = 0.0;
  double ratio = 0.0;                 // drift_l2 / eps
  double cond_w1_linearity_err = 0.0; // max |w1(eps) - eps * w1(1)| over nodes
};

struct StabilityReport {
  ModuliReport moduli;                // under the base density
  AdmissibilityReport admissibility;
  double drift_inf = 0.0;             // ||f*_base - f*_pert||_{inf, L^inf}
  double drift_l2 = 0.0;              // ||f*_base - f*_pert||_{inf, L^2}
  double bound_42 = 0.0;              // conditional-W1 node bound on drift_inf
  double bound_44 = 0.0;              // KL bound on drift_l2
  double bound_45 = 0.0;              // sensitivity limit bound for mixtures
  double slack_42 = 0.0;              // bound_42 / drift_inf
  double slack_44 = 0.0;
  bool bounds_guaranteed = false;     // both contractions certified, admissible
  std::vector<SweepRow> sweep;
};

namespace detail {

inline GameSpec with_density(const GameSpec& game, DensityModel density) {
  return GameSpec(game.players, game.utility, std::move(density));
}

// Max slope of a gridded profile along the cell axes, for the continuous-max
// gap correction on node-sampled bounds.
inline double profile_lipschitz(const ConditionalDistanceProfile& prof) {
  if (prof.shape.empty() || prof.values.size() < 2) return 0.0;
  const int d = static_cast<int>(prof.shape.size());
  std::vector<std::size_t> strides(d);
  std::size_t s = 1;
  for (int ax = d - 1; ax >= 0; --ax) {
    strides[ax] = s;
    s *= static_cast<std::size_t>(prof.shape[ax]);
  }
  double lip = 0.0;
  for (std::size_t flat = 0; flat < prof.values.size(); ++flat) {
    std::size_t rem = flat;
    for (int ax = d - 1; ax >= 0; --ax) {
      const std::size_t idx = rem % prof.shape[ax];
      rem /= prof.shape[ax];
      if (idx + 1 == static_cast<std::size_t>(prof.shape[ax])) continue;
      const std::size_t next = flat + strides[ax];
      const double dist = norm2_diff(prof.nodes[next], prof.nodes[flat]);
      if (dist > 0.0)
        lip = std::max(lip, std::abs(prof.values[next] - prof.values[flat]) / dist);
    }
  }
  return lip;
}

inline double max_cell_width(const ConditionalDistanceProfile& prof) {
  if (prof.nodes.size() < 2) return 0.0;
  // Cell centers are uniformly spaced; adjacent centers along the last axis
  // differ by one cell width.
  return norm2_diff(prof.nodes[1], prof.nodes[0]);
}

}  // namespace detail

// Solves the game under the base density and under the perturbation, measures
// the equilibrium drift, and evaluates the theoretical bounds it must obey.
inline StabilityReport run_stability(const GameSpec& game, const PerturbationSpec& spec,
                                     const StabilitySettings& s = {}) {
  const GameSpec base_game = detail::with_density(game, spec.base);
  const GameSpec pert_game = detail::with_density(game, spec.perturbed());

  StabilityReport rep;
  rep.moduli = estimate_moduli(base_game);
  const ModuliReport pert_moduli = estimate_moduli(pert_game);
  rep.admissibility = check_admissibility(game, spec, s.divergence_cells);
  rep.bounds_guaranteed =
      rep.moduli.contraction_ok && pert_moduli.contraction_ok && rep.admissibility.admissible;

  ContractionSettings cs;
  cs.grid_nodes = s.grid_nodes;
  cs.rule = s.rule;
  cs.p = PNorm::Inf;
  cs.eps_target = s.eps_target;
  cs.max_iter = s.max_iter;
  const EquilibriumResult base_eq = solve_contraction(base_game, cs, &rep.moduli);
  const EquilibriumResult pert_eq = solve_contraction(pert_game, cs, &pert_moduli);

  rep.drift_inf = lp_norm_diff(base_eq.profile, pert_eq.profile, PNorm::Inf, base_game, s.rule).max;
  rep.drift_l2 = lp_norm_diff(base_eq.profile, pert_eq.profile, PNorm::Two, base_game, s.rule).max;

  const double one_minus_alpha = std::max(1e-12, 1.0 - rep.moduli.alpha);
  for (int i = 0; i < game.n(); ++i) {
    const double coeff =
        (rep.moduli.beta * rep.moduli.tau_agg[i] + rep.moduli.rho_rival[i]) /
        (rep.moduli.sigma[i] * one_minus_alpha);
    const ConditionalDistanceProfile prof = conditional_distance_profile(
        game, spec, i, Metric::W1, PNorm::Inf, s.divergence_cells);
    // Node max plus the continuous-max gap: profile slope times half a cell.
    const double gap = detail::profile_lipschitz(prof) * 0.5 * detail::max_cell_width(prof);
    rep.bound_42 = std::max(rep.bound_42, coeff * (prof.max + gap));
  }

  const std::vector<int> cells(game.density.total_dim(), s.divergence_cells);
  const GriddedMeasure ja = GriddedMeasure::from_density(spec.base, cells);
  const GriddedMeasure jb = GriddedMeasure::from_density(spec.perturbed(), cells);
  const double kl_sym = std::min(kl(ja, jb).value, kl(jb, ja).value);
  for (int i = 0; i < game.n(); ++i) {
    const double coeff =
        (rep.moduli.beta * rep.moduli.tau_agg[i] + rep.moduli.rho_rival[i]) /
        (rep.moduli.sigma[i] * one_minus_alpha);
    rep.bound_44 =
        std::max(rep.bound_44, coeff * game.rival_type_box(i).diameter() * std::sqrt(kl_sym / 2.0));
  }

  rep.slack_42 = rep.drift_inf > 0.0 ? rep.bound_42 / rep.drift_inf : 0.0;
  rep.slack_44 = rep.drift_l2 > 0.0 ? rep.bound_44 / rep.drift_l2 : 0.0;
  return rep;
}

// Own-type marginal equality of two densities on a node grid, to tol.
inline void require_equal_marginals(const GameSpec& game, const DensityModel& a,
                                    const DensityModel& b, double tol = 1e-9,
                                    int nodes_per_axis = 33) {
  for (int i = 0; i < game.n(); ++i) {
    TensorGrid g(game.players[i].type_space,
                 std::vector<int>(game.players[i].type_space.dim(), nodes_per_axis));
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      const Vec t = g.node_coord(k);
      const double d = std::abs(a.marginal(i, t) - b.marginal(i, t));
      if (d > tol)
        throw std::invalid_argument(
            "own-type marginals of the two densities differ by " + std::to_string(d) +
            " at player " + std::to_string(i) + "; the sensitivity limit needs equal marginals");
    }
  }
}

// Sensitivity sweep along the mixture path (1 - eps) base + eps alternative.
// eps_list must be positive and decreasing.
inline StabilityReport run_sensitivity_sweep(const GameSpec& game, const DensityModel& base,
                                             const DensityModel& alternative,
                                             const std::vector<double>& eps_list,
                                             const StabilitySettings& s = {}) {
  if (eps_list.empty()) throw std::invalid_argument("sensitivity sweep: empty eps list");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0 && eps_list[k] <= 0.5))
      throw std::invalid_argument("sensitivity sweep: eps values must lie in (0, 0.5]");
    if (k > 0 && eps_list[k] >= eps_list[k - 1])
      throw std::invalid_argument("sensitivity sweep: eps list must be decreasing");
  }
  require_equal_marginals(game, base, alternative);

  const GameSpec base_game = detail::with_density(game, base);
  StabilityReport rep;
  rep.moduli = estimate_moduli(base_game);

  ContractionSettings cs;
  cs.grid_nodes = s.grid_nodes;
  cs.rule = s.rule;
  cs.p = PNorm::Inf;
  cs.eps_target = s.eps_target;
  cs.max_iter = s.max_iter;
  const EquilibriumResult base_eq = solve_contraction(base_game, cs, &rep.moduli);

  // Reference conditional-W1 profiles against the pure alternative, per player.
  const PerturbationSpec direct{base, alternative, PerturbKind::Direct, 0.0};
  std::vector<ConditionalDistanceProfile> ref;
  for (int i = 0; i < game.n(); ++i)
    ref.push_back(conditional_distance_profile(game, direct, i, Metric::W1, PNorm::Inf,
                                               s.divergence_cells));

  const double one_minus_alpha = std::max(1e-12, 1.0 - rep.moduli.alpha);
  const std::vector<int> cells(game.density.total_dim(), s.divergence_cells);
  const GriddedMeasure ja = GriddedMeasure::from_density(base, cells);
  const GriddedMeasure jh = GriddedMeasure::from_density(alternative, cells);
  const double kl_sym = std::min(kl(ja, jh).value, kl(jh, ja).value);
  for (int i = 0; i < game.n(); ++i) {
    const double coeff =
        (rep.moduli.beta * rep.moduli.tau_agg[i] + rep.moduli.rho_rival[i]) /
        (rep.moduli.sigma[i] * one_minus_alpha);
    rep.bound_45 =
        std::max(rep.bound_45, coeff * game.rival_type_box(i).diameter() * std::sqrt(kl_sym / 2.0));
  }
  rep.admissibility = check_admissibility(game, direct, s.divergence_cells);
  rep.bounds_guaranteed = rep.moduli.contraction_ok && rep.admissibility.admissible;

  for (double eps : eps_list) {
    const PerturbationSpec mix{base, alternative, PerturbKind::Mixture, eps};
    const GameSpec mix_game = detail::with_density(game, mix.perturbed());
    const ModuliReport mix_moduli = estimate_moduli(mix_game);
    const EquilibriumResult mix_eq = solve_contraction(mix_game, cs, &mix_moduli);

    SweepRow row;
    row.eps = eps;
    row.drift_inf =
        lp_norm_diff(base_eq.profile, mix_eq.profile, PNorm::Inf, base_game, s.rule).max;
    row.drift_l2 =
        lp_norm_diff(base_eq.profile, mix_eq.profile, PNorm::Two, base_game, s.rule).max;
    row.ratio = row.drift_l2 / eps;
    for (int i = 0; i < game.n(); ++i) {
      const ConditionalDistanceProfile prof = conditional_distance_profile(
          game, mix, i, Metric::W1, PNorm::Inf, s.divergence_cells);
      for (std::size_t k = 0; k < prof.values.size(); ++k)
        row.cond_w1_linearity_err = std::max(
            row.cond_w1_linearity_err, std::abs(prof.values[k] - eps * ref[i].values[k]));
    }
    rep.sweep.push_back(row);
    rep.drift_inf = row.drift_inf;
    rep.drift_l2 = row.drift_l2;
  }
  return rep;
}

}  // namespace bne
