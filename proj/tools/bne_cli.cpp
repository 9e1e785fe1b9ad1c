#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bne/config.hpp"
#include "bne/divergences.hpp"
#include "bne/equilibrium.hpp"
#include "bne/games.hpp"
#include "bne/stability.hpp"

namespace {

struct CommonOptions {
  std::string game_file;
  int grid = 101;
  int quad = 32;
  std::string p = "inf";
  double tol = 1e-8;
  int max_iter = 200;
  unsigned seed = 0;
  std::string out_dir = ".";
  int cells = 32;
};

void add_common(CLI::App* sub, CommonOptions& o, bool needs_game = true) {
  auto* g = sub->add_option("--game", o.game_file, "game configuration JSON file");
  if (needs_game) g->required();
  sub->add_option("--grid", o.grid, "strategy grid nodes per type axis");
  sub->add_option("--quad", o.quad, "quadrature points per rival-type axis");
  sub->add_option("--p", o.p, "norm for residuals: 1, 2 or inf");
  sub->add_option("--tol", o.tol, "target tolerance");
  sub->add_option("--max-iter", o.max_iter, "iteration cap");
  sub->add_option("--seed", o.seed, "seed for sampled moduli");
  sub->add_option("--out", o.out_dir, "output directory (BNE_OUTPUT_DIR overrides)");
  sub->add_option("--cells", o.cells, "divergence grid cells per axis");
}

std::string output_dir(const CommonOptions& o) {
  if (const char* env = std::getenv("BNE_OUTPUT_DIR")) return env;
  return o.out_dir;
}

std::string hex_hash(const std::string& s) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(s);
  return out.str();
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
  return buf;
}

// Reports are append-only: subcommand + timestamp + config hash in the name,
// deterministic bytes inside.
std::string write_report(const CommonOptions& o, const std::string& subcommand,
                         const std::string& config_key, const std::string& ext,
                         const std::string& content) {
  const std::filesystem::path dir = output_dir(o);
  std::filesystem::create_directories(dir);
  const std::filesystem::path file =
      dir / (subcommand + "-" + timestamp() + "-" + hex_hash(config_key) + ext);
  std::ofstream out(file);
  out << content;
  std::cout << "wrote " << file.string() << "\n";
  return file.string();
}

bne::GameSpec load(const CommonOptions& o) { return bne::load_game(o.game_file); }

bne::QuadratureRule quad_rule(const CommonOptions& o) {
  bne::QuadratureRule r;
  r.points_per_axis = o.quad;
  return r;
}

std::string config_key(const CommonOptions& o, const std::string& extra = "") {
  std::ostringstream key;
  key << o.game_file << "|" << o.grid << "|" << o.quad << "|" << o.p << "|" << o.tol << "|"
      << o.max_iter << "|" << o.seed << "|" << o.cells << "|" << extra;
  return key.str();
}

void dump_strategies(const CommonOptions& o, const std::string& subcommand,
                     const std::string& key, const bne::StrategyProfile& profile) {
  for (int i = 0; i < profile.n(); ++i) {
    const std::string tag = subcommand + "-player" + std::to_string(i);
    write_report(o, tag, key, ".csv", bne::strategy_csv(profile.grids[i]));
    write_report(o, tag, key, ".json", bne::strategy_sidecar(profile.grids[i], i).dump(2) + "\n");
  }
}

int cmd_solve(const CommonOptions& o) {
  const bne::GameSpec game = load(o);
  const bne::ModuliReport moduli = bne::estimate_moduli(game, nullptr, 1000, o.seed);
  bne::ContractionSettings s;
  s.grid_nodes = o.grid;
  s.rule = quad_rule(o);
  s.p = bne::pnorm_from_string(o.p);
  s.eps_target = o.tol;
  s.max_iter = o.max_iter;
  const bne::EquilibriumResult res = bne::solve_contraction(game, s, &moduli);
  bne::Json j = bne::to_json(res);
  j["moduli"] = bne::to_json(moduli);
  const std::string key = config_key(o);
  write_report(o, "solve", key, ".json", j.dump(2) + "\n");
  dump_strategies(o, "solve", key, res.profile);
  std::cout << "solve: " << res.iterations << " iterations, residual " << res.residual
            << (res.certificate ? ", certified error " + std::to_string(*res.certificate) : "")
            << "\n";
  return 0;
}

int cmd_monotone(const CommonOptions& o, const std::string& direction, bool override_order) {
  const bne::GameSpec game = load(o);
  bne::MonotoneSettings s;
  s.grid_nodes = o.grid;
  s.rule = quad_rule(o);
  s.tol = o.tol;
  s.max_iter = o.max_iter;
  s.override_order_check = override_order;
  const auto dir = direction == "bottom" ? bne::MonotoneDirection::FromBottom
                                         : bne::MonotoneDirection::FromTop;
  const bne::OrderConditionCheck order = bne::check_order_conditions(game, 128, o.seed, s.rule);
  const bne::EquilibriumResult res = bne::solve_monotone(game, dir, s);
  bne::Json j = bne::to_json(res);
  j["order_conditions"] = bne::to_json(order);
  const std::string key = config_key(o, direction);
  write_report(o, "monotone", key, ".json", j.dump(2) + "\n");
  dump_strategies(o, "monotone", key, res.profile);
  std::cout << "monotone from " << direction << ": " << res.iterations
            << " iterations, node-wise change " << res.residual << "\n";
  return 0;
}

int cmd_moduli(const CommonOptions& o) {
  const bne::GameSpec game = load(o);
  const bne::ModuliReport moduli = bne::estimate_moduli(game, nullptr, 1000, o.seed);
  write_report(o, "moduli", config_key(o), ".json", bne::to_json(moduli).dump(2) + "\n");
  std::cout << "alpha = " << moduli.alpha << ", contraction "
            << (moduli.contraction_ok ? "certified" : "not certified") << "\n";
  return moduli.contraction_ok ? 0 : 1;
}

bne::PerturbationSpec make_spec(const bne::GameSpec& game, const std::string& alt_file,
                                double rho2, double eps) {
  bne::DensityModel alt = game.density;
  if (!alt_file.empty()) {
    std::ifstream in(alt_file);
    if (!in) throw bne::ConfigError("cannot open density file '" + alt_file + "'");
    bne::Json j;
    in >> j;
    std::vector<bne::BoxSpace> boxes;
    for (const auto& p : game.players) boxes.push_back(p.type_space);
    alt = bne::parse_density(j, "", boxes);
  } else {
    alt = bne::DensityModel::fgm(rho2);
  }
  bne::PerturbationSpec spec{game.density, std::move(alt),
                             eps > 0.0 ? bne::PerturbKind::Mixture : bne::PerturbKind::Direct,
                             eps};
  return spec;
}

int cmd_distance(const CommonOptions& o, const std::string& alt_file, double rho2, double eps) {
  const bne::GameSpec game = load(o);
  const bne::PerturbationSpec spec = make_spec(game, alt_file, rho2, eps);
  const std::vector<int> cells(game.density.total_dim(), o.cells);
  const bne::GriddedMeasure a = bne::GriddedMeasure::from_density(spec.base, cells);
  const bne::GriddedMeasure b = bne::GriddedMeasure::from_density(spec.perturbed(), cells);

  bne::Json j;
  j["tv"] = bne::tv(a, b);
  const bne::KlReport kab = bne::kl(a, b), kba = bne::kl(b, a);
  j["kl_base_alt"] = kab.value;
  j["kl_alt_base"] = kba.value;
  j["kl_reliable"] = kab.reliable && kba.reliable;
  if (game.density.total_dim() <= 2 && o.cells <= 64) j["w1"] = bne::w1(a, b);
  const bne::AdmissibilityReport adm = bne::check_admissibility(game, spec, o.cells);
  j["admissibility"] = bne::to_json(adm);
  for (int i = 0; i < game.n(); ++i) {
    const auto prof = bne::conditional_distance_profile(game, spec, i, bne::Metric::W1,
                                                        bne::pnorm_from_string(o.p), o.cells);
    bne::Json pj;
    pj["values"] = prof.values;
    pj["aggregate"] = prof.aggregate;
    pj["max"] = prof.max;
    j["conditional_w1"]["player" + std::to_string(i)] = pj;
  }
  write_report(o, "distance", config_key(o, alt_file + std::to_string(rho2)), ".json",
               j.dump(2) + "\n");
  std::cout << "tv = " << j["tv"] << ", kl = " << kab.value << "\n";
  return 0;
}

int cmd_stability(const CommonOptions& o, const std::string& alt_file, double rho2, double eps) {
  const bne::GameSpec game = load(o);
  const bne::PerturbationSpec spec = make_spec(game, alt_file, rho2, eps);
  bne::StabilitySettings s;
  s.grid_nodes = o.grid;
  s.rule = quad_rule(o);
  s.eps_target = std::min(o.tol, 1e-8);
  s.max_iter = o.max_iter;
  s.divergence_cells = o.cells;
  const bne::StabilityReport rep = bne::run_stability(game, spec, s);
  write_report(o, "stability", config_key(o, alt_file + std::to_string(rho2)), ".json",
               bne::to_json(rep).dump(2) + "\n");
  std::cout << "drift_inf = " << rep.drift_inf << " vs bound " << rep.bound_42
            << "; drift_l2 = " << rep.drift_l2 << " vs bound " << rep.bound_44 << "\n";
  if (!rep.bounds_guaranteed) {
    std::cout << "bounds not guaranteed (hypotheses not certified)\n";
    return 0;
  }
  const bool ok = rep.drift_inf <= rep.bound_42 * (1.0 + 1e-3) &&
                  rep.drift_l2 <= rep.bound_44 * (1.0 + 1e-3);
  if (!ok) std::cout << "FAIL: measured drift exceeds a certified bound\n";
  return ok ? 0 : 1;
}

int cmd_sweep(const CommonOptions& o, const std::string& alt_file, double rho2,
              std::vector<double> eps_list) {
  const bne::GameSpec game = load(o);
  const bne::PerturbationSpec spec = make_spec(game, alt_file, rho2, 0.0);
  if (eps_list.empty()) eps_list = {0.4, 0.2, 0.1, 0.05};
  bne::StabilitySettings s;
  s.grid_nodes = o.grid;
  s.rule = quad_rule(o);
  s.eps_target = std::min(o.tol, 1e-8);
  s.max_iter = o.max_iter;
  s.divergence_cells = o.cells;
  const bne::StabilityReport rep =
      bne::run_sensitivity_sweep(game, spec.base, spec.alternative, eps_list, s);
  const std::string key = config_key(o, alt_file + std::to_string(rho2));
  write_report(o, "sweep", key, ".json", bne::to_json(rep).dump(2) + "\n");
  write_report(o, "sweep", key, ".csv", bne::sweep_csv(rep));
  for (const auto& row : rep.sweep)
    std::cout << "eps " << row.eps << ": drift_l2/eps = " << row.ratio << "\n";
  std::cout << "sensitivity limit bound = " << rep.bound_45 << "\n";
  const auto& last = rep.sweep.back();
  return last.ratio <= rep.bound_45 * (1.0 + 1e-3) ? 0 : 1;
}

int cmd_verify_example(const CommonOptions& o, const std::string& name, double rho, double alpha,
                       double beta, double c) {
  int failures = 0;
  auto check = [&](const std::string& what, bool ok, double value) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << what << " (" << value << ")\n";
    if (!ok) ++failures;
  };
  if (name == "cournot2") {
    const bne::GameSpec game = bne::cournot2(rho, alpha, beta, c);
    const bne::ModuliReport moduli = bne::estimate_moduli(game);
    check("sigma = 2 beta + c", std::abs(moduli.sigma[0] - (2 * beta + c)) < 1e-12,
          moduli.sigma[0]);
    check("contraction certified", moduli.contraction_ok, moduli.alpha);
    bne::ContractionSettings s;
    s.grid_nodes = o.grid;
    s.rule = quad_rule(o);
    s.eps_target = 1e-6;
    s.max_iter = o.max_iter;
    const bne::EquilibriumResult res = bne::solve_contraction(game, s, &moduli);
    double max_err = 0.0;
    for (int i = 0; i < game.n(); ++i)
      for (std::size_t k = 0; k < res.profile.grids[i].node_count(); ++k) {
        const double t = res.profile.grids[i].grid.node_coord(k)[0];
        max_err = std::max(max_err,
                           std::abs(res.profile.grids[i].values[k][0] -
                                    bne::cournot2_equilibrium(alpha, beta, c, rho, t)));
      }
    check("analytic strategy recovered at all nodes (<= 1e-3)", max_err <= 1e-3, max_err);
  } else if (name == "cournot3") {
    const bne::GameSpec game = bne::cournot3(alpha, beta, c);
    const bne::ModuliReport moduli = bne::estimate_moduli(game);
    check("sigma = 2 beta + c", std::abs(moduli.sigma[0] - (2 * beta + c)) < 1e-12,
          moduli.sigma[0]);
    check("tau = beta", std::abs(moduli.tau[0][1] - beta) < 1e-12, moduli.tau[0][1]);
    check("alpha = 2 beta / sigma",
          std::abs(moduli.alpha - 2 * beta / (2 * beta + c)) < 1e-12, moduli.alpha);
    check("contraction certified", moduli.contraction_ok, moduli.alpha);
    bne::ContractionSettings s;
    s.grid_nodes = std::min(o.grid, 41);
    s.rule = quad_rule(o);
    s.eps_target = 1e-6;
    s.max_iter = o.max_iter;
    const bne::EquilibriumResult res = bne::solve_contraction(game, s, &moduli);
    const bne::StrategyProfile next = bne::apply_psi(game, res.profile, s.rule);
    const double fp = bne::profile_max_node_diff(next, res.profile);
    check("fixed-point residual (<= 2e-6)", fp <= 2e-6, fp);
  } else {
    std::cerr << "unknown example '" << name << "'\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous Bayesian Nash equilibrium solver and verification lab"};
  app.require_subcommand(1);

  CommonOptions o;
  std::string alt_file, direction = "top", example = "cournot2";
  double rho2 = 0.31, eps = 0.0, ex_rho = 0.3, ex_alpha = 10.0, ex_beta = 1.0, ex_c = 1.0;
  std::vector<double> eps_list;
  bool override_order = false;

  auto* solve = app.add_subcommand("solve", "contraction iteration to the equilibrium");
  add_common(solve, o);

  auto* monotone = app.add_subcommand("monotone", "monotone lattice iteration");
  add_common(monotone, o);
  monotone->add_option("--from", direction, "start from 'top' or 'bottom'");
  monotone->add_flag("--override-order-check", override_order,
                     "iterate even when the sampled order conditions fail");

  auto* moduli = app.add_subcommand("moduli", "estimate contraction moduli");
  add_common(moduli, o);

  auto* distance = app.add_subcommand("distance", "distribution distances and admissibility");
  add_common(distance, o);
  distance->add_option("--alt", alt_file, "alternative density JSON file");
  distance->add_option("--rho2", rho2, "alternative FGM correlation (shortcut)");
  distance->add_option("--eps", eps, "mixture weight (0 = direct perturbation)");

  auto* stability = app.add_subcommand("stability", "equilibrium drift vs theoretical bounds");
  add_common(stability, o);
  stability->add_option("--alt", alt_file, "alternative density JSON file");
  stability->add_option("--rho2", rho2, "alternative FGM correlation (shortcut)");
  stability->add_option("--eps", eps, "mixture weight (0 = direct perturbation)");

  auto* sweep = app.add_subcommand("sweep", "sensitivity sweep along a mixture path");
  add_common(sweep, o);
  sweep->add_option("--alt", alt_file, "alternative density JSON file");
  sweep->add_option("--rho2", rho2, "alternative FGM correlation (shortcut)");
  sweep->add_option("--eps-list", eps_list, "decreasing mixture weights");

  auto* verify = app.add_subcommand("verify-example", "solve a named game and check its report");
  add_common(verify, o, false);
  verify->add_option("--name", example, "cournot2 or cournot3");
  verify->add_option("--rho", ex_rho, "FGM correlation (cournot2)");
  verify->add_option("--alpha", ex_alpha, "demand intercept");
  verify->add_option("--beta", ex_beta, "demand slope");
  verify->add_option("--c", ex_c, "quadratic cost coefficient");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(o);
    if (*monotone) return cmd_monotone(o, direction, override_order);
    if (*moduli) return cmd_moduli(o);
    if (*distance) return cmd_distance(o, alt_file, rho2, eps);
    if (*stability) return cmd_stability(o, alt_file, rho2, eps);
    if (*sweep) return cmd_sweep(o, alt_file, rho2, eps_list);
    if (*verify) return cmd_verify_example(o, example, ex_rho, ex_alpha, ex_beta, ex_c);
  } catch (const bne::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
