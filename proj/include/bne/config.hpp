#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bne/best_response.hpp"
#include "bne/equilibrium.hpp"
#include "bne/game.hpp"
#include "bne/games.hpp"
#include "bne/stability.hpp"
#include "bne/strategy.hpp"

namespace bne {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const Json& member(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object())
    throw ConfigError("expected an object at '" + (path.empty() ? "<root>" : path) + "'");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing key '" + join_path(path, key) + "'");
  return *it;
}

inline double number(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = member(j, key, path);
  if (!v.is_number())
    throw ConfigError("key '" + join_path(path, key) + "' must be a number");
  return v.get<double>();
}

inline double number_or(const Json& j, const std::string& key, double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ConfigError("key '" + key + "' must be a number");
  return it->get<double>();
}

inline std::string text(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = member(j, key, path);
  if (!v.is_string())
    throw ConfigError("key '" + join_path(path, key) + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<double> number_list(const Json& j, const std::string& key,
                                       const std::string& path) {
  const Json& v = member(j, key, path);
  if (!v.is_array())
    throw ConfigError("key '" + join_path(path, key) + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError("key '" + join_path(path, key) + "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::vector<int> int_list(const Json& j, const std::string& key, const std::string& path) {
  std::vector<int> out;
  for (double v : number_list(j, key, path)) out.push_back(static_cast<int>(v));
  return out;
}

inline BoxSpace parse_box(const Json& j, const std::string& path) {
  try {
    return BoxSpace(number_list(j, "lower", path), number_list(j, "upper", path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid box at '" + path + "': " + e.what());
  }
}

}  // namespace detail

inline DensityModel parse_density(const Json& j, const std::string& path,
                                  const std::vector<BoxSpace>& type_boxes) {
  const std::string kind = detail::text(j, "kind", path);
  try {
    if (kind == "product_uniform") return DensityModel::product_uniform(type_boxes);
    if (kind == "fgm") return DensityModel::fgm(detail::number(j, "rho", path));
    if (kind == "grid_tabulated")
      return DensityModel::grid_tabulated(type_boxes, detail::int_list(j, "shape", path),
                                          detail::number_list(j, "values", path));
    if (kind == "mixture") {
      DensityModel base =
          parse_density(detail::member(j, "base", path), detail::join_path(path, "base"),
                        type_boxes);
      DensityModel alt = parse_density(detail::member(j, "alternative", path),
                                       detail::join_path(path, "alternative"), type_boxes);
      return DensityModel::mixture(std::move(base), std::move(alt),
                                   detail::number(j, "eps", path));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid density at '" + path + "': " + e.what());
  }
  throw ConfigError("unknown density kind '" + kind + "' at '" +
                    detail::join_path(path, "kind") + "'");
}

inline UtilityModel parse_utility(const Json& j, const std::string& path, int n) {
  const std::string kind = detail::text(j, "kind", path);
  try {
    if (kind == "cournot") {
      std::vector<double> c = detail::number_list(j, "c", path);
      if (static_cast<int>(c.size()) != n)
        throw ConfigError("key '" + detail::join_path(path, "c") + "' must list " +
                          std::to_string(n) + " cost coefficients");
      return UtilityModel::cournot(detail::number(j, "alpha", path),
                                   detail::number(j, "beta", path), std::move(c));
    }
    if (kind == "general_quadratic") {
      const Json& wj = detail::member(j, "w", path);
      if (!wj.is_array() || static_cast<int>(wj.size()) != n)
        throw ConfigError("key '" + detail::join_path(path, "w") + "' must be an " +
                          std::to_string(n) + "-row matrix");
      std::vector<std::vector<double>> w;
      for (const auto& row : wj) {
        std::vector<double> r;
        for (const auto& e : row) r.push_back(e.get<double>());
        w.push_back(std::move(r));
      }
      return UtilityModel::general_quadratic(detail::number_list(j, "b", path),
                                             detail::number_list(j, "m", path),
                                             detail::number_list(j, "s", path), std::move(w));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid utility at '" + path + "': " + e.what());
  }
  throw ConfigError("unknown utility kind '" + kind + "' at '" +
                    detail::join_path(path, "kind") + "'");
}

// Game configuration: either {"name": "cournot2"|"cournot3", ...overrides} or
// a full {"players": [...], "utility": {...}, "density": {...}} object.
inline GameSpec parse_game(const Json& j) {
  if (j.contains("name")) {
    const std::string name = detail::text(j, "name", "");
    try {
      if (name == "cournot2")
        return cournot2(detail::number_or(j, "rho", 0.3), detail::number_or(j, "alpha", 10.0),
                        detail::number_or(j, "beta", 1.0), detail::number_or(j, "c", 1.0));
      if (name == "cournot3")
        return cournot3(detail::number_or(j, "alpha", 10.0), detail::number_or(j, "beta", 1.0),
                        detail::number_or(j, "c", 1.0));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("invalid parameters for game '" + name + "': " + e.what());
    }
    throw ConfigError("unknown game name '" + name + "'");
  }
  const Json& pj = detail::member(j, "players", "");
  if (!pj.is_array() || pj.empty())
    throw ConfigError("key 'players' must be a non-empty array");
  std::vector<PlayerSpaces> players;
  std::vector<BoxSpace> type_boxes;
  for (std::size_t i = 0; i < pj.size(); ++i) {
    const std::string path = "players[" + std::to_string(i) + "]";
    PlayerSpaces p{
        detail::parse_box(detail::member(pj[i], "type_space", path),
                          detail::join_path(path, "type_space")),
        detail::parse_box(detail::member(pj[i], "action_space", path),
                          detail::join_path(path, "action_space"))};
    type_boxes.push_back(p.type_space);
    players.push_back(std::move(p));
  }
  UtilityModel utility =
      parse_utility(detail::member(j, "utility", ""), "utility", static_cast<int>(pj.size()));
  DensityModel density = parse_density(detail::member(j, "density", ""), "density", type_boxes);
  try {
    return GameSpec(std::move(players), std::move(utility), std::move(density));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("inconsistent game configuration: ") + e.what());
  }
}

inline GameSpec load_game(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open game file '" + file + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("cannot parse '" + file + "': " + e.what());
  }
  return parse_game(j);
}

// --- report serialization -------------------------------------------------

inline Json to_json(const ModuliReport& r) {
  Json j;
  j["sigma"] = r.sigma;
  j["tau"] = r.tau;
  j["kappa"] = r.kappa;
  j["gamma"] = r.gamma;
  j["rho_rival"] = r.rho_rival;
  j["tau_agg"] = r.tau_agg;
  j["beta"] = r.beta;
  j["alpha"] = r.alpha;
  j["contraction_ok"] = r.contraction_ok;
  j["source"] = r.source == ModuliReport::Source::Analytic ? "analytic" : "sampled";
  j["safety_factor"] = r.safety_factor;
  return j;
}

inline Json to_json(const EquilibriumResult& r) {
  Json j;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["trace"] = r.trace;
  switch (r.method) {
    case SolveMethod::Contraction: j["method"] = "contraction"; break;
    case SolveMethod::MonotoneFromTop: j["method"] = "monotone_from_top"; break;
    case SolveMethod::MonotoneFromBottom: j["method"] = "monotone_from_bottom"; break;
  }
  if (r.certificate)
    j["certificate"] = *r.certificate;
  else
    j["certificate"] = nullptr;
  return j;
}

inline Json to_json(const AdmissibilityReport& r) {
  Json j;
  j["C"] = r.C;
  j["admissible"] = r.admissible;
  if (!r.witness.empty()) j["witness"] = r.witness;
  return j;
}

inline Json to_json(const StabilityReport& r) {
  Json j;
  j["moduli"] = to_json(r.moduli);
  j["admissibility"] = to_json(r.admissibility);
  j["drift_inf"] = r.drift_inf;
  j["drift_l2"] = r.drift_l2;
  j["bound_42"] = r.bound_42;
  j["bound_44"] = r.bound_44;
  j["bound_45"] = r.bound_45;
  j["slack_42"] = r.slack_42;
  j["slack_44"] = r.slack_44;
  j["bounds_guaranteed"] = r.bounds_guaranteed;
  Json rows = Json::array();
  for (const auto& row : r.sweep) {
    Json rj;
    rj["eps"] = row.eps;
    rj["drift_inf"] = row.drift_inf;
    rj["drift_l2"] = row.drift_l2;
    rj["ratio"] = row.ratio;
    rj["cond_w1_linearity_err"] = row.cond_w1_linearity_err;
    rows.push_back(rj);
  }
  j["sweep"] = rows;
  return j;
}

inline Json to_json(const LipschitzCheckReport& r) {
  Json j;
  j["max_own_ratio"] = r.max_own_ratio;
  j["max_rival_ratio"] = r.max_rival_ratio;
  j["pass"] = r.pass;
  j["trials"] = r.trials;
  if (!r.witness.empty()) j["witness"] = r.witness;
  return j;
}

inline Json to_json(const OrderConditionCheck& r) {
  Json j;
  j["supermodular_pass"] = r.supermodular_pass;
  j["trivially_supermodular"] = r.trivially_supermodular;
  j["increasing_in_type"] = r.increasing_in_type;
  j["increasing_in_rivals"] = r.increasing_in_rivals;
  j["evidence"] = "sampled";
  j["samples"] = r.samples;
  if (!r.witness.empty()) j["witness"] = r.witness;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

// --- CSV dumps ------------------------------------------------------------

inline std::string strategy_csv(const StrategyGrid& g) {
  std::ostringstream out;
  out.precision(17);
  const int d = g.grid.box.dim();
  const int z = g.action_box.dim();
  for (int k = 0; k < d; ++k) out << "theta" << k << ",";
  for (int k = 0; k < z; ++k) out << "a" << k << (k + 1 < z ? "," : "\n");
  for (std::size_t flat = 0; flat < g.node_count(); ++flat) {
    const Vec t = g.grid.node_coord(flat);
    for (double v : t) out << v << ",";
    for (int k = 0; k < z; ++k) out << g.values[flat][k] << (k + 1 < z ? "," : "\n");
  }
  return out.str();
}

inline Json strategy_sidecar(const StrategyGrid& g, int player) {
  Json j;
  j["player"] = player;
  j["grid_shape"] = g.grid.shape;
  j["type_lower"] = g.grid.box.lower;
  j["type_upper"] = g.grid.box.upper;
  j["action_lower"] = g.action_box.lower;
  j["action_upper"] = g.action_box.upper;
  return j;
}

inline std::string sweep_csv(const StabilityReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "eps,drift_inf,drift_l2,drift_l2_over_eps,bound_45,cond_w1_linearity_err\n";
  for (const auto& row : r.sweep)
    out << row.eps << "," << row.drift_inf << "," << row.drift_l2 << "," << row.ratio << ","
        << r.bound_45 << "," << row.cond_w1_linearity_err << "\n";
  return out.str();
}

}  // namespace bne
