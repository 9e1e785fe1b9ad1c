#include "catch_amalgamated.hpp"

#include <algorithm>

#include "bne/config.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;
using namespace bne;

namespace {

Json full_cournot2() {
  return Json::parse(R"({
    "players": [
      {"type_space": {"lower": [0.0], "upper": [1.0]},
       "action_space": {"lower": [0.0], "upper": [10.0]}},
      {"type_space": {"lower": [0.0], "upper": [1.0]},
       "action_space": {"lower": [0.0], "upper": [10.0]}}
    ],
    "utility": {"kind": "cournot", "alpha": 10.0, "beta": 1.0, "c": [1.0, 1.0]},
    "density": {"kind": "fgm", "rho": 0.3}
  })");
}

}  // namespace

TEST_CASE("full game schema parses") {
  const GameSpec game = parse_game(full_cournot2());
  CHECK(game.n() == 2);
  CHECK(game.utility.kind() == UtilityModel::Kind::Cournot);
  CHECK(game.density.kind() == DensityModel::Kind::Fgm);
  CHECK(game.density.fgm_rho() == Approx(0.3));
  CHECK(game.players[0].action_space.upper[0] == Approx(10.0));
  CHECK(evaluate_utility(game, 0, {{2.0}, {3.0}}, {0.5, 0.5}) == Approx(7.0));
}

TEST_CASE("named games with overrides") {
  const GameSpec g2 = parse_game(Json::parse(R"({"name": "cournot2", "rho": 0.5})"));
  CHECK(g2.n() == 2);
  CHECK(g2.density.fgm_rho() == Approx(0.5));

  const GameSpec g3 = parse_game(Json::parse(R"({"name": "cournot3", "alpha": 8.0})"));
  CHECK(g3.n() == 3);
  CHECK(g3.players[0].action_space.upper[0] == Approx(8.0));

  CHECK_THROWS_MATCHES(parse_game(Json::parse(R"({"name": "bertrand"})")), ConfigError,
                       MessageMatches(ContainsSubstring("unknown game name 'bertrand'")));
}

TEST_CASE("errors carry the full key path") {
  Json j = full_cournot2();
  j["players"][0].erase("type_space");
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("players[0].type_space")));

  j = full_cournot2();
  j["utility"].erase("alpha");
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("utility.alpha")));

  j = full_cournot2();
  j["density"].erase("rho");
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("density.rho")));

  j = full_cournot2();
  j["utility"]["alpha"] = "ten";
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("must be a number")));

  j = full_cournot2();
  j["players"][1]["type_space"]["upper"] = {0.0};
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("players[1].type_space")));
}

TEST_CASE("unknown kinds are rejected by name") {
  Json j = full_cournot2();
  j["utility"]["kind"] = "linear";
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("unknown utility kind 'linear'")));

  j = full_cournot2();
  j["density"]["kind"] = "gaussian";
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("unknown density kind 'gaussian'")));
}

TEST_CASE("out-of-range fgm correlation is rejected") {
  Json j = full_cournot2();
  j["density"]["rho"] = 1.0;
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("-1 < rho < 1")));
  // just inside the open interval is valid
  j["density"]["rho"] = 0.9999;
  CHECK_NOTHROW(parse_game(j));

  CHECK_THROWS_AS(parse_game(Json::parse(R"({"name": "cournot2", "rho": -1.0})")), ConfigError);
}

TEST_CASE("mixture and tabulated densities parse") {
  Json j = full_cournot2();
  j["density"] = Json::parse(R"({
    "kind": "mixture", "eps": 0.25,
    "base": {"kind": "fgm", "rho": 0.0},
    "alternative": {"kind": "fgm", "rho": 0.6}
  })");
  const GameSpec mixed = parse_game(j);
  CHECK(mixed.density.kind() == DensityModel::Kind::Mixture);
  CHECK(mixed.density.mixture_eps() == Approx(0.25));
  CHECK(mixed.density.joint({0.0, 0.0}) == Approx(1.0 + 0.25 * 0.6).margin(1e-12));

  j["density"] = Json::parse(R"({
    "kind": "grid_tabulated", "shape": [2, 2], "values": [1.0, 1.0, 1.0, 1.0]
  })");
  const GameSpec tab = parse_game(j);
  CHECK(tab.density.kind() == DensityModel::Kind::GridTabulated);
  CHECK(tab.density.joint({0.5, 0.5}) == Approx(1.0).margin(1e-12));

  j["density"]["values"] = {1.0, 1.0, 1.0};
  CHECK_THROWS_MATCHES(parse_game(j), ConfigError,
                       MessageMatches(ContainsSubstring("invalid density at 'density'")));
}

TEST_CASE("enumeration parsers") {
  CHECK(pnorm_from_string("1") == PNorm::One);
  CHECK(pnorm_from_string("2") == PNorm::Two);
  CHECK(pnorm_from_string("inf") == PNorm::Inf);
  CHECK_THROWS_AS(pnorm_from_string("3"), std::invalid_argument);

  CHECK(metric_from_string("w1") == Metric::W1);
  CHECK(metric_from_string("tv") == Metric::TV);
  CHECK(metric_from_string("kl") == Metric::KL);
  CHECK_THROWS_AS(metric_from_string("hellinger"), std::invalid_argument);
}

TEST_CASE("game files load from disk") {
  const GameSpec game = load_game("configs/cournot2.json");
  CHECK(game.n() == 2);
  CHECK(game.density.fgm_rho() == Approx(0.3));
  CHECK_THROWS_MATCHES(load_game("configs/does_not_exist.json"), ConfigError,
                       MessageMatches(ContainsSubstring("cannot open")));
}

TEST_CASE("report serialization round trips the key figures") {
  const GameSpec game = cournot2(0.3);
  const ModuliReport m = estimate_moduli(game);
  const Json mj = to_json(m);
  CHECK(mj["alpha"].get<double>() == Approx(1.0 / 3.0));
  CHECK(mj["source"] == "analytic");
  CHECK(mj["contraction_ok"] == true);

  ContractionSettings cs;
  cs.grid_nodes = 5;
  const EquilibriumResult eq = solve_contraction(game, cs, &m);
  const Json ej = to_json(eq);
  CHECK(ej["method"] == "contraction");
  CHECK(ej["iterations"].get<int>() == eq.iterations);
  CHECK(ej["certificate"].get<double>() == Approx(*eq.certificate));

  const std::string csv = strategy_csv(eq.profile.grids[0]);
  CHECK(csv.rfind("theta0,a0\n", 0) == 0);
  // header plus one row per node
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  const Json sj = strategy_sidecar(eq.profile.grids[0], 0);
  CHECK(sj["player"] == 0);
  CHECK(sj["grid_shape"][0] == 5);
}
