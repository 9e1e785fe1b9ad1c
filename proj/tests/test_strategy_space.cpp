#include "catch_amalgamated.hpp"

#include "bne/best_response.hpp"
#include "bne/games.hpp"
#include "bne/strategy.hpp"
#include "helpers.hpp"

using Catch::Approx;
using namespace bne;

namespace {

StrategyGrid line_grid(const std::vector<double>& node_values, double action_hi = 10.0) {
  TensorGrid g(BoxSpace({0.0}, {1.0}), {static_cast<int>(node_values.size())});
  std::vector<Vec> vals;
  for (double v : node_values) vals.push_back({v});
  return StrategyGrid(g, BoxSpace({0.0}, {action_hi}), vals);
}

StrategyGrid function_grid(const std::function<double(double)>& f, int nodes,
                           double action_hi = 10.0) {
  TensorGrid g(BoxSpace({0.0}, {1.0}), {nodes});
  std::vector<Vec> vals;
  for (std::size_t k = 0; k < g.node_count(); ++k) vals.push_back({f(g.node_coord(k)[0])});
  return StrategyGrid(g, BoxSpace({0.0}, {action_hi}), vals);
}

}  // namespace

TEST_CASE("interpolation of gridded strategies") {
  const StrategyGrid c = StrategyGrid::constant(BoxSpace({0.0}, {1.0}), BoxSpace({0.0}, {10.0}),
                                                {3.5}, {5});
  for (double t : {0.0, 0.1, 0.5, 0.99, 1.0})
    CHECK(c.eval({t})[0] == Approx(3.5).margin(1e-15));

  // two-node grid 0 -> 2 is the linear function 2 theta
  const StrategyGrid lin = line_grid({0.0, 2.0});
  CHECK(lin.eval({0.25})[0] == Approx(0.5).margin(1e-15));
  CHECK(lin.eval({1.0})[0] == Approx(2.0).margin(1e-15));

  // quadratic interpolation error is O(h^2)
  const int nodes = 21;
  const double h = 1.0 / (nodes - 1);
  const StrategyGrid quad = function_grid([](double t) { return t * t; }, nodes);
  double err = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    err = std::max(err, std::abs(quad.eval({t})[0] - t * t));
  }
  CHECK(err <= 2.0 * h * h);
}

TEST_CASE("node values are validated against the action box") {
  TensorGrid g(BoxSpace({0.0}, {1.0}), {3});
  CHECK_THROWS_AS(StrategyGrid(g, BoxSpace({0.0}, {1.0}), {{0.0}, {2.0}, {0.5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(StrategyGrid(g, BoxSpace({0.0}, {1.0}), {{0.0}, {0.5}}),
                  std::invalid_argument);
}

TEST_CASE("lp_norm_diff against hand computations") {
  const GameSpec game = cournot2(0.3);

  StrategyProfile f, g;
  for (int i = 0; i < 2; ++i) {
    f.grids.push_back(function_grid([](double t) { return t; }, 11));
    g.grids.push_back(function_grid([](double) { return 0.0; }, 11));
  }

  CHECK(lp_norm_diff(f, f, PNorm::Two, game).max == Approx(0.0).margin(1e-12));

  // f - g = theta under the uniform FGM marginal
  CHECK(lp_norm_diff(f, g, PNorm::One, game).max == Approx(0.5).margin(1e-10));
  CHECK(lp_norm_diff(f, g, PNorm::Two, game).max ==
        Approx(1.0 / std::sqrt(3.0)).margin(1e-10));
  CHECK(lp_norm_diff(f, g, PNorm::Inf, game).max == Approx(1.0).margin(1e-12));

  // constant offset of 0.5 has the same norm for every p
  StrategyProfile c1, c2;
  for (int i = 0; i < 2; ++i) {
    c1.grids.push_back(function_grid([](double) { return 1.5; }, 11));
    c2.grids.push_back(function_grid([](double) { return 1.0; }, 11));
  }
  for (PNorm p : {PNorm::One, PNorm::Two, PNorm::Inf})
    CHECK(lp_norm_diff(c1, c2, p, game).max == Approx(0.5).margin(1e-10));
}

TEST_CASE("norm ordering and triangle inequality on random profiles") {
  const GameSpec game = cournot2(0.3);
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const StrategyProfile f = detail::random_profile(game, 5, rng);
    const StrategyProfile g = detail::random_profile(game, 5, rng);
    const StrategyProfile h = detail::random_profile(game, 5, rng);

    const double d1 = lp_norm_diff(f, g, PNorm::One, game).max;
    const double d2 = lp_norm_diff(f, g, PNorm::Two, game).max;
    const double dinf = lp_norm_diff(f, g, PNorm::Inf, game).max;
    CHECK(d1 <= d2 + 1e-9);
    CHECK(d2 <= dinf + 1e-9);

    for (PNorm p : {PNorm::One, PNorm::Two, PNorm::Inf}) {
      const double fg = lp_norm_diff(f, g, p, game).max;
      const double fh = lp_norm_diff(f, h, p, game).max;
      const double hg = lp_norm_diff(h, g, p, game).max;
      CHECK(fg <= fh + hg + 1e-9);
    }
  }
}

TEST_CASE("lattice top and bottom") {
  const GameSpec game = cournot3();
  auto [top, bottom] = top_bottom(game, 3);
  REQUIRE(top.n() == 3);
  for (int i = 0; i < 3; ++i) {
    for (const Vec& v : top.grids[i].values) CHECK(v[0] == Approx(10.0));
    for (const Vec& v : bottom.grids[i].values) CHECK(v[0] == Approx(0.0));
  }
  CHECK(profile_leq(bottom, top));
  CHECK_FALSE(profile_leq(top, bottom));
}

TEST_CASE("monotonicity detection") {
  CHECK(is_monotone(line_grid({1.0, 1.0, 1.0})).monotone);
  CHECK(is_monotone(line_grid({0.0, 0.5, 2.0})).monotone);

  const MonotoneWitness w = is_monotone(line_grid({0.0, 1.0, 0.5}));
  CHECK_FALSE(w.monotone);
  CHECK(w.node_a == 1);
  CHECK(w.node_b == 2);
  CHECK(w.axis == 0);

  // the duopoly equilibrium decreases in type; its reflection increases
  auto fstar = [](double t) { return cournot2_equilibrium(10.0, 1.0, 1.0, 0.3, t); };
  CHECK_FALSE(is_monotone(function_grid(fstar, 21)).monotone);
  CHECK(is_monotone(function_grid([&](double t) { return 10.0 - fstar(t); }, 21)).monotone);
}

TEST_CASE("interpolated evaluation respects the node Lipschitz constant") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> vals(9);
    for (double& v : vals) v = 10.0 * sample_unit(rng);
    const StrategyGrid s = line_grid(vals);
    double L = 0.0;
    const double h = s.grid.spacing(0);
    for (std::size_t k = 0; k + 1 < vals.size(); ++k)
      L = std::max(L, std::abs(vals[k + 1] - vals[k]) / h);
    for (int t = 0; t < 200; ++t) {
      const double x = sample_unit(rng), y = sample_unit(rng);
      CHECK(std::abs(s.eval({x})[0] - s.eval({y})[0]) <= L * std::abs(x - y) + 1e-12);
    }
  }
}

TEST_CASE("profile node comparisons") {
  const GameSpec game = cournot2(0.3);
  StrategyProfile f, g;
  for (int i = 0; i < 2; ++i) {
    f.grids.push_back(line_grid({1.0, 2.0, 3.0}));
    g.grids.push_back(line_grid({1.0, 2.5, 3.0}));
  }
  CHECK(profile_leq(f, g));
  CHECK_FALSE(profile_leq(g, f));
  CHECK(profile_max_node_diff(f, g) == Approx(0.5).margin(1e-15));
  CHECK(profile_max_node_diff(f, f) == Approx(0.0).margin(1e-15));
}
