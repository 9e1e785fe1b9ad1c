#include "catch_amalgamated.hpp"

#include "bne/game.hpp"
#include "bne/games.hpp"
#include "bne/quadrature.hpp"
#include "bne/sampling.hpp"
#include "helpers.hpp"

using Catch::Approx;
using namespace bne;

TEST_CASE("cournot utility values") {
  const GameSpec g2 = cournot2(0.3);
  // a_1 (10 - 1*(2+3)) - 0.5*2 - 0.5/1... by hand: 2*5 - 0.5*2 - 0.5*4 = 7
  CHECK(evaluate_utility(g2, 0, {{2.0}, {3.0}}, {0.5, 0.5}) == Approx(7.0).margin(1e-12));

  // zero production earns and costs nothing
  CHECK(evaluate_utility(g2, 0, {{0.0}, {3.0}}, {0.7, 0.2}) == Approx(0.0).margin(1e-15));

  const GameSpec g3 = cournot3();
  CHECK(evaluate_utility(g3, 1, {{1.0}, {1.0}, {1.0}}, {0.0, 0.0, 0.0}) ==
        Approx(6.5).margin(1e-12));
}

TEST_CASE("cournot utility gradient") {
  const GameSpec g3 = cournot3();
  const Vec grad = evaluate_grad(g3, 0, {{1.0}, {1.0}, {1.0}}, {0.0, 0.5, 0.5});
  REQUIRE(grad.size() == 1);
  CHECK(grad[0] == Approx(5.0).margin(1e-12));

  // constructed symmetric stationary point: theta = alpha - (3 beta + c) a
  const GameSpec g2 = cournot2(0.3);
  const double a = 2.4, theta = 10.0 - 4.0 * a;
  CHECK(evaluate_grad(g2, 0, {{a}, {a}}, {theta, 0.5})[0] == Approx(0.0).margin(1e-12));
}

TEST_CASE("analytic gradients match finite differences") {
  for (const GameSpec& game : {cournot2(0.3), cournot3(), testutil::complements_game(),
                               testutil::cournot2_custom()}) {
    Rng rng(42);
    for (int t = 0; t < 1000; ++t) {
      ActionProfile a(game.n());
      for (int j = 0; j < game.n(); ++j)
        a[j] = sample_box(game.players[j].action_space, rng);
      // keep finite-difference stencils inside the box
      for (int j = 0; j < game.n(); ++j)
        for (std::size_t k = 0; k < a[j].size(); ++k)
          a[j][k] = std::min(game.players[j].action_space.upper[k] - 1e-4,
                             std::max(game.players[j].action_space.lower[k] + 1e-4, a[j][k]));
      const Vec theta = sample_box(game.full_type_box(), rng);
      for (int i = 0; i < game.n(); ++i) {
        const Vec g = game.utility.grad(i, a, theta);
        const Vec fd = testutil::fd_utility_grad(game, i, a, theta);
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double scale = std::max(1.0, std::abs(fd[k]));
          CHECK(std::abs(g[k] - fd[k]) / scale < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("out-of-box points are rejected with the coordinate named") {
  const GameSpec g2 = cournot2(0.3);
  CHECK_THROWS_MATCHES(evaluate_utility(g2, 0, {{11.0}, {3.0}}, {0.5, 0.5}), std::domain_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("a(0)[0]")));
  CHECK_THROWS_MATCHES(evaluate_utility(g2, 0, {{1.0}, {3.0}}, {0.5, 1.5}), std::domain_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("theta[1]")));
}

TEST_CASE("conditional densities") {
  const GameSpec uni = cournot3();
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Vec ti = sample_box(uni.players[0].type_space, rng);
    const Vec tmi = sample_box(uni.rival_type_box(0), rng);
    CHECK(conditional_density(uni, 0, ti, tmi) == Approx(1.0).margin(1e-12));
  }

  const GameSpec fgm = cournot2(0.3);
  CHECK(conditional_density(fgm, 0, {0.0}, {1.0}) == Approx(0.7).margin(1e-12));
  for (double t2 : {0.0, 0.3, 0.8, 1.0})
    CHECK(conditional_density(fgm, 0, {0.5}, {t2}) == Approx(1.0).margin(1e-12));

  // FGM marginals are uniform, so the conditional is the joint; cross-check
  // the marginal by 1-D quadrature of the joint.
  const TensorRule r = TensorRule::build(BoxSpace({0.0}, {1.0}), QuadKind::GaussLegendre, 32);
  for (double t1 : {0.0, 0.25, 0.9}) {
    const double marg = r.integrate([&](const Vec& t2) {
      return fgm.density.joint({t1, t2[0]});
    });
    CHECK(marg == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("joint density integrates to one and conditionals are consistent") {
  for (const GameSpec& game : {cournot2(-0.5), cournot2(0.6), cournot3()}) {
    const TensorRule r = TensorRule::build(game.full_type_box(), QuadKind::GaussLegendre, 16);
    const double total = r.integrate([&](const Vec& t) { return game.density.joint(t); });
    CHECK(total == Approx(1.0).margin(1e-6));

    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
      const Vec theta = sample_box(game.full_type_box(), rng);
      const Vec ti = game.density.slice_own(0, theta);
      const Vec tmi = game.density.slice_rivals(0, theta);
      const double lhs = game.density.conditional(0, ti, tmi) * game.density.marginal(0, ti);
      CHECK(std::abs(lhs - game.density.joint(theta)) /
                std::max(1e-8, game.density.joint(theta)) <
            1e-8);
    }
  }
}

TEST_CASE("conditional density integrates to one in the rival variable") {
  for (const GameSpec& game : {cournot2(0.45), cournot3()}) {
    const TensorRule r =
        TensorRule::build(game.rival_type_box(0), QuadKind::GaussLegendre, 24);
    for (double ti : {0.0, 0.2, 0.5, 0.85, 1.0}) {
      const double total =
          r.integrate([&](const Vec& tmi) { return game.density.conditional(0, {ti}, tmi); });
      CHECK(total == Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("FGM conditional is Lipschitz in the conditioning type with modulus 2|rho|") {
  const double rho = 0.35;
  const GameSpec game = cournot2(rho);
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    const double t1 = sample_unit(rng), t2 = sample_unit(rng), r = sample_unit(rng);
    const double lhs =
        std::abs(game.density.conditional(0, {t1}, {r}) - game.density.conditional(0, {t2}, {r}));
    CHECK(lhs <= 2.0 * rho * std::abs(t1 - t2) + 1e-12);
  }
  CHECK(game.density.conditional_lipschitz(0).value() == Approx(2.0 * rho));
}

TEST_CASE("cournot gradient monotonicity quotient is exactly -(2 beta + c)") {
  const GameSpec game = cournot2(0.3);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    ActionProfile a(2), b(2);
    for (int j = 0; j < 2; ++j) {
      a[j] = sample_box(game.players[j].action_space, rng);
      b[j] = a[j];
    }
    b[0] = sample_box(game.players[0].action_space, rng);
    const double d = a[0][0] - b[0][0];
    if (std::abs(d) < 1e-10) continue;
    const Vec theta = sample_box(game.full_type_box(), rng);
    const double inner =
        (game.utility.grad(0, a, theta)[0] - game.utility.grad(0, b, theta)[0]) * d;
    CHECK(inner == Approx(-3.0 * d * d).margin(1e-9));
  }
}

TEST_CASE("tabulated density with a dead conditioning slice raises a conditioning error") {
  std::vector<BoxSpace> boxes{BoxSpace({0.0}, {1.0}), BoxSpace({0.0}, {1.0})};
  // density vanishes on the whole theta_1 = 0 edge
  std::vector<double> values{0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0};
  const DensityModel d = DensityModel::grid_tabulated(boxes, {3, 3}, values);
  CHECK_THROWS_AS(d.conditional(0, {0.0}, {0.5}), std::domain_error);
  CHECK(d.conditional(0, {1.0}, {0.5}) > 0.0);
  CHECK_THROWS_AS(DensityModel::grid_tabulated(boxes, {3, 3},
                                               std::vector<double>{0, 0, 0, 0, -1, 0, 0, 0, 0}),
                  std::invalid_argument);
}

TEST_CASE("FGM correlation bounds are strict") {
  CHECK_THROWS_AS(DensityModel::fgm(1.0), std::invalid_argument);
  CHECK_THROWS_AS(DensityModel::fgm(-1.0), std::invalid_argument);
  CHECK_NOTHROW(DensityModel::fgm(0.999));
}
