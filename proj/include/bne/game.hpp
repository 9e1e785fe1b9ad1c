#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bne/box_space.hpp"
#include "bne/density.hpp"
#include "bne/utility.hpp"

namespace bne {

struct PlayerSpaces {
  BoxSpace type_space;
  BoxSpace action_space;
};

// Immutable Bayesian game instance. All evaluators are pure; instances are
// safely shareable across parallel workers.
struct GameSpec {
  std::vector<PlayerSpaces> players;
  UtilityModel utility;
  DensityModel density;

  GameSpec(std::vector<PlayerSpaces> p, UtilityModel u, DensityModel d)
      : players(std::move(p)), utility(std::move(u)), density(std::move(d)) {
    if (players.empty()) throw std::invalid_argument("GameSpec: needs at least one player");
    if (density.players() != static_cast<int>(players.size()))
      throw std::invalid_argument("GameSpec: density player count mismatch");
    for (std::size_t i = 0; i < players.size(); ++i)
      if (density.type_boxes()[i].dim() != players[i].type_space.dim())
        throw std::invalid_argument("GameSpec: density type dimension mismatch at player " +
                                    std::to_string(i));
  }

  int n() const { return static_cast<int>(players.size()); }

  BoxSpace rival_type_box(int i) const {
    std::vector<BoxSpace> boxes;
    for (int j = 0; j < n(); ++j)
      if (j != i) boxes.push_back(players[j].type_space);
    if (boxes.empty()) throw std::logic_error("rival_type_box: single-player game");
    return product_box(boxes);
  }

  int rival_type_dim(int i) const {
    int d = 0;
    for (int j = 0; j < n(); ++j)
      if (j != i) d += players[j].type_space.dim();
    return d;
  }

  BoxSpace full_type_box() const {
    std::vector<BoxSpace> boxes;
    for (const auto& p : players) boxes.push_back(p.type_space);
    return product_box(boxes);
  }
};

inline void require_action_profile(const GameSpec& game, const ActionProfile& a) {
  if (static_cast<int>(a.size()) != game.n())
    throw std::domain_error("action profile has wrong player count");
  for (int j = 0; j < game.n(); ++j)
    require_inside(game.players[j].action_space, a[j], "a(" + std::to_string(j) + ")");
}

inline void require_type_profile(const GameSpec& game, const Vec& theta) {
  require_inside(game.full_type_box(), theta, "theta");
}

inline double evaluate_utility(const GameSpec& game, int i, const ActionProfile& a,
                               const Vec& theta) {
  require_action_profile(game, a);
  require_type_profile(game, theta);
  return game.utility.value(i, a, theta);
}

inline Vec evaluate_grad(const GameSpec& game, int i, const ActionProfile& a, const Vec& theta) {
  require_action_profile(game, a);
  require_type_profile(game, theta);
  return game.utility.grad(i, a, theta);
}

inline double conditional_density(const GameSpec& game, int i, const Vec& theta_i,
                                  const Vec& theta_mi) {
  require_inside(game.players[i].type_space, theta_i, "theta_i");
  require_inside(game.rival_type_box(i), theta_mi, "theta_-i");
  return game.density.conditional(i, theta_i, theta_mi);
}

}  // namespace bne
