#pragma once

#include <cmath>
#include <vector>

#include "bne/game.hpp"

namespace bne {

// Symmetric two-player Cournot duopoly with FGM-correlated types. Inverse
// demand alpha - beta (a_1 + a_2), cost theta_i a_i + (c/2) a_i^2, types on
// [0,1], actions on [0, alpha/beta].
inline GameSpec cournot2(double rho = 0.3, double alpha = 10.0, double beta = 1.0,
                         double c = 1.0) {
  PlayerSpaces p{BoxSpace({0.0}, {1.0}), BoxSpace({0.0}, {alpha / beta})};
  return GameSpec({p, p}, UtilityModel::cournot(alpha, beta, {c, c}), DensityModel::fgm(rho));
}

// Symmetric three-player Cournot game with independent uniform types.
inline GameSpec cournot3(double alpha = 10.0, double beta = 1.0, double c = 1.0) {
  PlayerSpaces p{BoxSpace({0.0}, {1.0}), BoxSpace({0.0}, {alpha / beta})};
  std::vector<BoxSpace> tboxes{p.type_space, p.type_space, p.type_space};
  return GameSpec({p, p, p}, UtilityModel::cournot(alpha, beta, {c, c, c}),
                  DensityModel::product_uniform(tboxes));
}

// Analytic equilibrium strategy of the duopoly above, affine in theta_i.
inline double cournot2_equilibrium(double alpha, double beta, double c, double rho,
                                   double theta_i) {
  return alpha / (3.0 * beta + c) +
         beta * (3.0 - rho) / (2.0 * (3.0 * beta + c) * (6.0 * beta + 3.0 * c + beta * rho)) -
         theta_i / (2.0 * beta + c + beta * rho / 3.0);
}

// Analytic bound on the node-wise equilibrium shift per unit change in rho.
inline double cournot2_drift_bound(double beta, double c) {
  const double d = 5.0 * beta + 3.0 * c;
  return 3.0 * beta / (2.0 * d * d);
}

}  // namespace bne
