#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bne/linalg.hpp"

namespace bne {

// Action profile: one action vector per player.
using ActionProfile = std::vector<Vec>;

// Per-player utility u_i(a_i, a_{-i}, theta) with analytic gradient in a_i.
class UtilityModel {
 public:
  enum class Kind { Cournot, GeneralQuadratic, Custom };

  using ValueFn = std::function<double(int, const ActionProfile&, const Vec&)>;
  using GradFn = std::function<Vec(int, const ActionProfile&, const Vec&)>;

  // Cournot oligopoly with inverse demand alpha - beta * sum(a) and cost
  // theta_i a_i + (c_i/2) a_i^2; scalar actions, scalar types.
  static UtilityModel cournot(double alpha, double beta, std::vector<double> c) {
    if (alpha <= 0.0 || beta <= 0.0)
      throw std::invalid_argument("cournot: alpha and beta must be positive");
    for (double ci : c)
      if (ci <= 0.0) throw std::invalid_argument("cournot: cost curvature c must be positive");
    UtilityModel u(Kind::Cournot);
    u.alpha_ = alpha;
    u.beta_ = beta;
    u.c_ = std::move(c);
    return u;
  }

  // Scalar-action quadratic game:
  //   u_i = (b_i + m_i theta_i) a_i - (s_i/2) a_i^2 + sum_{j != i} w_ij a_i a_j.
  // Covers both strategic substitutes (w < 0) and complements (w > 0).
  static UtilityModel general_quadratic(std::vector<double> b, std::vector<double> m,
                                        std::vector<double> s,
                                        std::vector<std::vector<double>> w) {
    const std::size_t n = b.size();
    if (m.size() != n || s.size() != n || w.size() != n)
      throw std::invalid_argument("general_quadratic: coefficient sizes disagree");
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] <= 0.0)
        throw std::invalid_argument("general_quadratic: curvature s must be positive");
      if (w[i].size() != n)
        throw std::invalid_argument("general_quadratic: cross matrix must be n x n");
    }
    UtilityModel u(Kind::GeneralQuadratic);
    u.b_ = std::move(b);
    u.m_ = std::move(m);
    u.s_ = std::move(s);
    u.w_ = std::move(w);
    return u;
  }

  // Caller-supplied evaluators; the gradient must be analytic (finite
  // differences stay in the test oracles, never in the solve path).
  static UtilityModel custom(ValueFn value, GradFn grad) {
    UtilityModel u(Kind::Custom);
    u.value_fn_ = std::move(value);
    u.grad_fn_ = std::move(grad);
    return u;
  }

  Kind kind() const { return kind_; }
  bool quadratic() const { return kind_ != Kind::Custom; }

  double cournot_alpha() const { return alpha_; }
  double cournot_beta() const { return beta_; }
  double cournot_c(int i) const { return c_[i]; }

  double value(int i, const ActionProfile& a, const Vec& theta) const {
    switch (kind_) {
      case Kind::Cournot: {
        const double ai = a[i][0];
        double total = 0.0;
        for (const auto& aj : a) total += aj[0];
        return ai * (alpha_ - beta_ * total) - theta[i] * ai - 0.5 * c_[i] * ai * ai;
      }
      case Kind::GeneralQuadratic: {
        const double ai = a[i][0];
        double cross = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
          if (static_cast<int>(j) != i) cross += w_[i][j] * a[j][0];
        return (b_[i] + m_[i] * theta[i]) * ai - 0.5 * s_[i] * ai * ai + cross * ai;
      }
      case Kind::Custom:
        return value_fn_(i, a, theta);
    }
    return 0.0;
  }

  Vec grad(int i, const ActionProfile& a, const Vec& theta) const {
    switch (kind_) {
      case Kind::Cournot: {
        double rivals = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
          if (static_cast<int>(j) != i) rivals += a[j][0];
        return {alpha_ - theta[i] - (2.0 * beta_ + c_[i]) * a[i][0] - beta_ * rivals};
      }
      case Kind::GeneralQuadratic: {
        double cross = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j)
          if (static_cast<int>(j) != i) cross += w_[i][j] * a[j][0];
        return {b_[i] + m_[i] * theta[i] - s_[i] * a[i][0] + cross};
      }
      case Kind::Custom:
        return grad_fn_(i, a, theta);
    }
    return {};
  }

  // Analytic curvature (strong concavity constant) for quadratic kinds.
  double curvature(int i) const {
    switch (kind_) {
      case Kind::Cournot:
        return 2.0 * beta_ + c_[i];
      case Kind::GeneralQuadratic:
        return s_[i];
      case Kind::Custom:
        throw std::logic_error("curvature: not analytic for custom utilities");
    }
    return 0.0;
  }

  // Analytic blockwise Lipschitz modulus tau_ij of grad_i in a_j.
  double cross_modulus(int i, int j) const {
    switch (kind_) {
      case Kind::Cournot:
        return i == j ? 0.0 : beta_;
      case Kind::GeneralQuadratic:
        return i == j ? 0.0 : std::abs(w_[i][j]);
      case Kind::Custom:
        throw std::logic_error("cross_modulus: not analytic for custom utilities");
    }
    return 0.0;
  }

  // Analytic Lipschitz modulus of grad_i in theta_i (the nu_i of the
  // own-type sensitivity bound).
  double own_type_modulus(int i) const {
    switch (kind_) {
      case Kind::Cournot:
        return 1.0;
      case Kind::GeneralQuadratic:
        return std::abs(m_[i]);
      case Kind::Custom:
        throw std::logic_error("own_type_modulus: not analytic for custom utilities");
    }
    return 0.0;
  }

 private:
  explicit UtilityModel(Kind k) : kind_(k) {}

  Kind kind_;
  double alpha_ = 0.0, beta_ = 0.0;
  std::vector<double> c_;
  std::vector<double> b_, m_, s_;
  std::vector<std::vector<double>> w_;
  ValueFn value_fn_;
  GradFn grad_fn_;
};

}  // namespace bne
