#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bne/box_space.hpp"
#include "bne/grid.hpp"
#include "bne/linalg.hpp"

namespace bne {

// Joint type density q(theta) over Theta = Theta_1 x ... x Theta_n together
// with marginals and conditionals q_i(theta_{-i} | theta_i).
class DensityModel {
 public:
  enum class Kind { ProductUniform, Fgm, GridTabulated, Mixture };

  static DensityModel product_uniform(std::vector<BoxSpace> type_boxes) {
    DensityModel d(Kind::ProductUniform, std::move(type_boxes));
    return d;
  }

  // Farlie-Gumbel-Morgenstern density 1 + rho (2 t1 - 1)(2 t2 - 1) on [0,1]^2.
  static DensityModel fgm(double rho) {
    if (!(rho > -1.0 && rho < 1.0))
      throw std::invalid_argument("FGM density requires -1 < rho < 1, got rho=" +
                                  std::to_string(rho));
    std::vector<BoxSpace> boxes{BoxSpace({0.0}, {1.0}), BoxSpace({0.0}, {1.0})};
    DensityModel d(Kind::Fgm, std::move(boxes));
    d.rho_ = rho;
    return d;
  }

  // Tabulated density values on a tensor grid over Theta; multilinear between
  // nodes, renormalized so the interpolant integrates to one.
  static DensityModel grid_tabulated(std::vector<BoxSpace> type_boxes, std::vector<int> shape,
                                     std::vector<double> values) {
    DensityModel d(Kind::GridTabulated, std::move(type_boxes));
    d.table_grid_ = TensorGrid(product_box(d.type_boxes_), std::move(shape));
    if (values.size() != d.table_grid_->node_count())
      throw std::invalid_argument("grid_tabulated: value count does not match grid shape");
    for (double v : values)
      if (v < 0.0) throw std::invalid_argument("grid_tabulated: negative density value");
    const double z = d.table_grid_->integrate(values);
    if (!(z > 0.0)) throw std::invalid_argument("grid_tabulated: density integrates to zero");
    for (double& v : values) v /= z;
    d.table_values_ = std::move(values);
    return d;
  }

  // (1 - eps) base + eps alternative. Both must share the same type boxes.
  static DensityModel mixture(DensityModel base, DensityModel alternative, double eps) {
    if (eps < 0.0 || eps > 1.0)
      throw std::invalid_argument("mixture: eps must lie in [0, 1]");
    if (base.type_boxes().size() != alternative.type_boxes().size())
      throw std::invalid_argument("mixture: component player counts differ");
    DensityModel d(Kind::Mixture, base.type_boxes());
    d.eps_ = eps;
    d.mix_base_ = std::make_shared<DensityModel>(std::move(base));
    d.mix_alt_ = std::make_shared<DensityModel>(std::move(alternative));
    return d;
  }

  Kind kind() const { return kind_; }
  double fgm_rho() const { return rho_; }
  double mixture_eps() const { return eps_; }
  const DensityModel& mixture_base() const { return *mix_base_; }
  const DensityModel& mixture_alt() const { return *mix_alt_; }
  const std::vector<BoxSpace>& type_boxes() const { return type_boxes_; }
  int players() const { return static_cast<int>(type_boxes_.size()); }
  int offset(int i) const { return offsets_[i]; }
  int dim(int i) const { return type_boxes_[i].dim(); }
  int total_dim() const { return offsets_.back(); }

  double joint(const Vec& theta) const {
    switch (kind_) {
      case Kind::ProductUniform:
        return uniform_value_;
      case Kind::Fgm:
        return 1.0 + rho_ * (2.0 * theta[0] - 1.0) * (2.0 * theta[1] - 1.0);
      case Kind::GridTabulated:
        return std::max(0.0, table_grid_->interpolate(table_values_, theta));
      case Kind::Mixture:
        return (1.0 - eps_) * mix_base_->joint(theta) + eps_ * mix_alt_->joint(theta);
    }
    return 0.0;
  }

  // Own-type marginal density q_i(theta_i).
  double marginal(int i, const Vec& theta_i) const {
    switch (kind_) {
      case Kind::ProductUniform:
        return 1.0 / type_boxes_[i].volume();
      case Kind::Fgm:
        return 1.0;  // FGM marginals are uniform on [0,1]
      case Kind::GridTabulated:
        return tabulated_marginal(i, theta_i);
      case Kind::Mixture:
        return (1.0 - eps_) * mix_base_->marginal(i, theta_i) +
               eps_ * mix_alt_->marginal(i, theta_i);
    }
    return 0.0;
  }

  // q_i(theta_{-i} | theta_i) = q(theta) / q_i(theta_i).
  double conditional(int i, const Vec& theta_i, const Vec& theta_mi) const {
    const double m = marginal(i, theta_i);
    if (!(m > 0.0))
      throw std::domain_error("conditional density: zero marginal at player " +
                              std::to_string(i) + " conditioning point");
    return joint(assemble_theta(i, theta_i, theta_mi)) / m;
  }

  // Analytic Lipschitz modulus of theta_i |-> q_i(.|theta_i), when known.
  std::optional<double> conditional_lipschitz(int i) const {
    switch (kind_) {
      case Kind::ProductUniform:
        return 0.0;
      case Kind::Fgm:
        return 2.0 * std::abs(rho_);
      case Kind::Mixture: {
        const auto b = mix_base_->conditional_lipschitz(i);
        const auto a = mix_alt_->conditional_lipschitz(i);
        // Valid when all own-type marginals are equal (mixture of conditionals).
        if (b && a && equal_marginals_near_uniform())
          return (1.0 - eps_) * *b + eps_ * *a;
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }

  Vec assemble_theta(int i, const Vec& theta_i, const Vec& theta_mi) const {
    Vec theta(total_dim());
    int mi = 0;
    for (int j = 0; j < players(); ++j) {
      const int o = offsets_[j], d = dim(j);
      if (j == i)
        for (int k = 0; k < d; ++k) theta[o + k] = theta_i[k];
      else
        for (int k = 0; k < d; ++k) theta[o + k] = theta_mi[mi++];
    }
    return theta;
  }

  Vec slice_own(int i, const Vec& theta) const {
    return Vec(theta.begin() + offsets_[i], theta.begin() + offsets_[i] + dim(i));
  }

  Vec slice_rivals(int i, const Vec& theta) const {
    Vec r;
    for (int j = 0; j < players(); ++j)
      if (j != i)
        r.insert(r.end(), theta.begin() + offsets_[j], theta.begin() + offsets_[j] + dim(j));
    return r;
  }

 private:
  DensityModel(Kind kind, std::vector<BoxSpace> boxes)
      : kind_(kind), type_boxes_(std::move(boxes)) {
    if (type_boxes_.empty()) throw std::invalid_argument("DensityModel: no players");
    offsets_.resize(type_boxes_.size() + 1, 0);
    for (std::size_t j = 0; j < type_boxes_.size(); ++j)
      offsets_[j + 1] = offsets_[j] + type_boxes_[j].dim();
    if (kind_ == Kind::ProductUniform) {
      double v = 1.0;
      for (const auto& b : type_boxes_) v *= b.volume();
      uniform_value_ = 1.0 / v;
    }
  }

  double tabulated_marginal(int i, const Vec& theta_i) const {
    // Exact integral of the multilinear interpolant over the rival axes.
    const TensorGrid& g = *table_grid_;
    std::vector<int> rival_axes;
    for (int k = 0; k < g.box.dim(); ++k)
      if (k < offsets_[i] || k >= offsets_[i] + dim(i)) rival_axes.push_back(k);
    std::vector<int> idx(rival_axes.size(), 0);
    double s = 0.0;
    while (true) {
      Vec theta(g.box.dim());
      double w = 1.0;
      for (int k = 0; k < dim(i); ++k) theta[offsets_[i] + k] = theta_i[k];
      for (std::size_t r = 0; r < rival_axes.size(); ++r) {
        const int ax = rival_axes[r];
        theta[ax] = g.box.lower[ax] + g.spacing(ax) * idx[r];
        w *= g.spacing(ax) * ((idx[r] == 0 || idx[r] + 1 == g.shape[ax]) ? 0.5 : 1.0);
      }
      s += w * joint(theta);
      int r = static_cast<int>(rival_axes.size()) - 1;
      for (; r >= 0; --r) {
        if (++idx[r] < g.shape[rival_axes[r]]) break;
        idx[r] = 0;
      }
      if (r < 0) break;
    }
    return s;
  }

  bool equal_marginals_near_uniform() const {
    // FGM-vs-FGM mixtures share uniform marginals; other pairs fall back to
    // the sampled path.
    return mix_base_->kind_ == Kind::Fgm && mix_alt_->kind_ == Kind::Fgm;
  }

  Kind kind_;
  std::vector<BoxSpace> type_boxes_;
  std::vector<int> offsets_;
  double uniform_value_ = 1.0;
  double rho_ = 0.0;
  double eps_ = 0.0;
  std::optional<TensorGrid> table_grid_;
  std::vector<double> table_values_;
  std::shared_ptr<DensityModel> mix_base_, mix_alt_;
};

}  // namespace bne
