#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "germcal/testfn.hpp"

namespace germcal {
namespace germs {

// What a distribution pairs against: an evaluable function with known support.
// `hotspots` mark points needing graded quadrature cells; `feature_scale` is
// the smallest oscillation scale of the function (0 means "support-sized").
struct PairFn {
  std::function<double(const Vec&)> eval;
  Box support;
  std::vector<Vec> hotspots;
  double feature_scale = 0.0;
  const testfn::TestFunction* tf = nullptr;  // set when wrapping a TestFunction

  double scale_hint() const;
};

PairFn as_pair_fn(const testfn::TestFunction& phi);

// moments \int (y - origin)^k f(y) dy of a pairing function, |k| <= ell_max
std::vector<double> pairfn_moments(const PairFn& phi, int ell_max, const Vec& origin);

// Pairing-evaluable functional. Payloads: a closed-form density (paired by
// quadrature, with optional singular points), a sampled density on a uniform
// grid (paired by Riemann sum; spectrally accurate against smooth compactly
// supported functions), or a combination of point masses.
class Distribution {
 public:
  static Distribution closed_form(int dim, std::function<double(const Vec&)> f,
                                  Box domain, std::vector<Vec> singularities = {});
  static Distribution grid_density(Vec origin, double spacing, std::vector<int> shape,
                                   std::vector<double> values);
  static Distribution point_masses(int dim,
                                   std::vector<std::pair<Vec, double>> masses);
  static Distribution zero(int dim);
  // a f + b g
  static Distribution combine(double a, const Distribution& f, double b,
                              const Distribution& g);

  int dim() const { return dim_; }
  double pair(const PairFn& phi) const;
  double pair(const testfn::TestFunction& phi) const { return pair(as_pair_fn(phi)); }

  bool is_grid() const { return !grid_values_.empty(); }
  // true when the payload is density-evaluable (not point masses)
  bool has_density() const;
  // density value for closed-form / grid payloads (cubic interpolation between
  // 1d grid nodes, bilinear in 2d)
  double density(const Vec& y) const;
  const std::vector<double>& grid_values() const { return grid_values_; }
  const std::vector<int>& grid_shape() const { return grid_shape_; }
  double grid_spacing() const { return grid_h_; }
  Vec grid_origin() const { return grid_origin_; }

 private:
  Distribution() = default;

  int dim_ = 0;
  // closed form
  std::function<double(const Vec&)> f_;
  Box domain_;
  std::vector<Vec> singularities_;
  // grid
  Vec grid_origin_;
  double grid_h_ = 0.0;
  std::vector<int> grid_shape_;
  std::vector<double> grid_values_;
  // point masses
  std::vector<std::pair<Vec, double>> masses_;
  // combination
  struct Term {
    double coef;
    std::shared_ptr<Distribution> dist;
  };
  std::vector<Term> terms_;
};

}  // namespace germs
}  // namespace germcal
