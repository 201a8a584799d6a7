#pragma once

#include <functional>
#include <vector>

#include "germcal/common.hpp"

namespace germcal {
namespace quad {

using Fn1 = std::function<double(double)>;
using FnV = std::function<double(const Vec&)>;

// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
struct Rule {
  std::vector<double> x, w;
};
const Rule& gauss(int order);

// composite Gauss-Legendre with a fixed panel count
double integrate(const Fn1& f, double a, double b, int panels = 8, int order = 16);

// Panel-doubling until two successive estimates agree to tol or the panel cap
// is reached (the cap guards against non-integrable inputs).
double integrate_auto(const Fn1& f, double a, double b, double tol = 1e-11,
                      int max_panels = 1 << 20, int order = 16);

// Cells of [a,b] split at hotspots and dyadically graded toward each one,
// down to min_width; used for integrands with localized small-scale features.
std::vector<std::pair<double, double>> graded_cells(double a, double b,
                                                    const std::vector<double>& hotspots,
                                                    double min_width);
double integrate_graded(const Fn1& f, double a, double b,
                        const std::vector<double>& hotspots, double min_width,
                        int order = 16);

// tensor-product rule over a box (dim 1..3)
double integrate_box(const FnV& f, const Box& box, int panels_per_axis = 8,
                     int order = 12);
double integrate_box_auto(const FnV& f, const Box& box, double tol = 1e-9,
                          int max_panels_per_axis = 1 << 10, int order = 12);

// polar rule over a disc around `center` (dim 2), radial nodes clustered at the
// center via r = R u^2 so integrable point singularities are handled
double integrate_disc(const FnV& f, const Vec& center, double radius,
                      int radial_panels = 16, int angular_panels = 16, int order = 12);

}  // namespace quad
}  // namespace germcal
