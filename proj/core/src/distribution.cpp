#include "germcal/distribution.hpp"

#include <cmath>

namespace germcal {
namespace germs {

double PairFn::scale_hint() const {
  if (feature_scale > 0.0) return feature_scale;
  double w = 0.0;
  for (int i = 0; i < support.dim(); ++i) w = std::max(w, support.hi[i] - support.lo[i]);
  return w;
}

PairFn as_pair_fn(const testfn::TestFunction& phi) {
  PairFn p;
  p.eval = [phi](const Vec& y) { return phi.value(y); };
  p.support = phi.support();
  p.feature_scale = phi.support_radius();
  p.tf = &phi;
  return p;
}

std::vector<double> pairfn_moments(const PairFn& phi, int ell_max, const Vec& origin) {
  if (phi.tf != nullptr) return testfn::moments(*phi.tf, ell_max, origin);
  auto idxs = MultiIndex::enumerate(phi.support.dim(), ell_max);
  std::vector<double> out;
  out.reserve(idxs.size());
  for (const auto& k : idxs) {
    out.push_back(quad::integrate_box_auto(
        [&](const Vec& y) { return monomial(y - origin, k) * phi.eval(y); },
        phi.support, 1e-11, 512));
  }
  return out;
}

Distribution Distribution::closed_form(int dim, std::function<double(const Vec&)> f,
                                       Box domain, std::vector<Vec> singularities) {
  Distribution d;
  d.dim_ = dim;
  d.f_ = std::move(f);
  d.domain_ = domain;
  d.singularities_ = std::move(singularities);
  return d;
}

Distribution Distribution::grid_density(Vec origin, double spacing,
                                        std::vector<int> shape,
                                        std::vector<double> values) {
  Distribution d;
  d.dim_ = origin.size();
  d.grid_origin_ = origin;
  d.grid_h_ = spacing;
  d.grid_shape_ = std::move(shape);
  d.grid_values_ = std::move(values);
  std::size_t expect = 1;
  for (int n : d.grid_shape_) expect *= n;
  if (expect != d.grid_values_.size())
    throw ParameterError("grid_density: shape does not match value count");
  return d;
}

Distribution Distribution::point_masses(int dim,
                                        std::vector<std::pair<Vec, double>> masses) {
  Distribution d;
  d.dim_ = dim;
  d.masses_ = std::move(masses);
  return d;
}

Distribution Distribution::zero(int dim) { return point_masses(dim, {}); }

Distribution Distribution::combine(double a, const Distribution& f, double b,
                                   const Distribution& g) {
  Distribution d;
  d.dim_ = f.dim();
  d.terms_.push_back({a, std::make_shared<Distribution>(f)});
  d.terms_.push_back({b, std::make_shared<Distribution>(g)});
  return d;
}

namespace {

double pair_closed_form_1d(const std::function<double(const Vec&)>& f,
                           const PairFn& phi, const Box& box,
                           const std::vector<double>& hot) {
  double a = box.lo[0], b = box.hi[0];
  if (a >= b) return 0.0;
  double scale = std::min(phi.scale_hint(), b - a);
  auto g = [&](double y) { return f(Vec{y}) * phi.eval(Vec{y}); };
  double total = 0.0;
  for (auto [lo, hi] : quad::graded_cells(a, b, hot, 1e-13 * (b - a))) {
    int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / (scale / 4.0))));
    panels = std::min(panels, 256);
    double prev = quad::integrate(g, lo, hi, panels, 16);
    for (int p = 2 * panels; p <= 1024; p *= 2) {
      double cur = quad::integrate(g, lo, hi, p, 16);
      bool done = std::abs(cur - prev) < 1e-12 * std::max(1.0, std::abs(cur));
      prev = cur;
      if (done) break;
    }
    total += prev;
  }
  return total;
}

double pair_closed_form_2d(const std::function<double(const Vec&)>& f,
                           const PairFn& phi, const Box& box) {
  double scale = phi.scale_hint();
  int panels = 1;
  for (int i = 0; i < 2; ++i) {
    double w = box.hi[i] - box.lo[i];
    panels = std::max(panels, static_cast<int>(std::ceil(w / (scale / 3.0))));
  }
  panels = std::min(panels, 64);
  auto g = [&](const Vec& y) { return f(y) * phi.eval(y); };
  double prev = quad::integrate_box(g, box, panels, 12);
  for (int p = 2 * panels; p <= 256; p *= 2) {
    double cur = quad::integrate_box(g, box, p, 12);
    bool done = std::abs(cur - prev) < 1e-10 * std::max(1.0, std::abs(cur));
    prev = cur;
    if (done) break;
  }
  return prev;
}

}  // namespace

double Distribution::pair(const PairFn& phi) const {
  if (!terms_.empty()) {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * t.dist->pair(phi);
    return s;
  }
  if (!masses_.empty() || (f_ == nullptr && grid_values_.empty())) {
    double s = 0.0;
    for (const auto& [x, w] : masses_) s += w * phi.eval(x);
    return s;
  }
  if (!grid_values_.empty()) {
    // Riemann sum over nodes inside the support of phi
    double s = 0.0;
    double hd = std::pow(grid_h_, dim_);
    if (dim_ == 1) {
      int n = grid_shape_[0];
      int lo = std::max(0, static_cast<int>(std::floor(
                               (phi.support.lo[0] - grid_origin_[0]) / grid_h_)));
      int hi = std::min(n - 1, static_cast<int>(std::ceil(
                                   (phi.support.hi[0] - grid_origin_[0]) / grid_h_)));
      for (int i = lo; i <= hi; ++i) {
        Vec y{grid_origin_[0] + i * grid_h_};
        s += grid_values_[i] * phi.eval(y);
      }
    } else if (dim_ == 2) {
      int n0 = grid_shape_[0], n1 = grid_shape_[1];
      int lo0 = std::max(0, static_cast<int>((phi.support.lo[0] - grid_origin_[0]) / grid_h_));
      int hi0 = std::min(n0 - 1,
                         static_cast<int>((phi.support.hi[0] - grid_origin_[0]) / grid_h_) + 1);
      int lo1 = std::max(0, static_cast<int>((phi.support.lo[1] - grid_origin_[1]) / grid_h_));
      int hi1 = std::min(n1 - 1,
                         static_cast<int>((phi.support.hi[1] - grid_origin_[1]) / grid_h_) + 1);
      for (int i = lo0; i <= hi0; ++i)
        for (int j = lo1; j <= hi1; ++j) {
          Vec y{grid_origin_[0] + i * grid_h_, grid_origin_[1] + j * grid_h_};
          s += grid_values_[i * n1 + j] * phi.eval(y);
        }
    } else {
      throw DimensionError("grid pairing supports dim 1 and 2");
    }
    return s * hd;
  }

  // closed form: integrate over supp(phi) intersected with the domain
  Box box = phi.support;
  for (int i = 0; i < dim_; ++i) {
    box.lo[i] = std::max(box.lo[i], domain_.lo[i]);
    box.hi[i] = std::min(box.hi[i], domain_.hi[i]);
    if (box.lo[i] >= box.hi[i]) return 0.0;
  }
  std::vector<double> hot;
  if (dim_ == 1) {
    for (const Vec& s : singularities_) hot.push_back(s[0]);
    for (const Vec& s : phi.hotspots) hot.push_back(s[0]);
    return pair_closed_form_1d(f_, phi, box, hot);
  }
  if (dim_ == 2) return pair_closed_form_2d(f_, phi, box);
  throw DimensionError("closed-form pairing supports dim 1 and 2");
}

bool Distribution::has_density() const {
  if (!terms_.empty()) {
    for (const auto& t : terms_)
      if (!t.dist->has_density()) return false;
    return true;
  }
  return f_ != nullptr || !grid_values_.empty();
}

double Distribution::density(const Vec& y) const {
  if (!terms_.empty()) {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * t.dist->density(y);
    return s;
  }
  if (f_) return f_(y);
  if (grid_values_.empty()) throw CapabilityError("density: point masses have none");
  if (dim_ == 1) {
    // Catmull-Rom cubic between nodes (linear at the edges)
    double u = (y[0] - grid_origin_[0]) / grid_h_;
    int i = static_cast<int>(std::floor(u));
    if (i < 0 || i + 1 >= grid_shape_[0]) return 0.0;
    double t = u - i;
    if (i == 0 || i + 2 >= grid_shape_[0])
      return (1 - t) * grid_values_[i] + t * grid_values_[i + 1];
    double p0 = grid_values_[i - 1], p1 = grid_values_[i], p2 = grid_values_[i + 1],
           p3 = grid_values_[i + 2];
    return p1 + 0.5 * t *
                    (p2 - p0 +
                     t * (2 * p0 - 5 * p1 + 4 * p2 - p3 +
                          t * (3 * (p1 - p2) + p3 - p0)));
  }
  if (dim_ == 2) {
    double u = (y[0] - grid_origin_[0]) / grid_h_;
    double v = (y[1] - grid_origin_[1]) / grid_h_;
    int i = static_cast<int>(std::floor(u)), j = static_cast<int>(std::floor(v));
    if (i < 0 || j < 0 || i + 1 >= grid_shape_[0] || j + 1 >= grid_shape_[1]) return 0.0;
    double s = u - i, t = v - j;
    int n1 = grid_shape_[1];
    return (1 - s) * ((1 - t) * grid_values_[i * n1 + j] + t * grid_values_[i * n1 + j + 1]) +
           s * ((1 - t) * grid_values_[(i + 1) * n1 + j] +
                t * grid_values_[(i + 1) * n1 + j + 1]);
  }
  throw DimensionError("density: dim must be 1 or 2");
}

}  // namespace germs
}  // namespace germcal
