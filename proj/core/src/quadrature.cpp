#include "germcal/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace germcal {
namespace quad {

const Rule& gauss(int order) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(order);
  Rule r;
  r.x.resize(order);
  r.w.resize(order);
  for (int i = 0; i < order; ++i) {
    double xi, wi;
    gsl_integration_glfixed_point(-1.0, 1.0, i, &xi, &wi, t);
    r.x[i] = xi;
    r.w[i] = wi;
  }
  gsl_integration_glfixed_table_free(t);
  return cache.emplace(order, std::move(r)).first->second;
}

double integrate(const Fn1& f, double a, double b, int panels, int order) {
  const Rule& r = gauss(order);
  double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    double c = a + (p + 0.5) * h;
    double acc = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * f(c + 0.5 * h * r.x[i]);
    s += 0.5 * h * acc;
  }
  return s;
}

double integrate_auto(const Fn1& f, double a, double b, double tol, int max_panels,
                      int order) {
  double prev = integrate(f, a, b, 1, order);
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    double cur = integrate(f, a, b, panels, order);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  return prev;
}

std::vector<std::pair<double, double>> graded_cells(double a, double b,
                                                    const std::vector<double>& hotspots,
                                                    double min_width) {
  std::vector<double> cuts{a, b};
  for (double h : hotspots)
    if (h > a && h < b) cuts.push_back(h);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::pair<double, double>> cells;
  auto grade_towards = [&](double from, double to) {
    // cells accumulating dyadically toward `to`
    double w = std::abs(to - from);
    if (w <= min_width) {
      cells.emplace_back(std::min(from, to), std::max(from, to));
      return;
    }
    double sgn = (to > from) ? 1.0 : -1.0;
    double cur = from;
    double step = w / 2;
    while (step > min_width) {
      cells.emplace_back(std::min(cur, cur + sgn * step), std::max(cur, cur + sgn * step));
      cur += sgn * step;
      step /= 2;
    }
    cells.emplace_back(std::min(cur, to), std::max(cur, to));
  };

  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    bool hot_lo = std::find(hotspots.begin(), hotspots.end(), lo) != hotspots.end();
    bool hot_hi = std::find(hotspots.begin(), hotspots.end(), hi) != hotspots.end();
    double mid = 0.5 * (lo + hi);
    if (hot_lo && hot_hi) {
      grade_towards(mid, lo);
      grade_towards(mid, hi);
    } else if (hot_lo) {
      grade_towards(hi, lo);
    } else if (hot_hi) {
      grade_towards(lo, hi);
    } else {
      cells.emplace_back(lo, hi);
    }
  }
  return cells;
}

double integrate_graded(const Fn1& f, double a, double b,
                        const std::vector<double>& hotspots, double min_width,
                        int order) {
  double s = 0.0;
  for (auto [lo, hi] : graded_cells(a, b, hotspots, min_width))
    s += integrate(f, lo, hi, 1, order);
  return s;
}

double integrate_box(const FnV& f, const Box& box, int panels_per_axis, int order) {
  int d = box.dim();
  if (d == 1) {
    return integrate([&](double x) { return f(Vec{x}); }, box.lo[0], box.hi[0],
                     panels_per_axis, order);
  }
  if (d == 2) {
    return integrate(
        [&](double x) {
          return integrate([&](double y) { return f(Vec{x, y}); }, box.lo[1],
                           box.hi[1], panels_per_axis, order);
        },
        box.lo[0], box.hi[0], panels_per_axis, order);
  }
  if (d == 3) {
    return integrate(
        [&](double x) {
          Box slice{Vec{box.lo[1], box.lo[2]}, Vec{box.hi[1], box.hi[2]}};
          return integrate_box(
              [&](const Vec& yz) { return f(Vec{x, yz[0], yz[1]}); }, slice,
              panels_per_axis, order);
        },
        box.lo[0], box.hi[0], panels_per_axis, order);
  }
  throw DimensionError("integrate_box: dim must be 1..3");
}

double integrate_box_auto(const FnV& f, const Box& box, double tol,
                          int max_panels_per_axis, int order) {
  double prev = integrate_box(f, box, 1, order);
  for (int panels = 2; panels <= max_panels_per_axis; panels *= 2) {
    double cur = integrate_box(f, box, panels, order);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  return prev;
}

double integrate_disc(const FnV& f, const Vec& center, double radius,
                      int radial_panels, int angular_panels, int order) {
  // r = R u^2, dA = r dr dtheta = 2 R^2 u^3 du dtheta
  const double R = radius;
  return integrate(
      [&](double u) {
        double r = R * u * u;
        double ring = integrate(
            [&](double th) {
              Vec y = center;
              y[0] += r * std::cos(th);
              y[1] += r * std::sin(th);
              return f(y);
            },
            0.0, 2.0 * M_PI, angular_panels, order);
        return ring * 2.0 * R * R * u * u * u;
      },
      0.0, 1.0, radial_panels, order);
}

}  // namespace quad
}  // namespace germcal
