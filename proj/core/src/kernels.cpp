#include "germcal/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace germcal {
namespace kernels {

namespace {

double efn(double u) { return u <= 0.0 ? 0.0 : std::exp(-1.0 / u); }

// jet of the scalar map t -> sigma((t-a)/(b-a)) at t0, as derivative sequence
std::vector<double> step_derivs(double a, double b, double t0, int order) {
  std::vector<double> out(order + 1, 0.0);
  if (t0 <= a) {
    out[0] = 1.0;
    return out;
  }
  if (t0 >= b) return out;
  double w = b - a;
  double u0 = (t0 - a) / w;
  Jet u = Jet::variable(u0, 0, 1, order);
  Jet f = exp(-recip(u));
  Jet fc = exp(-recip(-u + 1.0));
  Jet sigma = f * recip(f + fc);
  Jet g = -sigma + 1.0;
  for (int j = 0; j <= order; ++j) {
    MultiIndex k{j};
    out[j] = g.derivative(k) / std::pow(w, j) * 1.0;
  }
  // chain rule for the affine substitution is the 1/w^j factor above
  return out;
}

}  // namespace

double SmoothStep::value(double t) const {
  if (t <= a_) return 1.0;
  if (t >= b_) return 0.0;
  double u = (t - a_) / (b_ - a_);
  double f = efn(u), fc = efn(1.0 - u);
  return 1.0 - f / (f + fc);
}

std::vector<double> SmoothStep::derivatives(double t, int order) const {
  return step_derivs(a_, b_, t, order);
}

double DyadicKernel::truncated(const Vec& x, const Vec& y) const {
  double s = 0.0;
  for (int n = 0; n <= depth; ++n) s += value(n, x, y);
  return s;
}

double DyadicKernel::sum_value(const Vec& x, const Vec& y, int d) const {
  if (summed_value) return summed_value(x, y, d);
  int lo = 0, hi = d;
  if (active_levels) std::tie(lo, hi) = active_levels(dist(x, y), d);
  double s = 0.0;
  for (int n = lo; n <= hi; ++n) s += value(n, x, y);
  return s;
}

double DyadicKernel::sum_derivative(const MultiIndex& k, const MultiIndex& l,
                                    const Vec& x, const Vec& y, int d) const {
  if (summed_derivative) return summed_derivative(k, l, x, y, d);
  int lo = 0, hi = d;
  if (active_levels) std::tie(lo, hi) = active_levels(dist(x, y), d);
  double s = 0.0;
  for (int n = lo; n <= hi; ++n) s += derivative(n, k, l, x, y);
  return s;
}

PairFn DyadicKernel::section(int n, const Vec& x) const {
  PairFn p;
  double r = level_radius(n);
  p.eval = [this, n, x](const Vec& y) { return value(n, x, y); };
  p.support = Box::ball(x, r);
  p.feature_scale = r / 2.0;
  return p;
}

double DyadicKernel::transposed_level(int n, const Vec& z, const PairFn& phi) const {
  double r = level_radius(n);
  Box box = Box::ball(z, r);
  for (int i = 0; i < dim; ++i) {
    box.lo[i] = std::max(box.lo[i], phi.support.lo[i]);
    box.hi[i] = std::min(box.hi[i], phi.support.hi[i]);
    if (box.lo[i] >= box.hi[i]) return 0.0;
  }
  double fine = std::min(r / 2.0, phi.scale_hint());
  if (dim == 1) {
    double w = box.hi[0] - box.lo[0];
    int panels = std::min(96, std::max(2, static_cast<int>(std::ceil(w / (fine / 4.0)))));
    return quad::integrate(
        [&](double y) { return value(n, Vec{y}, z) * phi.eval(Vec{y}); }, box.lo[0],
        box.hi[0], panels, 12);
  }
  if (dim == 2) {
    double w = std::max(box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]);
    int panels = std::min(48, std::max(2, static_cast<int>(std::ceil(w / (fine / 3.0)))));
    return quad::integrate_box(
        [&](const Vec& y) { return value(n, y, z) * phi.eval(y); }, box, panels, 10);
  }
  throw DimensionError("transposed_level: dim must be 1 or 2");
}

namespace {

struct LevelProfile {
  // level-0 profile k0 and its jets; levels are 2^{(d-beta)n} k0(2^n u)
  std::function<double(const Vec&)> value;
  std::function<Jet(const Vec&, int)> jet;
  double inner = 0.0, outer = 0.0;  // annulus radii of the support
};

LevelProfile riesz_profile(int dim, double beta, double rho) {
  SmoothStep g(rho / 2.0, rho);
  LevelProfile p;
  p.inner = rho / 4.0;
  p.outer = rho;
  p.value = [dim, beta, rho, g](const Vec& u) {
    double t = u.norm();
    if (t <= rho / 4.0 || t >= rho) return 0.0;
    double chi = g.value(t) - g.value(2.0 * t);
    return chi * std::pow(t, beta - dim);
  };
  p.jet = [dim, beta, rho, g](const Vec& u, int order) {
    double t0 = u.norm();
    if (t0 <= rho / 4.0 + 1e-14 || t0 >= rho - 1e-14) return Jet(dim, order);
    Jet s(dim, order);
    for (int i = 0; i < dim; ++i) {
      Jet ui = Jet::variable(u[i], i, dim, order);
      s += ui * ui;
    }
    Jet t = sqrt(s);
    Jet chi = t.compose(g.derivatives(t0, order));
    std::vector<double> g2 = g.derivatives(2.0 * t0, order);
    for (int j = 0; j <= order; ++j) g2[j] *= std::pow(2.0, j);
    chi -= t.compose(g2);
    return chi * pow(s, 0.5 * (beta - dim));
  };
  return p;
}

LevelProfile heat_profile(int dim, double beta, double rho) {
  SmoothStep cut(0.75 * rho, rho);
  const quad::Rule& rule = quad::gauss(20);
  LevelProfile p;
  p.inner = 0.0;
  p.outer = rho;
  double front = std::pow(rho, beta - dim) * std::pow(4.0 * M_PI, -0.5 * dim);
  auto slab = [rule, front, dim, beta, rho](double s2) {
    // int_{1/4}^{1} s^{(beta-d)/2 - 1} e^{-s2/(4 rho^2 s)} ds
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double s = 0.625 + 0.375 * rule.x[i];
      acc += rule.w[i] * 0.375 * std::pow(s, 0.5 * (beta - dim) - 1.0) *
             std::exp(-s2 / (4.0 * rho * rho * s));
    }
    return front * acc;
  };
  p.value = [cut, slab, rho](const Vec& u) {
    double t = u.norm();
    if (t >= rho) return 0.0;
    return cut.value(t) * slab(t * t);
  };
  p.jet = [cut, rule, front, dim, beta, rho](const Vec& u, int order) {
    double t0 = u.norm();
    if (t0 >= rho - 1e-14) return Jet(dim, order);
    Jet s2(dim, order);
    for (int i = 0; i < dim; ++i) {
      Jet ui = Jet::variable(u[i], i, dim, order);
      s2 += ui * ui;
    }
    Jet acc(dim, order);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double s = 0.625 + 0.375 * rule.x[i];
      double c = rule.w[i] * 0.375 * std::pow(s, 0.5 * (beta - dim) - 1.0);
      acc += c * exp(s2 * (-1.0 / (4.0 * rho * rho * s)));
    }
    acc *= front;
    Jet t = sqrt(s2 + 1e-300);
    return acc * t.compose(cut.derivatives(t0, order));
  };
  return p;
}

}  // namespace

DyadicKernel build_kernel(KernelFamily family, double beta, int depth,
                          const Box& domain, double rho, int dim) {
  if (family == KernelFamily::Riesz && (beta <= 0.0 || beta >= dim))
    throw ParameterError("build_kernel: riesz needs 0 < beta < d");
  if (family == KernelFamily::Heat && beta <= 0.0)
    throw ParameterError("build_kernel: heat needs beta > 0");

  LevelProfile prof = family == KernelFamily::Riesz ? riesz_profile(dim, beta, rho)
                                                    : heat_profile(dim, beta, rho);
  DyadicKernel k;
  k.dim = dim;
  k.beta = beta;
  k.rho = rho;
  k.depth = depth;
  k.domain = domain;
  double scale_base = std::pow(2.0, dim - beta);
  k.value = [prof, scale_base](int n, const Vec& x, const Vec& y) {
    Vec u = (x - y) * std::pow(2.0, n);
    return std::pow(scale_base, n) * prof.value(u);
  };
  k.derivative = [prof, scale_base, dim](int n, const MultiIndex& kk,
                                         const MultiIndex& ll, const Vec& x,
                                         const Vec& y) {
    MultiIndex total = kk + ll;
    Vec u = (x - y) * std::pow(2.0, n);
    double sgn = (ll.order() % 2 == 0) ? 1.0 : -1.0;
    double scale = std::pow(scale_base, n) * std::pow(2.0, n * total.order());
    if (prof.value(u) == 0.0 && u.norm() > 0.0) {
      // still differentiate near the support edge where value vanishes
    }
    return sgn * scale * prof.jet(u, total.order()).derivative(total);
  };
  if (family == KernelFamily::Riesz) {
    SmoothStep g(rho / 2.0, rho);
    k.mother = [g, beta, dim](const Vec& x, const Vec& y) {
      double t = dist(x, y);
      if (t == 0.0 || t >= 1e300) return 0.0;
      return g.value(t) * std::pow(t, beta - dim);
    };
    // level n vanishes unless rho 2^{-n}/4 < |u| < rho 2^{-n}
    k.active_levels = [rho](double d, int depth) {
      if (d <= 0.0) return std::make_pair(1, 0);
      double base = std::log2(rho / d);
      int lo = std::max(0, static_cast<int>(std::floor(base)) - 1);
      int hi = std::min(depth, static_cast<int>(std::ceil(base)) + 2);
      return std::make_pair(lo, hi);
    };
    SmoothStep gstep(rho / 2.0, rho);
    k.summed_value = [gstep, beta, dim, rho](const Vec& x, const Vec& y, int d) {
      double t = dist(x, y);
      double s = std::pow(2.0, d + 1);
      if (t >= rho || s * t <= rho / 2.0) return 0.0;
      return (gstep.value(t) - gstep.value(s * t)) * std::pow(t, beta - dim);
    };
    k.summed_derivative = [gstep, beta, dim, rho](const MultiIndex& kk,
                                                  const MultiIndex& ll, const Vec& x,
                                                  const Vec& y, int d) {
      Vec u = x - y;
      double t0 = u.norm();
      double s = std::pow(2.0, d + 1);
      if (t0 >= rho - 1e-14 || s * t0 <= rho / 2.0 + 1e-14) return 0.0;
      MultiIndex total = kk + ll;
      int order = total.order();
      Jet s2(dim, order);
      for (int i = 0; i < dim; ++i) {
        Jet ui = Jet::variable(u[i], i, dim, order);
        s2 += ui * ui;
      }
      Jet t = sqrt(s2);
      Jet chi = t.compose(gstep.derivatives(t0, order));
      std::vector<double> g2 = gstep.derivatives(s * t0, order);
      for (int j = 0; j <= order; ++j) g2[j] *= std::pow(s, j);
      chi -= t.compose(g2);
      Jet full = chi * pow(s2, 0.5 * (beta - dim));
      double sgn = (ll.order() % 2 == 0) ? 1.0 : -1.0;
      return sgn * full.derivative(total);
    };
  } else {
    k.mother = [k](const Vec& x, const Vec& y) { return k.truncated(x, y); };
    // heat slabs overlap at the origin: every level wider than the separation
    k.active_levels = [rho](double d, int depth) {
      if (d >= rho) return std::make_pair(1, 0);
      if (d <= 0.0) return std::make_pair(0, depth);
      int hi = std::min(depth, static_cast<int>(std::floor(std::log2(rho / d))) + 1);
      return std::make_pair(0, hi);
    };
  }
  return k;
}

ManifoldKernel build_manifold_kernel(KernelFamily family, double beta, int depth,
                                     const geometry::Manifold& m, double rho) {
  if (rho > m.convexity_radius() / 4.0 + 1e-12)
    throw ParameterError("build_manifold_kernel: rho must be <= R_C / 4");
  LevelProfile prof = family == KernelFamily::Riesz
                          ? riesz_profile(m.dim(), beta, rho)
                          : heat_profile(m.dim(), beta, rho);
  ManifoldKernel k;
  k.manifold = m;
  k.beta = beta;
  k.rho = rho;
  k.depth = depth;
  int d = m.dim();
  double scale_base = std::pow(2.0, d - beta);
  k.value = [prof, scale_base, m, d](int n, const Vec& p, const Vec& q) {
    double t = m.distance(p, q) * std::pow(2.0, n);
    if (t <= prof.inner || (prof.outer > 0.0 && t >= prof.outer)) return 0.0;
    Vec u(d);
    u[0] = t;
    return std::pow(scale_base, n) * prof.value(u);
  };
  return k;
}

DyadicKernel pullback_kernel(const ManifoldKernel& mk, const geometry::Chart& chart,
                             double chart_radius) {
  DyadicKernel k;
  int d = mk.manifold.dim();
  k.dim = d;
  k.beta = mk.beta;
  k.depth = mk.depth;
  k.domain = Box::cube(d, -chart_radius, chart_radius);
  // flat range rho_n / c with the measured chart-equivalence constant
  geometry::Region reg{mk.manifold, chart.base,
                       std::min(chart_radius, mk.manifold.curvature_radius())};
  auto gc = geometry::equivalence_constants(mk.manifold, chart.base, reg, 4000, 17);
  k.rho = mk.rho / gc.c_low;

  auto value = [mk, chart](int n, const Vec& x, const Vec& y) {
    return mk.value(n, chart.from_chart(x), chart.from_chart(y));
  };
  k.value = value;
  k.derivative = [value, k](int n, const MultiIndex& kk, const MultiIndex& ll,
                            const Vec& x, const Vec& y) {
    // level-scaled central differences, one Richardson step
    double h = k.level_radius(n) * 5e-3;
    std::function<double(const Vec&, const Vec&, MultiIndex, MultiIndex, double)> fd =
        [&](const Vec& xx, const Vec& yy, MultiIndex a, MultiIndex b,
            double step) -> double {
      for (int i = 0; i < xx.size(); ++i) {
        if (a[i] > 0) {
          MultiIndex a2 = a;
          a2[i] -= 1;
          Vec xp = xx, xm = xx;
          xp[i] += step;
          xm[i] -= step;
          return (fd(xp, yy, a2, b, step) - fd(xm, yy, a2, b, step)) / (2.0 * step);
        }
      }
      for (int i = 0; i < yy.size(); ++i) {
        if (b[i] > 0) {
          MultiIndex b2 = b;
          b2[i] -= 1;
          Vec yp = yy, ym = yy;
          yp[i] += step;
          ym[i] -= step;
          return (fd(xx, yp, a, b2, step) - fd(xx, ym, a, b2, step)) / (2.0 * step);
        }
      }
      return value(n, xx, yy);
    };
    double c1 = fd(x, y, kk, ll, h);
    double c2 = fd(x, y, kk, ll, h / 2.0);
    return (4.0 * c2 - c1) / 3.0;
  };
  k.mother = [mk, chart](const Vec& x, const Vec& y) {
    double s = 0.0;
    for (int n = 0; n <= mk.depth; ++n)
      s += mk.value(n, chart.from_chart(x), chart.from_chart(y));
    return s;
  };
  return k;
}

KernelReport verify_kernel(const DyadicKernel& kernel, const VerifySpec& spec) {
  KernelReport rep;
  const int d = kernel.dim;
  Vec center(d);
  for (int i = 0; i < d; ++i)
    center[i] = 0.5 * (kernel.domain.lo[i] + kernel.domain.hi[i]);

  auto idxs_k = MultiIndex::enumerate(d, spec.max_k);
  auto idxs_l = MultiIndex::enumerate(d, spec.max_l);

  // deterministic annulus samples at level n
  auto annulus_points = [&](int n) {
    std::vector<Vec> pts;
    double r_hi = kernel.level_radius(n);
    double r_lo = r_hi / 8.0;
    int nr = std::max(8, spec.samples / (d == 1 ? 2 : 24));
    for (int i = 0; i < nr; ++i) {
      double r = r_lo + (r_hi - r_lo) * (i + 0.5) / nr;
      if (d == 1) {
        pts.push_back(Vec{r});
        pts.push_back(Vec{-r});
      } else {
        for (int a = 0; a < 24; ++a) {
          double th = 2.0 * M_PI * (a + 0.5) / 24;
          pts.push_back(Vec{r * std::cos(th), r * std::sin(th)});
        }
      }
    }
    return pts;
  };

  for (const auto& kk : idxs_k) {
    for (const auto& ll : idxs_l) {
      std::vector<double> ns, sups, moms, absmasses;
      for (int n = spec.n_lo; n <= spec.n_hi; ++n) {
        KernelCheckRow row;
        row.n = n;
        row.k = kk;
        row.l = ll;
        for (const Vec& u : annulus_points(n)) {
          Vec y = center, x = center + u;
          row.sup = std::max(row.sup, std::abs(kernel.derivative(n, kk, ll, x, y)));
        }
        // moment: int (y-x)^l d2^k K_n(x, y) dx at the fixed probe y = center
        double absmass = 0.0;
        if (ll.order() <= spec.max_l && kk.order() <= spec.max_l) {
          double r = kernel.level_radius(n);
          MultiIndex zero(d);
          auto integrand = [&](const Vec& x) {
            return monomial(center - x, ll) *
                   kernel.derivative(n, zero, kk, x, center);
          };
          double mom = 0.0;
          if (d == 1) {
            mom = quad::integrate([&](double x) { return integrand(Vec{x}); },
                                  center[0] - r, center[0] + r, 64, 12);
            absmass = quad::integrate(
                [&](double x) { return std::abs(integrand(Vec{x})); }, center[0] - r,
                center[0] + r, 64, 12);
          } else {
            mom = quad::integrate_box(integrand, Box::ball(center, r), 24, 10);
            absmass = quad::integrate_box(
                [&](const Vec& x) { return std::abs(integrand(x)); },
                Box::ball(center, r), 24, 10);
          }
          row.moment = std::abs(mom);
        }
        rep.rows.push_back(row);
        ns.push_back(n);
        sups.push_back(row.sup);
        moms.push_back(row.moment);
        absmasses.push_back(absmass);
      }
      KernelExponentFit fit;
      fit.k = kk;
      fit.l = ll;
      fit.growth_target = d - kernel.beta + kk.order() + ll.order();
      // log2 regression
      auto fit_log2 = [&](const std::vector<double>& vals, bool& defined) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t i = 0; i < ns.size(); ++i) {
          if (vals[i] <= 0.0) continue;
          double yv = std::log2(vals[i]);
          sx += ns[i];
          sy += yv;
          sxx += ns[i] * ns[i];
          sxy += ns[i] * yv;
          ++cnt;
        }
        defined = cnt >= 2;
        if (!defined) return 0.0;
        return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      };
      bool have = false;
      fit.growth = fit_log2(sups, have);
      fit.growth_pass = have && std::abs(fit.growth - fit.growth_target) <= spec.tolerance;
      // a moment counts as identically zero when it is pure cancellation
      // noise relative to the integrand's absolute mass
      bool all_cancel = true;
      for (std::size_t i = 0; i < moms.size(); ++i)
        if (moms[i] > 1e-9 * std::max(absmasses[i], 1e-300)) all_cancel = false;
      if (all_cancel) {
        fit.moment_vanishes = true;
        fit.decay_pass = true;
      } else {
        bool defined = false;
        fit.decay = -fit_log2(moms, defined);
        fit.decay_pass = defined && fit.decay >= kernel.beta - spec.tolerance;
      }
      rep.pass = rep.pass && fit.growth_pass && fit.decay_pass;
      rep.fits.push_back(fit);
    }
  }

  // telescoping: sum of levels vs the mother kernel on resolved separations
  if (kernel.mother) {
    double lo = kernel.rho * std::pow(2.0, -kernel.depth);
    double hi = kernel.rho / 2.0;
    for (int i = 0; i < 200; ++i) {
      double t = lo * std::pow(hi / lo, (i + 0.5) / 200.0);
      Vec u(d);
      u[0] = t;
      if (d == 2) {
        double th = 2.0 * M_PI * (i % 17) / 17.0;
        u[0] = t * std::cos(th);
        u[1] = t * std::sin(th);
      }
      Vec x = center + u;
      double mother = kernel.mother(x, center);
      if (mother == 0.0) continue;
      double err = std::abs(kernel.truncated(x, center) - mother) / std::abs(mother);
      rep.telescoping_error = std::max(rep.telescoping_error, err);
    }
    rep.pass = rep.pass && rep.telescoping_error <= 1e-11;
  }
  return rep;
}

ApplyResult apply_kernel(const DyadicKernel& kernel, const Distribution& f, int depth,
                         const Box& out_box, double grid_spacing) {
  ApplyResult res;
  const int d = kernel.dim;
  std::vector<int> shape(d);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    shape[i] = static_cast<int>(std::floor((out_box.hi[i] - out_box.lo[i]) / grid_spacing)) + 1;
    total *= shape[i];
  }
  std::vector<double> values(total, 0.0);
  res.level_magnitudes.assign(depth + 1, 0.0);

  std::vector<Vec> nodes;
  nodes.reserve(total);
  std::vector<int> idx(d, 0);
  for (;;) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = out_box.lo[i] + idx[i] * grid_spacing;
    nodes.push_back(x);
    int i = d - 1;
    while (i >= 0 && ++idx[i] == shape[i]) idx[i--] = 0;
    if (i < 0) break;
  }

  for (int n = 0; n <= depth; ++n) {
    double mag = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      double c = f.pair(kernel.section(n, nodes[j]));
      values[j] += c;
      mag = std::max(mag, std::abs(c));
    }
    res.level_magnitudes[n] = mag;
  }
  double peak = *std::max_element(res.level_magnitudes.begin(),
                                  res.level_magnitudes.end());
  res.converged = peak <= 0.0 || res.level_magnitudes.back() < 0.5 * peak;
  res.out = Distribution::grid_density(out_box.lo, grid_spacing, shape, values);
  return res;
}

}  // namespace kernels
}  // namespace germcal
