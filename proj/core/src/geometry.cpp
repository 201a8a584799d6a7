#include "germcal/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace germcal {
namespace geometry {

namespace {

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// Poincare disc -> unit hyperboloid (h0, hvec), <h,h>_L = h0^2 - |hvec|^2 = 1
void disc_to_hyperboloid(const Vec& x, double& h0, Vec& hv) {
  double s = x.norm2();
  h0 = (1.0 + s) / (1.0 - s);
  hv = x * (2.0 / (1.0 - s));
}

Vec hyperboloid_to_disc(double h0, const Vec& hv) { return hv / (1.0 + h0); }

double lorentz(double a0, const Vec& av, double b0, const Vec& bv) {
  return a0 * b0 - av.dot(bv);
}

}  // namespace

Manifold Manifold::euclidean(int dim) { return Manifold(Kind::Euclidean, dim, 0.0); }

Manifold Manifold::sphere(int dim, double radius) {
  if (radius <= 0.0) throw ParameterError("sphere: radius must be positive");
  return Manifold(Kind::Sphere, dim, radius);
}

Manifold Manifold::hyperbolic(int dim, double curvature) {
  if (curvature >= 0.0) throw ParameterError("hyperbolic: curvature must be negative");
  return Manifold(Kind::Hyperbolic, dim, -curvature);
}

double Manifold::curvature_bound() const {
  switch (kind_) {
    case Kind::Euclidean:
      return 0.0;
    case Kind::Sphere:
      return 1.0 / (param_ * param_);
    case Kind::Hyperbolic:
      return param_;
  }
  return 0.0;
}

double Manifold::curvature_radius(double cap) const {
  double s = curvature_bound();
  if (s == 0.0) return cap;
  return std::min(cap, M_PI / (8.0 * std::sqrt(s)));
}

double Manifold::convexity_radius(double cap) const {
  if (kind_ == Kind::Sphere) return M_PI * param_ / 2.0;
  return cap;
}

double Manifold::injectivity_bound(const Vec&) const {
  if (kind_ == Kind::Sphere) return M_PI * param_;
  return std::numeric_limits<double>::infinity();
}

Vec Manifold::reference_point() const {
  if (kind_ == Kind::Sphere) {
    Vec p(dim_ + 1);
    p[dim_] = param_;
    return p;
  }
  return Vec(dim_);
}

std::vector<Vec> Manifold::frame(const Vec& p) const {
  std::vector<Vec> fr;
  if (kind_ == Kind::Euclidean) {
    for (int i = 0; i < dim_; ++i) {
      Vec e(dim_);
      e[i] = 1.0;
      fr.push_back(e);
    }
    return fr;
  }
  if (kind_ == Kind::Sphere) {
    // orthonormal basis of p^perp, skipping the axis most aligned with p
    int skip = 0;
    for (int i = 1; i <= dim_; ++i)
      if (std::abs(p[i]) > std::abs(p[skip])) skip = i;
    Vec pn = p / p.norm();
    for (int i = 0; i <= dim_; ++i) {
      if (i == skip) continue;
      Vec e(dim_ + 1);
      e[i] = 1.0;
      e -= pn * e.dot(pn);
      for (const Vec& f : fr) e -= f * e.dot(f);
      fr.push_back(e / e.norm());
    }
    return fr;
  }
  // hyperbolic: L-orthonormalize spatial axes projected to the tangent at h
  double h0;
  Vec hv(dim_);
  disc_to_hyperboloid(p, h0, hv);
  for (int i = 0; i < dim_; ++i) {
    Vec e(dim_);
    e[i] = 1.0;
    double e0 = 0.0;
    // project to tangent: u = e - <h,e>_L h with <h,h>_L = 1
    double he = lorentz(h0, hv, e0, e);
    double u0 = e0 - he * h0;
    Vec uv = e - hv * he;
    // L-Gram-Schmidt with the positive-definite induced metric -<.,.>_L
    for (const Vec& f : fr) {
      // stored frame vectors carry (f0, fvec) packed: f[dim_] holds f0
      double f0 = f[dim_];
      Vec fv(dim_);
      for (int j = 0; j < dim_; ++j) fv[j] = f[j];
      double c = -lorentz(u0, uv, f0, fv);
      u0 -= c * f0;
      uv -= c * fv;
    }
    double nrm = std::sqrt(-lorentz(u0, uv, u0, uv));
    Vec packed(dim_ + 1);
    for (int j = 0; j < dim_; ++j) packed[j] = uv[j] / nrm;
    packed[dim_] = u0 / nrm;
    fr.push_back(packed);
  }
  return fr;
}

Vec Manifold::exp_map(const Vec& p, const Vec& v) const {
  double t = v.norm();
  if (t >= injectivity_bound(p))
    throw GeometryError("exp_map: |v| beyond the injectivity bound");
  if (kind_ == Kind::Euclidean) return p + v;

  if (kind_ == Kind::Sphere) {
    if (t == 0.0) return p;
    std::vector<Vec> fr = frame(p);
    Vec dir(dim_ + 1);
    for (int i = 0; i < dim_; ++i) dir += fr[i] * (v[i] / t);
    double th = t / param_;
    return p * std::cos(th) + dir * (param_ * std::sin(th));
  }

  // hyperbolic, via the unit hyperboloid scaled by 1/sqrt(c)
  if (t == 0.0) return p;
  double c = param_;
  double h0;
  Vec hv(dim_);
  disc_to_hyperboloid(p, h0, hv);
  std::vector<Vec> fr = frame(p);
  double u0 = 0.0;
  Vec uv(dim_);
  for (int i = 0; i < dim_; ++i) {
    u0 += fr[i][dim_] * (v[i] / t);
    for (int j = 0; j < dim_; ++j) uv[j] += fr[i][j] * (v[i] / t);
  }
  double tu = t * std::sqrt(c);
  double g0 = std::cosh(tu) * h0 + std::sinh(tu) * u0;
  Vec gv = hv * std::cosh(tu) + uv * std::sinh(tu);
  return hyperboloid_to_disc(g0, gv);
}

Vec Manifold::log_map(const Vec& p, const Vec& q) const {
  if (kind_ == Kind::Euclidean) return q - p;

  if (kind_ == Kind::Sphere) {
    double ip = clamp(p.dot(q) / (param_ * param_), -1.0, 1.0);
    double th = std::acos(ip);
    Vec w = q - p * ip;
    double wn = w.norm();
    Vec out(dim_);
    if (th * param_ >= injectivity_bound(p) - 1e-12 || (wn < 1e-300 && ip < 0.0))
      throw GeometryError("log_map: point at or beyond the antipode");
    if (wn < 1e-300) return out;  // q == p
    std::vector<Vec> fr = frame(p);
    for (int i = 0; i < dim_; ++i) out[i] = param_ * th * w.dot(fr[i]) / wn;
    return out;
  }

  double c = param_;
  double h0, g0;
  Vec hv(dim_), gv(dim_);
  disc_to_hyperboloid(p, h0, hv);
  disc_to_hyperboloid(q, g0, gv);
  double ip = std::max(1.0, lorentz(h0, hv, g0, gv));
  double tu = std::acosh(ip);
  Vec out(dim_);
  if (tu < 1e-300) return out;
  // tangent component of g at h
  double w0 = g0 - ip * h0;
  Vec wv = gv - hv * ip;
  double wn = std::sqrt(std::max(0.0, -lorentz(w0, wv, w0, wv)));
  if (wn < 1e-300) return out;
  std::vector<Vec> fr = frame(p);
  double t = tu / std::sqrt(c);
  for (int i = 0; i < dim_; ++i) {
    Vec fv(dim_);
    for (int j = 0; j < dim_; ++j) fv[j] = fr[i][j];
    double f0 = fr[i][dim_];
    out[i] = -t * lorentz(w0, wv, f0, fv) / wn;
  }
  return out;
}

double Manifold::distance(const Vec& p, const Vec& q) const {
  switch (kind_) {
    case Kind::Euclidean:
      return dist(p, q);
    case Kind::Sphere: {
      double ip = clamp(p.dot(q) / (param_ * param_), -1.0, 1.0);
      return param_ * std::acos(ip);
    }
    case Kind::Hyperbolic: {
      double sq = 1.0 - q.norm2(), sp = 1.0 - p.norm2();
      double arg = 1.0 + 2.0 * (p - q).norm2() / (sp * sq);
      return std::acosh(std::max(1.0, arg)) / std::sqrt(param_);
    }
  }
  return 0.0;
}

double Manifold::normal_volume_density(double r) const {
  if (kind_ == Kind::Euclidean || dim_ == 1) return 1.0;
  if (r == 0.0) return 1.0;
  if (kind_ == Kind::Sphere) {
    double u = r / param_;
    return std::pow(std::sin(u) / u, dim_ - 1);
  }
  double u = r * std::sqrt(param_);
  return std::pow(std::sinh(u) / u, dim_ - 1);
}

Vec Chart::to_chart(const Vec& q) const {
  Vec v = manifold.log_map(base, q);
  return v;
}

Vec Chart::from_chart(const Vec& x) const { return manifold.exp_map(base, x); }

double Region::rho(double cap) const {
  return std::min(manifold.convexity_radius(cap) / 2.0, 1.0);
}

double convexity_radius(const Manifold& m, const Region&, double cap) {
  return m.convexity_radius(cap);
}

GeometryConstants equivalence_constants(const Manifold& m, const Vec& p,
                                        const Region& region, int n_samples,
                                        std::uint64_t seed) {
  double rc = m.convexity_radius();
  double rs = m.curvature_radius();
  if (region.radius > std::min(rc / 2.0, rs) + 1e-12)
    throw GeometryError("equivalence_constants: region radius exceeds min{R_C/2, R_S}");

  GeometryConstants out;
  out.curvature_radius = rs;
  out.convexity_radius = rc;
  if (m.kind() == Kind::Euclidean) return out;  // translation chart: exactly (1,1)

  Rng rng(seed);
  int d = m.dim();
  auto sample_tangent = [&]() {
    // rejection sampling of the d-ball
    for (;;) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v[i] = rng.uniform(-1.0, 1.0);
      if (v.norm2() <= 1.0) return v * region.radius;
    }
  };

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    Vec vq = sample_tangent(), vr = sample_tangent();
    Vec q = m.exp_map(p, vq), r = m.exp_map(p, vr);
    double dg = m.distance(q, r);
    if (dg == 0.0) continue;
    double ratio = dist(vq, vr) / dg;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  out.c_low = lo;
  out.c_high = hi;
  return out;
}

double ManifoldTestFunction::value(const Vec& q) const {
  const Manifold& m = chart.manifold;
  double dg = m.distance(chart.base, q);
  if (dg / lambda >= cutoff) return 0.0;
  Vec u = chart.to_chart(q) / lambda;
  return std::pow(lambda, -m.dim()) * flat.value(u);
}

ManifoldTestFunction rescale_on_manifold(const testfn::TestFunction& phi,
                                         const Manifold& m, const Vec& p,
                                         double lambda, const Region& region) {
  if (lambda <= 0.0) throw ParameterError("rescale_on_manifold: lambda must be positive");
  double rho_u = region.rho();
  if (phi.support_radius() > rho_u + 1e-12)
    throw SupportError("rescale_on_manifold: profile support exceeds rho_U");
  ManifoldTestFunction f{Chart::at(m, p), phi, lambda, m.convexity_radius()};
  return f;
}

TransferContext TransferContext::make(const Manifold& m, const Vec& p,
                                      double region_radius, double chart_capacity,
                                      std::uint64_t seed, int n_samples) {
  TransferContext ctx{Chart::at(m, p),
                      Region{m, p, region_radius},
                      {},
                      chart_capacity - region_radius};
  ctx.constants = equivalence_constants(m, p, ctx.region, n_samples, seed);
  return ctx;
}

double TransferContext::cst_k() const {
  return std::min({region.rho(), d_k * constants.c_high, constants.c_high});
}

double TransferContext::cst_k_prime() const {
  return std::min(region.rho() / constants.c_low, d_k);
}

Transferred transfer_testfn(TransferDirection dir, const testfn::TestFunction& phi,
                            const Vec& q, double lambda, double lambdabar,
                            const TransferContext& ctx, int order) {
  if (lambda <= 0.0 || lambda >= 1.0)
    throw ParameterError("transfer_testfn: lambda must lie in (0,1)");
  const Manifold& m = ctx.chart.manifold;
  const int d = m.dim();
  // reach covers off-center inputs (e.g. recentered functions)
  double reach = phi.center.norm() + phi.support_radius();
  double bound = std::pow(lambdabar, -order - d);

  if (dir == TransferDirection::ToManifold) {
    double limit = std::min(m.convexity_radius() / ctx.constants.c_low, ctx.d_k);
    if (lambdabar > limit * (1.0 + 1e-12))
      throw RangeError("transfer_testfn: lambdabar out of range for to_manifold");
    // g(v) = lambda^d (exp_* phi^{lambda lambdabar}_c)(exp_q(lambda v)), so the
    // manifold rescaling of g at (q, lambda) reproduces the pushforward.
    Chart chart_q = Chart::at(m, q);
    Chart chart_p = ctx.chart;
    Vec c = chart_p.to_chart(q);
    testfn::TestFunction pushed = testfn::rescale(phi, c, lambda * lambdabar);
    double radius = std::min(1.5 * lambdabar * reach / ctx.constants.c_low,
                             0.9 * m.convexity_radius());
    auto prof = testfn::numeric_profile(d, radius, [=](const Vec& v) {
      Vec t = chart_p.to_chart(chart_q.from_chart(lambda * v));
      return std::pow(lambda, d) * pushed.value(t);
    });
    testfn::TestFunction fn{prof, Vec(d), 1.0, 1.0};
    // the same manifold function read back in the chart at p, shifted to c
    auto amb = testfn::numeric_profile(d, 1.3 * radius, [=](const Vec& w) {
      return prof->value(chart_q.to_chart(chart_p.from_chart(c + w)));
    });
    return Transferred{fn, testfn::TestFunction{amb, Vec(d), 1.0, 1.0}, bound};
  }

  // ToChart: psi(w) = lambda^d (manifold rescaling of phi at (q, lambda
  // lambdabar)) evaluated at exp_p(c + lambda w); the flat rescaling of psi at
  // (chart(q), lambda) reproduces the pullback.
  double limit =
      std::min({ctx.region.rho(), ctx.d_k * ctx.constants.c_high, ctx.constants.c_high});
  if (lambdabar > limit * (1.0 + 1e-12))
    throw RangeError("transfer_testfn: lambdabar out of range for to_chart");
  Chart chart_q = Chart::at(m, q);
  Chart chart_p = ctx.chart;
  Vec c = chart_p.to_chart(q);
  ManifoldTestFunction scaled{chart_q, phi, lambda * lambdabar, m.convexity_radius()};
  double radius = std::min(1.5 * lambdabar * reach * ctx.constants.c_high,
                           0.9 * ctx.d_k + ctx.region.radius);
  auto prof = testfn::numeric_profile(d, radius, [=](const Vec& w) {
    Vec point = chart_p.from_chart(c + lambda * w);
    return std::pow(lambda, d) * scaled.value(point);
  });
  testfn::TestFunction fn{prof, Vec(d), 1.0, 1.0};
  return Transferred{fn, fn, bound};
}

ManifoldRecentered recenter_on_manifold(const testfn::TestFunction& phi, const Vec& p,
                                        const Vec& q, double lambda, int order,
                                        const TransferContext& ctx) {
  const Manifold& m = ctx.chart.manifold;
  const int d = m.dim();
  double cst = ctx.cst_k();
  double cstp = ctx.cst_k_prime();
  double cst_tilde = cstp / (2.0 * ctx.constants.c_high);
  if (m.distance(p, q) > cst_tilde)
    throw RangeError("recenter_on_manifold: points too far apart");
  if (lambda >= std::min(cst, cstp) / 2.0)
    throw RangeError("recenter_on_manifold: lambda too large");

  // chart centered at p throughout
  TransferContext at_p = ctx;
  at_p.chart = Chart::at(m, p);
  double lambda_p = lambda / cst;

  // step 1: pull phi^{lambda_p * cst}_p = phi^lambda_p to the chart
  testfn::TestFunction psi =
      transfer_testfn(TransferDirection::ToChart, phi, p, lambda_p, cst, at_p, order).fn;

  // step 2: flat recentering from 0 = chart(p) to chart(q)
  Vec cq = at_p.chart.to_chart(q);
  auto rec = testfn::recenter_flat(psi, Vec(d), lambda_p, cq);
  double lambda1 = rec.lambda1;

  // step 3: push the recentered function back through the chart at q
  double lambda2 = lambda1 / cstp;
  testfn::TestFunction xi =
      transfer_testfn(TransferDirection::ToManifold, rec.xi, q, lambda2, cstp, at_p, order)
          .fn;

  double bound = std::pow(cstp * lambda_p / lambda1, -order - d);
  return ManifoldRecentered{xi, lambda2, bound, order};
}

double integrate_geodesic_ball(const Manifold& m, const Vec& p, double radius,
                               const std::function<double(const Vec&)>& f,
                               int panels, int order) {
  Chart chart = Chart::at(m, p);
  auto g = [&](const Vec& v) {
    double r = v.norm();
    if (r >= radius) return 0.0;
    return f(chart.from_chart(v)) * m.normal_volume_density(r);
  };
  if (m.dim() == 1) {
    return quad::integrate([&](double x) { return g(Vec{x}); }, -radius, radius,
                           panels, order);
  }
  if (m.dim() == 2) {
    return quad::integrate_disc(g, Vec(2), radius, panels, panels, order);
  }
  throw DimensionError("integrate_geodesic_ball: dim must be 1 or 2");
}

}  // namespace geometry
}  // namespace germcal
