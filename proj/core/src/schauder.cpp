#include "germcal/schauder.hpp"

#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace germcal {
namespace schauder {

using germs::as_pair_fn;
using germs::PairFn;

namespace {

// sum_{n <= depth} int K_n(y, z) d(z) dz for a member density d. The z cells
// are dyadically graded toward y so that each cell sees O(1) kernel levels;
// the kernel is summed over its active levels per evaluation.
double kernel_on_density(const DyadicKernel& kern, int depth, const Vec& y,
                         const germs::MemberDensity& den,
                         const MultiIndex& deriv = {}) {
  const int d = kern.dim;
  double r0 = kern.rho;
  double rmin = kern.level_radius(depth);
  bool plain = deriv.dim() == 0 || deriv.order() == 0;
  MultiIndex zero(d);
  if (d == 1) {
    std::vector<double> hot{y[0]};
    for (const Vec& h : den.hotspots)
      if (std::abs(h[0] - y[0]) < r0) hot.push_back(h[0]);
    auto f = [&](double z) {
      double kv = plain ? kern.sum_value(y, Vec{z}, depth)
                        : kern.sum_derivative(deriv, zero, y, Vec{z}, depth);
      return kv * den.eval(Vec{z});
    };
    double total = 0.0;
    for (auto [lo, hi] : quad::graded_cells(y[0] - r0, y[0] + r0, hot, rmin / 8.0)) {
      int panels = (hi - lo) > r0 / 8.0 ? 4 : 2;
      total += quad::integrate(f, lo, hi, panels, 12);
    }
    return total;
  }
  // d == 2: radial grading toward y, polar cells; density hotspots handled by
  // an extra polar patch when distinct from y
  auto fv = [&](const Vec& z) {
    double kv = plain ? kern.sum_value(y, z, depth)
                      : kern.sum_derivative(deriv, zero, y, z, depth);
    return kv * den.eval(z);
  };
  double total = 0.0;
  double hi = r0;
  const quad::Rule& rule = quad::gauss(10);
  for (int lev = 0; hi > rmin / 4.0 && lev < 64; ++lev) {
    double lo = hi / 2.0;
    // annulus [lo, hi] x angle
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.x[i];
      double wr = 0.5 * (hi - lo) * rule.w[i];
      double ring = 0.0;
      int na = 20;
      for (int a = 0; a < na; ++a) {
        double th = 2.0 * M_PI * (a + 0.5) / na;
        Vec z = y;
        z[0] += r * std::cos(th);
        z[1] += r * std::sin(th);
        ring += fv(z);
      }
      total += wr * r * ring * (2.0 * M_PI / na);
    }
    hi = lo;
  }
  return total;
}

}  // namespace

Germ integrate_germ(const DyadicKernel& kernel, const Germ& g, int depth) {
  auto kern = kernel;
  Germ::Evaluator eval;
  if (g.has_density()) {
    // integrate the kernel against the member density, then against phi
    eval = [kern, g, depth](const Vec& x, const PairFn& phi) {
      germs::MemberDensity den = g.member_density(x);
      auto applied = [&](const Vec& y) { return kernel_on_density(kern, depth, y, den); };
      double fine = phi.scale_hint();
      if (kern.dim == 1) {
        double lo = phi.support.lo[0], hi = phi.support.hi[0];
        int panels =
            std::min(64, std::max(12, static_cast<int>(std::ceil((hi - lo) / (fine / 6.0)))));
        auto f = [&](double y) { return phi.eval(Vec{y}) * applied(Vec{y}); };
        double prev = quad::integrate(f, lo, hi, panels, 12);
        for (int p = 2 * panels; p <= 128; p *= 2) {
          double cur = quad::integrate(f, lo, hi, p, 12);
          bool done = std::abs(cur - prev) <= 1e-10 * std::max(1.0, std::abs(cur));
          prev = cur;
          if (done) break;
        }
        return prev;
      }
      int panels = std::min(
          24, std::max(6, static_cast<int>(std::ceil(
                              (phi.support.hi[0] - phi.support.lo[0]) / (fine / 3.0)))));
      auto f = [&](const Vec& y) { return phi.eval(y) * applied(y); };
      double prev = quad::integrate_box(f, phi.support, panels, 10);
      for (int p = 2 * panels; p <= 96; p *= 2) {
        double cur = quad::integrate_box(f, phi.support, p, 10);
        bool done = std::abs(cur - prev) <= 1e-9 * std::max(1.0, std::abs(cur));
        prev = cur;
        if (done) break;
      }
      return prev;
    };
  } else {
    eval = [kern, g, depth](const Vec& x, const PairFn& phi) {
      PairFn transposed;
      transposed.eval = [kern, depth, phi](const Vec& z) {
        double s = 0.0;
        for (int n = 0; n <= depth; ++n) s += kern.transposed_level(n, z, phi);
        return s;
      };
      transposed.support = phi.support.inflated(kern.rho);
      transposed.feature_scale = std::min(phi.scale_hint(), kern.rho / 2.0);
      return g.pair(x, transposed);
    };
  }
  Germ out(g.dim(), g.domain(), eval, g.meta());
  if (out.meta().alpha_bar) *out.meta().alpha_bar += kern.beta;
  if (out.meta().alpha) *out.meta().alpha += kern.beta;
  if (out.meta().gamma && std::isfinite(*out.meta().gamma))
    *out.meta().gamma += kern.beta;
  return out;
}

JetEstimate pointwise_derivative(const Germ& g, const Vec& x, const MultiIndex& k,
                                 const TestFunction& mollifier,
                                 const std::vector<double>& scales) {
  if (scales.size() < 2)
    throw ParameterError("pointwise_derivative: need at least two scales");
  // derivative profile of the mollifier
  testfn::ProfilePtr prof = mollifier.profile;
  for (int i = 0; i < k.dim(); ++i)
    for (int j = 0; j < k[i]; ++j) prof = testfn::derivative_profile(prof, i);
  TestFunction dmoll{prof, mollifier.center, mollifier.scale, mollifier.coeff};
  double sign = (k.order() % 2 == 0) ? 1.0 : -1.0;

  std::vector<double> vals;
  for (double eps : scales) {
    double v = g.pair(x, as_pair_fn(testfn::rescale(dmoll, x, eps)));
    vals.push_back(sign * std::pow(eps, -k.order()) * v);
  }
  // Richardson in eps^2 (scales halve)
  std::vector<double> cur = vals;
  double last_change = 0.0;
  int level = 1;
  while (cur.size() > 1) {
    std::vector<double> next;
    double w = std::pow(4.0, level);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i)
      next.push_back((w * cur[i + 1] - cur[i]) / (w - 1.0));
    last_change = std::abs(next.back() - cur.back());
    cur = next;
    ++level;
  }
  JetEstimate est;
  est.value = cur.back();
  est.convergence = last_change;
  double scale = std::max(1.0, std::abs(est.value));
  est.converged = last_change <= 1e-4 * scale;
  return est;
}

namespace {

struct VecLess {
  bool operator()(const Vec& a, const Vec& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (int i = 0; i < a.size(); ++i) {
      if (a[i] < b[i]) return true;
      if (a[i] > b[i]) return false;
    }
    return false;
  }
};

// Same mollified estimator as pointwise_derivative, specialized to germs of
// the form K(density germ): the exact derivative d^k H_x = sum_n d1^k K_n * den
// is tabulated once through the closed-form kernel derivative and splined,
// then the mollified pairings and Richardson steps run on the spline. This is
// an exact rewrite of the estimator without the eps^{-|k|} noise blow-up.
double kernel_jet_estimate(const DyadicKernel& kern, int depth,
                           const germs::MemberDensity& den, const Vec& x,
                           const MultiIndex& k, const TestFunction& mollifier,
                           const std::vector<double>& scales) {
  double eps_max = *std::max_element(scales.begin(), scales.end());
  double radius = eps_max * mollifier.support_radius() * 1.02;
  const int n_tab = 256;
  std::vector<double> ys(n_tab + 1), bs(n_tab + 1);
  MultiIndex zero(k.dim());
  for (int i = 0; i <= n_tab; ++i) {
    ys[i] = x[0] - radius + 2.0 * radius * i / n_tab;
    bs[i] = kernel_on_density(kern, depth, Vec{ys[i]}, den, k);
  }
  gsl_spline* spline = gsl_spline_alloc(gsl_interp_cspline, n_tab + 1);
  gsl_interp_accel* acc = gsl_interp_accel_alloc();
  gsl_spline_init(spline, ys.data(), bs.data(), n_tab + 1);

  std::vector<double> vals;
  for (double eps : scales) {
    TestFunction rho = testfn::rescale(mollifier, x, eps);
    double r = rho.support_radius();
    vals.push_back(quad::integrate(
        [&](double y) {
          return rho.value(Vec{y}) * gsl_spline_eval(spline, y, acc);
        },
        x[0] - r, x[0] + r, 24, 12));
  }
  gsl_spline_free(spline);
  gsl_interp_accel_free(acc);

  int level = 1;
  while (vals.size() > 1) {
    std::vector<double> next;
    double w = std::pow(4.0, level);
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
      next.push_back((w * vals[i + 1] - vals[i]) / (w - 1.0));
    vals = next;
    ++level;
  }
  return vals.back();
}

// per-point Taylor jets of a germ, computed on demand
class JetCache {
 public:
  using JetFn = std::function<double(const Vec&, const MultiIndex&)>;

  JetCache(int dim, int max_order, JetFn fn)
      : dim_(dim), order_(max_order), fn_(std::move(fn)) {}

  const std::vector<double>& at(const Vec& x) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    auto idxs = MultiIndex::enumerate(dim_, order_);
    std::vector<double> jets;
    jets.reserve(idxs.size());
    for (const auto& k : idxs) jets.push_back(fn_(x, k));
    return cache_.emplace(x, std::move(jets)).first->second;
  }

  int order() const { return order_; }

 private:
  int dim_;
  int order_;
  JetFn fn_;
  std::mutex mu_;
  std::map<Vec, std::vector<double>, VecLess> cache_;
};

// G_x(phi) - sum_{|k| <= jet_cap, |k| < gamma_cut} jets_k (y-x)^k/k! paired
Germ subtract_jet(const Germ& g, double gamma_cut,
                  std::shared_ptr<JetCache> cache) {
  auto eval = [g, gamma_cut, cache](const Vec& x, const PairFn& phi) {
    double s = g.pair(x, phi);
    auto idxs = MultiIndex::enumerate(g.dim(), cache->order());
    const std::vector<double>& jets = cache->at(x);
    std::vector<double> mom = germs::pairfn_moments(phi, cache->order(), x);
    for (std::size_t i = 0; i < idxs.size(); ++i) {
      if (idxs[i].order() > gamma_cut) continue;
      s -= jets[i] / idxs[i].factorial() * mom[i];
    }
    return s;
  };
  return Germ(g.dim(), g.domain(), eval, g.meta());
}

}  // namespace

Germ renormalize(const Germ& g, double gamma, const TestFunction& mollifier,
                 const std::vector<double>& scales) {
  if (gamma <= 0.0 || gamma == std::floor(gamma))
    throw ParameterError("renormalize: gamma must be positive non-integer");
  int cap = static_cast<int>(std::floor(gamma));
  auto cache = std::make_shared<JetCache>(
      g.dim(), cap, [g, mollifier, scales](const Vec& x, const MultiIndex& k) {
        return pointwise_derivative(g, x, k, mollifier, scales).value;
      });
  Germ out = subtract_jet(g, gamma, cache);
  out.meta().alpha_bar = gamma;
  return out;
}

void check_constraints(const Germ& g, const DyadicKernel& kernel,
                       const SchauderConfig& cfg) {
  double gb = cfg.gamma + cfg.beta;
  if (std::abs(gb - std::round(gb)) < 1e-9)
    throw ConfigurationError("schauder: gamma + beta must not be an integer");
  if (kernel.order_m <= gb)
    throw ConfigurationError("schauder: kernel order m must exceed gamma + beta");
  if (g.meta().alpha) {
    double alpha = *g.meta().alpha;
    if (std::abs(alpha + cfg.beta) < 1e-9)
      throw ConfigurationError("schauder: alpha + beta must not vanish");
    if (kernel.order_r <= -alpha)
      throw ConfigurationError("schauder: kernel order r must exceed -alpha");
  }
}

SchauderOutput schauder_map(const Germ& g, double gamma, double beta,
                            const DyadicKernel& kernel, const SchauderConfig& cfg) {
  check_constraints(g, kernel, cfg);
  SchauderOutput out;
  out.gamma_out = gamma + beta;

  reconstruct::ReconstructionResult rec = reconstruct::run(g, gamma, cfg.rec);
  out.rf = rec.out;

  Germ gap = g.minus(out.rf);
  Germ h = integrate_germ(kernel, gap, cfg.depth);

  int cap = static_cast<int>(std::floor(gamma + beta));
  JetCache::JetFn jet_fn;
  if (gap.has_density() && g.dim() == 1) {
    jet_fn = [kernel, gap, cfg](const Vec& x, const MultiIndex& k) {
      return kernel_jet_estimate(kernel, cfg.depth, gap.member_density(x), x, k,
                                 cfg.rec.mollifier, cfg.jet_scales);
    };
  } else {
    jet_fn = [h, cfg](const Vec& x, const MultiIndex& k) {
      return pointwise_derivative(h, x, k, cfg.rec.mollifier, cfg.jet_scales).value;
    };
  }
  auto cache = std::make_shared<JetCache>(g.dim(), cap, std::move(jet_fn));
  out.difference = subtract_jet(h, gamma + beta, cache);
  out.difference.meta().alpha_bar = gamma + beta;
  out.difference.meta().gamma = gamma + beta;
  if (g.meta().alpha) out.difference.meta().alpha = *g.meta().alpha - g.dim();

  // K^{gamma,beta} G = difference + K(R^gamma G) as a constant germ; the
  // kernel application against the sampled reconstruction is paired lazily
  auto kern = kernel;
  auto rf = out.rf;
  int depth = cfg.depth;
  Germ krf(g.dim(), g.domain(),
           [kern, rf, depth](const Vec&, const PairFn& phi) {
             double s = 0.0;
             PairFn transposed;
             transposed.eval = [&](const Vec& z) {
               double acc = 0.0;
               for (int n = 0; n <= depth; ++n)
                 acc += kern.transposed_level(n, z, phi);
               return acc;
             };
             transposed.support = phi.support.inflated(kern.rho);
             transposed.feature_scale = std::min(phi.scale_hint(), kern.rho / 2.0);
             s = rf.pair(transposed);
             return s;
           });
  out.mapped = Germ::combine(1.0, out.difference, 1.0, krf);
  out.mapped.meta() = out.difference.meta();
  return out;
}

SchauderReport verify_schauder(const Germ& g, double gamma, double beta,
                               const DyadicKernel& kernel, const SchauderConfig& cfg,
                               const VerifyConfig& vcfg) {
  SchauderReport rep;
  SchauderOutput out = schauder_map(g, gamma, beta, kernel, cfg);

  // (i) homogeneity slope of the difference germ at target gamma + beta
  rep.difference_homogeneity = seminorms::fit_exponent(
      out.difference, vcfg.sweep, seminorms::FitStatistic::Homogeneity);

  // (ii) coherence of the difference at (alpha', gamma + beta)
  rep.alpha_prime = out.difference.meta().alpha.value_or(
      g.meta().alpha.value_or(0.0) - g.dim());
  {
    seminorms::ModeParams p;
    p.alpha = rep.alpha_prime;
    p.gamma = gamma + beta;
    rep.difference_coherence =
        seminorms::seminorm(out.difference, vcfg.sweep, seminorms::Mode::Coherence, p);
  }

  // (iii) commuting diagram: R^{gamma+beta}(K^{gamma,beta} G) vs K(R^gamma G)
  {
    kernels::ApplyResult applied =
        kernels::apply_kernel(kernel, out.rf, cfg.depth, vcfg.diagram_box,
                              vcfg.diagram_spacing);
    double eps = std::pow(2.0, -cfg.rec.n_max) * cfg.rec.lambda_bar;
    auto& mapped = out.mapped;
    auto moll = cfg.rec.mollifier;
    std::vector<double> sups(vcfg.diagram_lambdas.size(), 0.0);
    for (std::size_t j = 0; j < vcfg.diagram_lambdas.size(); ++j) {
      double lam = vcfg.diagram_lambdas[j];
      double best = 0.0;
      for (const auto& x : vcfg.diagram_points) {
        TestFunction probe = testfn::rescale(vcfg.diagram_testfn, x, lam);
        PairFn probe_fn = as_pair_fn(probe);
        // <R(KF), probe> by quadrature of the diagonal mollification
        double a = quad::integrate(
            [&](double z) {
              Vec zz{z};
              double molli =
                  mapped.pair(zz, as_pair_fn(testfn::rescale(moll, zz, eps)));
              return molli * probe.value(zz);
            },
            x[0] - lam * probe.profile->support_radius(),
            x[0] + lam * probe.profile->support_radius(), 24, 12);
        double b = applied.out.pair(probe_fn);
        best = std::max(best, std::abs(a - b) / std::pow(lam, gamma + beta));
      }
      sups[j] = best;
    }
    rep.commuting_ratio = seminorms::fit_points(vcfg.diagram_lambdas, sups);
    for (double s : sups) rep.commuting_sup = std::max(rep.commuting_sup, s);
  }

  // (iv) continuity ratios
  {
    seminorms::ModeParams pin;
    pin.alpha = g.meta().alpha.value_or(std::min(0.0, gamma));
    pin.gamma = gamma;
    double in_coh = seminorms::seminorm(g, vcfg.sweep, seminorms::Mode::Coherence, pin);
    seminorms::ModeParams pout;
    pout.alpha = rep.alpha_prime;
    pout.gamma = gamma + beta;
    double out_coh = seminorms::seminorm(out.difference, vcfg.sweep,
                                         seminorms::Mode::Coherence, pout);
    rep.continuity_ratio_coherent = in_coh > 0.0 ? out_coh / in_coh : 0.0;
    seminorms::ModeParams ph;
    ph.alpha_bar = gamma + beta;
    double out_hom = seminorms::seminorm(out.difference, vcfg.sweep,
                                         seminorms::Mode::Homogeneity, ph);
    rep.continuity_ratio_homogeneous = in_coh > 0.0 ? out_hom / in_coh : 0.0;
  }
  return rep;
}

ManifoldSchauderResult schauder_on_chart(const MGerm& g, const geometry::Chart& chart,
                                         double gamma, double beta, double germ_range,
                                         SchauderConfig cfg) {
  const geometry::Manifold& m = chart.manifold;
  const int d = m.dim();

  // localization radius of Eq-style min{R_C/4, pi/(8 sqrt|S|), R/2}
  double r_loc = std::min({m.convexity_radius() / 4.0, m.curvature_radius(),
                           germ_range / 2.0});
  // chart-local kernel range small enough for the localized ball
  geometry::Region reg{m, chart.base, r_loc};
  auto gc = geometry::equivalence_constants(m, chart.base, reg, 4000, 23);
  double rho = std::min(r_loc / 4.0, gc.c_high * r_loc / 4.0);

  // localizer: bump equal to ~1 near the base, supported in B(base, 2 r_loc)
  auto localizer = [m, base = chart.base, r_loc](const Vec& q) {
    double t = m.distance(base, q) / (2.0 * r_loc);
    if (t >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
  };

  // pull the localized germ to the chart
  auto mg = g;
  auto ch = chart;
  auto eval = [mg, ch, localizer](const Vec& x, const PairFn& phi) {
    germs::ManifoldPairFn mp;
    mp.eval = [&](const Vec& q) { return localizer(q) * phi.eval(ch.to_chart(q)); };
    Vec c(phi.support.dim());
    double rad = 0.0;
    for (int i = 0; i < phi.support.dim(); ++i) {
      c[i] = 0.5 * (phi.support.lo[i] + phi.support.hi[i]);
      rad = std::max(rad, 0.5 * (phi.support.hi[i] - phi.support.lo[i]));
    }
    mp.center = ch.from_chart(c);
    mp.radius = 1.5 * rad * std::sqrt(static_cast<double>(phi.support.dim()));
    mp.feature_scale = phi.feature_scale;
    return mg.pair(ch.from_chart(x), mp);
  };
  Box dom = Box::cube(d, -2.0 * r_loc, 2.0 * r_loc);
  Germ flat(d, dom, eval, g.meta);

  DyadicKernel kern =
      kernels::build_kernel(kernels::KernelFamily::Riesz, beta, cfg.depth, dom, rho, d);

  cfg.gamma = gamma;
  cfg.beta = beta;
  SchauderOutput out = schauder_map(flat, gamma, beta, kern, cfg);

  ManifoldSchauderResult res;
  res.chart_difference = out.difference;
  res.chart_mapped = out.mapped;
  res.localizer_radius = r_loc;
  res.kernel_range = rho;
  return res;
}

}  // namespace schauder
}  // namespace germcal
