#include "germcal/seminorms.hpp"

#include <algorithm>
#include <cmath>

#include "germcal/parallel.hpp"

namespace germcal {
namespace seminorms {

namespace {
constexpr double kZeroFloor = 1e-300;
}

double SweepSpec::max_profile_radius() const {
  double r = 0.0;
  for (const auto& f : test_family) r = std::max(r, f.support_radius());
  for (const auto& f : weak_test_family) r = std::max(r, f.support_radius());
  return r;
}

std::vector<TestFunction> default_family(int dim, int order, int norm_grid) {
  if (norm_grid <= 0) norm_grid = dim == 1 ? 4096 : 400;
  std::vector<TestFunction> fam;
  auto add_normalized = [&](TestFunction f) {
    double n = testfn::cm_norm(f, order, norm_grid);
    fam.push_back(f.scaled_by(1.0 / n));
  };
  add_normalized(testfn::make_bump(dim));
  testfn::ProfilePtr cur = testfn::standard_bump(dim);
  for (int j = 1; j <= order; ++j) {
    cur = testfn::derivative_profile(cur, (j - 1) % dim);
    add_normalized(testfn::TestFunction{cur, Vec(dim), 1.0, 1.0});
  }
  add_normalized(testfn::make_bump(dim, testfn::BumpKind::PolyWeighted, 1));
  return fam;
}

std::vector<TestFunction> project_family(const std::vector<TestFunction>& family,
                                         int ell, int order, int norm_grid) {
  if (norm_grid <= 0 && !family.empty()) norm_grid = family.front().dim() == 1 ? 4096 : 400;
  std::vector<TestFunction> out;
  for (const auto& f : family) {
    TestFunction p = testfn::project_vanishing_moments(f, ell, order, norm_grid);
    // drop members annihilated by the projection
    if (testfn::cm_norm(p, 0, 256) > 1e-12) out.push_back(p);
  }
  return out;
}

SweepSpec make_sweep(const Box& region, const Box& domain, double lambda_bar,
                     std::vector<TestFunction> family, const SweepConfig& cfg,
                     std::vector<TestFunction> weak_family) {
  SweepSpec s;
  s.region = region;
  s.domain = domain;
  s.lambda_bar = lambda_bar;
  s.test_family = std::move(family);
  s.weak_test_family = std::move(weak_family);
  if (s.test_family.empty()) throw ParameterError("make_sweep: empty test family");

  // D_K^U guard: the largest rescaled support must stay inside the domain
  double rad = s.max_profile_radius();
  double dku = std::numeric_limits<double>::infinity();
  for (int i = 0; i < region.dim(); ++i) {
    dku = std::min(dku, region.lo[i] - domain.lo[i]);
    dku = std::min(dku, domain.hi[i] - region.hi[i]);
  }
  if (lambda_bar * rad > dku)
    throw ParameterError("make_sweep: lambda_bar exceeds dist(K, boundary of U)");

  for (int j = cfg.j0; j <= cfg.j1; ++j)
    s.lambdas.push_back(lambda_bar * std::pow(2.0, -j));

  const int d = region.dim();
  int n = cfg.lattice_per_axis;
  std::vector<int> idx(d, 0);
  for (;;) {
    Vec x(d);
    for (int i = 0; i < d; ++i)
      x[i] = region.lo[i] + (region.hi[i] - region.lo[i]) * (idx[i] + 0.5) / n;
    s.base_points.push_back(x);
    int i = d - 1;
    while (i >= 0 && ++idx[i] == n) idx[i--] = 0;
    if (i < 0) break;
  }
  Rng rng(cfg.seed);
  for (int i = 0; i < cfg.random_points; ++i) s.base_points.push_back(rng.point_in(region));

  s.pair_range = cfg.pair_range > 0.0 ? cfg.pair_range : region.diameter();
  Rng prng = rng.split(1);
  int attempts = 0;
  while (static_cast<int>(s.pairs.size()) < cfg.random_pairs && attempts < 100 * cfg.random_pairs) {
    ++attempts;
    Vec x = prng.point_in(region), y = prng.point_in(region);
    if (dist(x, y) <= s.pair_range) s.pairs.emplace_back(x, y);
  }
  return s;
}

namespace {

double pair_value(const Germ& g, const Vec& x, const Vec& y, const TestFunction& phi,
                  double lambda) {
  // (F_x - F_y)(phi^lambda_x)
  TestFunction scaled = testfn::rescale(phi, x, lambda);
  auto p = germs::as_pair_fn(scaled);
  return g.pair(x, p) - g.pair(y, p);
}

double coherence_sup(const Germ& g, const SweepSpec& sweep, double alpha, double gamma,
                     const std::vector<TestFunction>& family) {
  struct Task {
    const std::pair<Vec, Vec>* pr;
    double lambda;
    const TestFunction* phi;
  };
  std::vector<Task> tasks;
  for (const auto& pr : sweep.pairs)
    for (double l : sweep.lambdas)
      for (const auto& phi : family) tasks.push_back({&pr, l, &phi});
  std::vector<double> vals(tasks.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(tasks.size()), [&](std::int64_t i) {
    const Task& t = tasks[i];
    double num = std::abs(pair_value(g, t.pr->first, t.pr->second, *t.phi, t.lambda));
    double den = std::pow(t.lambda, alpha) *
                 std::pow(t.lambda + dist(t.pr->first, t.pr->second), gamma - alpha);
    vals[i] = num / den;
  });
  double best = 0.0;
  for (double v : vals) best = std::max(best, v);
  return best;
}

double homogeneity_sup(const Germ& g, const SweepSpec& sweep, double alpha_bar,
                       const std::vector<TestFunction>& family) {
  struct Task {
    const Vec* x;
    double lambda;
    const TestFunction* phi;
  };
  std::vector<Task> tasks;
  for (const auto& x : sweep.base_points)
    for (double l : sweep.lambdas)
      for (const auto& phi : family) tasks.push_back({&x, l, &phi});
  std::vector<double> vals(tasks.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(tasks.size()), [&](std::int64_t i) {
    const Task& t = tasks[i];
    double num = std::abs(g.pair(*t.x, germs::as_pair_fn(testfn::rescale(*t.phi, *t.x, t.lambda))));
    vals[i] = num / std::pow(t.lambda, alpha_bar);
  });
  double best = 0.0;
  for (double v : vals) best = std::max(best, v);
  return best;
}

// largest-scale pairings entering the weak modes
double large_scale_sup(const Germ& g, const SweepSpec& sweep, bool difference,
                       const std::vector<TestFunction>& family) {
  double big = sweep.lambda_bar;
  double best = 0.0;
  if (difference) {
    for (const auto& pr : sweep.pairs)
      for (const auto& phi : family)
        best = std::max(best, std::abs(pair_value(g, pr.first, pr.second, phi, big)));
  } else {
    for (const auto& x : sweep.base_points)
      for (const auto& phi : family)
        best = std::max(
            best, std::abs(g.pair(x, germs::as_pair_fn(testfn::rescale(phi, x, big)))));
  }
  return best;
}

}  // namespace

double seminorm(const Germ& g, const SweepSpec& sweep, Mode mode,
                const ModeParams& p) {
  if (sweep.lambdas.empty() || sweep.base_points.empty())
    throw ParameterError("seminorm: empty sweep");
  switch (mode) {
    case Mode::Coherence:
      return coherence_sup(g, sweep, p.alpha, p.gamma, sweep.test_family);
    case Mode::Homogeneity:
      return homogeneity_sup(g, sweep, p.alpha_bar, sweep.test_family);
    case Mode::WeakCoherence: {
      if (sweep.weak_test_family.empty())
        throw ParameterError("seminorm: weak mode needs a projected family");
      double t1 = large_scale_sup(g, sweep, true, sweep.test_family);
      double t2 = coherence_sup(g, sweep, p.alpha, p.gamma, sweep.weak_test_family);
      return t1 + t2;
    }
    case Mode::WeakHomogeneity: {
      if (sweep.weak_test_family.empty())
        throw ParameterError("seminorm: weak mode needs a projected family");
      double t1 = large_scale_sup(g, sweep, false, sweep.test_family);
      double t2 = homogeneity_sup(g, sweep, p.alpha_bar, sweep.weak_test_family);
      return t1 + t2;
    }
    case Mode::Combined:
      return coherence_sup(g, sweep, p.alpha, p.gamma, sweep.test_family) +
             homogeneity_sup(g, sweep, p.alpha_bar, sweep.test_family);
  }
  return 0.0;
}

ExponentReport fit_points(const std::vector<double>& lambdas,
                          const std::vector<double>& sups) {
  ExponentReport r;
  r.lambdas = lambdas;
  r.sups = sups;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (sups[i] < kZeroFloor) {
      ++r.excluded;
      continue;
    }
    xs.push_back(std::log(lambdas[i]));
    ys.push_back(std::log(sups[i]));
  }
  if (xs.size() < 2) {
    r.degenerate = true;
    return r;
  }
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  r.slope = (n * sxy - sx * sy) / denom;
  r.intercept = (sy - r.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (r.intercept + r.slope * xs[i]);
    ss_res += e * e;
  }
  r.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return r;
}

ExponentReport fit_exponent(const Germ& g, const SweepSpec& sweep, FitStatistic stat,
                            const Distribution* f) {
  if (sweep.lambdas.size() < 4)
    throw ParameterError("fit_exponent: need at least 4 lambda values");
  std::vector<double> sups(sweep.lambdas.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(sweep.lambdas.size()), [&](std::int64_t j) {
    double l = sweep.lambdas[j];
    double best = 0.0;
    for (const auto& x : sweep.base_points) {
      for (const auto& phi : sweep.test_family) {
        auto p = germs::as_pair_fn(testfn::rescale(phi, x, l));
        double v = g.pair(x, p);
        if (stat == FitStatistic::ReconstructionGap) v = f->pair(p) - v;
        best = std::max(best, std::abs(v));
      }
    }
    sups[j] = best;
  });
  return fit_points(sweep.lambdas, sups);
}

double zygmund_norm(const Distribution& f, double gamma, const SweepSpec& sweep) {
  double best = 0.0;
  if (gamma < 0.0) {
    for (double l : sweep.lambdas)
      for (const auto& x : sweep.base_points)
        for (const auto& phi : sweep.test_family) {
          double v = std::abs(f.pair(testfn::rescale(phi, x, l)));
          best = std::max(best, v / std::pow(l, gamma));
        }
    return best;
  }
  if (sweep.weak_test_family.empty())
    throw ParameterError("zygmund_norm: gamma >= 0 needs a moment-projected family");
  double t1 = 0.0;
  for (const auto& x : sweep.base_points)
    for (const auto& phi : sweep.test_family)
      t1 = std::max(t1, std::abs(f.pair(testfn::rescale(phi, x, sweep.lambda_bar))));
  double t2 = 0.0;
  for (double l : sweep.lambdas)
    for (const auto& x : sweep.base_points)
      for (const auto& phi : sweep.weak_test_family) {
        double v = std::abs(f.pair(testfn::rescale(phi, x, l)));
        t2 = std::max(t2, v / std::pow(l, gamma));
      }
  return t1 + t2;
}

ExponentReport zygmund_fit(const Distribution& f, const SweepSpec& sweep) {
  std::vector<double> sups(sweep.lambdas.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(sweep.lambdas.size()), [&](std::int64_t j) {
    double l = sweep.lambdas[j];
    double best = 0.0;
    for (const auto& x : sweep.base_points)
      for (const auto& phi : sweep.test_family)
        best = std::max(best, std::abs(f.pair(testfn::rescale(phi, x, l))));
    sups[j] = best;
  });
  return fit_points(sweep.lambdas, sups);
}

AppendixReport appendix_a_checks(const Germ& g, const SweepSpec& sweep,
                                 const AppendixConfig& cfg) {
  AppendixReport rep;
  const auto& meta = g.meta();
  double gamma = meta.gamma.value_or(0.0);
  double alpha = meta.alpha.value_or(std::min(0.0, gamma));
  int r = meta.order;
  const int d = sweep.region.dim();

  // (i) scale extension: the seminorm at 2 lambda_bar is controlled by the
  // seminorm at lambda_bar
  {
    ModeParams p;
    p.alpha = alpha;
    p.gamma = gamma;
    rep.scale.seminorm_base = coherence_sup(g, sweep, alpha, gamma, sweep.test_family);
    SweepSpec wide = sweep;
    wide.lambda_bar = 2.0 * sweep.lambda_bar;
    wide.lambdas.clear();
    for (double l : sweep.lambdas) wide.lambdas.push_back(2.0 * l);
    rep.scale.seminorm_double =
        coherence_sup(g, wide, alpha, gamma, wide.test_family);
    rep.scale.factor = rep.scale.seminorm_base > 0.0
                           ? rep.scale.seminorm_double / rep.scale.seminorm_base
                           : (rep.scale.seminorm_double > 0.0 ? INFINITY : 1.0);
    rep.scale.pass = rep.scale.factor <= cfg.factor_cap;
  }

  // (ii) range extension: pairs at distance <= R_K control all pairs after
  // lowering alpha to alpha_tilde = alpha - N_K (r + d)
  {
    double diam = sweep.region.diameter();
    double dku = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
      dku = std::min(dku, sweep.region.lo[i] - sweep.domain.lo[i]);
      dku = std::min(dku, sweep.domain.hi[i] - sweep.region.hi[i]);
    }
    double rk = cfg.restricted_range;
    int nk = rk >= diam ? 0
                        : static_cast<int>(std::floor(diam / std::min(rk, dku / 4.0) + 1.0));
    rep.range.n_k = nk;
    rep.range.alpha_tilde = alpha - nk * (r + d);
    SweepSpec near = sweep, far = sweep;
    near.pairs.clear();
    far.pairs.clear();
    for (const auto& pr : sweep.pairs) {
      if (dist(pr.first, pr.second) <= rk) near.pairs.push_back(pr);
      far.pairs.push_back(pr);
    }
    if (near.pairs.empty()) near.pairs.push_back({sweep.base_points.front(), sweep.base_points.front()});
    rep.range.seminorm_restricted =
        coherence_sup(g, near, alpha, gamma, sweep.test_family);
    rep.range.seminorm_full =
        coherence_sup(g, far, rep.range.alpha_tilde, gamma, sweep.test_family);
    rep.range.factor = rep.range.seminorm_restricted > 0.0
                           ? rep.range.seminorm_full / rep.range.seminorm_restricted
                           : (rep.range.seminorm_full > 0.0 ? INFINITY : 1.0);
    rep.range.pass = rep.range.factor <= cfg.factor_cap;
  }

  // (iii) gamma-homogeneity implies coherence at alpha = min{-r-d, gamma}
  {
    double ab = meta.alpha_bar.value_or(gamma);
    rep.necessity.homogeneity = homogeneity_sup(g, sweep, ab, sweep.test_family);
    rep.necessity.alpha_used = std::min(static_cast<double>(-r - d), ab);
    rep.necessity.coherence =
        coherence_sup(g, sweep, rep.necessity.alpha_used, ab, sweep.test_family);
    rep.necessity.ratio = rep.necessity.homogeneity > 0.0
                              ? rep.necessity.coherence / rep.necessity.homogeneity
                              : (rep.necessity.coherence > 0.0 ? INFINITY : 0.0);
    rep.necessity.pass = rep.necessity.ratio <= cfg.factor_cap;
  }
  return rep;
}

}  // namespace seminorms
}  // namespace germcal
