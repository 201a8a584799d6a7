#include "germcal/reconstruct.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "germcal/parallel.hpp"

namespace germcal {
namespace reconstruct {

TestFunction make_mollifier(int dim, int vanish_up_to, bool alt) {
  using namespace testfn;
  ProfilePtr base = standard_bump(dim);
  double corr_radius = 0.5;
  if (alt) {
    // different shape: narrower carrier with an even polynomial weight
    MultiIndex two(dim);
    two[0] = 2;
    base = combination({{1.0, rescaled_profile(standard_bump(dim), 0.85)},
                        {0.35, poly_weighted(rescaled_profile(standard_bump(dim), 0.85), two)}});
    corr_radius = 0.4;
  }
  if (vanish_up_to < 1) {
    TestFunction t{base, Vec(dim), 1.0, 1.0};
    auto m = moments(t, 0);
    return t.scaled_by(1.0 / m[0]);
  }

  // solve for unit mass and vanishing moments 1..q in the basis
  // {base} + {x^k * (half bump) : 1 <= |k| <= q}
  auto idxs = MultiIndex::enumerate(dim, vanish_up_to);
  std::vector<ProfilePtr> basis;
  basis.push_back(base);
  ProfilePtr carrier = rescaled_profile(standard_bump(dim), corr_radius);
  for (const auto& k : idxs)
    if (k.order() >= 1) basis.push_back(poly_weighted(carrier, k));

  const int n = static_cast<int>(idxs.size());
  if (static_cast<int>(basis.size()) != n)
    throw ConditioningError("make_mollifier: basis/moment count mismatch");
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    TestFunction bj{basis[j], Vec(dim), 1.0, 1.0};
    auto mj = moments(bj, vanish_up_to);
    for (int i = 0; i < n; ++i) M(i, j) = mj[i];
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw ConditioningError("make_mollifier: singular system");
  Eigen::VectorXd c = lu.solve(rhs);

  std::vector<std::pair<double, ProfilePtr>> terms;
  for (int j = 0; j < n; ++j) terms.emplace_back(c(j), basis[j]);
  return TestFunction{combination(std::move(terms)), Vec(dim), 1.0, 1.0};
}

ReconstructionResult run(const Germ& g, double gamma, const ReconstructionConfig& cfg) {
  if (gamma == 0.0)
    throw CapabilityError("reconstruct: gamma = 0 (logarithmic regime) unsupported");
  if (cfg.n_max < 4) throw ParameterError("reconstruct: n_max must be >= 4");
  {
    auto m = testfn::moments(cfg.mollifier, 0);
    if (std::abs(m[0] - 1.0) > 1e-10)
      throw ParameterError("reconstruct: mollifier must have unit mass");
  }

  const int d = g.dim();
  double eps = std::pow(2.0, -cfg.n_max) * cfg.lambda_bar;

  std::vector<int> shape(d);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    shape[i] = static_cast<int>(
                   std::floor((cfg.grid_box.hi[i] - cfg.grid_box.lo[i]) / cfg.grid_spacing)) +
               1;
    total *= shape[i];
  }

  std::vector<Vec> nodes;
  nodes.reserve(total);
  std::vector<int> idx(d, 0);
  for (;;) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = cfg.grid_box.lo[i] + idx[i] * cfg.grid_spacing;
    nodes.push_back(x);
    int i = d - 1;
    while (i >= 0 && ++idx[i] == shape[i]) idx[i--] = 0;
    if (i < 0) break;
  }

  std::vector<double> deep(total, 0.0), prev(total, 0.0);
  parallel_for(static_cast<std::int64_t>(total), [&](std::int64_t j) {
    deep[j] = g.pair(nodes[j],
                     germs::as_pair_fn(testfn::rescale(cfg.mollifier, nodes[j], eps)));
    prev[j] = g.pair(nodes[j], germs::as_pair_fn(
                                   testfn::rescale(cfg.mollifier, nodes[j], 2.0 * eps)));
  });

  ReconstructionResult res;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < total; ++j) {
    num = std::max(num, std::abs(deep[j] - prev[j]));
    den = std::max(den, std::abs(deep[j]));
  }
  res.cauchy = den > 0.0 ? num / den : 0.0;
  res.converged = gamma < 0.0 || res.cauchy <= cfg.cauchy_tolerance;
  res.epsilon = eps;
  res.out = Distribution::grid_density(cfg.grid_box.lo, cfg.grid_spacing, shape,
                                       std::move(deep));
  return res;
}

ReconstructionReport verify(const Germ& g, const Distribution& f, double gamma,
                            const SweepSpec& sweep, const ReconstructionConfig& cfg) {
  ReconstructionReport rep;
  rep.gap = seminorms::fit_exponent(g, sweep, seminorms::FitStatistic::ReconstructionGap,
                                    &f);
  // statistic at the smallest lambda in the sweep
  if (!rep.gap.sups.empty()) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < rep.gap.lambdas.size(); ++i)
      if (rep.gap.lambdas[i] < rep.gap.lambdas[arg]) arg = i;
    rep.smallest_scale_statistic = rep.gap.sups[arg];
  }
  rep.epsilon = std::pow(2.0, -cfg.n_max) * cfg.lambda_bar;

  // second, different mollifier
  ReconstructionConfig alt = cfg;
  alt.mollifier = make_mollifier(g.dim(), 4, true);
  Distribution f2 = run(g, gamma, alt).out;
  double diff = 0.0, scale = 0.0;
  double probe_lambda = sweep.lambda_bar / 4.0;
  for (const auto& x : sweep.base_points) {
    for (const auto& phi : sweep.test_family) {
      auto p = germs::as_pair_fn(testfn::rescale(phi, x, probe_lambda));
      double a = f.pair(p), b = f2.pair(p);
      diff = std::max(diff, std::abs(a - b));
      scale = std::max(scale, std::abs(a));
    }
  }
  rep.uniqueness_gap = scale > 0.0 ? diff / scale : diff;
  return rep;
}

HolderRegularityReport holder_regularity_check(const Distribution& f,
                                               const Distribution* f_prime,
                                               double gamma, const SweepSpec& sweep) {
  HolderRegularityReport rep;
  rep.reconstruction_scaling = seminorms::zygmund_fit(f, sweep);
  if (f_prime != nullptr && gamma <= 0.0) {
    rep.difference_applicable = true;
    Distribution d = Distribution::combine(1.0, f, -1.0, *f_prime);
    rep.difference_scaling = seminorms::zygmund_fit(d, sweep);
  }
  return rep;
}

}  // namespace reconstruct
}  // namespace germcal
