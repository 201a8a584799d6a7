#pragma once

#include "germcal/geometry.hpp"
#include "germcal/reconstruct.hpp"

namespace germcal {
namespace germs {

// function on a manifold supported in a geodesic ball
struct ManifoldPairFn {
  std::function<double(const Vec&)> eval;  // manifold point -> value
  Vec center;                              // support ball center
  double radius = 0.0;                     // geodesic support radius
  double feature_scale = 0.0;
};

// germ of distributions on a model manifold
struct MGerm {
  geometry::Manifold manifold = geometry::Manifold::euclidean(1);
  std::function<double(const Vec&, const ManifoldPairFn&)> eval;
  GermMetadata meta;

  double pair(const Vec& p, const ManifoldPairFn& phi) const { return eval(p, phi); }
};

// F_p(phi^lambda_p) using the manifold rescaling of the chart profile phi
double evaluate_on_manifold(const MGerm& g, const Vec& p,
                            const testfn::TestFunction& phi, double lambda,
                            const geometry::Region& region);

// constant germ of a function given in closed form on the manifold
MGerm manifold_constant_germ(const geometry::Manifold& m,
                             std::function<double(const Vec&)> f);
// F_p(phi) = int d_g(p, q)^a phi(q) dV(q); homogeneous of exponent a
MGerm geodesic_power_germ(const geometry::Manifold& m, double a);

// chart pullback: (exp^{-1}_* F)_x(phi) = F_{exp(x)}(phi o chart), without a
// Jacobian factor. chart_radius bounds the flat domain.
Germ pullback_germ(const MGerm& g, const geometry::Chart& chart, double chart_radius);
// inverse pushforward: G_p(Phi) = F_{chart(p)}(Phi o exp)
MGerm pushforward_germ(const Germ& g, const geometry::Chart& chart,
                       double chart_radius);

// one chart of an atlas used for reconstruction by gluing
struct AtlasChart {
  geometry::Chart chart;
  double radius = 0.0;  // geodesic radius covered by this chart
};

struct ManifoldReconstruction {
  std::function<double(const ManifoldPairFn&)> pair;
  double overlap_mismatch = 0.0;  // max pairing difference across chart pairs
  double partition_deviation = 0.0;  // max |sum of weights - 1| on samples
  std::vector<reconstruct::ReconstructionResult> per_chart;
};

struct ManifoldReconstructionConfig {
  int n_max = 10;
  double lambda_bar = 0.1;
  double grid_spacing = 2e-3;
  int moment_order = 4;  // mollifier moment correction
  int overlap_samples = 12;
  std::uint64_t seed = 5;
};

// per-chart flat reconstruction of the pulled-back germ, glued through a
// bump-based partition of unity subordinate to the atlas
ManifoldReconstruction reconstruct_on_manifold(const MGerm& g, double gamma,
                                               const std::vector<AtlasChart>& atlas,
                                               const ManifoldReconstructionConfig& cfg);

// direct pairing of a closed-form density against a manifold test function
double direct_manifold_pairing(const geometry::Manifold& m,
                               const std::function<double(const Vec&)>& f,
                               const ManifoldPairFn& phi);

}  // namespace germs
}  // namespace germcal
