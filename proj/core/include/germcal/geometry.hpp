#pragma once

#include <vector>

#include "germcal/testfn.hpp"

namespace germcal {
namespace geometry {

enum class Kind { Euclidean, Sphere, Hyperbolic };

// Model Riemannian manifolds with closed-form exponential charts.
// Point representations: euclidean and hyperbolic points are intrinsic
// coordinates (Poincare disc for hyperbolic); sphere points are embedding
// vectors in R^{d+1} of norm `radius`. Tangent vectors are coordinates in the
// deterministic orthonormal frame returned by frame().
class Manifold {
 public:
  static Manifold euclidean(int dim);
  static Manifold sphere(int dim, double radius);
  static Manifold hyperbolic(int dim, double curvature);  // curvature < 0

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int point_size() const { return dim_ + (kind_ == Kind::Sphere ? 1 : 0); }
  double sphere_radius() const { return param_; }
  // |S| = sup-norm of sectional curvature
  double curvature_bound() const;
  // pi / (8 sqrt(|S|)), capped for flat space
  double curvature_radius(double cap = 1e3) const;
  double convexity_radius(double cap = 1e3) const;
  double injectivity_bound(const Vec& p) const;
  Vec reference_point() const;

  std::vector<Vec> frame(const Vec& p) const;
  Vec exp_map(const Vec& p, const Vec& v) const;
  Vec log_map(const Vec& p, const Vec& q) const;
  double distance(const Vec& p, const Vec& q) const;
  // Riemannian volume density in normal coordinates at chart radius r
  double normal_volume_density(double r) const;

 private:
  Manifold(Kind k, int dim, double param) : kind_(k), dim_(dim), param_(param) {}
  Kind kind_;
  int dim_;
  double param_;  // sphere radius, or |curvature| for hyperbolic
};

// exponential-normal chart at a base point, with its frame frozen
struct Chart {
  Manifold manifold;
  Vec base;
  std::vector<Vec> frame;

  static Chart at(const Manifold& m, const Vec& p) { return Chart{m, p, m.frame(p)}; }
  Vec to_chart(const Vec& q) const;    // frame coordinates of log_base(q)
  Vec from_chart(const Vec& x) const;  // exp_base(sum x_i E_i)
};

// geodesic ball with the derived constants used throughout
struct Region {
  Manifold manifold;
  Vec center;
  double radius;

  double diameter() const { return 2.0 * radius; }
  // rho_K = min{R_C / 2, 1}
  double rho(double cap = 1e3) const;
  // distance from the chart image of the ball of `inner` to the chart
  // boundary, for a chart of capacity `radius`
  double chart_margin(double inner) const { return radius - inner; }
};

struct GeometryConstants {
  double c_low = 1.0;   // inf |chart difference| / d_g
  double c_high = 1.0;  // sup |chart difference| / d_g
  double curvature_radius = 0.0;
  double convexity_radius = 0.0;
};

double convexity_radius(const Manifold& m, const Region& region, double cap = 1e3);

// Monte Carlo extrema of |log_p q - log_p r| / d_g(q, r) over sampled pairs
// in the region; the euclidean chart is a translation, giving exactly (1, 1).
GeometryConstants equivalence_constants(const Manifold& m, const Vec& p,
                                        const Region& region, int n_samples,
                                        std::uint64_t seed);

// test function on the manifold: lambda-rescaling through exp_p with the
// far-region cutoff
struct ManifoldTestFunction {
  Chart chart;                // centered at p
  testfn::TestFunction flat;  // chart representation of the profile
  double lambda = 1.0;
  double cutoff;  // R_C(U): zero once d_g(p,q)/lambda exceeds this

  double value(const Vec& q) const;
};

ManifoldTestFunction rescale_on_manifold(const testfn::TestFunction& phi,
                                         const Manifold& m, const Vec& p,
                                         double lambda, const Region& region);

// chart data + measured equivalence constants, shared by the transfer ops
struct TransferContext {
  Chart chart;
  Region region;
  GeometryConstants constants;
  double d_k;  // dist(chart image of region, chart boundary)

  static TransferContext make(const Manifold& m, const Vec& p, double region_radius,
                              double chart_capacity, std::uint64_t seed = 1,
                              int n_samples = 20000);
  double cst_k() const;        // min{rho_K, D_K c_K, c_K}
  double cst_k_prime() const;  // min{rho_K / c'_K, D_K}
};

enum class TransferDirection { ToManifold, ToChart };

// Scaling transfer through the exponential chart. ToManifold realizes the
// profile phi_[lambda] with exp_*(phi^{lambda lambdabar}) = rescaling of
// phi_[lambda] at (q, lambda); ToChart realizes the reverse direction.
struct Transferred {
  // realization entering the scaling identity: the profile in the chart at
  // its own center q (ToManifold), or the flat function (ToChart)
  testfn::TestFunction fn;
  // realization in the construction chart at p, whose C^m norms carry the
  // lambdabar^{-r-d} bound (the own-center chart differs by the metric
  // distortion of exp)
  testfn::TestFunction ambient;
  double norm_bound;  // lambdabar^{-order-d}
};
Transferred transfer_testfn(TransferDirection dir, const testfn::TestFunction& phi,
                            const Vec& q, double lambda, double lambdabar,
                            const TransferContext& ctx, int order = 2);

struct ManifoldRecentered {
  testfn::TestFunction xi;  // profile at q
  double lambda2;           // output scale
  double bound;             // dominates cm_norm(xi, r)
  int order;                // the r used for the bound
};

// moves phi^lambda_p to an equal function rescaled at q
ManifoldRecentered recenter_on_manifold(const testfn::TestFunction& phi, const Vec& p,
                                        const Vec& q, double lambda, int order,
                                        const TransferContext& ctx);

// \int_{B(p, radius)} f dV in normal coordinates (f takes manifold points)
double integrate_geodesic_ball(const Manifold& m, const Vec& p, double radius,
                               const std::function<double(const Vec&)>& f,
                               int panels = 24, int order = 12);

}  // namespace geometry
}  // namespace germcal
