#pragma once

#include "germcal/distribution.hpp"
#include "germcal/geometry.hpp"
#include "germcal/seminorms.hpp"

namespace germcal {
namespace kernels {

using germs::Distribution;
using germs::PairFn;

// Smooth transition equal to 1 on (-inf, a], 0 on [b, inf), built from the
// e-function pair so that all derivatives are closed-form.
class SmoothStep {
 public:
  SmoothStep(double a, double b) : a_(a), b_(b) {}
  double value(double t) const;
  // derivatives d^j/dt^j at t, j = 0..order
  std::vector<double> derivatives(double t, int order) const;

 private:
  double a_, b_;
};

enum class KernelFamily { Riesz, Heat };

// Dyadic kernel K(x,y) = sum_n K_n(x,y). The built-in families are
// self-similar: K_n(x,y) = 2^{(d-beta)n} k0(2^n (x-y)) with a fixed level
// profile k0 supported on the annulus rho/4 <= |u| <= rho, so every level
// bound scales exactly. Pulled-back kernels carry generic level callables.
struct DyadicKernel {
  int dim = 1;
  double beta = 0.0;
  int order_m = 4, order_r = 4;  // derivative orders exposed
  double rho = 1.0;              // range: supp K_n in {|x-y| <= rho 2^{-n}}
  int depth = 8;
  Box domain;

  std::function<double(int, const Vec&, const Vec&)> value;  // K_n(x, y)
  // d_x^k d_y^l K_n(x, y)
  std::function<double(int, const MultiIndex&, const MultiIndex&, const Vec&,
                       const Vec&)>
      derivative;
  std::function<double(const Vec&, const Vec&)> mother;  // truncated mother kernel
  // levels that can be nonzero at separation `dist` (empty hint = all)
  std::function<std::pair<int, int>(double, int)> active_levels;
  // closed-form telescoped sums (riesz: the partition of unity collapses the
  // level sum to [g(t) - g(2^{depth+1} t)] t^{beta-d})
  std::function<double(const Vec&, const Vec&, int)> summed_value;
  std::function<double(const MultiIndex&, const MultiIndex&, const Vec&, const Vec&,
                       int)>
      summed_derivative;

  double level_radius(int n) const { return rho * std::pow(2.0, -n); }
  // sum of levels up to depth
  double truncated(const Vec& x, const Vec& y) const;
  // sum over active levels only
  double sum_value(const Vec& x, const Vec& y, int depth) const;
  double sum_derivative(const MultiIndex& k, const MultiIndex& l, const Vec& x,
                        const Vec& y, int depth) const;
  // (K_n(x, .) as a pairing function (the y-section)
  PairFn section(int n, const Vec& x) const;
  // (K_n^T phi)(z) = int K_n(y, z) phi(y) dy
  double transposed_level(int n, const Vec& z, const PairFn& phi) const;
};

// riesz: |x-y|^{beta-d} under a smooth dyadic annular partition (0 < beta < d);
// heat: fractional heat slabs int t^{beta/2-1} (4 pi t)^{-d/2} e^{-|u|^2/4t} dt
// over t in [rho^2 4^{-n-1}, rho^2 4^{-n}], smoothly truncated (beta > 0)
DyadicKernel build_kernel(KernelFamily family, double beta, int depth,
                          const Box& domain, double rho, int dim);

// kernel on a model manifold with geodesic-distance supports; the range
// schedule rho(p) = rho_n follows the shell classification of p in the
// exhaustion (a single shell covers compact manifolds)
struct ManifoldKernel {
  geometry::Manifold manifold = geometry::Manifold::euclidean(1);
  double beta = 0.0;
  double rho = 0.0;  // rho_0 <= R_C / 4
  int depth = 8;
  std::function<double(int, const Vec&, const Vec&)> value;  // K_n(p, q)
};

ManifoldKernel build_manifold_kernel(KernelFamily family, double beta, int depth,
                                     const geometry::Manifold& m, double rho);

// exp^* K in the chart: flat levels with range rho_n / c_K; derivatives by
// level-scaled finite differences
DyadicKernel pullback_kernel(const ManifoldKernel& k, const geometry::Chart& chart,
                             double chart_radius);

struct KernelCheckRow {
  int n = 0;
  MultiIndex k, l;
  double sup = 0.0;     // sup |d1^k d2^l K_n|
  double moment = 0.0;  // |int (y-x)^l d2^k K_n(x,y) dx| at a probe y
};
struct KernelExponentFit {
  MultiIndex k, l;
  double growth = 0.0;        // fitted log2 growth of sup vs n
  double growth_target = 0.0; // d - beta + |k| + |l|
  bool growth_pass = false;
  double decay = 0.0;         // fitted log2 decay of the moment vs n
  bool decay_pass = false;    // decay >= beta - tol, or identically zero
  bool moment_vanishes = false;
};
struct KernelReport {
  std::vector<KernelCheckRow> rows;
  std::vector<KernelExponentFit> fits;
  double telescoping_error = 0.0;  // vs the mother kernel on resolved annuli
  bool pass = true;
};

struct VerifySpec {
  int n_lo = 2, n_hi = 8;
  int max_k = 2, max_l = 2;
  int samples = 400;       // sup sampling per level
  double tolerance = 0.1;  // exponent tolerance
};

KernelReport verify_kernel(const DyadicKernel& kernel, const VerifySpec& spec = {});

struct ApplyResult {
  Distribution out = Distribution::zero(1);
  std::vector<double> level_magnitudes;  // per-level max contribution on the grid
  bool converged = true;                 // Cauchy check across the last levels
};

// x -> sum_{n <= depth} f(K_n(x, .)) sampled on a uniform grid over out_box
ApplyResult apply_kernel(const DyadicKernel& kernel, const Distribution& f,
                         int depth, const Box& out_box, double grid_spacing);

}  // namespace kernels
}  // namespace germcal
