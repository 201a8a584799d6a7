#pragma once

#include "germcal/germ.hpp"

namespace germcal {
namespace seminorms {

using germs::Distribution;
using germs::Germ;
using testfn::TestFunction;

// Evaluation domain of a seminorm sweep. All suprema over continuous domains
// are approximated from below by deterministic lattices plus seeded random
// refinement; every sweep records its points for reproducibility.
struct SweepSpec {
  Box region;  // K
  Box domain;  // U
  double lambda_bar = 0.0;
  std::vector<double> lambdas;              // dyadic grid in (0, lambda_bar]
  std::vector<Vec> base_points;             // x in K
  std::vector<std::pair<Vec, Vec>> pairs;   // (x, y) in K, |x - y| <= pair_range
  double pair_range = 0.0;                  // R_K
  std::vector<TestFunction> test_family;       // members of B^r
  std::vector<TestFunction> weak_test_family;  // members of B^r_l

  // largest profile radius across the families
  double max_profile_radius() const;
};

struct SweepConfig {
  int j0 = 2, j1 = 10;           // lambdas = lambda_bar * 2^{-j}
  int lattice_per_axis = 5;      // deterministic base-point lattice
  int random_points = 8;         // seeded refinement points
  int random_pairs = 24;
  double pair_range = -1.0;      // default: Diam(K)
  std::uint64_t seed = 1;
};

// default family: canonical bump, its first `order` derivatives and one
// polynomial-weighted bump, each normalized into B^order; the weak family is
// the moment-projected version for class B^order_ell
std::vector<TestFunction> default_family(int dim, int order, int norm_grid = 0);
std::vector<TestFunction> project_family(const std::vector<TestFunction>& family,
                                         int ell, int order, int norm_grid = 0);

SweepSpec make_sweep(const Box& region, const Box& domain, double lambda_bar,
                     std::vector<TestFunction> family, const SweepConfig& cfg = {},
                     std::vector<TestFunction> weak_family = {});

enum class Mode { Coherence, Homogeneity, WeakCoherence, WeakHomogeneity, Combined };

struct ModeParams {
  double alpha = 0.0;      // coherence exponents
  double gamma = 0.0;
  double alpha_bar = 0.0;  // homogeneity exponent
};

// empirical sup of the mode's defining ratio over the sweep
double seminorm(const Germ& g, const SweepSpec& sweep, Mode mode,
                const ModeParams& params);

struct ExponentReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> lambdas;
  std::vector<double> sups;
  int excluded = 0;
  bool degenerate = false;
};

// least-squares fit of log(sup value) against log(lambda)
ExponentReport fit_points(const std::vector<double>& lambdas,
                          const std::vector<double>& sups);

enum class FitStatistic { Homogeneity, ReconstructionGap };

// per-lambda sup of |F_x(phi^lambda_x)| (homogeneity) or
// |(f - F_x)(phi^lambda_x)| (reconstruction gap), then the log-log fit
ExponentReport fit_exponent(const Germ& g, const SweepSpec& sweep, FitStatistic stat,
                            const Distribution* f = nullptr);

// Hoelder-Zygmund seminorm of a distribution. gamma < 0 pairs the plain
// family; gamma >= 0 adds the largest-scale term and uses the weak family.
double zygmund_norm(const Distribution& f, double gamma, const SweepSpec& sweep);
// per-lambda sup of |f(phi^lambda_x)| with the log-log fit (slope tests)
ExponentReport zygmund_fit(const Distribution& f, const SweepSpec& sweep);

struct ScaleExtensionCheck {
  double seminorm_base = 0.0;   // at lambda_bar
  double seminorm_double = 0.0; // at 2 lambda_bar
  double factor = 0.0;
  bool pass = false;
};
struct RangeExtensionCheck {
  double seminorm_restricted = 0.0;  // pairs with |x-y| <= R_K, exponent alpha
  double seminorm_full = 0.0;        // all pairs, exponent alpha_tilde
  int n_k = 0;
  double alpha_tilde = 0.0;
  double factor = 0.0;
  bool pass = false;
};
struct HomogeneityCoherenceCheck {
  double homogeneity = 0.0;
  double coherence = 0.0;  // at alpha = min{-r-d, gamma}
  double alpha_used = 0.0;
  double ratio = 0.0;
  bool pass = false;
};
struct AppendixReport {
  ScaleExtensionCheck scale;
  RangeExtensionCheck range;
  HomogeneityCoherenceCheck necessity;
  bool all_pass() const { return scale.pass && range.pass && necessity.pass; }
};

struct AppendixConfig {
  double restricted_range = 0.3;  // R_K for the range-extension check
  double factor_cap = 50.0;       // admissible growth of extended seminorms
};

// empirical versions of the bound-extension and homogeneity-implies-coherence
// statements; report-only
AppendixReport appendix_a_checks(const Germ& g, const SweepSpec& sweep,
                                 const AppendixConfig& cfg = {});

}  // namespace seminorms
}  // namespace germcal
