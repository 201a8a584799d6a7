#pragma once

#include "germcal/seminorms.hpp"

namespace germcal {
namespace reconstruct {

using germs::Distribution;
using germs::Germ;
using seminorms::SweepSpec;
using testfn::TestFunction;

// unit-mass mollifier with moments 1..vanish_up_to equal to zero; `alt` picks
// a second, genuinely different shape for uniqueness comparisons
TestFunction make_mollifier(int dim, int vanish_up_to, bool alt = false);

struct ReconstructionConfig {
  TestFunction mollifier;  // unit mass to 1e-10
  int n_max = 12;          // mollification scale eps = 2^{-n_max} lambda_bar
  double lambda_bar = 0.25;
  Box grid_box;            // where the output density is sampled
  double grid_spacing = 1e-3;
  double cauchy_tolerance = 1e-3;  // relative, between the last two levels
};

struct ReconstructionResult {
  Distribution out = Distribution::zero(1);
  double epsilon = 0.0;
  double cauchy = 0.0;  // relative change between levels n_max-1 and n_max
  bool converged = true;
};

// Diagonal mollification x -> F_x(rho^eps_x) at the deepest dyadic level,
// sampled on the grid. For gamma > 0 this approximates the unique
// reconstruction; for gamma < 0 it fixes one representative.
ReconstructionResult run(const Germ& g, double gamma, const ReconstructionConfig& cfg);

struct ReconstructionReport {
  seminorms::ExponentReport gap;     // sup_x |(f - F_x)(phi^lambda_x)| vs lambda
  double smallest_scale_statistic = 0.0;
  double uniqueness_gap = 0.0;       // relative pairing difference, two mollifiers
  double epsilon = 0.0;
};

ReconstructionReport verify(const Germ& g, const Distribution& f, double gamma,
                            const SweepSpec& sweep, const ReconstructionConfig& cfg);

struct HolderRegularityReport {
  seminorms::ExponentReport reconstruction_scaling;  // zygmund fit of RF
  bool difference_applicable = false;
  seminorms::ExponentReport difference_scaling;      // fit of f - f' (gamma <= 0)
};

// clause 1 for coherent+homogeneous germs, clause 2 for two reconstructions
// at gamma <= 0 (skipped otherwise)
HolderRegularityReport holder_regularity_check(const Distribution& f,
                                               const Distribution* f_prime,
                                               double gamma, const SweepSpec& sweep);

}  // namespace reconstruct
}  // namespace germcal
