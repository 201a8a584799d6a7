#pragma once

#include "germcal/distribution.hpp"

namespace germcal {
namespace germs {

// Scalar field with exact derivatives, used as the derivative oracle behind
// Taylor germs and reference solutions.
struct AnalyticField {
  int dim = 1;
  std::function<Jet(const Vec&, int)> jet;

  double value(const Vec& x) const { return jet(x, 0).value(); }
  double derivative(const Vec& x, const MultiIndex& k) const {
    return jet(x, k.order()).derivative(k);
  }
};

AnalyticField sin_field(double freq);                 // sin(freq * x), d = 1
AnalyticField monomial_field(int dim, MultiIndex k);  // x^k
AnalyticField poly_field(std::vector<double> coeffs);  // d = 1, sum c_j x^j
// |x|^p for x != 0 (d = 1)
AnalyticField abs_power_field(double p);

struct GermMetadata {
  std::optional<double> gamma;      // coherence target exponent
  std::optional<double> alpha;      // coherence small-scale exponent alpha_K
  std::optional<double> alpha_bar;  // homogeneity exponent
  int order = 0;                    // test-function class order r_K
  std::optional<double> range;      // pair range R_K (manifold side mostly)
};

// when a germ member F_x is a (possibly singular) density, kernel-type
// operators can integrate against it directly
struct MemberDensity {
  std::function<double(const Vec&)> eval;
  std::vector<Vec> hotspots;  // points needing graded quadrature cells
};

// Family x -> F_x of distributions over a box domain. The evaluator pairs the
// member at x against an arbitrary pairing function; it is linear in phi by
// construction of all built-in families.
class Germ {
 public:
  using Evaluator = std::function<double(const Vec&, const PairFn&)>;
  using DensityFactory = std::function<MemberDensity(const Vec&)>;

  Germ() = default;
  Germ(int dim, Box domain, Evaluator eval, GermMetadata meta = {});

  int dim() const { return dim_; }
  const Box& domain() const { return domain_; }
  const GermMetadata& meta() const { return meta_; }
  GermMetadata& meta() { return meta_; }

  // F_x(phi) for an absolute pairing function (no support guard)
  double pair(const Vec& x, const PairFn& phi) const { return eval_(x, phi); }
  double pair(const Vec& x, const testfn::TestFunction& phi) const {
    return eval_(x, as_pair_fn(phi));
  }

  bool has_density() const { return static_cast<bool>(density_); }
  MemberDensity member_density(const Vec& x) const { return density_(x); }
  void set_density_factory(DensityFactory f) { density_ = std::move(f); }

  static Germ combine(double a, const Germ& f, double b, const Germ& g);
  Germ minus(const Distribution& f) const;  // x -> F_x - f

 private:
  int dim_ = 0;
  Box domain_;
  Evaluator eval_;
  DensityFactory density_;
  GermMetadata meta_;
};

// F_x(phi^lambda_x) with the support guard supp(phi^lambda_x) inside the
// germ's domain
double evaluate(const Germ& g, const Vec& x, const testfn::TestFunction& phi,
                double lambda);

// built-in families
Germ constant_germ(const Distribution& f, Box domain);
// F_x = Taylor polynomial of f at x, degree |k| < gamma
Germ taylor_germ(const AnalyticField& f, double gamma, Box domain);
// F_x(y) = |y - x|^a paired with singularity-split quadrature; needs a > -d
Germ power_germ(int dim, double a, Box domain);
Germ dirac_germ(int dim, const Vec& location, Box domain);
Germ custom_germ(int dim, Box domain, Germ::Evaluator eval, GermMetadata meta = {});

}  // namespace germs
}  // namespace germcal
