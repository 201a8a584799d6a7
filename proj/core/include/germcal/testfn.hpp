#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "germcal/jet.hpp"
#include "germcal/quadrature.hpp"

namespace germcal {
namespace testfn {

// Base profile: an analytic compactly supported function on a ball in profile
// coordinates, with value and exact partial derivatives of any order.
class Profile {
 public:
  virtual ~Profile() = default;
  virtual int dim() const = 0;
  virtual double support_radius() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Jet jet(const Vec& x, int order) const = 0;
};

using ProfilePtr = std::shared_ptr<const Profile>;

// psi(x) = exp(1 - 1/(1 - |x|^2)) for |x| < 1, 0 otherwise. psi(0) = 1.
ProfilePtr standard_bump(int dim);
ProfilePtr derivative_profile(ProfilePtr base, int axis);
ProfilePtr poly_weighted(ProfilePtr base, const MultiIndex& k);
// s^{-d} P(x/s) folded into a profile (support radius s * base radius)
ProfilePtr rescaled_profile(ProfilePtr base, double s);
// sum_i c_i P_i, all profiles sharing the dimension
ProfilePtr combination(std::vector<std::pair<double, ProfilePtr>> terms);
// profile defined by an arbitrary callable; derivatives by Richardson-refined
// central differences (used for functions transported through charts)
ProfilePtr numeric_profile(int dim, double support_radius,
                           std::function<double(const Vec&)> f,
                           double fd_step = 1e-3);

// phi(y) = coeff * scale^{-d} * P((y - center)/scale).
// Immutable value type; rescaling composes exactly.
struct TestFunction {
  ProfilePtr profile;
  Vec center;
  double scale = 1.0;
  double coeff = 1.0;

  int dim() const { return profile->dim(); }
  double support_radius() const { return scale * profile->support_radius(); }
  Box support() const { return Box::ball(center, support_radius()); }
  bool in_support(const Vec& y) const {
    return dist(y, center) < support_radius();
  }

  double value(const Vec& y) const;
  // d^k phi(y), exact (propagated through the profile jet)
  double derivative(const Vec& y, const MultiIndex& k) const;

  TestFunction scaled_by(double c) const {
    TestFunction t = *this;
    t.coeff *= c;
    return t;
  }
};

enum class BumpKind { Standard, Derivative, PolyWeighted };

// `standard` is the canonical bump; `derivative(axis)` its first partial;
// `polynomial-weighted(degree)` is x_1^degree * psi.
TestFunction make_bump(int dim, BumpKind kind = BumpKind::Standard, int arg = 0);

// y -> lambda^{-d} phi(lambda^{-1}(y - x))
TestFunction rescale(const TestFunction& phi, const Vec& x, double lambda);

// max_{|a| <= m} sup-over-grid |d^a phi|, deterministic tensor grid on the
// support (default 2^12 points per axis)
double cm_norm(const TestFunction& phi, int m, int grid_per_axis = 4096);

// integral moments \int y^k phi(y) dy about `origin`, all |k| <= ell_max,
// in the graded multi-index order of MultiIndex::enumerate
std::vector<double> moments(const TestFunction& phi, int ell_max,
                            const Vec& origin, double tol = 1e-11);
// moments about the function's own center
std::vector<double> moments(const TestFunction& phi, int ell_max, double tol = 1e-11);

// phi minus a polynomial-times-bump correction so all moments |k| <= ell
// vanish; renormalized so cm_norm(., m_norm) <= 1 when m_norm >= 0
TestFunction project_vanishing_moments(const TestFunction& phi, int ell,
                                       int m_norm = -1, int grid_per_axis = 4096);

// Exact recentering: phi^lambda_x == xi^{lambda1}_y pointwise with
// lambda1 = |x - y| + lambda, xi = rescale(phi, (x-y)/lambda1, lambda/lambda1).
struct Recentered {
  TestFunction xi;
  double lambda1;
};
Recentered recenter_flat(const TestFunction& phi, const Vec& x, double lambda,
                         const Vec& y);

// membership test for B^m_l on a region
struct FunctionClassSpec {
  int m = 0;
  int ell = -1;  // negative: no moment constraint
  Box region;

  bool contains(const TestFunction& phi, double norm_tol = 1e-9,
                double moment_tol = 1e-10, int grid_per_axis = 1024) const;
};

}  // namespace testfn
}  // namespace germcal
