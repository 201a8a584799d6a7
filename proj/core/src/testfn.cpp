#include "germcal/testfn.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

namespace germcal {
namespace testfn {

namespace {

class StandardBump final : public Profile {
 public:
  explicit StandardBump(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  double support_radius() const override { return 1.0; }

  double value(const Vec& x) const override {
    double s = x.norm2();
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s));
  }

  Jet jet(const Vec& x, int order) const override {
    double s0 = x.norm2();
    // within ~1e-12 of the boundary 1/(1-s) overflows; the function and all
    // of its derivatives vanish there
    if (s0 >= 1.0 - 1e-12) return Jet(dim_, order);
    Jet s(dim_, order);
    for (int i = 0; i < dim_; ++i) {
      Jet xi = Jet::variable(x[i], i, dim_, order);
      s += xi * xi;
    }
    Jet one_minus = -s + 1.0;
    return exp(-recip(one_minus) + 1.0);
  }

 private:
  int dim_;
};

class DerivativeProfile final : public Profile {
 public:
  DerivativeProfile(ProfilePtr base, int axis) : base_(std::move(base)), axis_(axis) {}
  int dim() const override { return base_->dim(); }
  double support_radius() const override { return base_->support_radius(); }

  double value(const Vec& x) const override {
    if (x.norm() >= support_radius()) return 0.0;
    return base_->jet(x, 1).derivative(MultiIndex::unit(dim(), axis_));
  }

  Jet jet(const Vec& x, int order) const override {
    Jet b = base_->jet(x, order + 1);
    const Jet::Table& from = Jet::table(dim(), order + 1);
    Jet r(dim(), order);
    const Jet::Table& to = Jet::table(dim(), order);
    for (int p = 0; p < r.size(); ++p) {
      MultiIndex a = to.indices[p];
      MultiIndex shifted = a + MultiIndex::unit(dim(), axis_);
      // Taylor coefficient of d_axis f at index a is (a_axis + 1) * c_{a+e}
      r.coeff(p) = b.coeff(from.pos(shifted)) * (a[axis_] + 1);
    }
    return r;
  }

 private:
  ProfilePtr base_;
  int axis_;
};

class PolyWeighted final : public Profile {
 public:
  PolyWeighted(ProfilePtr base, const MultiIndex& k) : base_(std::move(base)), k_(k) {}
  int dim() const override { return base_->dim(); }
  double support_radius() const override { return base_->support_radius(); }

  double value(const Vec& x) const override {
    if (x.norm() >= support_radius()) return 0.0;
    return monomial(x, k_) * base_->value(x);
  }

  Jet jet(const Vec& x, int order) const override {
    Jet m = Jet::constant(1.0, dim(), order);
    for (int i = 0; i < dim(); ++i) {
      Jet xi = Jet::variable(x[i], i, dim(), order);
      for (int j = 0; j < k_[i]; ++j) m = m * xi;
    }
    return m * base_->jet(x, order);
  }

 private:
  ProfilePtr base_;
  MultiIndex k_;
};

class RescaledProfile final : public Profile {
 public:
  RescaledProfile(ProfilePtr base, double s) : base_(std::move(base)), s_(s) {}
  int dim() const override { return base_->dim(); }
  double support_radius() const override { return s_ * base_->support_radius(); }

  double value(const Vec& x) const override {
    return std::pow(s_, -dim()) * base_->value(x / s_);
  }

  Jet jet(const Vec& x, int order) const override {
    Jet b = base_->jet(x / s_, order);
    const Jet::Table& t = Jet::table(dim(), order);
    double f = std::pow(s_, -dim());
    Jet r(dim(), order);
    for (int p = 0; p < r.size(); ++p)
      r.coeff(p) = f * b.coeff(p) * std::pow(s_, -t.indices[p].order());
    return r;
  }

 private:
  ProfilePtr base_;
  double s_;
};

class Combination final : public Profile {
 public:
  explicit Combination(std::vector<std::pair<double, ProfilePtr>> terms)
      : terms_(std::move(terms)) {
    radius_ = 0.0;
    for (const auto& [c, p] : terms_) radius_ = std::max(radius_, p->support_radius());
  }
  int dim() const override { return terms_.front().second->dim(); }
  double support_radius() const override { return radius_; }

  double value(const Vec& x) const override {
    double s = 0.0;
    for (const auto& [c, p] : terms_) s += c * p->value(x);
    return s;
  }

  Jet jet(const Vec& x, int order) const override {
    Jet s(dim(), order);
    for (const auto& [c, p] : terms_) {
      Jet t = p->jet(x, order);
      t *= c;
      s += t;
    }
    return s;
  }

 private:
  std::vector<std::pair<double, ProfilePtr>> terms_;
  double radius_;
};

class NumericProfile final : public Profile {
 public:
  NumericProfile(int dim, double radius, std::function<double(const Vec&)> f,
                 double step)
      : dim_(dim), radius_(radius), f_(std::move(f)), step_(step) {}
  int dim() const override { return dim_; }
  double support_radius() const override { return radius_; }

  double value(const Vec& x) const override {
    if (x.norm() >= radius_) return 0.0;
    return f_(x);
  }

  Jet jet(const Vec& x, int order) const override {
    Jet r(dim_, order);
    const Jet::Table& t = Jet::table(dim_, order);
    for (int p = 0; p < r.size(); ++p) {
      MultiIndex a = t.indices[p];
      double h = step_ * radius_;
      double d = fd(x, a, h);
      double d2 = fd(x, a, h / 2);
      // one Richardson step; central stencils have O(h^2) error
      r.coeff(p) = (4.0 * d2 - d) / 3.0 / a.factorial();
    }
    return r;
  }

 private:
  // central finite difference for d^a f via iterated first differences
  double fd(const Vec& x, const MultiIndex& a, double h) const {
    for (int i = 0; i < dim_; ++i) {
      if (a[i] > 0) {
        MultiIndex b = a;
        b[i] -= 1;
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        return (fd(xp, b, h) - fd(xm, b, h)) / (2.0 * h);
      }
    }
    return value(x);
  }

  int dim_;
  double radius_;
  std::function<double(const Vec&)> f_;
  double step_;
};

}  // namespace

ProfilePtr standard_bump(int dim) { return std::make_shared<StandardBump>(dim); }
ProfilePtr derivative_profile(ProfilePtr base, int axis) {
  return std::make_shared<DerivativeProfile>(std::move(base), axis);
}
ProfilePtr poly_weighted(ProfilePtr base, const MultiIndex& k) {
  return std::make_shared<PolyWeighted>(std::move(base), k);
}
ProfilePtr rescaled_profile(ProfilePtr base, double s) {
  return std::make_shared<RescaledProfile>(std::move(base), s);
}
ProfilePtr combination(std::vector<std::pair<double, ProfilePtr>> terms) {
  return std::make_shared<Combination>(std::move(terms));
}
ProfilePtr numeric_profile(int dim, double support_radius,
                           std::function<double(const Vec&)> f, double fd_step) {
  return std::make_shared<NumericProfile>(dim, support_radius, std::move(f), fd_step);
}

double TestFunction::value(const Vec& y) const {
  Vec u = (y - center) / scale;
  if (u.norm2() >= profile->support_radius() * profile->support_radius()) return 0.0;
  return coeff * std::pow(scale, -dim()) * profile->value(u);
}

double TestFunction::derivative(const Vec& y, const MultiIndex& k) const {
  Vec u = (y - center) / scale;
  if (u.norm2() >= profile->support_radius() * profile->support_radius()) return 0.0;
  double fac = coeff * std::pow(scale, -dim() - k.order());
  return fac * profile->jet(u, k.order()).derivative(k);
}

TestFunction make_bump(int dim, BumpKind kind, int arg) {
  if (dim < 1 || dim > 3) throw DimensionError("make_bump: dim must be 1, 2 or 3");
  ProfilePtr base = standard_bump(dim);
  switch (kind) {
    case BumpKind::Standard:
      break;
    case BumpKind::Derivative:
      if (arg < 0 || arg >= dim) throw ParameterError("make_bump: bad axis");
      base = derivative_profile(base, arg);
      break;
    case BumpKind::PolyWeighted: {
      MultiIndex k(dim);
      k[0] = arg;
      base = poly_weighted(base, k);
      break;
    }
  }
  return TestFunction{base, Vec(dim), 1.0, 1.0};
}

TestFunction rescale(const TestFunction& phi, const Vec& x, double lambda) {
  if (lambda <= 0.0) throw ParameterError("rescale: lambda must be positive");
  // lambda^{-d} phi((y-x)/lambda) composes into a single affine profile view
  TestFunction t;
  t.profile = phi.profile;
  t.center = x + lambda * phi.center;
  t.scale = lambda * phi.scale;
  t.coeff = phi.coeff;
  return t;
}

double cm_norm(const TestFunction& phi, int m, int grid_per_axis) {
  const int d = phi.dim();
  const double r = phi.support_radius();
  const Jet::Table& t = Jet::table(d, m);
  double best = 0.0;

  // inclusive endpoints so symmetric maxima (e.g. the bump's center) land on
  // grid nodes exactly
  const int n = grid_per_axis;
  std::vector<int> idx(d, 0);
  Vec y(d);
  for (;;) {
    for (int i = 0; i < d; ++i)
      y[i] = phi.center[i] - r + 2.0 * r * idx[i] / n;
    Vec u = (y - phi.center) / phi.scale;
    if (u.norm2() < phi.profile->support_radius() * phi.profile->support_radius()) {
      if (m == 0) {
        best = std::max(best, std::abs(phi.value(y)));
      } else {
        Jet j = phi.profile->jet(u, m);
        for (int p = 0; p < j.size(); ++p) {
          const MultiIndex& a = t.indices[p];
          double v = std::abs(phi.coeff) * std::pow(phi.scale, -d - a.order()) *
                     std::abs(j.coeff(p) * a.factorial());
          best = std::max(best, v);
        }
      }
    }
    int i = d - 1;
    while (i >= 0 && ++idx[i] == n + 1) idx[i--] = 0;
    if (i < 0) break;
  }
  return best;
}

namespace {

// all moments in one pass over shared quadrature nodes
std::vector<double> moments_by_quadrature(const TestFunction& phi, int ell_max,
                                          const Vec& origin, double tol) {
  const int d = phi.dim();
  auto idxs = MultiIndex::enumerate(d, ell_max);
  std::vector<double> out(idxs.size());
  Box sup = phi.support();

  // tensor quadrature with panel doubling on the slowest moment
  int panels = 8;
  std::vector<double> prev(idxs.size(), 0.0), cur(idxs.size(), 0.0);
  const int cap = (d == 1) ? (1 << 20) : ((d == 2) ? 512 : 64);
  auto run = [&](int p) {
    std::vector<double> acc(idxs.size(), 0.0);
    const quad::Rule& rule = quad::gauss(12);
    std::vector<int> cell(d, 0);
    std::vector<int> node(d, 0);
    Vec y(d);
    double h[3];
    for (int i = 0; i < d; ++i) h[i] = (sup.hi[i] - sup.lo[i]) / p;
    for (;;) {
      // iterate nodes within the current cell block
      for (;;) {
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
          double c = sup.lo[i] + (cell[i] + 0.5) * h[i];
          y[i] = c + 0.5 * h[i] * rule.x[node[i]];
          w *= 0.5 * h[i] * rule.w[node[i]];
        }
        double v = phi.value(y);
        if (v != 0.0) {
          Vec z = y - origin;
          for (size_t k = 0; k < idxs.size(); ++k)
            acc[k] += w * monomial(z, idxs[k]) * v;
        }
        int i = d - 1;
        while (i >= 0 && ++node[i] == static_cast<int>(rule.x.size())) node[i--] = 0;
        if (i < 0) break;
      }
      int i = d - 1;
      while (i >= 0 && ++cell[i] == p) cell[i--] = 0;
      if (i < 0) break;
    }
    return acc;
  };

  prev = run(panels);
  for (panels *= 2; panels <= cap; panels *= 2) {
    cur = run(panels);
    double diff = 0.0;
    for (size_t k = 0; k < idxs.size(); ++k)
      diff = std::max(diff, std::abs(cur[k] - prev[k]));
    prev = cur;
    if (diff < tol) break;
  }
  out = prev;
  return out;
}

// moments of bare profiles, cached per profile instance: every rescaled or
// recentered moment then reduces to a binomial combination
const std::vector<double>& profile_moments(const ProfilePtr& p, int ell_max) {
  static std::mutex mu;
  static std::map<std::pair<const Profile*, int>, std::vector<double>> cache;
  static std::vector<ProfilePtr> pinned;
  int ell = std::max(ell_max, 4);  // compute a few extra orders up front
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({p.get(), ell});
  if (it != cache.end()) return it->second;
  TestFunction unit{p, Vec(p->dim()), 1.0, 1.0};
  auto m = moments_by_quadrature(unit, ell, Vec(p->dim()), 1e-12);
  pinned.push_back(p);
  return cache.emplace(std::make_pair(p.get(), ell), std::move(m)).first->second;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

std::vector<double> moments(const TestFunction& phi, int ell_max, const Vec& origin,
                            double tol) {
  (void)tol;
  const int d = phi.dim();
  int ell_profile = std::max(ell_max, 4);
  const std::vector<double>& pm = profile_moments(phi.profile, ell_profile);
  auto prof_idx = MultiIndex::enumerate(d, ell_profile);
  const Jet::Table& table = Jet::table(d, ell_profile);

  // (y - origin)^k with y = center + scale * u:
  // prod_i ((center_i - origin_i) + scale u_i)^{k_i}
  Vec c = phi.center - origin;
  auto idxs = MultiIndex::enumerate(d, ell_max);
  std::vector<double> out(idxs.size(), 0.0);
  for (std::size_t t = 0; t < idxs.size(); ++t) {
    const MultiIndex& k = idxs[t];
    // iterate j <= k componentwise
    MultiIndex j(d);
    for (;;) {
      double coef = 1.0;
      for (int i = 0; i < d; ++i)
        coef *= binom(k[i], j[i]) * std::pow(c[i], k[i] - j[i]);
      coef *= std::pow(phi.scale, j.order());
      out[t] += coef * pm[table.pos(j)];
      int i = d - 1;
      while (i >= 0 && ++j[i] > k[i]) j[i--] = 0;
      if (i < 0) break;
    }
    out[t] *= phi.coeff;
  }
  return out;
}

std::vector<double> moments(const TestFunction& phi, int ell_max, double tol) {
  return moments(phi, ell_max, phi.center, tol);
}

TestFunction project_vanishing_moments(const TestFunction& phi, int ell, int m_norm,
                                       int grid_per_axis) {
  if (ell < 0) throw ParameterError("project_vanishing_moments: ell must be >= 0");
  const int d = phi.dim();
  auto idxs = MultiIndex::enumerate(d, ell);
  const int n = static_cast<int>(idxs.size());

  // Correction basis: monomial-weighted bumps at half the profile's support
  // radius. The half radius keeps the basis outside the span of common
  // inputs, so projecting the canonical bump itself does not collapse to
  // zero; already-vanishing inputs get a zero correction.
  double half = 0.5 * phi.profile->support_radius();
  ProfilePtr bump = rescaled_profile(standard_bump(d), half);
  std::vector<ProfilePtr> basis;
  basis.reserve(n);
  for (const auto& k : idxs) basis.push_back(poly_weighted(bump, k));

  // profile-level centered moments; the lambda-rescaling preserves zeros
  TestFunction probe{phi.profile, Vec(d), 1.0, phi.coeff};
  std::vector<double> rhs_m = moments(probe, ell);

  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    TestFunction bj{basis[j], Vec(d), 1.0, 1.0};
    std::vector<double> mj = moments(bj, ell);
    for (int i = 0; i < n; ++i) M(i, j) = mj[i];
  }
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = rhs_m[i];

  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw ConditioningError("project_vanishing_moments: singular Gram matrix");
  Eigen::VectorXd c = lu.solve(rhs);

  std::vector<std::pair<double, ProfilePtr>> terms;
  terms.emplace_back(phi.coeff, phi.profile);
  for (int j = 0; j < n; ++j)
    if (c(j) != 0.0) terms.emplace_back(-c(j), basis[j]);

  TestFunction out;
  out.profile = combination(std::move(terms));
  out.center = phi.center;
  out.scale = phi.scale;
  out.coeff = 1.0;

  if (m_norm >= 0) {
    double nn = cm_norm(out, m_norm, grid_per_axis);
    if (nn > 1.0) out.coeff /= nn;
  }
  return out;
}

Recentered recenter_flat(const TestFunction& phi, const Vec& x, double lambda,
                         const Vec& y) {
  if (lambda <= 0.0) throw ParameterError("recenter_flat: lambda must be positive");
  double lambda1 = dist(x, y) + lambda;
  double lambda2 = lambda / lambda1;
  Vec w = (x - y) / lambda1;
  return Recentered{rescale(phi, w, lambda2), lambda1};
}

bool FunctionClassSpec::contains(const TestFunction& phi, double norm_tol,
                                 double moment_tol, int grid_per_axis) const {
  if (!region.contains(phi.support().lo) || !region.contains(phi.support().hi))
    return false;
  if (cm_norm(phi, m, grid_per_axis) > 1.0 + norm_tol) return false;
  if (ell >= 0) {
    std::vector<double> ms = moments(phi, ell, Vec(phi.dim()));
    for (double v : ms)
      if (std::abs(v) > moment_tol) return false;
  }
  return true;
}

}  // namespace testfn
}  // namespace germcal
