#pragma once

#include <vector>

#include "germcal/common.hpp"

namespace germcal {

// Truncated multivariate Taylor arithmetic. A Jet carries the Taylor
// coefficients c_a = d^a f(x) / a! of a function at a point, for all
// multi-indices |a| <= order. Propagating jets through a closed-form
// expression yields exact partial derivatives of the composite, which is how
// test-function profiles and kernel levels expose their derivatives.
class Jet {
 public:
  Jet() = default;
  Jet(int dim, int order);

  static Jet constant(double v, int dim, int order);
  // seed for the i-th coordinate: value + first-order term in variable i
  static Jet variable(double v, int axis, int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }
  // d^a f at the expansion point
  double derivative(const MultiIndex& a) const;
  double coeff(int pos) const { return c_[pos]; }
  double& coeff(int pos) { return c_[pos]; }
  int size() const { return static_cast<int>(c_.size()); }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator*=(double s);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  Jet operator-() const;
  friend Jet operator*(const Jet& a, const Jet& b);

  // Composition with a univariate analytic map g: given the sequence
  // g(c), g'(c), g''(c), ... at c = value(), returns the jet of g(f).
  Jet compose(const std::vector<double>& g_derivs) const;

  friend Jet exp(const Jet& f);
  friend Jet log(const Jet& f);    // requires value() > 0
  friend Jet sqrt(const Jet& f);   // requires value() > 0
  friend Jet recip(const Jet& f);  // requires value() != 0
  friend Jet pow(const Jet& f, double p);
  friend Jet sin(const Jet& f);
  friend Jet cos(const Jet& f);

  // multi-index table shared by all jets of a given shape
  struct Table {
    int dim, order;
    std::vector<MultiIndex> indices;       // graded enumeration
    std::vector<int> position;             // dense (order+1)^dim lookup
    struct Pair {
      int a, b, target;
    };
    std::vector<Pair> products;            // all products with |a|+|b| <= order
    int pos(const MultiIndex& k) const;
  };
  static const Table& table(int dim, int order);

 private:
  int dim_ = 0, order_ = 0;
  std::vector<double> c_;
};

}  // namespace germcal
