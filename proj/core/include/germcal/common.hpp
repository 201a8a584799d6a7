#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace germcal {

// Points, tangent vectors and chart coordinates are all low-dimensional;
// capacity 4 covers embedded sphere points in up to three intrinsic dimensions.
class Vec {
 public:
  static constexpr int kCap = 4;

  Vec() = default;
  explicit Vec(int n) : n_(n) { v_.fill(0.0); }
  Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
    v_.fill(0.0);
    int i = 0;
    for (double x : xs) v_[i++] = x;
  }
  static Vec zero(int n) { return Vec(n); }

  int size() const { return n_; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }
  const double* data() const { return v_.data(); }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) v_[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator/(Vec a, double s) { return a *= 1.0 / s; }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

 private:
  std::array<double, kCap> v_{};
  int n_ = 0;
};

inline double dist(const Vec& a, const Vec& b) { return (a - b).norm(); }

// Multi-index k = (k_1,...,k_d), |k| = k_1 + ... + k_d.
class MultiIndex {
 public:
  static constexpr int kCap = 4;

  MultiIndex() = default;
  explicit MultiIndex(int dim) : n_(dim) { k_.fill(0); }
  MultiIndex(std::initializer_list<int> ks) : n_(static_cast<int>(ks.size())) {
    k_.fill(0);
    int i = 0;
    for (int k : ks) k_[i++] = k;
  }
  static MultiIndex unit(int dim, int axis) {
    MultiIndex k(dim);
    k.k_[axis] = 1;
    return k;
  }

  int dim() const { return n_; }
  int& operator[](int i) { return k_[i]; }
  int operator[](int i) const { return k_[i]; }
  int order() const {
    int s = 0;
    for (int i = 0; i < n_; ++i) s += k_[i];
    return s;
  }
  double factorial() const {
    double f = 1.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 2; j <= k_[i]; ++j) f *= j;
    return f;
  }
  bool operator==(const MultiIndex& o) const { return n_ == o.n_ && k_ == o.k_; }

  MultiIndex operator+(const MultiIndex& o) const {
    MultiIndex r(n_);
    for (int i = 0; i < n_; ++i) r.k_[i] = k_[i] + o.k_[i];
    return r;
  }

  // Enumerates all multi-indices of dimension dim with |k| <= max_order,
  // graded (by |k|) then lexicographic.
  static std::vector<MultiIndex> enumerate(int dim, int max_order);

 private:
  std::array<int, kCap> k_{};
  int n_ = 0;
};

// x^k = x_1^{k_1} ... x_d^{k_d}
inline double monomial(const Vec& x, const MultiIndex& k) {
  double p = 1.0;
  for (int i = 0; i < k.dim(); ++i)
    for (int j = 0; j < k[i]; ++j) p *= x[i];
  return p;
}

struct Box {
  Vec lo, hi;

  int dim() const { return lo.size(); }
  bool contains(const Vec& x, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
  }
  bool contains(const Box& b) const {
    for (int i = 0; i < dim(); ++i)
      if (b.lo[i] < lo[i] || b.hi[i] > hi[i]) return false;
    return true;
  }
  Box inflated(double eps) const {
    Box b = *this;
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] -= eps;
      b.hi[i] += eps;
    }
    return b;
  }
  static Box ball(const Vec& center, double radius) {
    Box b{center, center};
    return b.inflated(radius);
  }
  static Box cube(int dim, double lo, double hi) {
    Box b{Vec(dim), Vec(dim)};
    for (int i = 0; i < dim; ++i) {
      b.lo[i] = lo;
      b.hi[i] = hi;
    }
    return b;
  }
  double diameter() const { return (hi - lo).norm(); }
};

// Error taxonomy used across modules.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct CapabilityError : Error {
  using Error::Error;
};
struct SupportError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct ConditioningError : Error {
  using Error::Error;
};
struct ConfigurationError : Error {
  using Error::Error;
};
struct NonIntegrableError : Error {
  using Error::Error;
};

// Counter-based splittable RNG: the value at (seed, stream, counter) is a pure
// hash, so sweeps can be partitioned across workers without changing results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  Rng split(std::uint64_t substream) const {
    return Rng(seed_, mix(stream_ ^ 0x9e3779b97f4a7c15ull, substream));
  }

  std::uint64_t next_u64() { return at(counter_++); }
  std::uint64_t at(std::uint64_t counter) const {
    return mix(mix(seed_, stream_), counter);
  }

  // uniform in [0,1)
  double uniform() { return to_unit(next_u64()); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double uniform_at(std::uint64_t counter) const { return to_unit(at(counter)); }
  // uniform point in a box
  Vec point_in(const Box& box) {
    Vec x(box.dim());
    for (int i = 0; i < box.dim(); ++i) x[i] = uniform(box.lo[i], box.hi[i]);
    return x;
  }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }
  static double to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed_, stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace germcal
