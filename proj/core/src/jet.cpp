#include "germcal/jet.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace germcal {

std::vector<MultiIndex> MultiIndex::enumerate(int dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int deg = 0; deg <= max_order; ++deg) {
    // lexicographic within fixed degree
    MultiIndex k(dim);
    // iterate over all k with |k| == deg
    std::vector<int> cur(dim, 0);
    while (true) {
      int s = 0;
      for (int i = 0; i < dim; ++i) s += cur[i];
      if (s == deg) {
        MultiIndex m(dim);
        for (int i = 0; i < dim; ++i) m[i] = cur[i];
        out.push_back(m);
      }
      int i = dim - 1;
      while (i >= 0 && cur[i] == deg) {
        cur[i] = 0;
        --i;
      }
      if (i < 0) break;
      ++cur[i];
    }
  }
  return out;
}

int Jet::Table::pos(const MultiIndex& k) const {
  int stride = order + 1;
  int idx = 0;
  for (int i = 0; i < dim; ++i) idx = idx * stride + k[i];
  return position[idx];
}

const Jet::Table& Jet::table(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, Table> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({dim, order});
  if (it != cache.end()) return it->second;

  Table t;
  t.dim = dim;
  t.order = order;
  t.indices = MultiIndex::enumerate(dim, order);
  int dense = 1;
  for (int i = 0; i < dim; ++i) dense *= (order + 1);
  t.position.assign(dense, -1);
  for (int p = 0; p < static_cast<int>(t.indices.size()); ++p) {
    const MultiIndex& k = t.indices[p];
    int idx = 0;
    for (int i = 0; i < dim; ++i) idx = idx * (order + 1) + k[i];
    t.position[idx] = p;
  }
  for (int a = 0; a < static_cast<int>(t.indices.size()); ++a) {
    for (int b = 0; b < static_cast<int>(t.indices.size()); ++b) {
      if (t.indices[a].order() + t.indices[b].order() > order) continue;
      MultiIndex s = t.indices[a] + t.indices[b];
      t.products.push_back({a, b, t.pos(s)});
    }
  }
  return cache.emplace(std::make_pair(dim, order), std::move(t)).first->second;
}

Jet::Jet(int dim, int order) : dim_(dim), order_(order) {
  c_.assign(table(dim, order).indices.size(), 0.0);
}

Jet Jet::constant(double v, int dim, int order) {
  Jet j(dim, order);
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(double v, int axis, int dim, int order) {
  Jet j(dim, order);
  j.c_[0] = v;
  if (order >= 1) j.c_[table(dim, order).pos(MultiIndex::unit(dim, axis))] = 1.0;
  return j;
}

double Jet::derivative(const MultiIndex& a) const {
  if (a.order() > order_) return 0.0;
  return c_[table(dim_, order_).pos(a)] * a.factorial();
}

Jet& Jet::operator+=(const Jet& o) {
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}
Jet& Jet::operator-=(const Jet& o) {
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}
Jet& Jet::operator*=(double s) {
  for (double& c : c_) c *= s;
  return *this;
}
Jet Jet::operator-() const {
  Jet r = *this;
  r *= -1.0;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  const Jet::Table& t = Jet::table(a.dim_, a.order_);
  Jet r(a.dim_, a.order_);
  for (const auto& p : t.products) r.c_[p.target] += a.c_[p.a] * b.c_[p.b];
  return r;
}

Jet Jet::compose(const std::vector<double>& g) const {
  // h = f - f(0) has no constant term, so h^j vanishes beyond j > order and
  // the Taylor expansion of g around value() terminates exactly.
  Jet h = *this;
  h.c_[0] = 0.0;
  Jet acc = Jet::constant(g[0], dim_, order_);
  Jet hp = Jet::constant(1.0, dim_, order_);
  double fact = 1.0;
  for (int j = 1; j <= order_ && j < static_cast<int>(g.size()); ++j) {
    hp = hp * h;
    fact *= j;
    Jet term = hp;
    term *= g[j] / fact;
    acc += term;
  }
  return acc;
}

Jet exp(const Jet& f) {
  double e = std::exp(f.value());
  std::vector<double> g(f.order() + 1, e);
  return f.compose(g);
}

Jet log(const Jet& f) {
  double c = f.value();
  std::vector<double> g(f.order() + 1);
  g[0] = std::log(c);
  double p = 1.0;  // (j-1)! * (-1)^{j-1} / c^j
  for (int j = 1; j <= f.order(); ++j) {
    p = (j == 1) ? 1.0 / c : -p * (j - 1) / c;
    g[j] = p;
  }
  return f.compose(g);
}

Jet recip(const Jet& f) {
  double c = f.value();
  std::vector<double> g(f.order() + 1);
  double p = 1.0 / c;
  g[0] = p;
  double fact = 1.0;
  for (int j = 1; j <= f.order(); ++j) {
    p *= -1.0 / c;
    fact *= j;
    g[j] = p * fact;
  }
  return f.compose(g);
}

Jet sqrt(const Jet& f) { return pow(f, 0.5); }

Jet pow(const Jet& f, double p) {
  double c = f.value();
  std::vector<double> g(f.order() + 1);
  g[0] = std::pow(c, p);
  double coef = p;
  for (int j = 1; j <= f.order(); ++j) {
    g[j] = coef * std::pow(c, p - j);
    coef *= (p - j);
  }
  return f.compose(g);
}

Jet sin(const Jet& f) {
  double s = std::sin(f.value()), c = std::cos(f.value());
  std::vector<double> g(f.order() + 1);
  const double tab[4] = {s, c, -s, -c};
  for (int j = 0; j <= f.order(); ++j) g[j] = tab[j % 4];
  return f.compose(g);
}

Jet cos(const Jet& f) {
  double s = std::sin(f.value()), c = std::cos(f.value());
  std::vector<double> g(f.order() + 1);
  const double tab[4] = {c, -s, -c, s};
  for (int j = 0; j <= f.order(); ++j) g[j] = tab[j % 4];
  return f.compose(g);
}

}  // namespace germcal
