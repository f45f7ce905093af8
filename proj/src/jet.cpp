#include "gd/jet.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace gd {

namespace {

std::array<int, kMaxJetVars> to_array(std::span<const int> alpha, int nvars) {
  std::array<int, kMaxJetVars> a{};
  for (int i = 0; i < nvars && i < static_cast<int>(alpha.size()); ++i) a[i] = alpha[i];
  return a;
}

}  // namespace

MultiIndexSet::MultiIndexSet(int nvars, int order) : nvars_(nvars), order_(order) {
  // Graded lexicographic enumeration.
  std::array<int, kMaxJetVars> cur{};
  for (int deg = 0; deg <= order; ++deg) {
    // Enumerate all alpha with |alpha| = deg, lexicographically.
    std::vector<std::array<int, kMaxJetVars>> level;
    std::array<int, kMaxJetVars> a{};
    // Recursive fill via explicit stack over positions.
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
      if (pos == nvars - 1) {
        a[pos] = remaining;
        level.push_back(a);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        a[pos] = v;
        self(self, pos + 1, remaining - v);
      }
    };
    rec(rec, 0, deg);
    for (const auto& e : level) {
      exps_.push_back(e);
      degs_.push_back(deg);
    }
  }
  (void)cur;

  const int n = size();
  sums_.assign(static_cast<std::size_t>(n) * n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (degs_[i] + degs_[j] > order) continue;
      std::array<int, kMaxJetVars> s{};
      for (int k = 0; k < nvars; ++k) s[k] = exps_[i][k] + exps_[j][k];
      sums_[i * n + j] = index_of(std::span<const int>(s.data(), nvars));
    }
  }

  facts_.resize(n);
  for (int i = 0; i < n; ++i) {
    double f = 1.0;
    for (int k = 0; k < nvars; ++k)
      for (int v = 2; v <= exps_[i][k]; ++v) f *= v;
    facts_[i] = f;
  }
}

int MultiIndexSet::index_of(std::span<const int> alpha) const {
  const auto a = to_array(alpha, nvars_);
  int deg = 0;
  for (int k = 0; k < nvars_; ++k) {
    if (a[k] < 0) return -1;
    deg += a[k];
  }
  if (deg > order_) return -1;
  for (int i = 0; i < size(); ++i)
    if (degs_[i] == deg && exps_[i] == a) return i;
  return -1;
}

const MultiIndexSet& MultiIndexSet::get(int nvars, int order) {
  if (nvars < 1 || nvars > kMaxJetVars)
    throw std::invalid_argument("jet nvars must be in 1..4");
  if (order < 0 || order > kMaxJetOrderUnivariate ||
      (nvars > 1 && order > kMaxJetOrderMultivariate))
    throw std::invalid_argument("jet order out of range (<=3 multivariate, <=4 univariate)");
  static std::mutex mu;
  static std::map<std::pair<int, int>, const MultiIndexSet*> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(nvars, order);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, new MultiIndexSet(nvars, order)).first;
  return *it->second;
}

Jet::Jet(int nvars, int order) : table_(&MultiIndexSet::get(nvars, order)) {
  c_.assign(table_->size(), 0.0);
}

Jet Jet::constant(int nvars, int order, double v) {
  Jet j(nvars, order);
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(int nvars, int order, int i, double v) {
  if (i < 0 || i >= nvars) throw std::invalid_argument("jet variable index out of range");
  Jet j(nvars, order);
  j.c_[0] = v;
  if (order >= 1) {
    std::array<int, kMaxJetVars> e{};
    e[i] = 1;
    j.c_[j.table_->index_of(std::span<const int>(e.data(), nvars))] = 1.0;
  }
  return j;
}

void Jet::check_compatible(const Jet& o) const {
  if (table_ != o.table_)
    throw std::invalid_argument("jet (order, nvars) mismatch");
}

double Jet::coeff(std::span<const int> alpha) const {
  int k = table_->index_of(alpha);
  if (k < 0) throw std::out_of_range("multi-index outside jet order");
  return c_[k];
}

double Jet::partial(std::span<const int> alpha) const {
  int k = table_->index_of(alpha);
  if (k < 0) throw std::out_of_range("multi-index outside jet order");
  return table_->factorial(k) * c_[k];
}

Jet Jet::derivative(int i) const {
  if (i < 0 || i >= nvars()) throw std::invalid_argument("derivative index out of range");
  if (order() == 0) throw std::invalid_argument("cannot differentiate an order-0 jet");
  Jet out(nvars(), order() - 1);
  const auto& src = *table_;
  const auto& dst = out.table();
  for (int k = 0; k < dst.size(); ++k) {
    std::array<int, kMaxJetVars> e = dst.exponents(k);
    e[i] += 1;
    int ks = src.index_of(std::span<const int>(e.data(), nvars()));
    out.c_[k] = c_[ks] * e[i];
  }
  return out;
}

Jet Jet::truncated(int new_order) const {
  if (new_order > order()) throw std::invalid_argument("truncated() cannot raise order");
  Jet out(nvars(), new_order);
  for (int k = 0; k < out.table().size(); ++k) out.c_[k] = c_[k];
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (double& v : out.c_) v = -v;
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(o);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(o);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.check_compatible(b);
  const auto& t = *a.table_;
  Jet out(t.nvars(), t.order());
  const int n = t.size();
  for (int i = 0; i < n; ++i) {
    if (a.c_[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      int k = t.sum_index(i, j);
      if (k >= 0) out.c_[k] += a.c_[i] * b.c_[j];
    }
  }
  return out;
}

Jet Jet::reciprocal() const {
  const double g0 = value();
  if (g0 == 0.0) throw EvalError("jet division by zero constant term");
  // 1/g = (1/g0) * sum_k u^k with u = 1 - g/g0 (zero constant term).
  Jet u = -(*this) * (1.0 / g0);
  u += 1.0;
  Jet acc = Jet::constant(nvars(), order(), 1.0);
  Jet term = Jet::constant(nvars(), order(), 1.0);
  for (int k = 1; k <= order(); ++k) {
    term = term * u;
    acc += term;
  }
  return acc * (1.0 / g0);
}

Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }

Jet Jet::pow(int e) const {
  if (e < 0) return reciprocal().pow(-e);
  Jet acc = Jet::constant(nvars(), order(), 1.0);
  Jet base = *this;
  int k = e;
  while (k > 0) {
    if (k & 1) acc = acc * base;
    base = base * base;
    k >>= 1;
  }
  return acc;
}

Jet compose_series(std::span<const double> series, const Jet& a) {
  Jet w = a;
  w -= a.value();
  Jet acc = Jet::constant(a.nvars(), a.order(), series.empty() ? 0.0 : series[0]);
  Jet wp = Jet::constant(a.nvars(), a.order(), 1.0);
  for (int k = 1; k <= a.order() && k < static_cast<int>(series.size()); ++k) {
    wp = wp * w;
    acc += wp * series[k];
  }
  return acc;
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  // Derivatives of sin cycle with period 4; series[k] = f^(k)(a0)/k!.
  std::array<double, kMaxJetOrderUnivariate + 1> ser{};
  const double cyc[4] = {s, c, -s, -c};
  double fact = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) fact *= k;
    ser[k] = cyc[k % 4] / fact;
  }
  return compose_series(std::span<const double>(ser.data(), a.order() + 1), a);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  std::array<double, kMaxJetOrderUnivariate + 1> ser{};
  const double cyc[4] = {c, -s, -c, s};
  double fact = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) fact *= k;
    ser[k] = cyc[k % 4] / fact;
  }
  return compose_series(std::span<const double>(ser.data(), a.order() + 1), a);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  std::array<double, kMaxJetOrderUnivariate + 1> ser{};
  double fact = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) fact *= k;
    ser[k] = e / fact;
  }
  return compose_series(std::span<const double>(ser.data(), a.order() + 1), a);
}

}  // namespace gd
