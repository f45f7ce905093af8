#pragma once

#include <array>
#include <span>
#include <vector>

#include "gd/errors.hpp"

namespace gd {

inline constexpr int kMaxJetVars = 4;
inline constexpr int kMaxJetOrderMultivariate = 3;
inline constexpr int kMaxJetOrderUnivariate = 4;

inline int max_jet_order(int nvars) {
  return nvars == 1 ? kMaxJetOrderUnivariate : kMaxJetOrderMultivariate;
}

/// Enumeration of multi-indices with |alpha| <= order over nvars variables,
/// in graded lexicographic order, with a precomputed sum table.  Instances
/// are interned; pointers returned by get() are stable for the process.
class MultiIndexSet {
 public:
  static const MultiIndexSet& get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exps_.size()); }

  const std::array<int, kMaxJetVars>& exponents(int k) const { return exps_[k]; }
  int degree(int k) const { return degs_[k]; }

  /// Index of a multi-index, or -1 if outside the table.
  int index_of(std::span<const int> alpha) const;

  /// Index of exps[a] + exps[b], or -1 if the sum exceeds order.
  int sum_index(int a, int b) const { return sums_[a * size() + b]; }

  /// alpha! as a double (orders are tiny, exact in binary64).
  double factorial(int k) const { return facts_[k]; }

 private:
  MultiIndexSet(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<std::array<int, kMaxJetVars>> exps_;
  std::vector<int> degs_;
  std::vector<int> sums_;
  std::vector<double> facts_;
};

/// Truncated multivariate Taylor expansion (jet) with binary64 coefficients.
/// The coefficient stored at multi-index alpha is the alpha-partial derivative
/// divided by alpha!.  Arithmetic is closed at fixed (nvars, order).
class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int order);  // zero jet

  static Jet constant(int nvars, int order, double v);
  /// Jet of the coordinate function t_i expanded at value v.
  static Jet variable(int nvars, int order, int i, double v);

  int nvars() const { return table_->nvars(); }
  int order() const { return table_->order(); }
  bool valid() const { return table_ != nullptr; }

  double value() const { return c_[0]; }
  double coeff(int k) const { return c_[k]; }
  double coeff(std::span<const int> alpha) const;
  double& coeff_ref(int k) { return c_[k]; }

  /// True partial derivative: alpha! * coeff(alpha).
  double partial(std::span<const int> alpha) const;
  double partial(std::initializer_list<int> alpha) const {
    return partial(std::span<const int>(alpha.begin(), alpha.size()));
  }

  /// Jet of the i-th first partial derivative; result has order-1.
  Jet derivative(int i) const;

  /// Truncation to a lower (or equal) order.
  Jet truncated(int new_order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

  /// Multiplicative inverse; requires nonzero constant term.
  Jet reciprocal() const;

  /// Integer power; negative exponents go through reciprocal().
  Jet pow(int e) const;

  const MultiIndexSet& table() const { return *table_; }

 private:
  void check_compatible(const Jet& o) const;

  const MultiIndexSet* table_ = nullptr;
  std::vector<double> c_;
};

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);

/// Composes the power series sum_k series[k] * (a - a0)^k, truncated.
Jet compose_series(std::span<const double> series, const Jet& a);

using JetVec = std::vector<Jet>;

}  // namespace gd
