#pragma once

// Test-side oracles, independent of the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "gd/cartan.hpp"
#include "gd/expr.hpp"
#include "gd/projective.hpp"

namespace oracle {

/// Independent expression evaluator in extended precision, so that the
/// finite-difference quotients below are truncation-limited rather than
/// roundoff-limited.
inline long double eval_ld(const gd::ExprPtr& e, const std::vector<long double>& u) {
  using K = gd::Expr::Kind;
  switch (e->kind) {
    case K::Number: return e->number.convert_to<long double>();
    case K::Param: return u[e->param];
    case K::Add: return eval_ld(e->a, u) + eval_ld(e->b, u);
    case K::Sub: return eval_ld(e->a, u) - eval_ld(e->b, u);
    case K::Mul: return eval_ld(e->a, u) * eval_ld(e->b, u);
    case K::Div: return eval_ld(e->a, u) / eval_ld(e->b, u);
    case K::Pow: return std::pow(eval_ld(e->a, u), static_cast<long double>(e->exponent));
    case K::Neg: return -eval_ld(e->a, u);
    case K::Func:
      switch (e->fn) {
        case gd::Expr::Fn::Sin: return std::sin(eval_ld(e->a, u));
        case gd::Expr::Fn::Cos: return std::cos(eval_ld(e->a, u));
        case gd::Expr::Fn::Exp: return std::exp(eval_ld(e->a, u));
      }
  }
  return 0.0L;
}

/// Central finite-difference partial derivative of a DSL expression with
/// step 1e-5, recursing over the multi-index one variable at a time.
inline long double fd_partial_ld(const gd::ExprPtr& e, std::vector<long double> u,
                                 std::vector<int> alpha, long double h = 1e-5L) {
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > 0) {
      alpha[i] -= 1;
      std::vector<long double> up = u, um = u;
      up[i] += h;
      um[i] -= h;
      return (fd_partial_ld(e, up, alpha, h) - fd_partial_ld(e, um, alpha, h)) / (2 * h);
    }
  }
  return eval_ld(e, u);
}

inline double fd_partial(const gd::ExprPtr& e, const std::vector<double>& u,
                         const std::vector<int>& alpha, double h = 1e-5) {
  std::vector<long double> ul(u.begin(), u.end());
  return static_cast<double>(fd_partial_ld(e, ul, alpha, static_cast<long double>(h)));
}

/// Rank of the differential of the Gauss map via central finite differences
/// of normalized Pluecker coordinates of the tangent (n+1)-frame.
inline Eigen::VectorXd pluecker_of(const gd::VarietySpec& spec, std::vector<double> u) {
  gd::JetVec j = gd::eval_jet(spec, u, 1);
  const int n = spec.n, N = spec.N;
  gd::Mat rows(n + 1, N + 1);
  for (int k = 0; k <= N; ++k) {
    rows(0, k) = j[k].value();
    for (int i = 0; i < n; ++i) rows(1 + i, k) = j[k].derivative(i).value();
  }
  // All (n+1)x(n+1) minors of the (n+1)x(N+1) matrix, in lexicographic
  // column order.
  std::vector<int> cols(n + 1);
  for (int i = 0; i <= n; ++i) cols[i] = i;
  std::vector<double> minors;
  for (;;) {
    gd::Mat sub(n + 1, n + 1);
    for (int c = 0; c <= n; ++c) sub.col(c) = rows.col(cols[c]);
    minors.push_back(sub.determinant());
    int k = n;
    while (k >= 0 && cols[k] == N - n + k) --k;
    if (k < 0) break;
    ++cols[k];
    for (int i = k + 1; i <= n; ++i) cols[i] = cols[i - 1] + 1;
  }
  Eigen::VectorXd p(minors.size());
  for (std::size_t i = 0; i < minors.size(); ++i) p(i) = minors[i];
  return p / p.norm();
}

inline int pluecker_gauss_rank(const gd::VarietySpec& spec, std::vector<double> u,
                               double h = 1e-5) {
  Eigen::VectorXd base = pluecker_of(spec, u);
  gd::Mat diffs(spec.n, base.size());
  for (int i = 0; i < spec.n; ++i) {
    std::vector<double> up = u, um = u;
    up[i] += h;
    um[i] -= h;
    Eigen::VectorXd pp = pluecker_of(spec, up);
    Eigen::VectorXd pm = pluecker_of(spec, um);
    if (pp.dot(base) < 0) pp = -pp;
    if (pm.dot(base) < 0) pm = -pm;
    Eigen::VectorXd d = (pp - pm) / (2 * h);
    d -= d.dot(base) * base;  // projective differential
    diffs.row(i) = d.transpose();
  }
  Eigen::JacobiSVD<gd::Mat> svd(diffs);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > std::max(1e-6 * sv(0), 1e-6)) ++rank;
  return rank;
}

/// Brute-force dimension of the integral-element space: assembles the linear
/// system in the p^alpha_rho row by row with its own elimination.
inline long long brute_force_S(const gd::PfaffianTableau& t) {
  using gd::Rational;
  const int unknowns = t.q * t.m;
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  for (std::size_t e = 0; e < t.equations.size(); ++e) {
    for (int i = 1; i <= t.m; ++i)
      for (int j = i + 1; j <= t.m; ++j) {
        std::vector<Rational> row(unknowns, Rational(0));
        for (int alpha = 1; alpha <= t.q; ++alpha) {
          Rational ei = t.pi_coeff(static_cast<int>(e), alpha, i);
          Rational ej = t.pi_coeff(static_cast<int>(e), alpha, j);
          row[(alpha - 1) * t.m + (i - 1)] += ej;
          row[(alpha - 1) * t.m + (j - 1)] -= ei;
        }
        rows.push_back(row);
        rhs.push_back(-t.torsion_coeff(static_cast<int>(e), i, j));
      }
  }
  // Gauss-Jordan with exact rationals.
  int rank = 0;
  const int nrows = static_cast<int>(rows.size());
  for (int col = 0; col < unknowns && rank < nrows; ++col) {
    int piv = -1;
    for (int r = rank; r < nrows; ++r)
      if (rows[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[piv], rows[rank]);
    std::swap(rhs[piv], rhs[rank]);
    for (int r = 0; r < nrows; ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      Rational f = rows[r][col] / rows[rank][col];
      for (int c = 0; c < unknowns; ++c) rows[r][c] -= f * rows[rank][c];
      rhs[r] -= f * rhs[rank];
    }
    ++rank;
  }
  for (int r = rank; r < nrows; ++r)
    if (rhs[r] != 0) return -1;
  return unknowns - rank;
}

}  // namespace oracle
