#include "gd/jet_linalg.hpp"

#include <cmath>

#include "gd/errors.hpp"

namespace gd {

JetMatrix::JetMatrix(int rows, int cols, int nvars, int order)
    : rows_(rows), cols_(cols) {
  data_.assign(static_cast<std::size_t>(rows) * cols, Jet(nvars, order));
}

JetMatrix JetMatrix::transpose() const {
  JetMatrix out = *this;
  out.rows_ = cols_;
  out.cols_ = rows_;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out.data_[j * rows_ + i] = data_[i * cols_ + j];
  return out;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("jet matmul size mismatch");
  const Jet& probe = a.at(0, 0);
  JetMatrix out(a.rows(), b.cols(), probe.nvars(), probe.order());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Jet acc(probe.nvars(), probe.order());
      for (int k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
      out.at(i, j) = acc;
    }
  return out;
}

JetMatrix solve_jet(JetMatrix a, JetMatrix b) {
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw std::invalid_argument("solve_jet: size mismatch");
  const int n = a.rows();
  const int m = b.cols();
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(a.at(col, col).value());
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(a.at(r, col).value());
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) throw GeometryError("solve_jet: singular system");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a.at(piv, j), a.at(col, j));
      for (int j = 0; j < m; ++j) std::swap(b.at(piv, j), b.at(col, j));
    }
    Jet inv = a.at(col, col).reciprocal();
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = a.at(r, col) * inv;
      if (f.value() == 0.0) {
        bool all_zero = true;
        for (int k = 0; k < f.table().size(); ++k) all_zero = all_zero && f.coeff(k) == 0.0;
        if (all_zero) continue;
      }
      for (int j = col; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
      for (int j = 0; j < m; ++j) b.at(r, j) -= f * b.at(col, j);
    }
  }
  const Jet& probe = a.at(0, 0);
  JetMatrix x(n, m, probe.nvars(), probe.order());
  for (int i = 0; i < n; ++i) {
    Jet inv = a.at(i, i).reciprocal();
    for (int j = 0; j < m; ++j) x.at(i, j) = b.at(i, j) * inv;
  }
  return x;
}

JetVec solve_jet_vec(const JetMatrix& a, const JetVec& b) {
  JetMatrix rhs(static_cast<int>(b.size()), 1, b[0].nvars(), b[0].order());
  for (std::size_t i = 0; i < b.size(); ++i) rhs.at(static_cast<int>(i), 0) = b[i];
  JetMatrix x = solve_jet(a.transpose(), rhs);
  JetVec out;
  out.reserve(b.size());
  for (int i = 0; i < x.rows(); ++i) out.push_back(x.at(i, 0));
  return out;
}

}  // namespace gd
