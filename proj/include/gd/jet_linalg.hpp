#pragma once

#include <vector>

#include "gd/jet.hpp"

namespace gd {

/// Dense matrix of jets sharing one (nvars, order).  Sizes here are tiny
/// (at most 7x7), so elimination-based solves are plenty.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, int nvars, int order);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Jet& at(int i, int j) { return data_[i * cols_ + j]; }
  const Jet& at(int i, int j) const { return data_[i * cols_ + j]; }

  JetMatrix transpose() const;

  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Jet> data_;
};

/// Solves A X = B by Gaussian elimination with partial pivoting on the
/// constant terms.  Throws GeometryError when A's value matrix is singular.
JetMatrix solve_jet(JetMatrix a, JetMatrix b);

/// Solves x^T A = b^T, i.e. A^T x = b.
JetVec solve_jet_vec(const JetMatrix& a, const JetVec& b);

}  // namespace gd
