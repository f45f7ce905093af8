#pragma once

#include <Eigen/Dense>
#include <optional>

#include "gd/errors.hpp"

namespace gd {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Numerical rank policy: count of singular values > rank_tol * largest.
/// One global default, overridable per call.
inline constexpr double kRankTol = 1e-10;

int numerical_rank(const Mat& m, double rank_tol = kRankTol);

/// Orthonormal basis (rows) of the row space of m.
Mat row_space_basis(const Mat& m, double rank_tol = kRankTol);

/// Orthonormal basis (rows) of the right null space of m.
Mat null_space_basis(const Mat& m, double rank_tol = kRankTol);

/// Orthonormal basis (rows) of the orthogonal complement of the row space.
Mat orthogonal_complement(const Mat& m, double rank_tol = kRankTol);

/// Point of P^N as a homogeneous coordinate vector, never zero; comparisons
/// are up to nonzero scale.
struct HomPoint {
  Vec coords;

  HomPoint() = default;
  explicit HomPoint(Vec v);

  int ambient_dim() const { return static_cast<int>(coords.size()) - 1; }

  /// Scales so the largest-magnitude entry equals 1.
  HomPoint normalized() const;
};

bool approx_equal(const HomPoint& a, const HomPoint& b, double tol = 1e-8);

/// k-dimensional projective subspace of P^N stored as a full-row-rank
/// (k+1) x (N+1) basis matrix.  The stored basis is orthonormalized.
class ProjSubspace {
 public:
  /// Throws GeometryError when the rows are not numerically independent.
  explicit ProjSubspace(const Mat& basis, double rank_tol = kRankTol);

  static ProjSubspace from_point(const HomPoint& p);

  int dim() const { return static_cast<int>(basis_.rows()) - 1; }
  int ambient_dim() const { return static_cast<int>(basis_.cols()) - 1; }
  const Mat& basis() const { return basis_; }

  /// Rows spanning the annihilator (orthogonal complement).
  Mat annihilator() const;

  bool contains(const HomPoint& p, double tol = 1e-8) const;
  bool contains(const ProjSubspace& s, double tol = 1e-8) const;

  /// sin of the angle between p and its projection onto the subspace.
  double distance(const HomPoint& p) const;

 private:
  Mat basis_;
};

/// Projective span of the two subspaces.
ProjSubspace join(const ProjSubspace& s1, const ProjSubspace& s2,
                  double rank_tol = kRankTol);

/// Numerical intersection via the null space of stacked annihilators;
/// empty optional when the subspaces do not meet within tolerance.
std::optional<ProjSubspace> meet(const ProjSubspace& s1, const ProjSubspace& s2,
                                 double rank_tol = kRankTol);

/// Largest principal angle between the row spaces, in [0, pi/2].
/// Requires equal dimensions.
double subspace_angle(const ProjSubspace& s1, const ProjSubspace& s2);

/// Largest principal angle measuring how far `small` sticks out of `big`;
/// 0 iff small is contained in big.  Requires dim(small) <= dim(big).
double containment_angle(const ProjSubspace& small, const ProjSubspace& big);

/// Projective frame A_0..A_N; the coordinate matrix must be invertible.
struct Frame {
  Mat rows;                  // (N+1) x (N+1), row u = A_u
  double condition_number = 0.0;

  explicit Frame(Mat m);

  int ambient_dim() const { return static_cast<int>(rows.cols()) - 1; }
  Vec point(int u) const { return rows.row(u).transpose(); }

  /// Coordinates of v in the frame basis: solves rows^T * c = v.
  Vec coordinates(const Vec& v) const;

 private:
  Eigen::PartialPivLU<Mat> lu_;
};

}  // namespace gd
