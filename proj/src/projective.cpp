#include "gd/projective.hpp"

#include <cmath>

namespace gd {

int numerical_rank(const Mat& m, double rank_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_tol * sv(0)) ++r;
  return r;
}

Mat row_space_basis(const Mat& m, double rank_tol) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(0) > 0.0 && sv(i) > rank_tol * sv(0)) ++r;
  Mat v = svd.matrixV();
  return v.leftCols(r).transpose();
}

Mat null_space_basis(const Mat& m, double rank_tol) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(0) > 0.0 && sv(i) > rank_tol * sv(0)) ++r;
  Mat v = svd.matrixV();
  return v.rightCols(v.cols() - r).transpose();
}

Mat orthogonal_complement(const Mat& m, double rank_tol) {
  return null_space_basis(m, rank_tol);
}

HomPoint::HomPoint(Vec v) : coords(std::move(v)) {
  if (coords.size() < 2 || coords.norm() == 0.0)
    throw GeometryError("homogeneous point must be a nonzero vector");
}

HomPoint HomPoint::normalized() const {
  int imax = 0;
  coords.cwiseAbs().maxCoeff(&imax);
  HomPoint out;
  out.coords = coords / coords(imax);
  return out;
}

bool approx_equal(const HomPoint& a, const HomPoint& b, double tol) {
  if (a.coords.size() != b.coords.size()) return false;
  Vec x = a.coords / a.coords.norm();
  Vec y = b.coords / b.coords.norm();
  double d = std::min((x - y).norm(), (x + y).norm());
  return d <= tol;
}

ProjSubspace::ProjSubspace(const Mat& basis, double rank_tol) {
  if (basis.rows() < 1 || basis.cols() < 2)
    throw GeometryError("subspace basis must be nonempty");
  Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) <= rank_tol * sv(0))
    throw GeometryError("subspace basis is not full row rank");
  basis_ = svd.matrixV().leftCols(basis.rows()).transpose();
}

ProjSubspace ProjSubspace::from_point(const HomPoint& p) {
  Mat m(1, p.coords.size());
  m.row(0) = p.coords.transpose();
  return ProjSubspace(m);
}

Mat ProjSubspace::annihilator() const { return orthogonal_complement(basis_); }

double ProjSubspace::distance(const HomPoint& p) const {
  Vec v = p.coords / p.coords.norm();
  Vec proj = basis_.transpose() * (basis_ * v);
  return (v - proj).norm();
}

bool ProjSubspace::contains(const HomPoint& p, double tol) const {
  return distance(p) <= tol;
}

bool ProjSubspace::contains(const ProjSubspace& s, double tol) const {
  if (s.dim() > dim()) return false;
  return containment_angle(s, *this) <= tol;
}

ProjSubspace join(const ProjSubspace& s1, const ProjSubspace& s2, double rank_tol) {
  if (s1.ambient_dim() != s2.ambient_dim())
    throw std::invalid_argument("join: ambient dimension mismatch");
  Mat stacked(s1.basis().rows() + s2.basis().rows(), s1.basis().cols());
  stacked << s1.basis(), s2.basis();
  return ProjSubspace(row_space_basis(stacked, rank_tol), rank_tol);
}

std::optional<ProjSubspace> meet(const ProjSubspace& s1, const ProjSubspace& s2,
                                 double rank_tol) {
  if (s1.ambient_dim() != s2.ambient_dim())
    throw std::invalid_argument("meet: ambient dimension mismatch");
  Mat a1 = s1.annihilator();
  Mat a2 = s2.annihilator();
  Mat stacked(a1.rows() + a2.rows(), a1.cols());
  stacked << a1, a2;
  Mat ns = null_space_basis(stacked, rank_tol);
  if (ns.rows() == 0) return std::nullopt;
  return ProjSubspace(ns, rank_tol);
}

namespace {

// Largest principal angle between the row spaces of orthonormal bases.  Small
// angles come from the sine (projection-residual) route, which stays accurate
// down to machine precision where acos of a cosine saturates near 1e-8.
double largest_principal_angle(const Mat& q1, const Mat& q2) {
  Mat cos_m = q1 * q2.transpose();
  Eigen::JacobiSVD<Mat> cos_svd(cos_m);
  double cmin = cos_svd.singularValues().size()
                    ? cos_svd.singularValues()(cos_svd.singularValues().size() - 1)
                    : 1.0;
  Mat resid = q1 - cos_m * q2;  // rows projected off span(q2)
  Eigen::JacobiSVD<Mat> sin_svd(resid);
  double smax = sin_svd.singularValues().size() ? sin_svd.singularValues()(0) : 0.0;
  if (smax < 0.7) return std::asin(std::clamp(smax, 0.0, 1.0));
  return std::acos(std::clamp(cmin, -1.0, 1.0));
}

}  // namespace

double subspace_angle(const ProjSubspace& s1, const ProjSubspace& s2) {
  if (s1.dim() != s2.dim())
    throw std::invalid_argument("subspace_angle: dimension mismatch");
  if (s1.ambient_dim() != s2.ambient_dim())
    throw std::invalid_argument("subspace_angle: ambient dimension mismatch");
  return largest_principal_angle(s1.basis(), s2.basis());
}

double containment_angle(const ProjSubspace& small, const ProjSubspace& big) {
  if (small.dim() > big.dim())
    throw std::invalid_argument("containment_angle: first argument must not be larger");
  return largest_principal_angle(small.basis(), big.basis());
}

Frame::Frame(Mat m) : rows(std::move(m)) {
  if (rows.rows() != rows.cols())
    throw GeometryError("frame matrix must be square");
  Eigen::JacobiSVD<Mat> svd(rows);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= kRankTol * sv(0))
    throw GeometryError("frame matrix is singular");
  condition_number = sv(0) / sv(sv.size() - 1);
  lu_ = Eigen::PartialPivLU<Mat>(rows.transpose());
}

Vec Frame::coordinates(const Vec& v) const { return lu_.solve(v); }

}  // namespace gd
