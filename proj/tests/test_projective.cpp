#include "doctest.h"
#include "gd/projective.hpp"

#include <random>

using namespace gd;

TEST_SUITE_BEGIN("projective");

namespace {
Mat random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  return m;
}
}  // namespace

TEST_CASE("hom point normalization and comparison") {
  HomPoint p{(Vec(3) << 2, -4, 1).finished()};
  HomPoint q{(Vec(3) << -1, 2, -0.5).finished()};
  CHECK(approx_equal(p, q));
  CHECK(p.normalized().coords(1) == 1.0);
  CHECK_THROWS_AS(HomPoint{Vec::Zero(3)}, GeometryError);
}

TEST_CASE("join of a point with itself is the point") {
  HomPoint p{(Vec(4) << 1, 2, 3, 4).finished()};
  auto s = ProjSubspace::from_point(p);
  auto j = join(s, s);
  CHECK(j.dim() == 0);
  CHECK(j.contains(p, 1e-12));
}

TEST_CASE("join of two distinct points is a line") {
  HomPoint p{(Vec(4) << 1, 0, 0, 0).finished()};
  HomPoint q{(Vec(4) << 0, 1, 0, 1).finished()};
  auto line = join(ProjSubspace::from_point(p), ProjSubspace::from_point(q));
  CHECK(line.dim() == 1);
  CHECK(line.contains(p, 1e-12));
  CHECK(line.contains(q, 1e-12));
}

TEST_CASE("generic 2-plane in P^4 joined with a derivative span fills P^4") {
  // rank of the stacked 6x5 matrix of a random plane family and its
  // derivative is 5
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Mat a = random_matrix(rng, 3, 5), b = random_matrix(rng, 3, 5);
    ProjSubspace s1(a), s2(b);
    auto j = join(s1, s2);
    CHECK(j.dim() == 4);
  }
}

TEST_CASE("meet of two generic 2-planes in P^4 is a point") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    ProjSubspace s1(random_matrix(rng, 3, 5)), s2(random_matrix(rng, 3, 5));
    auto m = meet(s1, s2);
    REQUIRE(m.has_value());
    CHECK(m->dim() == 0);
    CHECK(s1.contains(*m, 1e-8));
    CHECK(s2.contains(*m, 1e-8));
  }
}

TEST_CASE("meet(S, S) = S and line-in-plane meets") {
  std::mt19937_64 rng(9);
  Mat plane_rows = random_matrix(rng, 3, 5);
  ProjSubspace plane(plane_rows);
  auto self = meet(plane, plane);
  REQUIRE(self.has_value());
  CHECK(self->dim() == 2);
  CHECK(subspace_angle(*self, plane) < 1e-10);

  ProjSubspace line(plane_rows.topRows(2));
  auto m = meet(line, plane);
  REQUIRE(m.has_value());
  CHECK(m->dim() == 1);
  CHECK(subspace_angle(*m, line) < 1e-10);
}

TEST_CASE("disjoint subspaces meet empty") {
  Mat a(2, 5), b(2, 5);
  a.setZero();
  b.setZero();
  a(0, 0) = a(1, 1) = 1;
  b(0, 2) = b(1, 3) = 1;
  CHECK(!meet(ProjSubspace(a), ProjSubspace(b)).has_value());
}

TEST_CASE("subspace angles") {
  Mat a(2, 4), b(2, 4);
  a.setZero();
  b.setZero();
  a(0, 0) = a(1, 1) = 1;
  b(0, 2) = b(1, 3) = 1;
  ProjSubspace s1(a), s2(b);
  CHECK(subspace_angle(s1, s1) == 0.0);
  CHECK(subspace_angle(s1, s2) == doctest::Approx(M_PI / 2));
  Mat c(1, 4);
  c.setZero();
  c(0, 0) = 1;
  CHECK_THROWS_AS(subspace_angle(s1, ProjSubspace(c)), std::invalid_argument);
}

TEST_CASE("angle resolves 1e-8 perturbations") {
  std::mt19937_64 rng(13);
  Mat a = random_matrix(rng, 3, 5);
  Mat b = a + 1e-8 * random_matrix(rng, 3, 5);
  double angle = subspace_angle(ProjSubspace(a), ProjSubspace(b));
  CHECK(angle <= 1e-7);
  CHECK(angle > 0.0);
}

TEST_CASE("Grassmann identity dim join + dim meet = dim S1 + dim S2") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    int N = 4 + static_cast<int>(rng() % 3);  // P^4..P^6
    int d1 = 1 + static_cast<int>(rng() % 3), d2 = 1 + static_cast<int>(rng() % 3);
    ProjSubspace s1(random_matrix(rng, d1 + 1, N + 1));
    ProjSubspace s2(random_matrix(rng, d2 + 1, N + 1));
    auto j = join(s1, s2);
    auto m = meet(s1, s2);
    if (!m.has_value() || j.dim() == N) continue;
    CHECK(j.dim() + m->dim() == s1.dim() + s2.dim());
  }
}

TEST_CASE("meet and join are scale invariant") {
  std::mt19937_64 rng(19);
  Mat a = random_matrix(rng, 3, 5), b = random_matrix(rng, 3, 5);
  Mat a2 = a;
  a2.row(1) *= -37.5;
  auto m1 = meet(ProjSubspace(a), ProjSubspace(b));
  auto m2 = meet(ProjSubspace(a2), ProjSubspace(b));
  REQUIRE(m1.has_value());
  REQUIRE(m2.has_value());
  CHECK(subspace_angle(*m1, *m2) < 1e-10);
  CHECK(subspace_angle(join(ProjSubspace(a), ProjSubspace(b)),
                       join(ProjSubspace(a2), ProjSubspace(b))) < 1e-10);
}

TEST_CASE("the Grassmannian of 2-planes in P^4 has dimension 6") {
  // Differential of the local chart span{e1 + a14 e4 + a15 e5, ...} has rank 6.
  auto chart = [](const Eigen::Matrix<double, 6, 1>& a) {
    Mat rows = Mat::Zero(3, 5);
    rows(0, 0) = rows(1, 1) = rows(2, 2) = 1;
    rows(0, 3) = a(0);
    rows(0, 4) = a(1);
    rows(1, 3) = a(2);
    rows(1, 4) = a(3);
    rows(2, 3) = a(4);
    rows(2, 4) = a(5);
    return ProjSubspace(rows);
  };
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  Eigen::Matrix<double, 6, 1> a0;
  for (int i = 0; i < 6; ++i) a0(i) = d(rng);
  const double h = 1e-5;
  Mat diffs(6, 25);
  for (int i = 0; i < 6; ++i) {
    auto ap = a0, am = a0;
    ap(i) += h;
    am(i) -= h;
    Mat dp = chart(ap).basis(), dm = chart(am).basis();
    // Compare via projectors to stay basis independent.
    Mat g = (dp.transpose() * dp - dm.transpose() * dm) / (2 * h);
    diffs.row(i) = Eigen::Map<Eigen::RowVectorXd>(g.data(), 25);
  }
  CHECK(numerical_rank(diffs, 1e-6) == 6);
}

TEST_CASE("frames require invertible coordinate matrices") {
  Mat ok = Mat::Identity(4, 4);
  Frame f(ok);
  CHECK(f.condition_number == doctest::Approx(1.0));
  Mat bad = Mat::Identity(4, 4);
  bad.row(3) = bad.row(2);
  CHECK_THROWS_AS((Frame{bad}), GeometryError);
  Vec v = (Vec(4) << 1, 2, 3, 4).finished();
  CHECK((f.coordinates(v) - v).norm() < 1e-14);
}

TEST_SUITE_END();
