#include "doctest.h"
#include "gd/jet.hpp"

#include <random>

#include "gd/expr.hpp"
#include "oracles.hpp"

using namespace gd;

TEST_SUITE_BEGIN("jets");

namespace {
Jet t_var(int nvars, int order, int i, double v = 0.0) { return Jet::variable(nvars, order, i, v); }
}

TEST_CASE("(1+t)(1-t) at order 2 is 1 - t^2") {
  Jet t = t_var(1, 2, 0);
  Jet p = (t + 1.0) * (1.0 - t);
  CHECK(p.value() == 1.0);
  CHECK(p.partial({1}) == 0.0);
  CHECK(p.partial({2}) == -2.0);
}

TEST_CASE("t1*t2 has mixed second coefficient 1, pure ones 0") {
  Jet p = t_var(2, 2, 0) * t_var(2, 2, 1);
  CHECK(p.partial({1, 1}) == 1.0);
  CHECK(p.partial({2, 0}) == 0.0);
  CHECK(p.partial({0, 2}) == 0.0);
}

TEST_CASE("1/(1-t) at order 3 is the geometric series") {
  Jet t = t_var(1, 3, 0);
  Jet g = Jet::constant(1, 3, 1.0) / (1.0 - t);
  CHECK(g.coeff({0}) == doctest::Approx(1.0));
  CHECK(g.coeff({1}) == doctest::Approx(1.0));
  CHECK(g.coeff({2}) == doctest::Approx(1.0));
  CHECK(g.coeff({3}) == doctest::Approx(1.0));
}

TEST_CASE("division requires a nonzero constant term") {
  Jet t = t_var(1, 3, 0);
  CHECK_THROWS_AS(Jet::constant(1, 3, 1.0) / t, EvalError);
}

TEST_CASE("order/nvars mismatch is an error") {
  CHECK_THROWS_AS(t_var(1, 2, 0) + t_var(1, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(t_var(1, 3, 0) * t_var(2, 3, 0), std::invalid_argument);
}

TEST_CASE("sin jet: t - t^3/6") {
  Jet s = sin(t_var(1, 3, 0));
  CHECK(s.coeff({0}) == doctest::Approx(0.0));
  CHECK(s.coeff({1}) == doctest::Approx(1.0));
  CHECK(s.coeff({2}) == doctest::Approx(0.0));
  CHECK(s.coeff({3}) == doctest::Approx(-1.0 / 6));
}

TEST_CASE("exp of the zero jet is 1") {
  Jet e = exp(Jet::constant(1, 3, 0.0));
  CHECK(e.value() == doctest::Approx(1.0));
  CHECK(e.coeff({1}) == doctest::Approx(0.0));
}

TEST_CASE("cos(t^2) at order 4 is 1 - t^4/2") {
  Jet t = t_var(1, 4, 0);
  Jet c = cos(t * t);
  CHECK(c.coeff({0}) == doctest::Approx(1.0));
  CHECK(c.coeff({1}) == doctest::Approx(0.0));
  CHECK(c.coeff({2}) == doctest::Approx(0.0));
  CHECK(c.coeff({3}) == doctest::Approx(0.0));
  CHECK(c.coeff({4}) == doctest::Approx(-0.5));
}

TEST_CASE("partial extraction") {
  Jet t = t_var(1, 2, 0);
  CHECK((t * t).partial({2}) == 2.0);
  Jet p = t_var(2, 2, 0) * t_var(2, 2, 1);
  CHECK(p.partial({1, 1}) == 1.0);
  Jet q = t_var(2, 2, 0, 3.0) * t_var(2, 2, 1, -2.0);
  CHECK(q.partial({0, 0}) == -6.0);  // value at the expansion point
  CHECK_THROWS_AS(q.partial({3, 0}), std::out_of_range);
}

TEST_CASE("ring laws are exact on integer coefficients") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coef(-4, 4);
  auto random_jet = [&](int nvars, int order) {
    Jet j(nvars, order);
    for (int k = 0; k < j.table().size(); ++k) j.coeff_ref(k) = coef(rng);
    return j;
  };
  for (int trial = 0; trial < 40; ++trial) {
    int nvars = 1 + trial % 3;
    int order = std::min(3, 1 + trial % 4);
    Jet a = random_jet(nvars, order), b = random_jet(nvars, order), c = random_jet(nvars, order);
    Jet ab = a * b, ba = b * a;
    Jet lhs = (a * b) * c, rhs = a * (b * c);
    Jet dl = a * (b + c), dr = a * b + a * c;
    for (int k = 0; k < a.table().size(); ++k) {
      CHECK(ab.coeff(k) == ba.coeff(k));
      CHECK(lhs.coeff(k) == rhs.coeff(k));
      CHECK(dl.coeff(k) == dr.coeff(k));
    }
  }
}

TEST_CASE("pow matches repeated multiplication, including negative exponents") {
  Jet t = t_var(1, 4, 0, 2.0);
  Jet p3 = t.pow(3);
  Jet m = t * t * t;
  for (int k = 0; k < p3.table().size(); ++k) CHECK(p3.coeff(k) == doctest::Approx(m.coeff(k)));
  Jet pm2 = t.pow(-2);
  Jet inv2 = (t * t).reciprocal();
  for (int k = 0; k < pm2.table().size(); ++k)
    CHECK(pm2.coeff(k) == doctest::Approx(inv2.coeff(k)));
}

TEST_CASE("jet orders are capped (3 multivariate, 4 univariate)") {
  CHECK_NOTHROW(Jet(1, 4));
  CHECK_THROWS_AS(Jet(2, 4), std::invalid_argument);
  CHECK_THROWS_AS(Jet(5, 2), std::invalid_argument);
}

TEST_CASE("partials agree with central finite differences on the DSL corpus") {
  const std::vector<std::pair<std::string, int>> corpus = {
      {"t1^3 + 2*t1*t2 - t2^2", 2},
      {"sin(t1)*cos(t2)", 2},
      {"exp(t1 - t2^2)", 2},
      {"1/(2 + t1) + t2/(1 + t1*t2)", 2},
      {"(t1 + t2)^3 - t1^3", 2},
      {"sin(t1*t2)", 2},
      {"cos(t1)^2 + sin(t1)^2", 1},
      {"exp(sin(t1))", 1},
      {"t1*t2*t3", 3},
      {"1/(1 + t1^2 + t2^2 + t3^2)", 3},
  };
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pt(-0.4, 0.4);
  for (const auto& [text, nparams] : corpus) {
    ExprPtr e = parse_expr(text, nparams);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> u(nparams);
      for (auto& v : u) v = pt(rng);
      Jet j = eval_jet(e, u, std::min(3, max_jet_order(nparams)));
      // every multi-index with total degree <= 2 (FD beyond that is too noisy)
      for (int k = 0; k < j.table().size(); ++k) {
        if (j.table().degree(k) > 2) continue;
        std::vector<int> alpha(j.table().exponents(k).begin(),
                               j.table().exponents(k).begin() + nparams);
        double jet_val = j.partial(std::span<const int>(alpha.data(), alpha.size()));
        double fd_val = oracle::fd_partial(e, u, alpha);
        CHECK(std::abs(jet_val - fd_val) <=
              1e-6 * std::max({1.0, std::abs(jet_val), std::abs(fd_val)}));
      }
    }
  }
}

TEST_SUITE_END();
