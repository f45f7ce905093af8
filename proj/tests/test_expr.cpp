#include "doctest.h"
#include "gd/expr.hpp"

#include <random>

using namespace gd;

TEST_SUITE_BEGIN("expr");

TEST_CASE("valid curve and surface tuples") {
  auto curve = parse_tuple("(1, t1, t1^2, t1^3, t1^4)", 1);
  CHECK(curve.size() == 5);
  auto quadric = parse_tuple("(1, t1, t2, t1*t2)", 2);
  CHECK(quadric.size() == 4);
}

TEST_CASE("unknown identifier carries a position") {
  try {
    parse_tuple("(1, t1, t5)", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("t5") != std::string::npos);
    CHECK(e.line() == 1);
    CHECK(e.col() > 1);
  }
  CHECK_THROWS_AS(parse_expr("foo(t1)", 1), ParseError);
  CHECK_THROWS_AS(parse_expr("t1 +", 1), ParseError);
  CHECK_THROWS_AS(parse_expr("(t1", 1), ParseError);
  CHECK_THROWS_AS(parse_expr("t1^t1", 1), ParseError);
}

TEST_CASE("eval (1, t1, t1^2) at t1=2, order 2") {
  auto exprs = parse_tuple("(1, t1, t1^2)", 1);
  std::array<double, 1> u{2.0};
  Jet a = eval_jet(exprs[0], u, 2), b = eval_jet(exprs[1], u, 2), c = eval_jet(exprs[2], u, 2);
  CHECK(a.value() == 1.0);
  CHECK(b.value() == 2.0);
  CHECK(b.coeff({1}) == 1.0);
  CHECK(c.value() == 4.0);
  CHECK(c.coeff({1}) == 4.0);
  CHECK(c.coeff({2}) == 1.0);
}

TEST_CASE("eval sin(t1) at 0 order 3") {
  Jet s = eval_jet(parse_expr("sin(t1)", 1), std::array<double, 1>{0.0}, 3);
  CHECK(s.coeff({1}) == doctest::Approx(1.0));
  CHECK(s.coeff({3}) == doctest::Approx(-1.0 / 6));
}

TEST_CASE("division by zero at the point is an evaluation error") {
  ExprPtr e = parse_expr("1/(1 - t1)", 1);
  CHECK_THROWS_AS(eval_jet(e, std::array<double, 1>{1.0}, 2), EvalError);
  CHECK_NOTHROW(eval_jet(e, std::array<double, 1>{0.5}, 2));
}

TEST_CASE("parse-print-parse is the identity on parsed trees") {
  const std::vector<std::string> corpus = {
      "1 + t1",
      "t1 - t2 - t3",
      "t1*t2/(1 + t1^2)",
      "-t1 + 2",
      "sin(t1)*cos(t2) - exp(t1*t2)",
      "(t1 + t2)^3",
      "3/4 + t1*(-1/2)",
      "1 - 2*t1 + t1^2 - t1^3",
      "t1^-2 + 1",
      "2.5*t1 + 0.125",
  };
  for (const auto& text : corpus) {
    ExprPtr once = parse_expr(text, 3);
    std::string printed = print_expr(once);
    ExprPtr twice = parse_expr(printed, 3);
    CHECK_MESSAGE(expr_equal(once, twice), text, " -> ", printed);
    CHECK(print_expr(twice) == printed);
  }
}

TEST_CASE("order-1 evaluation agrees with truncated order-3 evaluation") {
  ExprPtr e = parse_expr("sin(t1*t2) + t1^3/(1 + t2^2)", 2);
  std::array<double, 2> u{0.3, -0.2};
  Jet j3 = eval_jet(e, u, 3);
  Jet j1 = eval_jet(e, u, 1);
  Jet t = j3.truncated(1);
  for (int k = 0; k < j1.table().size(); ++k) CHECK(j1.coeff(k) == t.coeff(k));
}

TEST_CASE("symbolic derivative matches jet coefficients") {
  ExprPtr e = parse_expr("sin(t1)*t2^2 + exp(t2)/(2 + t1)", 2);
  ExprPtr de = differentiate(e, 0);
  std::array<double, 2> u{0.4, 0.7};
  Jet j = eval_jet(e, u, 2);
  CHECK(eval_value(de, u) == doctest::Approx(j.partial({1, 0})).epsilon(1e-12));
}

TEST_CASE("spec file round trip") {
  const std::string text =
      "params n=2 ambient N=3 domain [-1,1]x[0,2]\n(1, t1, t2, t1*t2)\n";
  VarietySpec spec = parse_spec_text(text);
  CHECK(spec.n == 2);
  CHECK(spec.N == 3);
  CHECK(spec.domain[1].hi == 2.0);
  VarietySpec again = parse_spec_text(print_spec(spec));
  CHECK(again.n == spec.n);
  for (std::size_t k = 0; k < spec.exprs.size(); ++k)
    CHECK(expr_equal(spec.exprs[k], again.exprs[k]));
}

TEST_CASE("spec header errors") {
  CHECK_THROWS_AS(parse_spec_text("params n=2 ambient N=3 domain [-1,1]\n(1, t1, t2, t1*t2)\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_spec_text("params n=2 ambient N=3 domain [-1,1]x[0,2]\n(1, t1)\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_spec_text("bogus\n(1, t1)\n"), ParseError);
}

TEST_CASE("all-zero specs are rejected") {
  CHECK_THROWS_AS(parse_spec_text("params n=1 ambient N=1 domain [-1,1]\n(t1, t1)\n"),
                  EvalError);
}

TEST_CASE("projective transforms recombine coordinates") {
  VarietySpec spec = parse_spec_text("params n=1 ambient N=2 domain [0,1]\n(1, t1, t1^2)\n");
  std::vector<std::vector<Rational>> T = {{1, 0, 0}, {1, 1, 0}, {0, 0, 2}};
  VarietySpec moved = transform_projective(spec, T);
  std::array<double, 1> u{0.5};
  JetVec a = eval_jet(spec, u, 0), b = eval_jet(moved, u, 0);
  CHECK(b[0].value() == doctest::Approx(a[0].value()));
  CHECK(b[1].value() == doctest::Approx(a[0].value() + a[1].value()));
  CHECK(b[2].value() == doctest::Approx(2 * a[2].value()));
}

TEST_CASE("affine reparametrization composes exactly") {
  VarietySpec spec = parse_spec_text("params n=2 ambient N=3 domain [-1,1]x[-1,1]\n"
                                     "(1, t1, t2, t1*t2)\n");
  std::vector<std::vector<Rational>> M = {{Rational(1, 2), Rational(1, 4)},
                                          {Rational(0), Rational(1, 2)}};
  std::vector<Rational> c = {Rational(1, 8), Rational(-1, 8)};
  VarietySpec re = reparametrize_affine(spec, M, c, {{-1, 1}, {-1, 1}});
  std::array<double, 2> tau{0.3, -0.5};
  std::array<double, 2> u{0.125 + 0.5 * 0.3 + 0.25 * -0.5, -0.125 + 0.5 * -0.5};
  JetVec a = eval_jet(spec, u, 0), b = eval_jet(re, tau, 0);
  for (int k = 0; k < 4; ++k) CHECK(b[k].value() == doctest::Approx(a[k].value()).epsilon(1e-14));
}

TEST_CASE("freezing parameters folds trig of zero to constants") {
  VarietySpec spec = parse_spec_text(
      "params n=2 ambient N=2 domain [0,1]x[0,3]\n(1, cos(t2)*t1, sin(t2)*t1)\n");
  VarietySpec frozen = freeze_params(spec, {false, true}, {Rational(0), Rational(0)});
  CHECK(frozen.n == 1);
  CHECK(print_expr(frozen.exprs[1]) == "t1");
  CHECK(print_expr(frozen.exprs[2]) == "0");
}

TEST_SUITE_END();
