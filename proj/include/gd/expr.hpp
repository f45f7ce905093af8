#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gd/jet.hpp"
#include "gd/rational.hpp"

namespace gd {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// AST node for parametrization expressions.  Grammar (whitespace insensitive):
///   tuple  := '(' expr (',' expr)+ ')'
///   expr   := ('-')? term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' integer)?
///   base   := number | ident | '(' expr ')' | func '(' expr ')'
///   func   := 'sin' | 'cos' | 'exp'
/// Identifiers are t1..t4; numbers are integer or decimal literals kept exact
/// as rationals until jet evaluation.
struct Expr {
  enum class Kind { Number, Param, Add, Sub, Mul, Div, Pow, Neg, Func };
  enum class Fn { Sin, Cos, Exp };

  Kind kind;
  Rational number;    // Kind::Number
  int param = -1;     // Kind::Param, 0-based
  ExprPtr a, b;       // children
  int exponent = 0;   // Kind::Pow
  Fn fn = Fn::Sin;    // Kind::Func
};

ExprPtr make_number(Rational v);
ExprPtr make_param(int i);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_pow(ExprPtr a, int e);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_func(Expr::Fn fn, ExprPtr a);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
bool is_zero(const ExprPtr& e);

/// Canonical printer; parse(print(e)) reproduces e node for node.
std::string print_expr(const ExprPtr& e);

/// Parses a single expression over nparams parameters.
ExprPtr parse_expr(const std::string& text, int nparams);

/// Parses a tuple "(e1, e2, ...)"; requires at least two entries.
std::vector<ExprPtr> parse_tuple(const std::string& text, int nparams);

/// Evaluates on jets; u supplies the expansion point per parameter.
Jet eval_jet(const ExprPtr& e, std::span<const double> u, int order);

double eval_value(const ExprPtr& e, std::span<const double> u);

/// Exact symbolic partial derivative with respect to parameter i.
ExprPtr differentiate(const ExprPtr& e, int i);

/// Replaces parameter i by replacement[i]; replacements are expressions over
/// a (possibly different) parameter set.
ExprPtr substitute(const ExprPtr& e, std::span<const ExprPtr> replacement);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

/// A parametrized variety: an n-parameter map into P^N given by N+1
/// expressions, with a closed box domain.
struct VarietySpec {
  int n = 0;
  int N = 0;
  std::vector<ExprPtr> exprs;       // N+1 entries
  std::vector<Interval> domain;     // n entries

  void validate() const;            // invariants, incl. no common zero at samples
};

/// Evaluates all components as jets at u (inside the domain box).
JetVec eval_jet(const VarietySpec& spec, std::span<const double> u, int order);

/// Spec file format:
///   params n=<n> ambient N=<N> domain [a1,b1]x[a2,b2]...
///   ( expr, expr, ... )
VarietySpec parse_spec_text(const std::string& text);
VarietySpec load_spec_file(const std::string& path);
std::string print_spec(const VarietySpec& spec);
void save_spec_file(const VarietySpec& spec, const std::string& path);

/// Applies an invertible projective transformation T (rational entries) to the
/// coordinate expressions: new_k = sum_j T[k][j] * old_j.
VarietySpec transform_projective(const VarietySpec& spec,
                                 const std::vector<std::vector<Rational>>& T);

/// Composes with the affine parameter change t = M*tau + c (exact rational
/// coefficients); new domain must be supplied by the caller.
VarietySpec reparametrize_affine(const VarietySpec& spec,
                                 const std::vector<std::vector<Rational>>& M,
                                 const std::vector<Rational>& c,
                                 std::vector<Interval> new_domain);

/// Freezes a subset of parameters at constant rational values, renumbering the
/// remaining ones in order.  frozen[i] set => parameter i replaced by value[i].
VarietySpec freeze_params(const VarietySpec& spec, const std::vector<bool>& frozen,
                          const std::vector<Rational>& value);

/// Caches symbolic first and second partials of a spec and evaluates them on
/// jets.  All methods are const and safe for concurrent use after
/// construction.
class VarietyJets {
 public:
  explicit VarietyJets(VarietySpec spec);

  const VarietySpec& spec() const { return spec_; }
  int n() const { return spec_.n; }
  int N() const { return spec_.N; }

  JetVec point(std::span<const double> u, int order) const;
  JetVec d1(int i, std::span<const double> u, int order) const;
  JetVec d2(int i, int j, std::span<const double> u, int order) const;

 private:
  VarietySpec spec_;
  std::vector<std::vector<ExprPtr>> d1_;   // [i][component]
  std::vector<std::vector<ExprPtr>> d2_;   // [i*n+j][component], i <= j
};

}  // namespace gd
