#include "gd/expr.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gd {

// ---------------------------------------------------------------------------
// Construction with light folding (keeps machine-generated trees small).
// ---------------------------------------------------------------------------

ExprPtr make_number(Rational v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Number;
  e->number = std::move(v);
  return e;
}

ExprPtr make_param(int i) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Param;
  e->param = i;
  return e;
}

bool is_zero(const ExprPtr& e) {
  return e->kind == Expr::Kind::Number && e->number == 0;
}

static bool is_one(const ExprPtr& e) {
  return e->kind == Expr::Kind::Number && e->number == 1;
}

ExprPtr make_add(ExprPtr a, ExprPtr b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (a->kind == Expr::Kind::Number && b->kind == Expr::Kind::Number)
    return make_number(a->number + b->number);
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Add;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr make_sub(ExprPtr a, ExprPtr b) {
  if (is_zero(b)) return a;
  if (a->kind == Expr::Kind::Number && b->kind == Expr::Kind::Number)
    return make_number(a->number - b->number);
  if (is_zero(a)) return make_neg(std::move(b));
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Sub;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr make_mul(ExprPtr a, ExprPtr b) {
  if (is_zero(a) || is_zero(b)) return make_number(0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  if (a->kind == Expr::Kind::Number && b->kind == Expr::Kind::Number)
    return make_number(a->number * b->number);
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Mul;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr make_div(ExprPtr a, ExprPtr b) {
  if (is_one(b)) return a;
  if (is_zero(a) && !is_zero(b)) return make_number(0);
  if (a->kind == Expr::Kind::Number && b->kind == Expr::Kind::Number && b->number != 0)
    return make_number(a->number / b->number);
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Div;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr make_pow(ExprPtr a, int k) {
  if (k == 1) return a;
  if (k == 0) return make_number(1);
  if (a->kind == Expr::Kind::Number && k > 0) {
    Rational r = 1;
    for (int i = 0; i < k; ++i) r *= a->number;
    return make_number(r);
  }
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Pow;
  e->a = std::move(a);
  e->exponent = k;
  return e;
}

ExprPtr make_neg(ExprPtr a) {
  if (a->kind == Expr::Kind::Number) return make_number(-a->number);
  if (a->kind == Expr::Kind::Neg) return a->a;
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Neg;
  e->a = std::move(a);
  return e;
}

ExprPtr make_func(Expr::Fn fn, ExprPtr a) {
  if (is_zero(a)) {
    // sin 0 = 0, cos 0 = 1, exp 0 = 1; keeps frozen sections polynomial.
    return make_number(fn == Expr::Fn::Sin ? 0 : 1);
  }
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Func;
  e->fn = fn;
  e->a = std::move(a);
  return e;
}

bool expr_equal(const ExprPtr& x, const ExprPtr& y) {
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Expr::Kind::Number: return x->number == y->number;
    case Expr::Kind::Param: return x->param == y->param;
    case Expr::Kind::Neg:
    case Expr::Kind::Func:
      return (x->kind != Expr::Kind::Func || x->fn == y->fn) && expr_equal(x->a, y->a);
    case Expr::Kind::Pow:
      return x->exponent == y->exponent && expr_equal(x->a, y->a);
    default:
      return expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
  }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  char get() {
    skip_ws();
    char c = text_[pos_];
    advance();
    return c;
  }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected '") + c + "' (" + what + ")");
    get();
  }

  bool accept(char c) {
    if (peek() == c) {
      get();
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    std::string s;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      s += text_[pos_];
      advance();
    }
    return s;
  }

  std::string number() {
    skip_ws();
    std::string s;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      s += text_[pos_];
      advance();
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      s += '.';
      advance();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        s += text_[pos_];
        advance();
      }
    }
    return s;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_, col_); }

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  void advance() {
    ++pos_;
    ++col_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(const std::string& text, int nparams) : lex_(text), nparams_(nparams) {}

  ExprPtr expr() {
    bool neg = false;
    if (lex_.peek() == '-') {
      lex_.get();
      neg = true;
    }
    ExprPtr acc = term();
    if (neg) acc = acc->kind == Expr::Kind::Number ? make_number(-acc->number) : make_neg_raw(acc);
    for (;;) {
      char c = lex_.peek();
      if (c == '+') {
        lex_.get();
        acc = make_add_raw(acc, term());
      } else if (c == '-') {
        lex_.get();
        acc = make_sub_raw(acc, term());
      } else {
        break;
      }
    }
    return acc;
  }

  std::vector<ExprPtr> tuple() {
    lex_.expect('(', "tuple start");
    std::vector<ExprPtr> out;
    out.push_back(expr());
    if (lex_.peek() != ',') lex_.fail("tuple needs at least two components");
    while (lex_.accept(',')) out.push_back(expr());
    lex_.expect(')', "tuple end");
    return out;
  }

  void expect_eof() {
    if (!lex_.eof()) lex_.fail("unexpected trailing input");
  }

 private:
  // Parsing keeps the tree exactly as written (no folding) so that the
  // canonical printer round-trips user input predictably.
  static ExprPtr make_add_raw(ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Add;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }
  static ExprPtr make_sub_raw(ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Sub;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }
  static ExprPtr make_mul_raw(ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Mul;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }
  static ExprPtr make_div_raw(ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Div;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }
  static ExprPtr make_neg_raw(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Neg;
    e->a = std::move(a);
    return e;
  }

  ExprPtr term() {
    ExprPtr acc = factor();
    for (;;) {
      char c = lex_.peek();
      if (c == '*') {
        lex_.get();
        acc = make_mul_raw(acc, factor());
      } else if (c == '/') {
        lex_.get();
        ExprPtr rhs = factor();
        // Rational literals: fold number/number so 3/4 round-trips as one node.
        if (acc->kind == Expr::Kind::Number && rhs->kind == Expr::Kind::Number &&
            rhs->number != 0)
          acc = make_number(acc->number / rhs->number);
        else
          acc = make_div_raw(acc, rhs);
      } else {
        break;
      }
    }
    return acc;
  }

  ExprPtr factor() {
    ExprPtr b = base();
    if (lex_.peek() == '^') {
      lex_.get();
      bool neg = lex_.accept('-');
      std::string digits = lex_.number();
      if (digits.empty() || digits.find('.') != std::string::npos)
        lex_.fail("exponent must be an integer");
      int e = std::stoi(digits);
      auto p = std::make_shared<Expr>();
      p->kind = Expr::Kind::Pow;
      p->a = std::move(b);
      p->exponent = neg ? -e : e;
      return p;
    }
    return b;
  }

  ExprPtr base() {
    char c = lex_.peek();
    if (c == '(') {
      lex_.get();
      ExprPtr e = expr();
      lex_.expect(')', "closing parenthesis");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num = lex_.number();
      if (num.empty()) lex_.fail("malformed number");
      return make_number(parse_rational(num));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      int line = lex_.line(), col = lex_.col();
      std::string id = lex_.ident();
      if (id == "sin" || id == "cos" || id == "exp") {
        lex_.expect('(', "function argument");
        ExprPtr arg = expr();
        lex_.expect(')', "function argument end");
        Expr::Fn fn = id == "sin" ? Expr::Fn::Sin : id == "cos" ? Expr::Fn::Cos : Expr::Fn::Exp;
        return make_func(fn, std::move(arg));
      }
      if (id.size() >= 2 && id[0] == 't') {
        bool digits = true;
        for (std::size_t k = 1; k < id.size(); ++k)
          digits = digits && std::isdigit(static_cast<unsigned char>(id[k]));
        if (digits) {
          int idx = std::stoi(id.substr(1));
          if (idx < 1 || idx > nparams_)
            throw ParseError("unknown identifier " + id, line, col);
          return make_param(idx - 1);
        }
      }
      throw ParseError("unknown identifier " + id, line, col);
    }
    lex_.fail("expected number, identifier, or '('");
  }

  Lexer lex_;
  int nparams_;
};

int precedence(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Neg:
      return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div:
      return 2;
    case Expr::Kind::Pow:
      return 3;
    default:
      return 4;
  }
}

void print_rec(std::string& out, const ExprPtr& e, int min_prec) {
  const bool need_parens = precedence(e) < min_prec ||
                           (e->kind == Expr::Kind::Number && e->number < 0 && min_prec > 1);
  if (need_parens) out += '(';
  switch (e->kind) {
    case Expr::Kind::Number: {
      if (e->number < 0) {
        out += '-';
        out += to_string(Rational(-e->number));
      } else {
        out += to_string(e->number);
      }
      break;
    }
    case Expr::Kind::Param:
      out += 't' + std::to_string(e->param + 1);
      break;
    case Expr::Kind::Add:
      print_rec(out, e->a, 1);
      out += " + ";
      print_rec(out, e->b, 2);
      break;
    case Expr::Kind::Sub:
      print_rec(out, e->a, 1);
      out += " - ";
      print_rec(out, e->b, 2);
      break;
    case Expr::Kind::Neg:
      out += '-';
      print_rec(out, e->a, 2);
      break;
    case Expr::Kind::Mul:
      print_rec(out, e->a, 2);
      out += '*';
      print_rec(out, e->b, 3);
      break;
    case Expr::Kind::Div:
      print_rec(out, e->a, 2);
      out += '/';
      print_rec(out, e->b, 4);
      break;
    case Expr::Kind::Pow:
      print_rec(out, e->a, 4);
      out += '^';
      if (e->exponent < 0) out += '-';
      out += std::to_string(std::abs(e->exponent));
      break;
    case Expr::Kind::Func:
      out += e->fn == Expr::Fn::Sin ? "sin" : e->fn == Expr::Fn::Cos ? "cos" : "exp";
      out += '(';
      print_rec(out, e->a, 1);
      out += ')';
      break;
  }
  if (need_parens) out += ')';
}

}  // namespace

std::string print_expr(const ExprPtr& e) {
  std::string out;
  print_rec(out, e, 1);
  return out;
}

ExprPtr parse_expr(const std::string& text, int nparams) {
  Parser p(text, nparams);
  ExprPtr e = p.expr();
  p.expect_eof();
  return e;
}

std::vector<ExprPtr> parse_tuple(const std::string& text, int nparams) {
  Parser p(text, nparams);
  auto t = p.tuple();
  p.expect_eof();
  return t;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Jet eval_jet(const ExprPtr& e, std::span<const double> u, int order) {
  const int nvars = static_cast<int>(u.size());
  switch (e->kind) {
    case Expr::Kind::Number:
      return Jet::constant(nvars, order, to_double(e->number));
    case Expr::Kind::Param:
      if (e->param >= nvars) throw EvalError("parameter index exceeds point dimension");
      return Jet::variable(nvars, order, e->param, u[e->param]);
    case Expr::Kind::Add:
      return eval_jet(e->a, u, order) + eval_jet(e->b, u, order);
    case Expr::Kind::Sub:
      return eval_jet(e->a, u, order) - eval_jet(e->b, u, order);
    case Expr::Kind::Mul:
      return eval_jet(e->a, u, order) * eval_jet(e->b, u, order);
    case Expr::Kind::Div: {
      Jet den = eval_jet(e->b, u, order);
      if (den.value() == 0.0)
        throw EvalError("division by zero while evaluating expression");
      return eval_jet(e->a, u, order) / den;
    }
    case Expr::Kind::Pow: {
      Jet base = eval_jet(e->a, u, order);
      if (e->exponent < 0 && base.value() == 0.0)
        throw EvalError("zero base with negative exponent");
      return base.pow(e->exponent);
    }
    case Expr::Kind::Neg:
      return -eval_jet(e->a, u, order);
    case Expr::Kind::Func: {
      Jet arg = eval_jet(e->a, u, order);
      switch (e->fn) {
        case Expr::Fn::Sin: return sin(arg);
        case Expr::Fn::Cos: return cos(arg);
        case Expr::Fn::Exp: return exp(arg);
      }
    }
  }
  throw EvalError("corrupt expression tree");
}

double eval_value(const ExprPtr& e, std::span<const double> u) {
  switch (e->kind) {
    case Expr::Kind::Number: return to_double(e->number);
    case Expr::Kind::Param: return u[e->param];
    case Expr::Kind::Add: return eval_value(e->a, u) + eval_value(e->b, u);
    case Expr::Kind::Sub: return eval_value(e->a, u) - eval_value(e->b, u);
    case Expr::Kind::Mul: return eval_value(e->a, u) * eval_value(e->b, u);
    case Expr::Kind::Div: {
      double den = eval_value(e->b, u);
      if (den == 0.0) throw EvalError("division by zero while evaluating expression");
      return eval_value(e->a, u) / den;
    }
    case Expr::Kind::Pow: {
      double base = eval_value(e->a, u);
      if (e->exponent < 0 && base == 0.0) throw EvalError("zero base with negative exponent");
      return std::pow(base, e->exponent);
    }
    case Expr::Kind::Neg: return -eval_value(e->a, u);
    case Expr::Kind::Func: {
      double arg = eval_value(e->a, u);
      switch (e->fn) {
        case Expr::Fn::Sin: return std::sin(arg);
        case Expr::Fn::Cos: return std::cos(arg);
        case Expr::Fn::Exp: return std::exp(arg);
      }
    }
  }
  throw EvalError("corrupt expression tree");
}

// ---------------------------------------------------------------------------
// Symbolic differentiation and substitution
// ---------------------------------------------------------------------------

ExprPtr differentiate(const ExprPtr& e, int i) {
  switch (e->kind) {
    case Expr::Kind::Number:
      return make_number(0);
    case Expr::Kind::Param:
      return make_number(e->param == i ? 1 : 0);
    case Expr::Kind::Add:
      return make_add(differentiate(e->a, i), differentiate(e->b, i));
    case Expr::Kind::Sub:
      return make_sub(differentiate(e->a, i), differentiate(e->b, i));
    case Expr::Kind::Mul:
      return make_add(make_mul(differentiate(e->a, i), e->b),
                      make_mul(e->a, differentiate(e->b, i)));
    case Expr::Kind::Div:
      // (a/b)' = a'/b - a*b'/b^2
      return make_sub(make_div(differentiate(e->a, i), e->b),
                      make_div(make_mul(e->a, differentiate(e->b, i)), make_pow(e->b, 2)));
    case Expr::Kind::Pow:
      if (e->exponent == 0) return make_number(0);
      return make_mul(make_mul(make_number(e->exponent), make_pow(e->a, e->exponent - 1)),
                      differentiate(e->a, i));
    case Expr::Kind::Neg:
      return make_neg(differentiate(e->a, i));
    case Expr::Kind::Func: {
      ExprPtr da = differentiate(e->a, i);
      switch (e->fn) {
        case Expr::Fn::Sin: return make_mul(make_func(Expr::Fn::Cos, e->a), da);
        case Expr::Fn::Cos: return make_neg(make_mul(make_func(Expr::Fn::Sin, e->a), da));
        case Expr::Fn::Exp: return make_mul(make_func(Expr::Fn::Exp, e->a), da);
      }
    }
  }
  throw EvalError("corrupt expression tree");
}

ExprPtr substitute(const ExprPtr& e, std::span<const ExprPtr> replacement) {
  switch (e->kind) {
    case Expr::Kind::Number:
      return e;
    case Expr::Kind::Param:
      if (e->param >= static_cast<int>(replacement.size()))
        throw EvalError("substitute: missing replacement for parameter");
      return replacement[e->param];
    case Expr::Kind::Add:
      return make_add(substitute(e->a, replacement), substitute(e->b, replacement));
    case Expr::Kind::Sub:
      return make_sub(substitute(e->a, replacement), substitute(e->b, replacement));
    case Expr::Kind::Mul:
      return make_mul(substitute(e->a, replacement), substitute(e->b, replacement));
    case Expr::Kind::Div:
      return make_div(substitute(e->a, replacement), substitute(e->b, replacement));
    case Expr::Kind::Pow:
      return make_pow(substitute(e->a, replacement), e->exponent);
    case Expr::Kind::Neg:
      return make_neg(substitute(e->a, replacement));
    case Expr::Kind::Func:
      return make_func(e->fn, substitute(e->a, replacement));
  }
  throw EvalError("corrupt expression tree");
}

// ---------------------------------------------------------------------------
// VarietySpec
// ---------------------------------------------------------------------------

void VarietySpec::validate() const {
  if (n < 1 || n > kMaxJetVars) throw EvalError("parameter count must be in 1..4");
  if (N < 1) throw EvalError("ambient dimension must be >= 1");
  if (static_cast<int>(exprs.size()) != N + 1)
    throw EvalError("spec needs exactly N+1 component expressions");
  if (static_cast<int>(domain.size()) != n)
    throw EvalError("domain box needs one interval per parameter");
  for (const auto& iv : domain)
    if (!(iv.lo <= iv.hi)) throw EvalError("domain interval with lo > hi");
  // No common zero at a coarse sample grid.
  std::vector<double> u(n);
  const int steps = 3;
  std::vector<int> idx(n, 0);
  for (;;) {
    for (int i = 0; i < n; ++i)
      u[i] = domain[i].lo + (idx[i] + 1) * domain[i].width() / (steps + 1);
    double maxabs = 0.0;
    bool ok = true;
    try {
      for (const auto& e : exprs) maxabs = std::max(maxabs, std::abs(eval_value(e, u)));
    } catch (const EvalError&) {
      ok = false;  // poles at a sample point do not count as a common zero
    }
    if (ok && maxabs == 0.0)
      throw EvalError("spec components all vanish at a domain sample point");
    int k = 0;
    while (k < n && ++idx[k] == steps) idx[k++] = 0;
    if (k == n) break;
  }
}

JetVec eval_jet(const VarietySpec& spec, std::span<const double> u, int order) {
  if (static_cast<int>(u.size()) != spec.n)
    throw EvalError("evaluation point dimension mismatch");
  const double slack = 1e-9;
  for (int i = 0; i < spec.n; ++i) {
    double w = std::max(spec.domain[i].width(), 1.0);
    if (u[i] < spec.domain[i].lo - slack * w || u[i] > spec.domain[i].hi + slack * w)
      throw EvalError("evaluation point outside domain box");
  }
  if (order > max_jet_order(spec.n)) throw EvalError("jet order too large for parameter count");
  JetVec out;
  out.reserve(spec.exprs.size());
  for (const auto& e : spec.exprs) out.push_back(eval_jet(e, u, order));
  return out;
}

VarietySpec parse_spec_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty spec file", 1, 1);

  VarietySpec spec;
  std::istringstream hs(header);
  std::string tok;
  auto expect_tok = [&](const std::string& want) {
    if (!(hs >> tok) || tok.rfind(want, 0) != 0)
      throw ParseError("spec header: expected '" + want + "'", 1, 1);
  };
  expect_tok("params");
  expect_tok("n=");
  spec.n = std::stoi(tok.substr(2));
  expect_tok("ambient");
  expect_tok("N=");
  spec.N = std::stoi(tok.substr(2));
  expect_tok("domain");
  std::string boxes;
  std::getline(hs, boxes);
  // boxes = "[a,b]x[c,d]..."
  std::size_t pos = 0;
  while (pos < boxes.size()) {
    if (std::isspace(static_cast<unsigned char>(boxes[pos]))) {
      ++pos;
      continue;
    }
    if (boxes[pos] == 'x') {
      ++pos;
      continue;
    }
    if (boxes[pos] != '[') throw ParseError("spec header: malformed domain box", 1, 1);
    std::size_t close = boxes.find(']', pos);
    if (close == std::string::npos) throw ParseError("spec header: unterminated interval", 1, 1);
    std::string iv = boxes.substr(pos + 1, close - pos - 1);
    std::size_t comma = iv.find(',');
    if (comma == std::string::npos) throw ParseError("spec header: interval needs a comma", 1, 1);
    Interval out;
    out.lo = std::stod(iv.substr(0, comma));
    out.hi = std::stod(iv.substr(comma + 1));
    spec.domain.push_back(out);
    pos = close + 1;
  }
  if (static_cast<int>(spec.domain.size()) != spec.n)
    throw ParseError("spec header: domain box count does not match n", 1, 1);

  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  spec.exprs = parse_tuple(body, spec.n);
  if (static_cast<int>(spec.exprs.size()) != spec.N + 1)
    throw ParseError("tuple arity does not match ambient N+1", 2, 1);
  spec.validate();
  return spec;
}

VarietySpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open spec file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_spec_text(text);
}

static std::string format_bound(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string print_spec(const VarietySpec& spec) {
  std::ostringstream os;
  os << "params n=" << spec.n << " ambient N=" << spec.N << " domain ";
  for (int i = 0; i < spec.n; ++i) {
    if (i) os << "x";
    os << "[" << format_bound(spec.domain[i].lo) << "," << format_bound(spec.domain[i].hi) << "]";
  }
  os << "\n(";
  for (std::size_t k = 0; k < spec.exprs.size(); ++k) {
    if (k) os << ", ";
    os << print_expr(spec.exprs[k]);
  }
  os << ")\n";
  return os.str();
}

void save_spec_file(const VarietySpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EvalError("cannot write spec file: " + path);
  out << print_spec(spec);
}

VarietySpec transform_projective(const VarietySpec& spec,
                                 const std::vector<std::vector<Rational>>& T) {
  if (static_cast<int>(T.size()) != spec.N + 1)
    throw EvalError("projective transform has wrong size");
  VarietySpec out = spec;
  out.exprs.clear();
  for (int k = 0; k <= spec.N; ++k) {
    ExprPtr acc = make_number(0);
    for (int j = 0; j <= spec.N; ++j)
      acc = make_add(acc, make_mul(make_number(T[k][j]), spec.exprs[j]));
    out.exprs.push_back(acc);
  }
  return out;
}

VarietySpec reparametrize_affine(const VarietySpec& spec,
                                 const std::vector<std::vector<Rational>>& M,
                                 const std::vector<Rational>& c,
                                 std::vector<Interval> new_domain) {
  std::vector<ExprPtr> repl(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    ExprPtr acc = make_number(c[i]);
    for (int j = 0; j < spec.n; ++j)
      acc = make_add(acc, make_mul(make_number(M[i][j]), make_param(j)));
    repl[i] = acc;
  }
  VarietySpec out = spec;
  out.domain = std::move(new_domain);
  for (auto& e : out.exprs) e = substitute(e, repl);
  return out;
}

VarietySpec freeze_params(const VarietySpec& spec, const std::vector<bool>& frozen,
                          const std::vector<Rational>& value) {
  std::vector<ExprPtr> repl(spec.n);
  VarietySpec out;
  out.N = spec.N;
  int next = 0;
  for (int i = 0; i < spec.n; ++i) {
    if (frozen[i]) {
      repl[i] = make_number(value[i]);
    } else {
      repl[i] = make_param(next++);
      out.domain.push_back(spec.domain[i]);
    }
  }
  out.n = next;
  for (const auto& e : spec.exprs) out.exprs.push_back(substitute(e, repl));
  return out;
}

// ---------------------------------------------------------------------------
// VarietyJets
// ---------------------------------------------------------------------------

VarietyJets::VarietyJets(VarietySpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int n = spec_.n;
  d1_.resize(n);
  for (int i = 0; i < n; ++i)
    for (const auto& e : spec_.exprs) d1_[i].push_back(differentiate(e, i));
  d2_.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      auto& slot = d2_[i * n + j];
      for (const auto& e : d1_[i]) slot.push_back(differentiate(e, j));
    }
}

JetVec VarietyJets::point(std::span<const double> u, int order) const {
  return eval_jet(spec_, u, order);
}

JetVec VarietyJets::d1(int i, std::span<const double> u, int order) const {
  JetVec out;
  out.reserve(d1_[i].size());
  for (const auto& e : d1_[i]) out.push_back(eval_jet(e, u, order));
  return out;
}

JetVec VarietyJets::d2(int i, int j, std::span<const double> u, int order) const {
  if (i > j) std::swap(i, j);
  const auto& slot = d2_[i * spec_.n + j];
  JetVec out;
  out.reserve(slot.size());
  for (const auto& e : slot) out.push_back(eval_jet(e, u, order));
  return out;
}

}  // namespace gd
