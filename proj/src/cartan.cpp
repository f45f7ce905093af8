#include "gd/cartan.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "gd/errors.hpp"
#include "json.hpp"

namespace gd {

int rational_rank(RatMat m) {
  const int rows = static_cast<int>(m.size());
  if (rows == 0) return 0;
  const int cols = static_cast<int>(m[0].size());
  int rank = 0;
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int piv = -1;
    for (int r = row; r < rows; ++r)
      if (m[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[piv], m[row]);
    for (int r = row + 1; r < rows; ++r) {
      if (m[r][col] == 0) continue;
      Rational f = m[r][col] / m[row][col];
      for (int cjj = col; cjj < cols; ++cjj) m[r][cjj] -= f * m[row][cjj];
    }
    ++row;
    ++rank;
  }
  return rank;
}

void PfaffianTableau::validate() const {
  if (m < 0 || q < 0) throw EvalError("tableau: negative dimensions");
  for (const auto& eq : equations) {
    for (const auto& t : eq.pi_terms) {
      if (t.alpha < 1 || t.alpha > q) throw EvalError("tableau: pi index out of range");
      if (t.rho < 1 || t.rho > m) throw EvalError("tableau: omega index out of range");
    }
    for (const auto& t : eq.torsion) {
      if (t.rho < 1 || t.rho > m || t.sigma < 1 || t.sigma > m || t.rho == t.sigma)
        throw EvalError("tableau: torsion index out of range");
    }
  }
}

Rational PfaffianTableau::pi_coeff(int e, int alpha, int rho) const {
  Rational acc = 0;
  for (const auto& t : equations[e].pi_terms)
    if (t.alpha == alpha && t.rho == rho) acc += t.coeff;
  return acc;
}

Rational PfaffianTableau::torsion_coeff(int e, int rho, int sigma) const {
  Rational acc = 0;
  for (const auto& t : equations[e].torsion) {
    if (t.rho == rho && t.sigma == sigma) acc += t.coeff;
    if (t.rho == sigma && t.sigma == rho) acc -= t.coeff;
  }
  return acc;
}

namespace {

// Deterministic rational covector stream for generic flags.
class FlagSource {
 public:
  FlagSource() : rng_(0x5eedcaf3u) {}

  std::vector<Rational> covector(int m) {
    std::vector<Rational> v(m);
    bool nonzero = false;
    do {
      for (int i = 0; i < m; ++i) {
        std::int64_t num = static_cast<std::int64_t>(rng_() % 15) - 7;
        v[i] = Rational(num);
        nonzero = nonzero || num != 0;
      }
    } while (!nonzero);
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<int> characters(const PfaffianTableau& t) {
  t.validate();
  const int E = static_cast<int>(t.equations.size());
  std::vector<int> best_rank(t.m + 1, 0);
  FlagSource flags;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<Rational>> vs;
    for (int k = 0; k < t.m; ++k) vs.push_back(flags.covector(t.m));
    RatMat stacked;
    for (int k = 1; k <= t.m; ++k) {
      // Append the symbol matrix of flag vector v_k: rows indexed by equation,
      // columns by pi index.
      for (int e = 0; e < E; ++e) {
        std::vector<Rational> row(t.q, Rational(0));
        for (const auto& term : t.equations[e].pi_terms)
          row[term.alpha - 1] += term.coeff * vs[k - 1][term.rho - 1];
        stacked.push_back(std::move(row));
      }
      int r = rational_rank(stacked);
      best_rank[k] = std::max(best_rank[k], r);
    }
  }
  // Classical convention: s_1 + ... + s_k is the polar rank on a generic
  // k-flag for k < m, and the final character takes up the remaining fiber
  // forms, s_1 + ... + s_m = q.
  std::vector<int> s(t.m);
  for (int k = 1; k < t.m; ++k) s[k - 1] = best_rank[k] - best_rank[k - 1];
  if (t.m >= 1) s[t.m - 1] = t.q - best_rank[t.m - 1];
  return s;
}

long long integral_element_dim(const PfaffianTableau& t, std::string* infeasibility) {
  t.validate();
  const int E = static_cast<int>(t.equations.size());
  const int unknowns = t.q * t.m;  // p^alpha_rho at column (alpha-1)*m + (rho-1)
  RatMat sys;
  std::vector<Rational> rhs;
  std::vector<std::pair<int, std::pair<int, int>>> rowinfo;  // equation, (i,j)
  for (int e = 0; e < E; ++e) {
    for (int i = 1; i <= t.m; ++i) {
      for (int j = i + 1; j <= t.m; ++j) {
        std::vector<Rational> row(unknowns, Rational(0));
        bool any = false;
        for (const auto& term : t.equations[e].pi_terms) {
          // pi^alpha ^ omega^rho contributes p^alpha_i E[alpha][j] - p^alpha_j E[alpha][i].
          if (term.rho == j) {
            row[(term.alpha - 1) * t.m + (i - 1)] += term.coeff;
            any = true;
          }
          if (term.rho == i) {
            row[(term.alpha - 1) * t.m + (j - 1)] -= term.coeff;
            any = true;
          }
        }
        Rational tor = t.torsion_coeff(e, i, j);
        if (!any && tor == 0) continue;
        sys.push_back(std::move(row));
        rhs.push_back(-tor);
        rowinfo.push_back({e, {i, j}});
      }
    }
  }
  // Exact elimination on [sys | rhs]; infeasible when a zero row meets a
  // nonzero right-hand side.
  const int rows = static_cast<int>(sys.size());
  int rank = 0;
  int row = 0;
  for (int col = 0; col < unknowns && row < rows; ++col) {
    int piv = -1;
    for (int r = row; r < rows; ++r)
      if (sys[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(sys[piv], sys[row]);
    std::swap(rhs[piv], rhs[row]);
    std::swap(rowinfo[piv], rowinfo[row]);
    for (int r = row + 1; r < rows; ++r) {
      if (sys[r][col] == 0) continue;
      Rational f = sys[r][col] / sys[row][col];
      for (int c = col; c < unknowns; ++c) sys[r][c] -= f * sys[row][c];
      rhs[r] -= f * rhs[row];
    }
    ++row;
    ++rank;
  }
  for (int r = row; r < rows; ++r) {
    bool all_zero = true;
    for (int c = 0; c < unknowns; ++c) all_zero = all_zero && sys[r][c] == 0;
    if (all_zero && rhs[r] != 0) {
      if (infeasibility) {
        std::ostringstream os;
        os << "torsion cannot be absorbed: equation " << rowinfo[r].first + 1
           << ", omega^" << rowinfo[r].second.first << "^omega^" << rowinfo[r].second.second
           << " reduces to 0 = " << to_string(rhs[r]);
        *infeasibility = os.str();
      }
      return -1;
    }
  }
  return static_cast<long long>(unknowns) - rank;
}

namespace {

std::string count_word(long long n) {
  static const char* words[] = {"zero", "one", "two",   "three", "four", "five",
                                "six",  "seven", "eight", "nine",  "ten"};
  if (n >= 0 && n <= 10) return words[n];
  return std::to_string(n);
}

}  // namespace

CartanReport cartan_test(const PfaffianTableau& t) {
  CartanReport r;
  r.s = characters(t);
  r.Q = 0;
  for (int k = 1; k <= t.m; ++k) r.Q += static_cast<long long>(k) * r.s[k - 1];
  r.S = integral_element_dim(t, &r.infeasibility);
  r.involutive = r.S >= 0 && r.S == r.Q;
  if (!r.involutive) {
    r.arbitrariness = r.S < 0 ? "system is incompatible (no integral element)"
                              : "system is not in involution";
    return r;
  }
  int top = 0;
  for (int k = 1; k <= t.m; ++k)
    if (r.s[k - 1] > 0) top = k;
  if (top == 0) {
    r.arbitrariness = "general solution depends on constants only";
  } else {
    std::ostringstream os;
    os << "general solution depends on " << count_word(r.s[top - 1]) << " function"
       << (r.s[top - 1] == 1 ? "" : "s") << " of " << count_word(top) << " variable"
       << (top == 1 ? "" : "s");
    r.arbitrariness = os.str();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

namespace {

Rational fixture_const(const std::map<std::string, Rational>& overrides,
                       const std::string& name, const Rational& fallback) {
  auto it = overrides.find(name);
  return it == overrides.end() ? fallback : it->second;
}

}  // namespace

PfaffianTableau fixture_tableau(const std::string& name,
                                const std::map<std::string, Rational>& overrides) {
  const Rational b23 = fixture_const(overrides, "b23", 1);
  const Rational c32 = fixture_const(overrides, "c32", 1);
  const Rational a = fixture_const(overrides, "a", 1);
  const Rational b = fixture_const(overrides, "b", 1);

  PfaffianTableau t;
  t.m = 2;
  if (name == "T1") {
    // Fiber forms: pi1 = omega_2^3, pi2 = Delta b_23, pi3 = Delta b_33,
    // pi4 = omega_1^0, pi5 = Delta c_3^2.
    t.q = 5;
    t.equations = {
        {{{1, 1, -2 * b23}, {2, 2, 1}}, {}},
        {{{2, 1, 1}, {3, 2, 1}}, {}},
        {{{4, 1, -1}, {1, 1, -c32}, {5, 2, 1}}, {}},
        {{{4, 2, 1}, {1, 2, -c32}}, {}},
    };
  } else if (name == "T2") {
    // Fiber forms: pi1 = Delta b_23, pi2 = Delta b_33, pi3 = Delta c_3^2,
    // pi4 = Delta a, pi5 = Delta b.
    t.q = 5;
    t.equations = {
        {{{1, 1, 1}, {2, 2, 1}}, {}},
        {{{1, 2, 1}}, {{1, 2, 2 * b23 * b}}},
        {{{3, 2, 1}}, {{1, 2, a + b * c32}}},
        {{{4, 2, 1}}, {{1, 2, a * b}}},
        {{{5, 2, 1}}, {{1, 2, b}}},
    };
  } else if (name == "T3") {
    // The fully specialized twisted-cone system: five secondary forms.
    t.q = 5;
    t.equations = {
        {{{1, 2, 1}}, {}},
        {{{1, 1, 1}, {2, 2, 1}}, {}},
        {{{3, 2, 1}}, {}},
        {{{4, 2, 1}}, {}},
        {{{5, 2, 1}}, {}},
    };
  } else if (name == "T4") {
    // Twisted cylinder: the last equation of the system becomes an identity
    // and its fiber form drops out.
    t.q = 4;
    t.equations = {
        {{{1, 2, 1}}, {}},
        {{{1, 1, 1}, {2, 2, 1}}, {}},
        {{{3, 2, 1}}, {}},
        {{{4, 2, 1}}, {}},
    };
  } else {
    throw EvalError("unknown tableau fixture '" + name + "' (expected T1..T4)");
  }
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json rational_to_json_pair(const Rational& r, const char* numkey, const char* denkey) {
  json out;
  const Integer num = rat_num(r), den = rat_den(r);
  const Integer lo = std::numeric_limits<std::int64_t>::min();
  const Integer hi = std::numeric_limits<std::int64_t>::max();
  auto emit = [&](const Integer& v) -> json {
    if (v >= lo && v <= hi) return static_cast<std::int64_t>(v.convert_to<long long>());
    return v.str();
  };
  out[numkey] = emit(num);
  out[denkey] = emit(den);
  return out;
}

Rational rational_from_json(const json& num, const json& den) {
  auto one = [](const json& v) -> Integer {
    if (v.is_number_integer()) return Integer(v.get<std::int64_t>());
    if (v.is_string()) return Integer(v.get<std::string>());
    throw EvalError("tableau JSON: coefficient must be integer or string");
  };
  Integer d = one(den);
  if (d == 0) throw EvalError("tableau JSON: zero denominator");
  return Rational(one(num), d);
}

}  // namespace

std::string tableau_to_json_text(const PfaffianTableau& t) {
  json out;
  out["schema"] = "gaussdegen/1";
  out["kind"] = "tableau";
  out["m"] = t.m;
  out["q"] = t.q;
  json eqs = json::array();
  for (const auto& eq : t.equations) {
    json je;
    json pis = json::array();
    for (const auto& term : eq.pi_terms) {
      json jt = rational_to_json_pair(term.coeff, "coeff_num", "coeff_den");
      jt["alpha"] = term.alpha;
      jt["rho"] = term.rho;
      pis.push_back(jt);
    }
    je["pi_terms"] = pis;
    json tor = json::array();
    for (const auto& term : eq.torsion) {
      json jt = rational_to_json_pair(term.coeff, "coeff_num", "coeff_den");
      jt["rho"] = term.rho;
      jt["sigma"] = term.sigma;
      tor.push_back(jt);
    }
    je["torsion"] = tor;
    eqs.push_back(je);
  }
  out["equations"] = eqs;
  return out.dump(2) + "\n";
}

PfaffianTableau tableau_from_json_text(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    throw EvalError(std::string("tableau JSON parse error: ") + e.what());
  }
  PfaffianTableau t;
  if (!in.contains("m") || !in.contains("q"))
    throw EvalError("tableau JSON: missing m or q");
  t.m = in["m"].get<int>();
  t.q = in["q"].get<int>();
  for (const auto& je : in.value("equations", json::array())) {
    TableauEquation eq;
    for (const auto& jt : je.value("pi_terms", json::array())) {
      PiTerm term;
      term.alpha = jt.at("alpha").get<int>();
      term.rho = jt.at("rho").get<int>();
      term.coeff = rational_from_json(jt.at("coeff_num"), jt.at("coeff_den"));
      eq.pi_terms.push_back(term);
    }
    for (const auto& jt : je.value("torsion", json::array())) {
      TorsionTerm term;
      term.rho = jt.at("rho").get<int>();
      term.sigma = jt.at("sigma").get<int>();
      term.coeff = rational_from_json(jt.at("coeff_num"), jt.at("coeff_den"));
      eq.torsion.push_back(term);
    }
    t.equations.push_back(std::move(eq));
  }
  t.validate();
  return t;
}

PfaffianTableau load_tableau_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open tableau file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return tableau_from_json_text(text);
}

std::string report_to_json_text(const CartanReport& r) {
  json out;
  out["schema"] = "gaussdegen/1";
  out["kind"] = "cartan_report";
  json s = json::array();
  for (int v : r.s) s.push_back(v);
  out["s"] = s;
  if (!r.s.empty()) out["s1"] = r.s[0];
  if (r.s.size() > 1) out["s2"] = r.s[1];
  out["Q"] = r.Q;
  out["S"] = r.S;
  out["involutive"] = r.involutive;
  out["arbitrariness"] = r.arbitrariness;
  if (!r.infeasibility.empty()) out["infeasibility"] = r.infeasibility;
  return out.dump(2) + "\n";
}

}  // namespace gd
