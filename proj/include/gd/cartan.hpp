#pragma once

#include <map>
#include <string>
#include <vector>

#include "gd/rational.hpp"

namespace gd {

using RatMat = std::vector<std::vector<Rational>>;

/// Exact rank by fraction-free Gaussian elimination.
int rational_rank(RatMat m);

/// One term coeff * pi^alpha ^ omega^rho of an exterior quadratic equation.
/// Indices are 1-based to match the usual tableau notation.
struct PiTerm {
  int alpha = 0;
  int rho = 0;
  Rational coeff;
};

/// One torsion term coeff * omega^rho ^ omega^sigma with rho < sigma.
struct TorsionTerm {
  int rho = 0;
  int sigma = 0;
  Rational coeff;
};

struct TableauEquation {
  std::vector<PiTerm> pi_terms;
  std::vector<TorsionTerm> torsion;
};

/// Coefficient data of a linear exterior quadratic system
///   sum E[e][alpha][rho] pi^alpha ^ omega^rho
///     + sum_{rho<sigma} T[e][rho][sigma] omega^rho ^ omega^sigma = 0.
struct PfaffianTableau {
  int m = 0;  // independence (basis) 1-forms omega^1..omega^m
  int q = 0;  // fiber 1-forms pi^1..pi^q
  std::vector<TableauEquation> equations;

  void validate() const;
  /// Dense coefficient E[e](alpha, rho) with terms accumulated.
  Rational pi_coeff(int e, int alpha, int rho) const;
  /// Antisymmetrized torsion coefficient of omega^rho ^ omega^sigma.
  Rational torsion_coeff(int e, int rho, int sigma) const;
};

struct CartanReport {
  std::vector<int> s;       // s_1..s_m
  long long Q = 0;          // sum k*s_k
  long long S = 0;          // dim of integral elements; -1 when torsion is inconsistent
  bool involutive = false;  // S == Q
  std::string arbitrariness;
  std::string infeasibility;  // certificate text when S == -1
};

/// Cartan characters s_1..s_m: s_1 + ... + s_k is the rank of the polar
/// system on a generic k-flag for k < m, and the last character takes the
/// remaining fiber forms so that s_1 + ... + s_m = q.  Generic flags are
/// realized by deterministic pseudorandom rational covectors (fixed seed,
/// numerators in [-7, 7]); ranks are maximized over 5 trials and computed
/// exactly.
std::vector<int> characters(const PfaffianTableau& t);

/// Dimension of the space of integral elements over a point: substitutes
/// pi^alpha = p^alpha_rho omega^rho and solves the resulting linear system in
/// the q*m unknowns exactly.  Returns -1 (with a certificate) when the
/// torsion makes the system infeasible.
long long integral_element_dim(const PfaffianTableau& t,
                               std::string* infeasibility = nullptr);

CartanReport cartan_test(const PfaffianTableau& t);

/// Builds the shipped tableau fixtures T1..T4 (the paper's exterior quadratic
/// systems for Theorems 1, 2, the twisted-cone normal form, and Theorem 4).
/// Symbolic constants (b23, b33, c32, a, b) default to generic values and can
/// be overridden by name.
PfaffianTableau fixture_tableau(const std::string& name,
                                const std::map<std::string, Rational>& overrides = {});

/// JSON serialization (schema "gaussdegen/1").
std::string tableau_to_json_text(const PfaffianTableau& t);
PfaffianTableau tableau_from_json_text(const std::string& text);
PfaffianTableau load_tableau_file(const std::string& path);

std::string report_to_json_text(const CartanReport& r);

}  // namespace gd
