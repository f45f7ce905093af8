#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gd/expr.hpp"
#include "gd/projective.hpp"

namespace gd {

/// Default geometric tolerance for residual checks and verdicts.
inline constexpr double kGeomTol = 1e-8;

/// First-order data at a parameter point.  tangent_space() leaves rank/leaf
/// unfilled; gauss_rank() fills them.
struct TangentData {
  Vec point;                            // homogeneous coordinates of x(u)
  std::optional<ProjSubspace> tangent;  // dim n
  std::optional<ProjSubspace> leaf;     // dim l, present when l >= 1
  Mat leaf_param_dirs;                  // l x n orthonormal kernel directions
  int rank = -1;                        // r  (gauss_rank fills)
  int leaf_dim = -1;                    // l = n - r
};

/// Homogeneous polynomial det(x^0 I + x^a C_a) of degree r in l+1 variables.
/// Stored in the jet coefficient table (monomial coefficients).
struct FocalPolynomial {
  int degree = 0;  // r
  int nvars = 1;   // l + 1
  Jet poly;

  double coefficient(std::span<const int> alpha) const { return poly.coeff(alpha); }
  double leading() const;             // coefficient of (x^0)^r
  double max_nonleading() const;      // largest |coefficient| off (x^0)^r
  std::string to_string() const;
};

/// True iff every coefficient except that of (x^0)^r is below tol times the
/// leading coefficient.
bool is_r_fold_focus(const FocalPolynomial& fp, double tol);

/// Adapted-frame data of Eq. (4): the matrices B = (b_pq) and C_a = (c^p_aq),
/// with the residuals that certify the adaptation.
struct FundamentalData {
  explicit FundamentalData(Frame f) : frame(std::move(f)) {}

  Frame frame;
  int r = 0;  // rank
  int l = 0;  // leaf dimension
  Mat B;                    // r x r
  std::vector<Mat> C;       // l matrices, r x r
  FocalPolynomial focal;

  double b_symmetry_residual = 0.0;    // |B - B^T| / |B|
  double bc_symmetry_residual = 0.0;   // max_i |B C_i - (B C_i)^T| / |B C_i|
  double frame_residual = 0.0;         // conditions (3): normal components of dA_0, dA_a
  double leaf_form_residual = 0.0;     // leaf-form components of omega_p^{n+1}, omega_a^p
  double relocation_residual = -1.0;   // |tr C| after focus relocation (focus frames only)
  Mat coframe;                         // sigma[j][q]: basis-form values on coordinate dirs
};

/// det(x^0 I + x^a C_a) for square matrices C_a (degree = matrix size,
/// l = number of matrices).
FocalPolynomial focal_polynomial(const std::vector<Mat>& C);
inline FocalPolynomial focal_polynomial(const FundamentalData& fd) { return fd.focal; }

/// Nilpotency check and maximal bundle rank r1 = max rank of x^a C_a over
/// pseudorandom bundle samples (fixed seed).
std::pair<bool, int> nilpotency_and_r1(const std::vector<Mat>& C, double tol = kGeomTol,
                                       int samples = 20);
std::pair<bool, int> nilpotency_and_r1(const FundamentalData& fd, double tol = kGeomTol,
                                       int samples = 20);

enum class CaseTag {
  FOCAL_SURFACE,
  TWISTED_CONE,
  TWISTED_CYLINDER,
  NON_DEGENERATE,
  CONE,
  UNDETERMINED,
};

const char* to_string(CaseTag tag);

struct ClassificationVerdict {
  CaseTag tag = CaseTag::UNDETERMINED;
  int focal_dim = -1;
  std::string evidence;
  std::map<std::string, double> residuals;
};

struct SampleRecord {
  std::vector<double> u;
  int rank = -1;
  int leaf_dim = -1;
  bool r_fold = false;
  std::vector<double> focal_coeffs;  // graded-lex coefficient table of the focus-frame polynomial
  double b_sym_residual = 0.0;
  double bc_sym_residual = 0.0;
  double frame_residual = 0.0;
  int focus_rank = -1;               // rank of the focus-map differential
  std::vector<double> focus;         // normalized focus coordinates (when defined)
  std::string note;
};

struct ClassificationResult {
  ClassificationVerdict verdict;
  std::vector<SampleRecord> samples;
};

/// Second fundamental forms of the focal variety G at the focus, pulled back
/// to parameter space; phi_in_tangent is the form along the in-tangent normal
/// (the paper's Phi_1^n), phi_normal the one along the hypersurface normal
/// (Phi_1^{n+1}, the second fundamental form of X at the focus).
struct FocusSecondForms {
  Mat phi_in_tangent;   // n x n
  Mat phi_normal;       // n x n
  Vec generator_dir;    // parameter-space direction of A_1 A_0 on G
  Vec leaf_dir;         // parameter-space kernel direction of the focus map
  double form_scale;    // max Frobenius norm, for relative residuals
  double eval_in_tangent(const Vec& xi) const;
  double eval_normal(const Vec& xi) const;
};

/// Analytical core for one parametrized variety.  All methods are const and
/// deterministic; concurrent use is safe.
class VarietyAnalyzer {
 public:
  explicit VarietyAnalyzer(VarietySpec spec, double tol = kGeomTol,
                           double rank_tol = kRankTol);

  const VarietySpec& spec() const { return jets_.spec(); }
  int n() const { return jets_.n(); }
  int N() const { return jets_.N(); }
  double tol() const { return tol_; }

  /// Projective span of x and its first partials; throws GeometryError at
  /// singular parameter points.
  TangentData tangent_space(std::span<const double> u) const;

  /// Fills rank r = n - l and the Monge-Ampere leaf (common kernel of the
  /// normal-projected Hessians).
  TangentData gauss_rank(std::span<const double> u) const;
  TangentData gauss_rank(std::span<const double> u, double rank_tol) const;

  /// Adapted frame (hypersurface case): A_0 = x, A_1..A_l on the leaf,
  /// A_{l+1}..A_n completing the tangent, A_{n+1} off it.
  Frame adapted_frame(std::span<const double> u, const TangentData& td) const;

  /// Fundamental matrices in the canonical adapted frame.
  FundamentalData fundamental_matrices(std::span<const double> u) const;

  /// Fundamental matrices in a caller-supplied adapted frame; the frame must
  /// respect the flag x < leaf < tangent (checked, GeometryError otherwise).
  FundamentalData fundamental_matrices(std::span<const double> u, const Frame& frame) const;

  /// Fundamental matrices in the frame whose A_1 sits at the r-fold focus of
  /// the generator (l = 1 only).  The focal polynomial becomes (x^0)^r up to
  /// residual when the focus really is r-fold.
  FundamentalData fundamental_matrices_at_focus(std::span<const double> u) const;

  /// The r-fold focus on the generator through u (l = 1; roots of the focal
  /// polynomial clustered at relative tolerance 1e-6).
  HomPoint focus_map(std::span<const double> u) const;

  /// Derivative of the focus map at u: rows are the coordinate-direction
  /// derivatives of the normalized focus, projected off the focus itself.
  Mat focus_differential(std::span<const double> u) const;

  /// Rank of the focus-map differential at u.
  int focus_rank(std::span<const double> u) const;

  /// Three-case classification over a sample grid (first n-1 parameters
  /// gridded, last fixed at mid-box, 5% boundary inset).
  ClassificationResult classify(int grid_per_axis = 9) const;

  /// Second fundamental forms of the focal variety (case 1 only).
  FocusSecondForms focus_second_forms(std::span<const double> u) const;

  /// True iff every second fundamental form of the variety annihilates the
  /// parameter-space direction dir at u (relative tolerance tol).
  bool verify_asymptotic_direction(std::span<const double> u, std::span<const double> dir,
                                   double tol) const;
  double asymptotic_residual(std::span<const double> u, std::span<const double> dir) const;

  /// Grid of classification sample points (exposed for reports and tests).
  std::vector<std::vector<double>> classification_grid(int grid_per_axis = 9) const;

 private:
  struct Pipeline;
  Pipeline run_pipeline(std::span<const double> u, bool relocate) const;

  VarietyJets jets_;
  double tol_;
  double rank_tol_;
};

}  // namespace gd
