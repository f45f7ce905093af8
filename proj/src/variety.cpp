#include "gd/variety.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gd/jet_linalg.hpp"

namespace gd {

namespace {

Vec jet_values(const JetVec& v) {
  Vec out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out(k) = v[k].value();
  return out;
}

Vec jet_derivative_values(const JetVec& v, int q) {
  Vec out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out(k) = v[k].derivative(q).value();
  return out;
}

std::string point_to_string(std::span<const double> u) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) os << ", ";
    os << u[i];
  }
  os << ")";
  return os.str();
}

double rel_asym(const Mat& m) {
  double denom = m.norm();
  if (denom == 0.0) return 0.0;
  return (m - m.transpose()).norm() / denom;
}

// Symmetry residual of B*C against the scale of the data that produced it.
// When C vanishes (a cone seen from its vertex frame), |B*C| is pure noise
// and the quotient needs the geometric floor.
double product_asym(const Mat& b, const Mat& c, double scale_floor) {
  Mat h = b * c;
  double denom = std::max(h.norm(), 1e-6 * b.norm() * (c.norm() + scale_floor));
  if (denom == 0.0) return 0.0;
  return (h - h.transpose()).norm() / denom;
}

}  // namespace

double FocalPolynomial::leading() const {
  std::vector<int> alpha(nvars, 0);
  alpha[0] = degree;
  return poly.coeff(std::span<const int>(alpha.data(), alpha.size()));
}

double FocalPolynomial::max_nonleading() const {
  const auto& t = poly.table();
  std::vector<int> lead(nvars, 0);
  lead[0] = degree;
  int lead_idx = t.index_of(std::span<const int>(lead.data(), lead.size()));
  double best = 0.0;
  for (int k = 0; k < t.size(); ++k)
    if (k != lead_idx) best = std::max(best, std::abs(poly.coeff(k)));
  return best;
}

std::string FocalPolynomial::to_string() const {
  std::ostringstream os;
  const auto& t = poly.table();
  bool first = true;
  for (int k = 0; k < t.size(); ++k) {
    if (t.degree(k) != degree || poly.coeff(k) == 0.0) continue;
    if (!first) os << " + ";
    first = false;
    os << poly.coeff(k);
    for (int v = 0; v < nvars; ++v)
      for (int rep = 0; rep < t.exponents(k)[v]; ++rep) os << "*x" << v;
  }
  if (first) os << "0";
  return os.str();
}

bool is_r_fold_focus(const FocalPolynomial& fp, double tol) {
  double lead = std::abs(fp.leading());
  if (lead == 0.0) return false;
  return fp.max_nonleading() < tol * lead;
}

const char* to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::FOCAL_SURFACE: return "FOCAL_SURFACE";
    case CaseTag::TWISTED_CONE: return "TWISTED_CONE";
    case CaseTag::TWISTED_CYLINDER: return "TWISTED_CYLINDER";
    case CaseTag::NON_DEGENERATE: return "NON_DEGENERATE";
    case CaseTag::CONE: return "CONE";
    case CaseTag::UNDETERMINED: return "UNDETERMINED";
  }
  return "UNDETERMINED";
}

double FocusSecondForms::eval_in_tangent(const Vec& xi) const {
  return xi.transpose() * phi_in_tangent * xi;
}

double FocusSecondForms::eval_normal(const Vec& xi) const {
  return xi.transpose() * phi_normal * xi;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct VarietyAnalyzer::Pipeline {
  int n = 0, N = 0, r = 0, l = 0;
  int top = 3;  // jet order of the raw fields

  Vec x0;
  Mat d1;                         // n x (N+1)
  std::vector<std::vector<Vec>> d2;  // [i][j] -> (N+1)
  Mat normals;                    // (N-n) x (N+1)
  Mat V;                          // l x n leaf parameter directions
  Mat W;                          // r x n transverse parameter directions

  bool has_fields = false;        // hypersurface jet stage ran
  std::vector<JetVec> rows;       // n+2 frame row fields (jets)
  std::optional<Frame> frame;

  Mat B;
  std::vector<Mat> C;
  Mat coframe;
  FocalPolynomial focal;
  double frame_residual = 0.0;
  double leaf_form_residual = 0.0;
  double reloc_residual = -1.0;

  // Focus data (l == 1):
  bool r_fold = false;
  double eig_dispersion = 0.0;
  double lambda_bar = 0.0;
  double reloc_scale = 0.0;
  JetVec focus_field;             // relocated A_1 field, order top-1

  FundamentalData make_fundamental() const {
    FundamentalData fd(*frame);
    fd.r = r;
    fd.l = l;
    fd.B = B;
    fd.C = C;
    fd.focal = focal;
    fd.b_symmetry_residual = rel_asym(B);
    double worst = fd.b_symmetry_residual;
    for (const auto& c : C) worst = std::max(worst, product_asym(B, c, reloc_scale));
    fd.bc_symmetry_residual = worst;
    fd.frame_residual = frame_residual;
    fd.leaf_form_residual = leaf_form_residual;
    fd.relocation_residual = reloc_residual;
    fd.coframe = coframe;
    return fd;
  }
};

namespace {

// Structure coefficients of the moving frame: given the frame row fields
// (jets of order >= ord+1), extracts B, C_a, the coframe, and the adaptation
// residuals at the expansion point.
struct Extraction {
  Mat B;
  std::vector<Mat> C;
  std::vector<Jet> c_diag_jets;  // diagonal entries of C_1 (for the focus field)
  Mat coframe;
  double frame_residual = 0.0;
  double leaf_form_residual = 0.0;
};

Extraction extract_structure(const std::vector<JetVec>& rows, int n, int l, int ord) {
  const int dim = static_cast<int>(rows[0].size());  // N+1 == n+2
  const int r = n - l;
  const int nvars = rows[0][0].nvars();

  JetMatrix Ft(dim, dim, nvars, ord);
  for (int u = 0; u < dim; ++u)
    for (int k = 0; k < dim; ++k) Ft.at(k, u) = rows[u][k].truncated(ord);

  // Omega_q^T = (F^T)^{-1} (d_q F)^T; column u holds the coefficients of
  // dA_u(e_q) over the frame.
  std::vector<JetMatrix> omega_t(n);
  for (int q = 0; q < n; ++q) {
    JetMatrix rhs(dim, dim, nvars, ord);
    for (int u = 0; u < dim; ++u)
      for (int k = 0; k < dim; ++k) rhs.at(k, u) = rows[u][k].derivative(q).truncated(ord);
    omega_t[q] = solve_jet(Ft, rhs);
  }

  auto omega = [&](int q, int u, int v) -> const Jet& { return omega_t[q].at(v, u); };

  // Basis coframe sigma[j][k] = omega_0^{k+1}(e_j).
  JetMatrix sigma(n, n, nvars, ord);
  Extraction out;
  out.coframe = Mat(n, n);
  double sigma_scale = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      sigma.at(j, k) = omega(j, 0, k + 1);
      out.coframe(j, k) = sigma.at(j, k).value();
      sigma_scale = std::max(sigma_scale, std::abs(out.coframe(j, k)));
    }
  if (sigma_scale == 0.0) throw GeometryError("degenerate coframe");

  // Conditions (3): the A_{n+1}-components of dA_0 and dA_a vanish.
  double frame_res = 0.0;
  for (int j = 0; j < n; ++j) {
    frame_res = std::max(frame_res, std::abs(omega(j, 0, n + 1).value()));
    for (int a = 1; a <= l; ++a)
      frame_res = std::max(frame_res, std::abs(omega(j, a, n + 1).value()));
  }
  out.frame_residual = frame_res / sigma_scale;

  // Covectors to expand over the coframe:
  //   omega_a^p for a = 1..l, p = l+1..n  (the c^p_aq data)
  //   omega_p^{n+1} for p = l+1..n        (the b_pq data)
  const int n_c = l * r;
  const int n_b = r;
  JetMatrix rhs(n, n_c + n_b, nvars, ord);
  int col = 0;
  for (int a = 1; a <= l; ++a)
    for (int p = l + 1; p <= n; ++p, ++col)
      for (int j = 0; j < n; ++j) rhs.at(j, col) = omega(j, a, p);
  for (int p = l + 1; p <= n; ++p, ++col)
    for (int j = 0; j < n; ++j) rhs.at(j, col) = omega(j, p, n + 1);
  JetMatrix gamma = solve_jet(sigma, rhs);

  double leaf_res = 0.0, coeff_scale = 0.0;
  for (int c = 0; c < n_c + n_b; ++c) {
    for (int k = 0; k < l; ++k) leaf_res = std::max(leaf_res, std::abs(gamma.at(k, c).value()));
    for (int k = 0; k < n; ++k) coeff_scale = std::max(coeff_scale, std::abs(gamma.at(k, c).value()));
  }
  out.leaf_form_residual = coeff_scale > 0.0 ? leaf_res / coeff_scale : 0.0;

  out.C.assign(l, Mat::Zero(r, r));
  col = 0;
  for (int a = 1; a <= l; ++a)
    for (int p = l + 1; p <= n; ++p, ++col)
      for (int q = l + 1; q <= n; ++q)
        out.C[a - 1](p - l - 1, q - l - 1) = gamma.at(q - 1, col).value();
  out.B = Mat::Zero(r, r);
  for (int p = l + 1; p <= n; ++p, ++col)
    for (int q = l + 1; q <= n; ++q) out.B(p - l - 1, q - l - 1) = gamma.at(q - 1, col).value();

  if (l >= 1) {
    out.c_diag_jets.reserve(r);
    for (int p = l + 1; p <= n; ++p) {
      int c_index = (p - l - 1);  // covector column of omega_1^p
      out.c_diag_jets.push_back(gamma.at(p - 1, c_index));
    }
  }
  return out;
}

FocalPolynomial focal_from_matrices(const std::vector<Mat>& C, int r, int l) {
  FocalPolynomial fp;
  fp.degree = r;
  fp.nvars = l + 1;
  // Entries of x^0 I + x^a C_a are linear polynomials; the determinant is a
  // Leibniz sum over the r x r entries (r <= 4).
  std::vector<std::vector<Jet>> entry(r, std::vector<Jet>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Jet e(l + 1, r);
      if (i == j) e += Jet::variable(l + 1, r, 0, 0.0);
      for (int a = 0; a < l; ++a) e += Jet::variable(l + 1, r, a + 1, 0.0) * C[a](i, j);
      entry[i][j] = e;
    }
  Jet det(l + 1, r);
  std::vector<int> perm(r);
  for (int i = 0; i < r; ++i) perm[i] = i;
  do {
    int inv = 0;
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j)
        if (perm[i] > perm[j]) ++inv;
    Jet term = Jet::constant(l + 1, r, inv % 2 ? -1.0 : 1.0);
    for (int i = 0; i < r; ++i) term = term * entry[i][perm[i]];
    det += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  fp.poly = det;
  return fp;
}

}  // namespace

VarietyAnalyzer::VarietyAnalyzer(VarietySpec spec, double tol, double rank_tol)
    : jets_(std::move(spec)), tol_(tol), rank_tol_(rank_tol) {}

VarietyAnalyzer::Pipeline VarietyAnalyzer::run_pipeline(std::span<const double> u,
                                                        bool relocate) const {
  Pipeline P;
  P.n = n();
  P.N = N();
  P.top = std::min(3, max_jet_order(P.n));

  JetVec xj = jets_.point(u, P.top);
  P.x0 = jet_values(xj);
  P.d1 = Mat(P.n, P.N + 1);
  std::vector<JetVec> d1j(P.n);
  for (int i = 0; i < P.n; ++i) {
    d1j[i] = jets_.d1(i, u, P.top);
    P.d1.row(i) = jet_values(d1j[i]).transpose();
  }

  Mat tangent_rows(P.n + 1, P.N + 1);
  tangent_rows.row(0) = P.x0.transpose();
  tangent_rows.bottomRows(P.n) = P.d1;
  if (numerical_rank(tangent_rows, rank_tol_) != P.n + 1)
    throw GeometryError("singular parameter point at u = " + point_to_string(u) +
                        " (first-derivative matrix drops rank; the point lies on a focal locus)");

  P.normals = orthogonal_complement(tangent_rows, rank_tol_);

  // Second partials and the stacked normal-projected Hessian.
  P.d2.assign(P.n, std::vector<Vec>(P.n));
  std::vector<std::vector<JetVec>> d2j(P.n, std::vector<JetVec>(P.n));
  for (int i = 0; i < P.n; ++i)
    for (int j = i; j < P.n; ++j) {
      d2j[i][j] = jets_.d2(i, j, u, P.top);
      P.d2[i][j] = jet_values(d2j[i][j]);
      if (i != j) {
        P.d2[j][i] = P.d2[i][j];
        d2j[j][i] = d2j[i][j];
      }
    }

  const int ncodim = P.N - P.n;
  Mat stacked(ncodim * P.n, P.n);
  for (int mu = 0; mu < ncodim; ++mu)
    for (int i = 0; i < P.n; ++i)
      for (int j = 0; j < P.n; ++j)
        stacked(mu * P.n + i, j) = P.normals.row(mu).dot(P.d2[i][j]);
  P.V = null_space_basis(stacked, rank_tol_);
  P.l = static_cast<int>(P.V.rows());
  P.r = P.n - P.l;
  P.W = P.l == 0 ? Mat::Identity(P.n, P.n) : null_space_basis(P.V, rank_tol_);

  if (P.r == 0)
    throw GeometryError("Gauss rank 0 (an n-plane): no transverse directions");
  if (P.N != P.n + 1)
    throw GeometryError("adapted frames require the hypersurface case N = n + 1");

  // --- Smooth frame fields as jets -----------------------------------------
  const int dim = P.N + 1;
  const int nvars = P.n;

  // Normal field: [x(u); d1(u); nu0^T] nu(u) = e_last.
  Vec nu0 = P.normals.row(0).transpose();
  JetMatrix nu_sys(P.n + 2, dim, nvars, P.top);
  for (int k = 0; k < dim; ++k) {
    nu_sys.at(0, k) = xj[k];
    for (int i = 0; i < P.n; ++i) nu_sys.at(1 + i, k) = d1j[i][k];
    nu_sys.at(P.n + 1, k) = Jet::constant(nvars, P.top, nu0(k));
  }
  JetMatrix nu_rhs(P.n + 2, 1, nvars, P.top);
  nu_rhs.at(P.n + 1, 0) = Jet::constant(nvars, P.top, 1.0);
  JetMatrix nu_jet = solve_jet(nu_sys, nu_rhs);

  // Projected Hessian as jets: M_ij = <nu(u), d2_ij(u)>.
  std::vector<std::vector<Jet>> Mjet(P.n, std::vector<Jet>(P.n));
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j) {
      Jet acc(nvars, P.top);
      for (int k = 0; k < dim; ++k) acc += nu_jet.at(k, 0) * d2j[i][j][k];
      Mjet[i][j] = acc;
    }

  // Leaf fields: r value-independent rows of M plus the kernel normalization.
  Mat M0(P.n, P.n);
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j) M0(i, j) = Mjet[i][j].value();
  std::vector<int> sel;
  {
    Eigen::ColPivHouseholderQR<Mat> qr(M0.transpose());
    auto perm = qr.colsPermutation().indices();
    for (int k = 0; k < P.r; ++k) sel.push_back(perm(k));
  }
  std::vector<JetVec> leaf_fields;  // D_a(u), ambient vectors
  if (P.l > 0) {
    JetMatrix S(P.n, P.n, nvars, P.top);
    for (int k = 0; k < P.r; ++k)
      for (int j = 0; j < P.n; ++j) S.at(k, j) = Mjet[sel[k]][j];
    for (int a = 0; a < P.l; ++a)
      for (int j = 0; j < P.n; ++j)
        S.at(P.r + a, j) = Jet::constant(nvars, P.top, P.V(a, j));
    JetMatrix rhs(P.n, P.l, nvars, P.top);
    for (int a = 0; a < P.l; ++a) rhs.at(P.r + a, a) = Jet::constant(nvars, P.top, 1.0);
    JetMatrix vsol = solve_jet(S, rhs);  // columns: v_a(u)
    for (int a = 0; a < P.l; ++a) {
      JetVec D(dim, Jet(nvars, P.top));
      for (int k = 0; k < dim; ++k) {
        Jet acc(nvars, P.top);
        for (int j = 0; j < P.n; ++j) acc += vsol.at(j, a) * d1j[j][k];
        D[k] = acc;
      }
      leaf_fields.push_back(std::move(D));
    }
  }

  // Frame rows: A_0 = x, A_a = x + D_a, A_p = W_p . d1, A_{n+1} = nu0.
  P.rows.assign(dim, JetVec(dim, Jet(nvars, P.top)));
  for (int k = 0; k < dim; ++k) P.rows[0][k] = xj[k];
  for (int a = 0; a < P.l; ++a)
    for (int k = 0; k < dim; ++k) P.rows[1 + a][k] = xj[k] + leaf_fields[a][k];
  for (int p = 0; p < P.r; ++p)
    for (int k = 0; k < dim; ++k) {
      Jet acc(nvars, P.top);
      for (int j = 0; j < P.n; ++j) acc += d1j[j][k] * P.W(p, j);
      P.rows[1 + P.l + p][k] = acc;
    }
  for (int k = 0; k < dim; ++k) P.rows[dim - 1][k] = Jet::constant(nvars, P.top, nu0(k));

  Mat frame_vals(dim, dim);
  for (int ru = 0; ru < dim; ++ru)
    for (int k = 0; k < dim; ++k) frame_vals(ru, k) = P.rows[ru][k].value();
  P.frame.emplace(frame_vals);
  P.has_fields = true;

  Extraction ex = extract_structure(P.rows, P.n, P.l, P.top - 1);
  P.B = ex.B;
  P.C = ex.C;
  P.coframe = ex.coframe;
  P.frame_residual = ex.frame_residual;
  P.leaf_form_residual = ex.leaf_form_residual;
  P.focal = focal_from_matrices(P.C, P.r, P.l);

  if (!relocate) return P;

  if (P.l != 1)
    throw GeometryError("focus location requires one-dimensional leaves (l = 1), got l = " +
                        std::to_string(P.l));

  // Eigenstructure of C_1: the foci on the generator are A_1 - lambda_k A_0.
  Eigen::EigenSolver<Mat> es(P.C[0]);
  double max_abs = 0.0;
  std::complex<double> mean(0.0, 0.0);
  for (int k = 0; k < P.r; ++k) {
    mean += es.eigenvalues()(k);
    max_abs = std::max(max_abs, std::abs(es.eigenvalues()(k)));
  }
  mean /= P.r;
  double disp = 0.0;
  for (int k = 0; k < P.r; ++k) disp = std::max(disp, std::abs(es.eigenvalues()(k) - mean));
  P.eig_dispersion = disp;
  P.r_fold = disp <= 1e-6 * std::max(1.0, max_abs);
  P.lambda_bar = mean.real();

  // Focus field A_1(u) - lambda(u) A_0(u) with lambda = tr C / r as a jet.
  Jet lambda(nvars, P.top - 1);
  for (const auto& cj : ex.c_diag_jets) lambda += cj;
  lambda *= 1.0 / P.r;
  P.focus_field.assign(dim, Jet(nvars, P.top - 1));
  for (int k = 0; k < dim; ++k)
    P.focus_field[k] = P.rows[1][k].truncated(P.top - 1) - lambda * P.rows[0][k].truncated(P.top - 1);

  // Relocated frame and its structure coefficients.
  std::vector<JetVec> rows2 = P.rows;
  for (int k = 0; k < dim; ++k) rows2[1][k] = P.focus_field[k];
  Mat fv2 = frame_vals;
  for (int k = 0; k < dim; ++k) fv2(1, k) = P.focus_field[k].value();
  P.frame.emplace(fv2);
  P.rows = rows2;

  Extraction ex2 = extract_structure(P.rows, P.n, P.l, P.top - 2);
  P.B = ex2.B;
  P.C = ex2.C;
  P.coframe = ex2.coframe;
  P.frame_residual = std::max(P.frame_residual, ex2.frame_residual);
  P.leaf_form_residual = std::max(P.leaf_form_residual, ex2.leaf_form_residual);
  P.focal = focal_from_matrices(P.C, P.r, P.l);
  double cscale = 0.0;
  for (const auto& c : P.C) cscale = std::max(cscale, c.norm());
  P.reloc_residual = std::abs(P.C[0].trace()) / std::max(1.0, cscale);
  P.reloc_scale = std::abs(P.lambda_bar);
  return P;
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

TangentData VarietyAnalyzer::tangent_space(std::span<const double> u) const {
  JetVec xj = jets_.point(u, 1);
  TangentData td;
  td.point = jet_values(xj);
  Mat rows(n() + 1, N() + 1);
  rows.row(0) = td.point.transpose();
  for (int i = 0; i < n(); ++i) rows.row(1 + i) = jet_derivative_values(xj, i).transpose();
  if (numerical_rank(rows, rank_tol_) != n() + 1)
    throw GeometryError("singular parameter point at u = " + point_to_string(u) +
                        " (first-derivative matrix drops rank; the point lies on a focal locus)");
  td.tangent.emplace(rows, rank_tol_);
  return td;
}

TangentData VarietyAnalyzer::gauss_rank(std::span<const double> u) const {
  return gauss_rank(u, rank_tol_);
}

TangentData VarietyAnalyzer::gauss_rank(std::span<const double> u, double rank_tol) const {
  const int top = std::min(2, max_jet_order(n()));
  JetVec xj = jets_.point(u, top);
  TangentData td;
  td.point = jet_values(xj);
  Mat rows(n() + 1, N() + 1);
  rows.row(0) = td.point.transpose();
  Mat d1(n(), N() + 1);
  for (int i = 0; i < n(); ++i) {
    d1.row(i) = jet_derivative_values(xj, i).transpose();
    rows.row(1 + i) = d1.row(i);
  }
  if (numerical_rank(rows, rank_tol) != n() + 1)
    throw GeometryError("singular parameter point at u = " + point_to_string(u) +
                        " (first-derivative matrix drops rank; the point lies on a focal locus)");
  td.tangent.emplace(rows, rank_tol);

  Mat normals = orthogonal_complement(rows, rank_tol);
  const int ncodim = static_cast<int>(normals.rows());
  Mat stacked(ncodim * n(), n());
  for (int mu = 0; mu < ncodim; ++mu)
    for (int i = 0; i < n(); ++i)
      for (int j = 0; j < n(); ++j) {
        Vec dij(N() + 1);
        int lo = std::min(i, j), hi = std::max(i, j);
        std::array<int, kMaxJetVars> alpha{};
        alpha[lo] += 1;
        alpha[hi] += 1;
        for (int k = 0; k <= N(); ++k)
          dij(k) = xj[k].partial(std::span<const int>(alpha.data(), n()));
        stacked(mu * n() + i, j) = normals.row(mu).dot(dij);
      }
  td.leaf_param_dirs = null_space_basis(stacked, rank_tol);
  td.leaf_dim = static_cast<int>(td.leaf_param_dirs.rows());
  td.rank = n() - td.leaf_dim;
  if (td.leaf_dim > 0) {
    Mat leaf_rows(1 + td.leaf_dim, N() + 1);
    leaf_rows.row(0) = td.point.transpose();
    leaf_rows.bottomRows(td.leaf_dim) = td.leaf_param_dirs * d1;
    td.leaf.emplace(leaf_rows, rank_tol);
  }
  return td;
}

Frame VarietyAnalyzer::adapted_frame(std::span<const double> u, const TangentData& td) const {
  if (td.rank < 1)
    throw GeometryError(td.rank == 0 ? "Gauss rank 0 (an n-plane): no transverse directions"
                                     : "adapted_frame needs gauss_rank data");
  Pipeline P = run_pipeline(u, false);
  return *P.frame;
}

FundamentalData VarietyAnalyzer::fundamental_matrices(std::span<const double> u) const {
  Pipeline P = run_pipeline(u, false);
  return P.make_fundamental();
}

FundamentalData VarietyAnalyzer::fundamental_matrices(std::span<const double> u,
                                                      const Frame& frame) const {
  Pipeline P = run_pipeline(u, false);
  const int dim = P.N + 1;
  if (frame.rows.rows() != dim)
    throw GeometryError("frame has wrong ambient dimension");

  // Express the supplied rows over the canonical fields and check the flag
  // x < leaf < tangent is respected.
  Mat S(dim, dim);
  for (int i = 0; i < dim; ++i)
    S.row(i) = P.frame->coordinates(frame.rows.row(i).transpose()).transpose();
  auto check_support = [&](int row, int max_slot) {
    double inside = 0.0, outside = 0.0;
    for (int v = 0; v < dim; ++v) {
      double mag = std::abs(S(row, v));
      if (v <= max_slot)
        inside = std::max(inside, mag);
      else
        outside = std::max(outside, mag);
    }
    if (outside > 1e-6 * std::max(inside, 1e-300))
      throw GeometryError("frame is not adapted (row " + std::to_string(row) +
                          " leaves its flag subspace)");
  };
  check_support(0, 0);
  for (int a = 1; a <= P.l; ++a) check_support(a, P.l);
  for (int p = P.l + 1; p <= P.n; ++p) check_support(p, P.n);
  if (std::abs(S(dim - 1, dim - 1)) < 1e-12)
    throw GeometryError("frame is not adapted (A_{n+1} lies in the tangent hyperplane)");

  const int nvars = P.n;
  std::vector<JetVec> rows(dim, JetVec(dim, Jet(nvars, P.top)));
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) {
      Jet acc(nvars, P.top);
      for (int v = 0; v < dim; ++v) acc += P.rows[v][k] * S(i, v);
      rows[i][k] = acc;
    }
  Extraction ex = extract_structure(rows, P.n, P.l, P.top - 1);
  Pipeline Q = P;
  Q.rows = rows;
  Q.frame.emplace(frame.rows);
  Q.B = ex.B;
  Q.C = ex.C;
  Q.coframe = ex.coframe;
  Q.frame_residual = ex.frame_residual;
  Q.leaf_form_residual = ex.leaf_form_residual;
  Q.focal = focal_from_matrices(Q.C, Q.r, Q.l);
  return Q.make_fundamental();
}

FundamentalData VarietyAnalyzer::fundamental_matrices_at_focus(std::span<const double> u) const {
  Pipeline P = run_pipeline(u, true);
  return P.make_fundamental();
}

HomPoint VarietyAnalyzer::focus_map(std::span<const double> u) const {
  Pipeline P = run_pipeline(u, true);
  if (!P.r_fold)
    throw GeometryError("focus is not r-fold at u = " + point_to_string(u) +
                        " (eigenvalue dispersion " + std::to_string(P.eig_dispersion) + ")");
  Vec f(P.N + 1);
  for (int k = 0; k <= P.N; ++k) f(k) = P.focus_field[k].value();
  return HomPoint(f).normalized();
}

Mat VarietyAnalyzer::focus_differential(std::span<const double> u) const {
  Pipeline P = run_pipeline(u, true);
  const int dim = P.N + 1;
  Vec f(dim);
  for (int k = 0; k < dim; ++k) f(k) = P.focus_field[k].value();
  double fn = f.norm();
  Vec fh = f / fn;
  Mat D(P.n, dim);
  for (int q = 0; q < P.n; ++q) {
    Vec d(dim);
    for (int k = 0; k < dim; ++k) d(k) = P.focus_field[k].derivative(q).value();
    d /= fn;
    d -= d.dot(fh) * fh;
    D.row(q) = d.transpose();
  }
  return D;
}

int VarietyAnalyzer::focus_rank(std::span<const double> u) const {
  Mat D = focus_differential(u);
  Eigen::JacobiSVD<Mat> svd(D);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  double thresh = std::max(1e-6 * sv(0), 1e-7);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return rank;
}

std::vector<std::vector<double>> VarietyAnalyzer::classification_grid(int grid_per_axis) const {
  if (grid_per_axis < 1) throw std::invalid_argument("grid must be positive");
  const auto& dom = spec().domain;
  std::vector<std::vector<double>> pts;
  const int axes = std::max(0, n() - 1);
  std::vector<int> idx(axes, 0);
  for (;;) {
    std::vector<double> u(n());
    for (int i = 0; i < axes; ++i) {
      double w = dom[i].width();
      double lo = dom[i].lo + 0.05 * w;
      double span = 0.9 * w;
      u[i] = grid_per_axis == 1 ? dom[i].mid()
                                : lo + span * idx[i] / (grid_per_axis - 1);
    }
    u[n() - 1] = dom[n() - 1].mid();
    pts.push_back(u);
    if (axes == 0) break;
    int k = 0;
    while (k < axes && ++idx[k] == grid_per_axis) idx[k++] = 0;
    if (k == axes) break;
  }
  return pts;
}

ClassificationResult VarietyAnalyzer::classify(int grid_per_axis) const {
  ClassificationResult out;
  auto& verdict = out.verdict;
  auto grid = classification_grid(grid_per_axis);

  std::map<std::pair<int, int>, int> rank_hist;
  std::map<int, int> focus_rank_hist;
  bool all_r_fold = true;
  std::string first_note;
  std::vector<Vec> foci;
  int valid = 0;

  for (const auto& u : grid) {
    SampleRecord rec;
    rec.u = u;
    try {
      TangentData td = gauss_rank(u);
      rec.rank = td.rank;
      rec.leaf_dim = td.leaf_dim;
      rank_hist[{td.rank, td.leaf_dim}]++;
      ++valid;
      if (td.rank >= 1 && td.rank < n() && td.leaf_dim == 1 && N() == n() + 1) {
        Pipeline P = run_pipeline(u, true);
        rec.r_fold = P.r_fold && is_r_fold_focus(P.focal, tol_);
        all_r_fold = all_r_fold && rec.r_fold;
        FundamentalData fd = P.make_fundamental();
        rec.b_sym_residual = fd.b_symmetry_residual;
        rec.bc_sym_residual = fd.bc_symmetry_residual;
        rec.frame_residual = fd.frame_residual;
        for (int k = 0; k < P.focal.poly.table().size(); ++k)
          rec.focal_coeffs.push_back(P.focal.poly.coeff(k));
        Vec f(N() + 1);
        for (int k = 0; k <= N(); ++k) f(k) = P.focus_field[k].value();
        HomPoint fp = HomPoint(f).normalized();
        rec.focus.assign(fp.coords.data(), fp.coords.data() + fp.coords.size());
        foci.push_back(fp.coords / fp.coords.norm());
        rec.focus_rank = focus_rank(u);
        focus_rank_hist[rec.focus_rank]++;
      }
    } catch (const std::exception& e) {
      rec.note = e.what();
      if (first_note.empty()) first_note = e.what();
    }
    out.samples.push_back(std::move(rec));
  }

  if (valid < std::max(1, static_cast<int>(grid.size()) / 2)) {
    verdict.tag = CaseTag::UNDETERMINED;
    verdict.evidence = "too few regular samples: " + first_note;
    return out;
  }
  if (rank_hist.size() != 1) {
    std::ostringstream os;
    os << "inconsistent rank across grid:";
    for (const auto& [k, c] : rank_hist)
      os << " (r=" << k.first << ",l=" << k.second << "):" << c;
    verdict.tag = CaseTag::UNDETERMINED;
    verdict.evidence = os.str();
    return out;
  }
  const auto [r, l] = rank_hist.begin()->first;
  if (r == 0) {
    verdict.tag = CaseTag::NON_DEGENERATE;
    verdict.focal_dim = -1;
    verdict.evidence = "Gauss rank 0: the variety is an n-plane";
    return out;
  }
  if (r == n()) {
    verdict.tag = CaseTag::NON_DEGENERATE;
    verdict.focal_dim = -1;
    verdict.evidence = "nondegenerate Gauss map (rank n)";
    return out;
  }
  if (l != 1) {
    verdict.tag = CaseTag::UNDETERMINED;
    verdict.evidence = "classification requires one-dimensional leaves, got l = " +
                       std::to_string(l);
    return out;
  }
  if (N() != n() + 1) {
    verdict.tag = CaseTag::UNDETERMINED;
    verdict.evidence = "classification requires the hypersurface case N = n + 1";
    return out;
  }
  if (!all_r_fold) {
    verdict.tag = CaseTag::UNDETERMINED;
    verdict.evidence = "focus is not r-fold on every generator";
    return out;
  }
  if (focus_rank_hist.size() != 1) {
    std::ostringstream os;
    os << "inconsistent focus-map rank across grid:";
    for (const auto& [k, c] : focus_rank_hist) os << " " << k << ":" << c;
    verdict.tag = CaseTag::UNDETERMINED;
    verdict.evidence = os.str();
    return out;
  }
  const int rho = focus_rank_hist.begin()->first;
  verdict.residuals["focus_map_rank"] = rho;

  if (rho == 0) {
    verdict.tag = CaseTag::CONE;
    verdict.focal_dim = 0;
    verdict.evidence = "focus map constant: all generators pass through a fixed vertex";
    return out;
  }
  if (rho == n() - 1) {
    verdict.tag = CaseTag::FOCAL_SURFACE;
    verdict.focal_dim = n() - 1;
    verdict.evidence = "focus map has rank n-1: focal variety of dimension r";
    return out;
  }
  if (rho == n() - 2) {
    verdict.focal_dim = n() - 2;
    // Extra foci along the first parameter for the hyperplane fit.
    std::vector<double> u0 = grid.front();
    const auto& dom = spec().domain;
    for (int k = 0; k < 33; ++k) {
      std::vector<double> u = u0;
      u[0] = dom[0].lo + 0.05 * dom[0].width() + 0.9 * dom[0].width() * k / 32.0;
      try {
        Pipeline P = run_pipeline(u, true);
        Vec f(N() + 1);
        for (int kk = 0; kk <= N(); ++kk) f(kk) = P.focus_field[kk].value();
        foci.push_back(f / f.norm());
      } catch (const std::exception&) {
      }
    }
    Mat F(static_cast<int>(foci.size()), N() + 1);
    for (std::size_t i = 0; i < foci.size(); ++i) F.row(static_cast<int>(i)) = foci[i].transpose();
    Eigen::JacobiSVD<Mat> svd(F);
    const auto& sv = svd.singularValues();
    double fit = sv(sv.size() - 1) / sv(0);
    verdict.residuals["focal_hyperplane_fit"] = fit;
    if (fit < tol_) {
      verdict.tag = CaseTag::TWISTED_CYLINDER;
      verdict.evidence = "twisted cone whose focal variety lies in a fixed hyperplane";
    } else {
      verdict.tag = CaseTag::TWISTED_CONE;
      verdict.evidence = "focus map has rank n-2: focal variety of dimension n-2";
    }
    return out;
  }
  verdict.tag = CaseTag::UNDETERMINED;
  verdict.evidence = "focus map rank " + std::to_string(rho) +
                     " matches none of the three cases";
  return out;
}

FocusSecondForms VarietyAnalyzer::focus_second_forms(std::span<const double> u) const {
  Pipeline P = run_pipeline(u, true);
  if (!P.r_fold)
    throw GeometryError("focus is not r-fold at u = " + point_to_string(u));
  const int dim = P.N + 1;

  Vec f(dim);
  for (int k = 0; k < dim; ++k) f(k) = P.focus_field[k].value();
  Mat df(P.n, dim);
  for (int q = 0; q < P.n; ++q)
    for (int k = 0; k < dim; ++k) df(q, k) = P.focus_field[k].derivative(q).value();

  // Case-1 check: the focus map must have rank n-1.
  {
    Mat D = focus_differential(u);
    Eigen::JacobiSVD<Mat> svd(D);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > std::max(1e-6 * sv(0), 1e-7)) ++rank;
    if (rank != P.n - 1)
      throw GeometryError("not a case-1 configuration: focus map rank " + std::to_string(rank) +
                          ", expected n-1 = " + std::to_string(P.n - 1));
  }

  Mat tg(1 + P.n, dim);
  tg.row(0) = f.transpose();
  tg.bottomRows(P.n) = df;
  Mat tg_basis = row_space_basis(tg, 1e-8);
  if (tg_basis.rows() != P.n)
    throw GeometryError("focal variety tangent space is degenerate");

  Vec nu_x = P.normals.row(0).transpose();
  Mat span_rows(tg_basis.rows() + 1, dim);
  span_rows << tg_basis, nu_x.transpose();
  Mat nu_g = orthogonal_complement(span_rows, 1e-8);
  if (nu_g.rows() != 1)
    throw GeometryError("could not split the normal space of the focal variety");

  FocusSecondForms out;
  out.phi_in_tangent = Mat::Zero(P.n, P.n);
  out.phi_normal = Mat::Zero(P.n, P.n);
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j) {
      std::array<int, kMaxJetVars> alpha{};
      alpha[i] += 1;
      alpha[j] += 1;
      Vec d2f(dim);
      for (int k = 0; k < dim; ++k)
        d2f(k) = P.focus_field[k].partial(std::span<const int>(alpha.data(), P.n));
      out.phi_in_tangent(i, j) = nu_g.row(0).dot(d2f);
      out.phi_normal(i, j) = nu_x.dot(d2f);
    }
  // Scale-normalize by the focus magnitude so residuals are dimensionless.
  double fn = f.norm();
  out.phi_in_tangent /= fn;
  out.phi_normal /= fn;
  out.form_scale = std::max(out.phi_in_tangent.norm(), out.phi_normal.norm());

  // Generator direction: dF falls into span{F, A_0}; leaf direction: dF ~ F.
  Vec a0 = P.x0 / P.x0.norm();
  Vec fh = f / fn;
  Mat proj_rows(P.n, dim);
  for (int q = 0; q < P.n; ++q) {
    Vec d = df.row(q).transpose();
    d -= d.dot(fh) * fh;
    Vec a0p = a0 - a0.dot(fh) * fh;
    a0p /= a0p.norm();
    d -= d.dot(a0p) * a0p;
    proj_rows.row(q) = d.transpose() / fn;
  }
  Mat ker = null_space_basis(proj_rows.transpose(), 1e-6);
  if (ker.rows() != 2)
    throw GeometryError("generator direction not found (kernel dimension " +
                        std::to_string(ker.rows()) + ", expected 2)");
  Mat D = focus_differential(u);
  Mat leaf_ker = null_space_basis(D.transpose(), 1e-6);
  if (leaf_ker.rows() != 1)
    throw GeometryError("focus-map kernel is not one-dimensional");
  out.leaf_dir = leaf_ker.row(0).transpose();
  Vec g = ker.row(0).transpose();
  Vec g2 = ker.row(1).transpose();
  Vec gen = g - g.dot(out.leaf_dir) * out.leaf_dir;
  if (gen.norm() < 0.5 * g.norm()) gen = g2 - g2.dot(out.leaf_dir) * out.leaf_dir;
  if (gen.norm() == 0.0) throw GeometryError("generator direction degenerate");
  out.generator_dir = gen / gen.norm();
  return out;
}

double VarietyAnalyzer::asymptotic_residual(std::span<const double> u,
                                            std::span<const double> dir) const {
  const int top = std::min(2, max_jet_order(n()));
  JetVec xj = jets_.point(u, top);
  Vec x0 = jet_values(xj);
  Mat rows(n() + 1, N() + 1);
  rows.row(0) = x0.transpose();
  for (int i = 0; i < n(); ++i) rows.row(1 + i) = jet_derivative_values(xj, i).transpose();
  if (numerical_rank(rows, rank_tol_) != n() + 1)
    throw GeometryError("singular parameter point at u = " + point_to_string(u));
  Mat normals = orthogonal_complement(rows, rank_tol_);

  Vec xi(n());
  for (int i = 0; i < n(); ++i) xi(i) = dir[i];
  if (xi.norm() == 0.0) throw std::invalid_argument("direction must be nonvanishing");

  double worst = 0.0;
  for (int mu = 0; mu < normals.rows(); ++mu) {
    Mat H(n(), n());
    for (int i = 0; i < n(); ++i)
      for (int j = 0; j < n(); ++j) {
        std::array<int, kMaxJetVars> alpha{};
        alpha[i] += 1;
        alpha[j] += 1;
        Vec d2(N() + 1);
        for (int k = 0; k <= N(); ++k)
          d2(k) = xj[k].partial(std::span<const int>(alpha.data(), n()));
        H(i, j) = normals.row(mu).dot(d2);
      }
    double scale = H.norm() * xi.squaredNorm();
    if (scale == 0.0) continue;  // flat in this normal direction
    worst = std::max(worst, std::abs(double(xi.transpose() * H * xi)) / scale);
  }
  return worst;
}

bool VarietyAnalyzer::verify_asymptotic_direction(std::span<const double> u,
                                                  std::span<const double> dir,
                                                  double tol) const {
  return asymptotic_residual(u, dir) <= tol;
}

FocalPolynomial focal_polynomial(const std::vector<Mat>& C) {
  if (C.empty()) throw std::invalid_argument("focal_polynomial needs at least one matrix");
  return focal_from_matrices(C, static_cast<int>(C[0].rows()), static_cast<int>(C.size()));
}

std::pair<bool, int> nilpotency_and_r1(const std::vector<Mat>& C, double tol, int samples) {
  if (C.empty()) throw std::invalid_argument("nilpotency_and_r1 needs at least one matrix");
  const int r = static_cast<int>(C[0].rows());
  auto power_residual = [&](const Mat& c) {
    Mat p = Mat::Identity(r, r);
    for (int k = 0; k < r; ++k) p = p * c;
    double scale = std::pow(std::max(1.0, c.norm()), r);
    return p.norm() / scale;
  };
  bool nilpotent = true;
  for (const auto& c : C) nilpotent = nilpotent && power_residual(c) <= tol;

  std::mt19937_64 rng(0xb0b5eedULL);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  int r1 = 0;
  for (int s = 0; s < samples; ++s) {
    Mat bundle = Mat::Zero(r, r);
    for (const auto& c : C) bundle += coef(rng) * c;
    nilpotent = nilpotent && power_residual(bundle) <= tol;
    r1 = std::max(r1, numerical_rank(bundle, 1e-8));
  }
  return {nilpotent, r1};
}

std::pair<bool, int> nilpotency_and_r1(const FundamentalData& fd, double tol, int samples) {
  return nilpotency_and_r1(fd.C, tol, samples);
}

}  // namespace gd
