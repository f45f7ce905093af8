#pragma once

#include <string>
#include <vector>

#include "gd/projective.hpp"
#include "gd/variety.hpp"

namespace gd {

/// One-parameter family of 2-planes in P^4 spanned by three curves.
/// Genericity: span{P1,P2,P3} has projective dimension 2 and
/// span{P_i, P_i'} is all of P^4 at the sample points.
struct PlaneFamily {
  std::vector<VarietySpec> curves;  // three specs with n = 1, N = 4
  Interval domain;

  void validate(int samples = 33) const;

  /// Basis of the plane gamma(t) (rows: the three curve points).
  ProjSubspace plane(double t) const;
};

/// Family file: header line (same as a spec header with n=1, N=4) followed by
/// three tuple lines.
PlaneFamily load_plane_family(const std::string& path);
PlaneFamily parse_plane_family_text(const std::string& text);
std::string print_plane_family(const PlaneFamily& fam);
void save_plane_family(const PlaneFamily& fam, const std::string& path);

/// Envelope point A(t) = gamma(t) ^ gamma(t+dt): the unique combination of
/// the spanning curves whose derivative stays in the plane.  Computed as the
/// one-dimensional null space of the 2x3 matrix of quotient-projected
/// derivatives; throws GeometryError when that null space is not a line.
HomPoint characteristic_point(const PlaneFamily& fam, double t);

/// Cone over the directrix with the given vertex subspace: the emitted spec
/// appends one parameter per vertex basis row.  Vertex rows are exact
/// rationals so the output is reproducible bit for bit.
VarietySpec build_cone(const std::vector<std::vector<Rational>>& vertex_rows,
                       const VarietySpec& directrix, Interval cone_range = {0.2, 1.2});
VarietySpec build_cone(const ProjSubspace& vertex, const VarietySpec& directrix,
                       Interval cone_range = {0.2, 1.2});

/// Twisted cone over a plane family: X(t, phi, s) =
/// (1-s) A(t) + s (cos phi Q1(t) + sin phi Q2(t)) with Q1, Q2 spanning
/// gamma(t) transversally to A(t).  Requires polynomial curve specs; the
/// envelope and the pencil basis are computed exactly.
VarietySpec build_twisted_cone(const PlaneFamily& fam);

struct PencilFoliationReport {
  double max_fiber_plane_angle = 0.0;  // tangent-plane variation across a fiber
  double max_center_distance = 0.0;    // fiber lines vs. the pencil center A(t)
  bool pass = false;
  std::string note;
};

/// Checks that every fiber (fixed first parameter) is a pencil of lines: the
/// tangent plane is constant across the fiber and all fiber lines pass
/// through the focus A(t).
PencilFoliationReport verify_pencil_foliation(const VarietySpec& X,
                                              std::span<const double> t_grid, double tol);

/// Osculating flag of a curve in P^4 at t: point, tangent line, osculating
/// plane, osculating hyperplane.
struct OsculatingFlag {
  HomPoint point;
  ProjSubspace tangent_line;
  ProjSubspace osculating_plane;
  ProjSubspace osculating_hyperplane;
};

OsculatingFlag osculating_flag(const VarietySpec& curve, double t);

/// Twisted cylinder: the twisted-cone construction applied to a family of
/// planes tangent to a curve G1 in the hyperplane x4 = 0 (the hyperplane at
/// infinity).  Preconditions are checked and named individually.
VarietySpec build_twisted_cylinder(const VarietySpec& curve_in_hyperplane,
                                   const PlaneFamily& fam);

/// True iff the osculating hyperplane of the focal curve of X is stationary
/// over the t-grid (condition for a twisted cone to be a twisted cylinder).
/// The hyperplane is realized discretely as the join of four nearby foci,
/// which is exact whenever the focal curve lies in a fixed hyperplane.
bool detect_cylinder(const VarietySpec& X, double tol);

}  // namespace gd
