#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gd/cartan.hpp"
#include "gd/constructors.hpp"
#include "gd/report.hpp"
#include "gd/variety.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gd::EvalError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    gd::atomic_write(out_path, content);
}

int run_analyze(const std::string& spec_file, int grid, double tol, const std::string& out) {
  std::string bytes = slurp(spec_file);
  gd::VarietySpec spec = gd::parse_spec_text(bytes);
  gd::VarietyAnalyzer an(spec, tol);
  gd::ClassificationResult result = an.classify(grid);
  emit(out, gd::analysis_report_json(spec, result, gd::input_digest(bytes), tol, grid));
  using gd::CaseTag;
  bool degenerate = result.verdict.tag == CaseTag::NON_DEGENERATE ||
                    result.verdict.tag == CaseTag::UNDETERMINED;
  return degenerate ? 2 : 0;
}

int run_construct(const std::string& kind, const std::vector<std::string>& vertex_tuples,
                  const std::string& directrix_file, const std::string& family_file,
                  const std::string& curve_file, const std::string& out) {
  gd::VarietySpec built;
  if (kind == "cone") {
    if (vertex_tuples.empty() || directrix_file.empty())
      throw gd::EvalError("construct cone needs --vertex and --directrix");
    gd::VarietySpec directrix = gd::load_spec_file(directrix_file);
    std::vector<std::vector<gd::Rational>> rows;
    for (const auto& text : vertex_tuples) {
      std::vector<gd::Rational> row;
      for (const auto& e : gd::parse_tuple(text, 0)) {
        if (e->kind != gd::Expr::Kind::Number)
          throw gd::EvalError("--vertex entries must be rational constants");
        row.push_back(e->number);
      }
      rows.push_back(std::move(row));
    }
    built = gd::build_cone(rows, directrix);
  } else if (kind == "twisted-cone") {
    if (family_file.empty()) throw gd::EvalError("construct twisted-cone needs --family");
    built = gd::build_twisted_cone(gd::load_plane_family(family_file));
  } else if (kind == "twisted-cylinder") {
    if (family_file.empty() || curve_file.empty())
      throw gd::EvalError("construct twisted-cylinder needs --curve and --family");
    built = gd::build_twisted_cylinder(gd::load_spec_file(curve_file),
                                       gd::load_plane_family(family_file));
  } else {
    throw gd::EvalError("unknown construct kind '" + kind +
                        "' (expected cone, twisted-cone, twisted-cylinder)");
  }
  emit(out, gd::print_spec(built));
  return 0;
}

int run_cartan(const std::string& tableau_file, const std::string& fixture,
               const std::vector<std::string>& sets, const std::string& emit_tableau,
               const std::string& out) {
  gd::PfaffianTableau t;
  if (!fixture.empty()) {
    std::map<std::string, gd::Rational> overrides;
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw gd::EvalError("--set expects name=value");
      overrides[kv.substr(0, eq)] = gd::parse_rational(kv.substr(eq + 1));
    }
    t = gd::fixture_tableau(fixture, overrides);
  } else if (!tableau_file.empty()) {
    t = gd::load_tableau_file(tableau_file);
  } else {
    throw gd::EvalError("cartan needs a tableau file or --fixture");
  }
  if (!emit_tableau.empty()) gd::atomic_write(emit_tableau, gd::tableau_to_json_text(t));
  gd::CartanReport report = gd::cartan_test(t);
  emit(out, gd::report_to_json_text(report));
  return 0;
}

int run_sample(const std::string& spec_file, int grid, int chart, const std::string& format,
               double tol, const std::string& out) {
  gd::VarietySpec spec = gd::parse_spec_text(slurp(spec_file));
  gd::SampleCloudOptions opt;
  opt.grid = grid;
  opt.chart = chart;
  opt.ply = format == "ply";
  gd::SampleCloud cloud = gd::sample_cloud(spec, opt, tol);
  emit(out, cloud.body);
  if (cloud.dropped_rows > 0)
    std::cerr << "dropped " << cloud.dropped_rows << " rows with vanishing chart coordinate\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis of varieties with degenerate Gauss maps, twisted cones and "
               "cylinders, and Cartan involutivity tests"};
  app.require_subcommand(1);

  std::string spec_file, out_file, format = "csv";
  int grid = 9, chart = 0;
  double tol = gd::kGeomTol;

  auto* analyze = app.add_subcommand("analyze", "classify a parametrized variety");
  analyze->add_option("spec", spec_file, "variety spec file")->required();
  analyze->add_option("--grid", grid, "grid points per axis (default 9)");
  analyze->add_option("--tol", tol, "geometric tolerance (default 1e-8)");
  analyze->add_option("--out", out_file, "write report JSON here (default stdout)");

  std::string kind, directrix_file, family_file, curve_file;
  std::vector<std::string> vertex_tuples;
  auto* construct = app.add_subcommand("construct", "build cones, twisted cones, cylinders");
  construct->add_option("kind", kind, "cone | twisted-cone | twisted-cylinder")->required();
  construct->add_option("--vertex", vertex_tuples, "vertex basis tuple (repeatable)");
  construct->add_option("--directrix", directrix_file, "directrix spec file");
  construct->add_option("--family", family_file, "plane-family file");
  construct->add_option("--curve", curve_file, "curve G1 spec file");
  construct->add_option("--out", out_file, "write the constructed spec here");

  std::string tableau_file, fixture, emit_tableau;
  std::vector<std::string> sets;
  auto* cartan = app.add_subcommand("cartan", "Cartan involutivity test for a Pfaffian tableau");
  cartan->add_option("tableau", tableau_file, "tableau JSON file");
  cartan->add_option("--fixture", fixture, "built-in tableau T1..T4");
  cartan->add_option("--set", sets, "override a fixture constant, name=value (repeatable)");
  cartan->add_option("--emit-tableau", emit_tableau, "write the tableau JSON here");
  cartan->add_option("--out", out_file, "write report JSON here (default stdout)");

  auto* sample = app.add_subcommand("sample", "emit an affine-chart point cloud");
  sample->add_option("spec", spec_file, "variety spec file")->required();
  sample->add_option("--grid", grid, "grid points per axis (default 9)");
  sample->add_option("--chart", chart, "coordinate normalized to 1 (default 0)");
  sample->add_option("--format", format, "csv | ply");
  sample->add_option("--tol", tol, "geometric tolerance");
  sample->add_option("--out", out_file, "write the cloud here (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return run_analyze(spec_file, grid, tol, out_file);
    if (app.got_subcommand(construct))
      return run_construct(kind, vertex_tuples, directrix_file, family_file, curve_file,
                           out_file);
    if (app.got_subcommand(cartan))
      return run_cartan(tableau_file, fixture, sets, emit_tableau, out_file);
    if (app.got_subcommand(sample))
      return run_sample(spec_file, grid, chart, format, tol, out_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
