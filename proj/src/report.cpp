#include "gd/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gd {

std::string input_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw EvalError("cannot write output file: " + path);
    out << content;
    if (!out.flush()) throw EvalError("write failed: " + path);
  }
  fs::rename(tmp, target);
}

namespace {

using nlohmann::json;

json verdict_json(const ClassificationVerdict& v) {
  json out;
  out["case"] = to_string(v.tag);
  out["focal_dim"] = v.focal_dim;
  out["evidence"] = v.evidence;
  json res;
  for (const auto& [k, val] : v.residuals) res[k] = val;
  out["residuals"] = res;
  return out;
}

}  // namespace

std::string analysis_report_json(const VarietySpec& spec, const ClassificationResult& result,
                                 const std::string& digest, double tol, int grid) {
  json out;
  out["schema"] = "gaussdegen/1";
  out["kind"] = "analysis_report";
  out["input_digest"] = digest;
  out["params"] = spec.n;
  out["ambient"] = spec.N;
  out["grid"] = grid;
  out["tolerances"] = {{"geom", tol}, {"rank_rel", kRankTol}};
  out["verdict"] = verdict_json(result.verdict);
  json samples = json::array();
  for (const auto& rec : result.samples) {
    json s;
    s["u"] = rec.u;
    s["rank"] = rec.rank;
    s["leaf_dim"] = rec.leaf_dim;
    s["r_fold"] = rec.r_fold;
    if (!rec.focal_coeffs.empty()) s["focal_coeffs"] = rec.focal_coeffs;
    s["residuals"] = {{"b_symmetry", rec.b_sym_residual},
                      {"bc_symmetry", rec.bc_sym_residual},
                      {"frame", rec.frame_residual}};
    if (!rec.focus.empty()) s["focus"] = rec.focus;
    if (rec.focus_rank >= 0) s["focus_rank"] = rec.focus_rank;
    if (!rec.note.empty()) s["note"] = rec.note;
    samples.push_back(s);
  }
  out["samples"] = samples;
  return out.dump(2) + "\n";
}

SampleCloud sample_cloud(const VarietySpec& spec, const SampleCloudOptions& opt, double tol) {
  if (opt.grid < 1) throw std::invalid_argument("invalid grid (must be >= 1)");
  if (opt.chart < 0 || opt.chart > spec.N)
    throw std::invalid_argument("chart index out of range");

  struct Row {
    std::vector<double> u;
    std::vector<double> x;  // chart-normalized, chart coordinate removed
    bool is_focus;
  };
  std::vector<Row> rows;
  int dropped = 0;

  std::vector<int> idx(spec.n, 0);
  for (;;) {
    std::vector<double> u(spec.n);
    for (int i = 0; i < spec.n; ++i) {
      const auto& iv = spec.domain[i];
      u[i] = opt.grid == 1 ? iv.mid()
                           : iv.lo + iv.width() * (0.02 + 0.96 * idx[i] / (opt.grid - 1));
    }
    JetVec j = eval_jet(spec, u, 0);
    Vec x(spec.N + 1);
    for (int k = 0; k <= spec.N; ++k) x(k) = j[k].value();
    double denom = x(opt.chart);
    if (std::abs(denom) < 1e-12 * x.cwiseAbs().maxCoeff()) {
      ++dropped;
    } else {
      Row row;
      row.u = u;
      for (int k = 0; k <= spec.N; ++k)
        if (k != opt.chart) row.x.push_back(x(k) / denom);
      row.is_focus = false;
      rows.push_back(std::move(row));
    }
    int k = 0;
    while (k < spec.n && ++idx[k] == opt.grid) idx[k++] = 0;
    if (k == spec.n) break;
  }

  // Focus points over the classification grid, when the focus map is defined.
  int focus_rows = 0;
  if (spec.N == spec.n + 1 && spec.n >= 2) {
    VarietyAnalyzer an(spec, tol);
    for (const auto& u : an.classification_grid(opt.grid)) {
      try {
        HomPoint f = an.focus_map(u);
        double denom = f.coords(opt.chart);
        if (std::abs(denom) < 1e-12 * f.coords.cwiseAbs().maxCoeff()) {
          ++dropped;
          continue;
        }
        Row row;
        row.u = u;
        for (int k = 0; k <= spec.N; ++k)
          if (k != opt.chart) row.x.push_back(f.coords(k) / denom);
        row.is_focus = true;
        rows.push_back(std::move(row));
        ++focus_rows;
      } catch (const std::exception&) {
        break;  // no focus structure; plain cloud only
      }
    }
  }

  std::ostringstream os;
  os.precision(17);
  if (!opt.ply) {
    for (int i = 0; i < spec.n; ++i) os << "t" << i + 1 << ",";
    for (int k = 0; k <= spec.N; ++k)
      if (k != opt.chart) os << "x" << k << ",";
    os << "is_focus\n";
    for (const auto& row : rows) {
      for (double v : row.u) os << v << ",";
      for (double v : row.x) os << v << ",";
      os << (row.is_focus ? 1 : 0) << "\n";
    }
  } else {
    os << "ply\nformat ascii 1.0\nelement vertex " << rows.size()
       << "\nproperty double x\nproperty double y\nproperty double z\n"
          "property uchar is_focus\nend_header\n";
    for (const auto& row : rows) {
      for (int k = 0; k < 3; ++k)
        os << (k < static_cast<int>(row.x.size()) ? row.x[k] : 0.0) << (k < 2 ? " " : " ");
      os << (row.is_focus ? 1 : 0) << "\n";
    }
  }
  SampleCloud out;
  out.body = os.str();
  out.dropped_rows = dropped;
  out.focus_rows = focus_rows;
  return out;
}

}  // namespace gd
