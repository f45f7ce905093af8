#pragma once

#include <cstdint>
#include <string>

#include "gd/variety.hpp"

namespace gd {

/// FNV-1a digest of the input bytes, as "fnv1a:<hex>".
std::string input_digest(const std::string& bytes);

/// Writes atomically: temp file in the same directory, then rename.
void atomic_write(const std::string& path, const std::string& content);

/// Deterministic analysis report (sorted keys, round-trip-exact floats).
std::string analysis_report_json(const VarietySpec& spec, const ClassificationResult& result,
                                 const std::string& digest, double tol, int grid);

struct SampleCloudOptions {
  int grid = 9;
  int chart = 0;
  bool ply = false;
};

struct SampleCloud {
  std::string body;       // csv or ply text
  int dropped_rows = 0;   // chart coordinate vanished
  int focus_rows = 0;
};

/// Affine-chart point cloud of the variety plus focus points flagged in the
/// is_focus column.
SampleCloud sample_cloud(const VarietySpec& spec, const SampleCloudOptions& opt, double tol);

}  // namespace gd
