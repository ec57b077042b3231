#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclebench/experiment.hpp"

namespace cyclebench {

/// Mean cyclic - standard accuracy of one bundle, and the same figure
/// relative to the baseline bundle.
struct GapRow {
  std::string label;
  std::optional<double> gap;
  std::size_t points = 0;
  std::optional<double> relative_gap;
};

/// Whether a method moves the standard and cyclic curves the same way at one
/// duration.
struct SignRow {
  std::string label;
  double epochs = 0.0;
  double delta_standard = 0.0;
  double delta_cyclic = 0.0;
  bool agree = false;
};

struct ComparisonReport {
  std::string baseline;
  std::vector<std::string> labels;  // every bundle, baseline first
  std::vector<std::string> fingerprints;
  std::vector<RelativeCurve> relative;
  std::vector<GapRow> gaps;
  std::vector<SignRow> signs;
  std::vector<std::string> warnings;
};

/// Bundle identifier used by compare: the experiment name.
const std::string& bundle_label(const ResultsBundle& bundle);

/// Relative curves of every bundle against the one labelled `baseline`
/// (experiment name or method-set label). Needs at least two bundles.
ComparisonReport compare(std::span<const ResultsBundle> bundles, const std::string& baseline);

nlohmann::json to_json(const ComparisonReport& report);

}  // namespace cyclebench
