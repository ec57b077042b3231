#include "cyclebench/compare.hpp"

#include <cmath>

#include "cyclebench/error.hpp"

namespace cyclebench {

using nlohmann::json;

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

void check_fingerprints(const ResultsBundle& b) {
  for (const auto* curve : {b.standard ? &*b.standard : nullptr, b.cyclic ? &*b.cyclic : nullptr})
    if (curve && curve->fingerprint != b.fingerprint)
      throw Error(ErrorKind::inconsistent, "bundle '" + b.label + "' holds a " + to_string(curve->kind) +
                                               " curve with fingerprint " + curve->fingerprint + ", expected " +
                                               b.fingerprint);
}

const TradeoffCurve* curve_of(const ResultsBundle& b, CurveKind kind) {
  const auto& c = kind == CurveKind::standard ? b.standard : b.cyclic;
  return c ? &*c : nullptr;
}

}  // namespace

const std::string& bundle_label(const ResultsBundle& bundle) { return bundle.label; }

ComparisonReport compare(std::span<const ResultsBundle> bundles, const std::string& baseline) {
  if (bundles.size() < 2) throw Error(ErrorKind::validation, "compare needs at least two bundles");
  for (const auto& b : bundles) check_fingerprints(b);

  std::size_t base = bundles.size();
  for (std::size_t i = 0; i < bundles.size() && base == bundles.size(); ++i)
    if (bundles[i].label == baseline) base = i;
  for (std::size_t i = 0; i < bundles.size() && base == bundles.size(); ++i)
    if (bundles[i].method_set == baseline) base = i;
  if (base == bundles.size()) throw Error(ErrorKind::validation, "baseline '" + baseline + "' not among the bundles");

  ComparisonReport report;
  const ResultsBundle& ref = bundles[base];
  report.baseline = ref.label;
  report.labels.push_back(ref.label);
  report.fingerprints.push_back(ref.fingerprint);
  for (std::size_t i = 0; i < bundles.size(); ++i)
    if (i != base) {
      report.labels.push_back(bundles[i].label);
      report.fingerprints.push_back(bundles[i].fingerprint);
    }

  auto gap_of = [](const ResultsBundle& b, std::size_t* count) -> std::optional<double> {
    if (!b.standard || !b.cyclic) return std::nullopt;
    return mean_gap(*b.cyclic, *b.standard, count);
  };
  std::size_t base_count = 0;
  const auto base_gap = gap_of(ref, &base_count);
  report.gaps.push_back({ref.label, base_gap, base_count, base_gap ? std::optional<double>(0.0) : std::nullopt});

  std::size_t usable = 0;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    if (i == base) continue;
    const ResultsBundle& b = bundles[i];
    std::size_t count = 0;
    const auto gap = gap_of(b, &count);
    GapRow row{b.label, gap, count, std::nullopt};
    if (gap && base_gap) row.relative_gap = *gap - *base_gap;
    if (!gap) report.warnings.push_back("bundle '" + b.label + "' lacks a standard or cyclic curve; no gap");
    report.gaps.push_back(row);

    const RelativeCurve* per_kind[2] = {nullptr, nullptr};
    for (CurveKind kind : {CurveKind::standard, CurveKind::cyclic}) {
      const TradeoffCurve* mine = curve_of(b, kind);
      const TradeoffCurve* theirs = curve_of(ref, kind);
      if (!mine || !theirs) {
        report.warnings.push_back(std::string(to_string(kind)) + " curve missing for '" +
                                  (mine ? ref.label : b.label) + "'; skipped");
        continue;
      }
      RelativeCurve rel = relative_improvement(*mine, *theirs);
      rel.method_set = b.label;
      rel.baseline = ref.label;
      report.relative.push_back(std::move(rel));
      per_kind[kind == CurveKind::standard ? 0 : 1] = &report.relative.back();
      ++usable;
    }
    if (per_kind[0] && per_kind[1]) {
      for (const auto& ps : per_kind[0]->points)
        for (const auto& pc : per_kind[1]->points)
          if (ps.epochs == pc.epochs)
            report.signs.push_back({b.label, ps.epochs, ps.delta, pc.delta, sign(ps.delta) == sign(pc.delta)});
    }
  }
  if (usable == 0) throw Error(ErrorKind::no_overlap, "no curve kind is shared between the baseline and any method");
  return report;
}

json to_json(const ComparisonReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json relative = json::array();
  for (const auto& c : r.relative) {
    json points = json::array();
    for (const auto& p : c.points)
      points.push_back({{"epochs", p.epochs}, {"delta", p.delta}, {"interpolated", p.interpolated}});
    relative.push_back({{"kind", to_string(c.kind)},
                        {"method_set", c.method_set},
                        {"baseline", c.baseline},
                        {"points", points}});
  }
  json gaps = json::array();
  for (const auto& g : r.gaps)
    gaps.push_back({{"label", g.label}, {"gap", opt(g.gap)}, {"points", g.points}, {"relative_gap", opt(g.relative_gap)}});
  json signs = json::array();
  std::size_t agree = 0;
  for (const auto& s : r.signs) {
    signs.push_back({{"label", s.label},
                     {"epochs", s.epochs},
                     {"delta_standard", s.delta_standard},
                     {"delta_cyclic", s.delta_cyclic},
                     {"agree", s.agree}});
    agree += s.agree ? 1 : 0;
  }
  return {{"baseline", r.baseline},
          {"bundles", r.labels},
          {"fingerprints", r.fingerprints},
          {"relative", relative},
          {"gaps", gaps},
          {"sign_agreement", {{"rows", signs}, {"agree", agree}, {"total", r.signs.size()}}},
          {"warnings", r.warnings}};
}

}  // namespace cyclebench
