#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cyclebench/compare.hpp"
#include "cyclebench/config.hpp"
#include "cyclebench/error.hpp"
#include "cyclebench/experiment.hpp"
#include "cyclebench/plot.hpp"

using namespace cyclebench;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& extra = "") {
  return parse_config_text(R"(
name = "small"
seeds = [0, 1]
)" + extra + R"(
[task]
kind = "gaussian_mixture"
classes = 4
dim = 8
samples = 200

[optimizer]
batch_size = 32

[sweep]
durations = [8, 16, 32]

[cyclic]
t0 = 4
growth = 2.0
cycles = 3
)");
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cyclebench_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json without_wall_clock(nlohmann::json curve) {
  for (auto& p : curve["points"]) p.erase("wall_clock_s");
  return curve;
}

ResultsBundle both_modes(const ExperimentConfig& c, const RunOptions& options = {}) {
  ResultsBundle b = run_experiment(c, Mode::sweep, options);
  merge_bundles(b, run_experiment(c, Mode::cyclic, options));
  return b;
}

TradeoffCurve hand_curve(CurveKind kind, const std::vector<std::pair<double, double>>& pts, const std::string& fp) {
  TradeoffCurve c;
  c.kind = kind;
  c.fingerprint = fp;
  for (auto [e, a] : pts) c.points.push_back({e, e / 10, a, 0.0, 1, false});
  return c;
}

ResultsBundle hand_bundle(const std::string& label, double offset) {
  ResultsBundle b;
  b.config = to_json(small_config());
  b.fingerprint = snapshot_fingerprint(b.config);
  b.label = label;
  b.method_set = label;
  b.standard = hand_curve(CurveKind::standard, {{8, 0.60 + offset}, {16, 0.70 + offset}}, b.fingerprint);
  b.cyclic = hand_curve(CurveKind::cyclic, {{8, 0.59 + offset}, {16, 0.71 + offset}}, b.fingerprint);
  return b;
}

}  // namespace

TEST_CASE("sweep trains every (duration, seed) pair") {
  const auto c = small_config();
  const auto b = run_experiment(c, Mode::sweep);
  CHECK(b.runs.size() == 6);
  REQUIRE(b.standard.has_value());
  CHECK(b.standard->points.size() == 3);
  CHECK(b.standard->points[0].n_seeds == 2);
  CHECK_FALSE(b.cyclic.has_value());
  CHECK_FALSE(b.partial);
  CHECK(b.standard->fingerprint == b.fingerprint);
  CHECK(b.standard->method_set == "baseline");
  double trained = 0;
  for (const auto& r : b.runs) trained += static_cast<double>(r.log.epochs.size());
  CHECK(trained == (8 + 16 + 32) * 2);
}

TEST_CASE("cyclic run samples the cumulative cycle ends") {
  auto c = parse_config_text(R"(
seeds = [0]
[task]
kind = "gaussian_mixture"
classes = 4
dim = 8
samples = 200
[optimizer]
batch_size = 32
[cyclic]
t0 = 4
growth = 2.0
cycles = 5
)");
  const auto b = run_experiment(c, Mode::cyclic);
  REQUIRE(b.cyclic.has_value());
  std::vector<double> epochs;
  for (const auto& p : b.cyclic->points) epochs.push_back(p.epochs);
  CHECK(epochs == std::vector<double>{8, 16, 32, 64, 128});
  const Step spe = experiment_steps_per_epoch(c);
  CHECK(static_cast<Step>(b.runs[0].log.lr.size()) == total_steps(run_schedule(c, Mode::cyclic, 0, spe)));
}

TEST_CASE("identical configs give identical curves apart from wall clock") {
  const auto c = small_config();
  const auto a = both_modes(c), b = both_modes(c);
  CHECK(without_wall_clock(curve_to_json(*a.standard, a.config)) == without_wall_clock(curve_to_json(*b.standard, b.config)));
  CHECK(without_wall_clock(curve_to_json(*a.cyclic, a.config)) == without_wall_clock(curve_to_json(*b.cyclic, b.config)));
  RunOptions parallel;
  parallel.jobs = 3;
  const auto p = both_modes(c, parallel);
  CHECK(without_wall_clock(curve_to_json(*p.standard, p.config)) == without_wall_clock(curve_to_json(*a.standard, a.config)));
}

TEST_CASE("wall-clock report predicts the speedup ratio") {
  const auto b = both_modes(small_config());
  REQUIRE(b.wall_clock.has_value());
  CHECK(b.wall_clock->predicted_ratio == speedup_ratio(2.0, 3));
  CHECK(b.wall_clock->sweep_epochs == 56);
  CHECK(b.wall_clock->cyclic_epochs == 32);
  CHECK(b.wall_clock->measured_ratio > 0.0);
}

TEST_CASE("failed runs mark the bundle partial and never stop siblings") {
  const auto c = small_config();
  RunOptions options;
  options.run = [](const RunConfig& rc, const Dataset& d) -> MetricsLog {
    if (rc.seed == 1 && rc.epochs == 16) throw RunFailure(ErrorKind::numeric, "synthetic blow-up", 3, 40);
    return train(rc, d);
  };
  options.jobs = 2;
  const auto b = run_experiment(c, Mode::sweep, options);
  CHECK(b.partial);
  int failed = 0;
  for (const auto& r : b.runs)
    if (!r.ok) {
      ++failed;
      CHECK(r.duration == 16);
      CHECK(r.seed == 1);
      CHECK(r.failed_epoch == 3);
      CHECK(r.failed_step == 40);
      CHECK(r.error_kind == "numeric");
    }
  CHECK(failed == 1);
  REQUIRE(b.standard.has_value());
  CHECK(b.standard->points[0].n_seeds == 2);
  CHECK(b.standard->points[1].n_seeds == 1);

  const fs::path dir = scratch("partial");
  write_bundle(b, dir);
  const auto loaded = load_bundle(dir);
  CHECK(loaded.partial);
  CHECK(loaded.runs.size() == 6);
  fs::remove_all(dir);
}

TEST_CASE("every run failing leaves a partial bundle without curves") {
  RunOptions options;
  options.run = [](const RunConfig&, const Dataset&) -> MetricsLog { throw std::runtime_error("boom"); };
  const auto b = run_experiment(small_config(), Mode::cyclic, options);
  CHECK(b.partial);
  CHECK_FALSE(b.cyclic.has_value());
  CHECK(b.runs[0].error_kind == "internal");
}

TEST_CASE("bundle round trip is bit exact") {
  const auto b = both_modes(small_config());
  const fs::path dir = scratch("roundtrip");
  write_bundle(b, dir);
  for (const char* f : {"bundle.json", "config.toml", "curve_standard.json", "curve_cyclic.json", "summary.json"})
    CHECK(fs::exists(dir / f));
  CHECK(std::distance(fs::directory_iterator(dir / "runs"), fs::directory_iterator()) == 8);

  const auto loaded = load_bundle(dir);
  CHECK(*loaded.standard == *b.standard);
  CHECK(*loaded.cyclic == *b.cyclic);
  CHECK(loaded.fingerprint == b.fingerprint);
  CHECK(loaded.config == b.config);
  REQUIRE(loaded.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    CHECK(same_except_wall_clock(loaded.runs[i].log, b.runs[i].log));
    CHECK(loaded.runs[i].log.epochs.back().wall_clock_s == b.runs[i].log.epochs.back().wall_clock_s);
  }

  // every emitted file names the fingerprint
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) CHECK(slurp(entry.path()).find(b.fingerprint) != std::string::npos);

  const auto csv = slurp(dir / "runs" / "sweep_d0008_s0.csv");
  CHECK(csv.find("\nepoch,step,lr,train_loss,train_acc,val_acc,wall_clock_s\n") != std::string::npos);

  auto again = load_bundle(dir);
  derive_curves(again);
  CHECK(*again.standard == *b.standard);
  fs::remove_all(dir);
}

TEST_CASE("tampered files are refused") {
  const auto b = both_modes(small_config());
  const fs::path dir = scratch("tamper");
  write_bundle(b, dir);
  auto doc = nlohmann::json::parse(slurp(dir / "curve_cyclic.json"));
  doc["meta"]["fingerprint"] = "0000000000000000";
  std::ofstream(dir / "curve_cyclic.json") << doc.dump();
  try {
    load_bundle(dir);
    FAIL("expected fingerprint mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::inconsistent);
  }
  fs::remove_all(dir);
}

TEST_CASE("merging needs matching fingerprints") {
  auto a = run_experiment(small_config(), Mode::sweep);
  const auto other = run_experiment(small_config("warmup_epochs = 2"), Mode::cyclic);
  CHECK_THROWS_AS(merge_bundles(a, other), Error);
}

TEST_CASE("metrics CSV round trip") {
  MetricsLog log;
  log.fingerprint = "abc";
  log.seed = 4;
  log.schedule = "warm_restarts";
  log.steps_per_epoch = 2;
  log.lr = {0.1, 0.2, 0.30000000000000004, 1e-300};
  log.epochs = {{1, 2, 2.5, 0.25, 0.5, 0.125}, {2, 4, 1.0 / 3.0, 0.75, 0.625, 0.25}};
  const auto back = log_from_csv(log_to_csv(log));
  CHECK(same_except_wall_clock(back, log));
  CHECK(back.epochs[1].wall_clock_s == 0.25);
  CHECK_THROWS_AS(log_from_csv("no header"), Error);
}

TEST_CASE("compare against itself is all zero") {
  const auto base = hand_bundle("baseline", 0.0);
  const std::vector<ResultsBundle> bundles{base, base};
  const auto report = compare(bundles, "baseline");
  REQUIRE(report.relative.size() == 2);
  for (const auto& rel : report.relative)
    for (const auto& p : rel.points) CHECK(p.delta == 0.0);
  REQUIRE(report.gaps.size() == 2);
  CHECK(*report.gaps[1].relative_gap == 0.0);
  CHECK(std::fabs(*report.gaps[0].gap) < 1e-15);
  for (const auto& s : report.signs) CHECK(s.agree);
}

TEST_CASE("compare reports a constant offset") {
  const std::vector<ResultsBundle> bundles{hand_bundle("baseline", 0.0), hand_bundle("LS", 0.02)};
  const auto report = compare(bundles, "baseline");
  for (const auto& rel : report.relative) {
    CHECK(rel.method_set == "LS");
    for (const auto& p : rel.points) CHECK(p.delta == doctest::Approx(0.02).epsilon(1e-12));
  }
  CHECK(report.signs.size() == 2);
  const auto json = to_json(report);
  CHECK(json["sign_agreement"]["agree"] == 2);
}

TEST_CASE("compare errors") {
  const auto base = hand_bundle("baseline", 0.0);
  CHECK_THROWS_AS(compare(std::vector<ResultsBundle>{base}, "baseline"), Error);
  CHECK_THROWS_AS(compare(std::vector<ResultsBundle>{base, base}, "missing"), Error);

  auto forged = hand_bundle("LS", 0.01);
  forged.standard->fingerprint = "ffffffffffffffff";
  CHECK_THROWS_AS(compare(std::vector<ResultsBundle>{base, forged}, "baseline"), Error);

  auto far = hand_bundle("far", 0.0);
  for (auto* c : {&*far.standard, &*far.cyclic})
    for (auto& p : c->points) p.epochs *= 100;
  try {
    compare(std::vector<ResultsBundle>{base, far}, "baseline");
    FAIL("expected no overlap");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_overlap);
  }

  auto half = hand_bundle("half", 0.01);
  half.cyclic.reset();
  const auto report = compare(std::vector<ResultsBundle>{base, half}, "baseline");
  CHECK(report.relative.size() == 1);
  CHECK_FALSE(report.warnings.empty());
}

TEST_CASE("plot axis padding") {
  std::vector<PlotSeries> s{{"a", hand_curve(CurveKind::standard, {{8, 0.60}, {16, 0.80}}, "f")}};
  const auto r = accuracy_range(s);
  CHECK(r.lo == doctest::Approx(0.58).epsilon(1e-12));
  CHECK(r.hi == doctest::Approx(0.82).epsilon(1e-12));
}

TEST_CASE("a six point curve is one polyline with six vertices") {
  std::vector<PlotSeries> s{
      {"a", hand_curve(CurveKind::cyclic, {{16, .6}, {32, .65}, {64, .7}, {128, .72}, {256, .74}, {512, .75}}, "f")}};
  const auto svg = tradeoff_svg(s, XAxis::epochs, "t", "f");
  std::size_t count = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++count;
    const auto start = svg.find("points=\"", pos) + 8;
    const auto end = svg.find('"', start);
    const auto pts = svg.substr(start, end - start);
    CHECK(std::count(pts.begin(), pts.end(), ',') == 6);
    CHECK(svg.find("stroke-dasharray", pos) < end);
    pos = end;
  }
  CHECK(count == 1);
  CHECK(svg.find("fingerprint=f") != std::string::npos);
  s[0].curve.points.clear();
  CHECK_THROWS_AS(tradeoff_svg(s, XAxis::epochs, "t", "f"), Error);
}

TEST_CASE("plots are byte identical across renders") {
  const auto b = both_modes(small_config());
  const fs::path one = scratch("plot1"), two = scratch("plot2");
  const auto files = plot_bundle(b, one);
  plot_bundle(b, two);
  CHECK(files.size() == 3);
  for (const auto& f : files) CHECK(slurp(f) == slurp(two / f.filename()));

  const std::vector<ResultsBundle> bundles{hand_bundle("baseline", 0.0), hand_bundle("LS", 0.02)};
  const auto report = compare(bundles, "baseline");
  const auto report_files = plot_report(report, bundles, one / "report");
  CHECK(report_files.size() == 2);
  fs::remove_all(one);
  fs::remove_all(two);
}
