#include "cyclebench/experiment.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cyclebench/error.hpp"

#ifndef CYCLEBENCH_VERSION
#define CYCLEBENCH_VERSION "0.0.0"
#endif

namespace cyclebench {

const char* const tool_version = CYCLEBENCH_VERSION;

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const csv_header = "epoch,step,lr,train_loss,train_acc,val_acc,wall_clock_s";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string host_name() {
  char buf[256] = {};
  if (gethostname(buf, sizeof(buf) - 1) != 0) return "unknown";
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& origin, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorKind::format, origin + ":" + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  return v;
}

std::int64_t parse_int(std::string_view text, const std::string& origin, std::size_t line) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorKind::format, origin + ":" + std::to_string(line) + ": bad integer '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::format, path.string() + ": " + e.what());
  }
}

std::string run_file_name(const RunRecord& run) {
  char buf[64];
  if (run.mode == Mode::sweep)
    std::snprintf(buf, sizeof(buf), "sweep_d%04lld_s%llu.csv", static_cast<long long>(run.duration),
                  static_cast<unsigned long long>(run.seed));
  else
    std::snprintf(buf, sizeof(buf), "cyclic_s%llu.csv", static_cast<unsigned long long>(run.seed));
  return buf;
}

const char* to_string(PeakRule rule) { return rule == PeakRule::window_max ? "window_max" : "cycle_end"; }

PeakRule peak_rule_from_string(const std::string& text) {
  if (text == "window_max") return PeakRule::window_max;
  if (text == "cycle_end") return PeakRule::cycle_end;
  throw Error(ErrorKind::format, "unknown peak rule '" + text + "'");
}

Mode mode_from_string(const std::string& text) {
  if (text == "sweep") return Mode::sweep;
  if (text == "cyclic") return Mode::cyclic;
  throw Error(ErrorKind::format, "unknown run mode '" + text + "'");
}

json wall_clock_json(const WallClockReport& w) {
  return {{"sweep_total_s", w.sweep_total_s},   {"cyclic_total_s", w.cyclic_total_s},
          {"measured_ratio", w.measured_ratio}, {"predicted_ratio", w.predicted_ratio},
          {"sweep_epochs", w.sweep_epochs},     {"cyclic_epochs", w.cyclic_epochs},
          {"epoch_ratio", w.epoch_ratio}};
}

WallClockReport wall_clock_from_json(const json& j) {
  WallClockReport w;
  w.sweep_total_s = j.at("sweep_total_s").get<double>();
  w.cyclic_total_s = j.at("cyclic_total_s").get<double>();
  w.measured_ratio = j.at("measured_ratio").get<double>();
  w.predicted_ratio = j.at("predicted_ratio").get<double>();
  w.sweep_epochs = j.at("sweep_epochs").get<double>();
  w.cyclic_epochs = j.at("cyclic_epochs").get<double>();
  w.epoch_ratio = j.at("epoch_ratio").get<double>();
  return w;
}

RunRecord failed_record(RunRecord r, const std::string& kind, const std::string& message) {
  r.ok = false;
  r.error_kind = kind;
  r.error = message;
  return r;
}

}  // namespace

ResultsBundle run_experiment(const ExperimentConfig& config, Mode mode, const RunOptions& options) {
  if (auto issues = validate(config); !issues.empty()) throw ValidationError(std::move(issues));
  if (mode == Mode::sweep && !config.sweep) throw Error(ErrorKind::validation, "config has no [sweep] table");
  if (mode == Mode::cyclic && !config.cyclic) throw Error(ErrorKind::validation, "config has no [cyclic] table");

  ResultsBundle bundle;
  bundle.config = to_json(config);
  bundle.fingerprint = fingerprint(config);
  bundle.label = config.name;
  bundle.method_set = method_set_label(config.methods);
  bundle.tool_version = tool_version;
  bundle.hostname = host_name();
  bundle.started_at = utc_now();
  bundle.peak_rule = options.peak_rule;

  const Dataset data = gen_dataset(config.task, config.data_seed);
  const Step spe = steps_per_epoch(data.train.size(), config.batch_size, config.grad_accum);

  std::vector<RunRecord> runs;
  auto add = [&](std::int64_t duration, std::uint64_t seed) {
    RunRecord r;
    r.mode = mode;
    r.duration = duration;
    r.seed = seed;
    runs.push_back(std::move(r));
  };
  if (mode == Mode::sweep) {
    for (auto d : config.sweep->durations)
      for (auto seed : config.seeds) add(d, seed);
  } else {
    const auto total = cyclic_total_epochs(config, spe);
    for (auto seed : config.seeds) add(total, seed);
    bundle.plan = cycle_end_steps(run_schedule(config, Mode::cyclic, 0, spe));
  }

  const RunFunction run_fn =
      options.run ? options.run : RunFunction([](const RunConfig& rc, const Dataset& d) { return train(rc, d); });
  std::mutex progress_mutex;
  auto report = [&](const std::string& message) {
    if (!options.progress) return;
    std::lock_guard lock(progress_mutex);
    options.progress(message);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      RunRecord& r = runs[i];
      const std::string what = std::string(to_string(r.mode)) + " duration=" + std::to_string(r.duration) +
                               " seed=" + std::to_string(r.seed);
      try {
        const RunConfig rc = make_run_config(config, mode, r.duration, r.seed, spe);
        r.log = run_fn(rc, data);
        r.log.fingerprint = bundle.fingerprint;
        r.log.seed = r.seed;
        r.ok = true;
        const auto& last = r.log.epochs.empty() ? EpochRecord{} : r.log.epochs.back();
        char buf[96];
        std::snprintf(buf, sizeof(buf), " val_acc=%.4f time=%.2fs", last.val_acc, last.wall_clock_s);
        report(what + buf);
      } catch (const RunFailure& e) {
        r = failed_record(std::move(r), to_string(e.kind()), e.what());
        r.failed_epoch = e.epoch();
        r.failed_step = e.step();
        report(what + " failed: " + e.what());
      } catch (const Error& e) {
        r = failed_record(std::move(r), to_string(e.kind()), e.what());
        report(what + " failed: " + e.what());
      } catch (const std::exception& e) {
        r = failed_record(std::move(r), "internal", e.what());
        report(what + " failed: " + e.what());
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(runs.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  bundle.runs = std::move(runs);
  bundle.finished_at = utc_now();
  derive_curves(bundle);
  return bundle;
}

void derive_curves(ResultsBundle& b) {
  b.standard.reset();
  b.cyclic.reset();
  b.wall_clock.reset();
  b.warnings.clear();
  b.partial = false;

  std::vector<StandardRun> standard_runs;
  std::vector<MetricsLog> cyclic_logs;
  for (const auto& r : b.runs) {
    if (!r.ok) {
      b.partial = true;
      continue;
    }
    if (r.mode == Mode::sweep)
      standard_runs.push_back({static_cast<double>(r.duration), r.seed, r.log});
    else
      cyclic_logs.push_back(r.log);
  }

  auto finish = [&](TradeoffCurve curve) {
    curve.method_set = b.method_set;
    curve.fingerprint = b.fingerprint;
    return curve;
  };
  if (!standard_runs.empty()) {
    try {
      b.standard = finish(standard_curve(standard_runs));
    } catch (const Error& e) {
      b.partial = true;
      b.warnings.push_back(std::string("standard curve not built: ") + e.what());
    }
  }
  if (!cyclic_logs.empty() && b.plan) {
    try {
      b.cyclic = finish(cyclic_curve(cyclic_logs, *b.plan, b.peak_rule));
    } catch (const Error& e) {
      b.partial = true;
      b.warnings.push_back(std::string("cyclic curve not built: ") + e.what());
    }
  }
  if (b.standard && b.cyclic && b.config.contains("cyclic")) {
    try {
      const auto& c = b.config.at("cyclic");
      b.wall_clock = wall_clock_totals(standard_runs, cyclic_logs, *b.plan, c.at("growth").get<double>(),
                                       c.at("cycles").get<std::int64_t>());
    } catch (const Error& e) {
      b.warnings.push_back(std::string("wall-clock comparison skipped: ") + e.what());
    }
  }
}

void merge_bundles(ResultsBundle& into, const ResultsBundle& fresh) {
  if (into.fingerprint != fresh.fingerprint)
    throw Error(ErrorKind::inconsistent, "cannot merge bundles with different fingerprints (" + into.fingerprint +
                                             " vs " + fresh.fingerprint + ")");
  std::set<Mode> modes;
  for (const auto& r : fresh.runs) modes.insert(r.mode);
  std::erase_if(into.runs, [&](const RunRecord& r) { return modes.count(r.mode) > 0; });
  into.runs.insert(into.runs.end(), fresh.runs.begin(), fresh.runs.end());
  std::stable_sort(into.runs.begin(), into.runs.end(),
                   [](const RunRecord& a, const RunRecord& b) { return a.mode < b.mode; });

  std::vector<std::uint64_t> seeds;
  for (const auto& r : into.runs)
    if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);
  json config = fresh.config;
  config["seeds"] = seeds;
  into.config = std::move(config);
  if (fresh.plan) into.plan = fresh.plan;
  into.label = fresh.label;
  into.tool_version = fresh.tool_version;
  into.hostname = fresh.hostname;
  into.started_at = std::min(into.started_at, fresh.started_at);
  into.finished_at = std::max(into.finished_at, fresh.finished_at);
  into.peak_rule = fresh.peak_rule;
  derive_curves(into);
}

json curve_to_json(const TradeoffCurve& curve, const json& config) {
  json points = json::array();
  for (const auto& p : curve.points)
    points.push_back({{"epochs", p.epochs},     {"wall_clock_s", p.wall_clock_s}, {"acc_mean", p.acc_mean},
                      {"acc_std", p.acc_std},   {"n_seeds", p.n_seeds},           {"interpolated", p.interpolated}});
  const json& methods = config.at("methods");
  return {{"kind", to_string(curve.kind)},
          {"method_set", curve.method_set},
          {"points", points},
          {"meta",
           {{"fingerprint", curve.fingerprint},
            {"d_decisions",
             {{"alpha_ls", methods.at("alpha_ls")},
              {"alpha_mx", methods.at("alpha_mx")},
              {"eta_min", config.at("optimizer").at("eta_min")},
              {"std_convention", "population"}}}}}};
}

TradeoffCurve curve_from_json(const json& doc) {
  try {
    TradeoffCurve curve;
    curve.kind = curve_kind_from_string(doc.at("kind").get<std::string>());
    curve.method_set = doc.at("method_set").get<std::string>();
    curve.fingerprint = doc.at("meta").at("fingerprint").get<std::string>();
    for (const auto& p : doc.at("points"))
      curve.points.push_back({p.at("epochs").get<double>(), p.at("wall_clock_s").get<double>(),
                              p.at("acc_mean").get<double>(), p.at("acc_std").get<double>(),
                              p.at("n_seeds").get<std::int64_t>(), p.at("interpolated").get<bool>()});
    if (auto issues = validate(curve); !issues.empty()) throw ValidationError(std::move(issues));
    return curve;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed curve document: ") + e.what());
  }
}

std::string log_to_csv(const MetricsLog& log, const std::string& extra_meta) {
  std::string out = "# fingerprint=" + log.fingerprint + " seed=" + std::to_string(log.seed) +
                    " schedule=" + log.schedule + " steps_per_epoch=" + std::to_string(log.steps_per_epoch) +
                    " conv_seconds=" + fmt(log.conv_seconds) + " conv_calls=" + std::to_string(log.conv_calls);
  if (!extra_meta.empty()) out += " " + extra_meta;
  out += "\n";
  out += csv_header;
  out += "\n";
  Step steps = static_cast<Step>(log.lr.size());
  if (!log.epochs.empty()) steps = std::max(steps, log.epochs.back().step);
  std::size_t e = 0;
  for (Step s = 1; s <= steps; ++s) {
    std::string row;
    const bool closes = e < log.epochs.size() && log.epochs[e].step == s;
    if (closes) row += std::to_string(log.epochs[e].epoch);
    row += "," + std::to_string(s) + ",";
    if (static_cast<std::size_t>(s) <= log.lr.size()) row += fmt(log.lr[static_cast<std::size_t>(s - 1)]);
    if (closes) {
      const auto& r = log.epochs[e];
      row += "," + fmt(r.train_loss) + "," + fmt(r.train_acc) + "," + fmt(r.val_acc) + "," + fmt(r.wall_clock_s);
      ++e;
    } else {
      row += ",,,,";
    }
    out += row + "\n";
  }
  return out;
}

MetricsLog log_from_csv(const std::string& text, const std::string& origin) {
  MetricsLog log;
  const auto lines = split(text, '\n');
  if (lines.size() < 2 || !lines[0].starts_with("# "))
    throw Error(ErrorKind::format, origin + ":1: missing metadata line");
  for (auto token : split(lines[0].substr(2), ' ')) {
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "fingerprint")
      log.fingerprint = std::string(value);
    else if (key == "seed")
      log.seed = static_cast<std::uint64_t>(parse_int(value, origin, 1));
    else if (key == "schedule")
      log.schedule = std::string(value);
    else if (key == "steps_per_epoch")
      log.steps_per_epoch = parse_int(value, origin, 1);
    else if (key == "conv_seconds")
      log.conv_seconds = parse_double(value, origin, 1);
    else if (key == "conv_calls")
      log.conv_calls = parse_int(value, origin, 1);
  }
  if (lines[1] != csv_header) throw Error(ErrorKind::format, origin + ":2: unexpected header");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split(lines[i], ',');
    if (cells.size() != 7)
      throw Error(ErrorKind::format, origin + ":" + std::to_string(i + 1) + ": expected 7 fields");
    const Step step = parse_int(cells[1], origin, i + 1);
    if (!cells[2].empty()) log.lr.push_back(parse_double(cells[2], origin, i + 1));
    if (!cells[0].empty()) {
      EpochRecord r;
      r.epoch = parse_int(cells[0], origin, i + 1);
      r.step = step;
      r.train_loss = parse_double(cells[3], origin, i + 1);
      r.train_acc = parse_double(cells[4], origin, i + 1);
      r.val_acc = parse_double(cells[5], origin, i + 1);
      r.wall_clock_s = parse_double(cells[6], origin, i + 1);
      log.epochs.push_back(r);
    }
  }
  return log;
}

json summary_json(const ResultsBundle& b) {
  json j;
  j["fingerprint"] = b.fingerprint;
  j["label"] = b.label;
  j["method_set"] = b.method_set;
  j["partial"] = b.partial;
  std::int64_t failed = 0;
  double sweep_epochs = 0.0, cyclic_epochs = 0.0;
  for (const auto& r : b.runs) {
    if (!r.ok) {
      ++failed;
      continue;
    }
    (r.mode == Mode::sweep ? sweep_epochs : cyclic_epochs) += static_cast<double>(r.duration);
  }
  j["runs"] = {{"total", b.runs.size()}, {"failed", failed}};
  j["trained_epochs"] = {{"sweep", sweep_epochs}, {"cyclic", cyclic_epochs}};
  auto table = [](const TradeoffCurve& c) {
    json rows = json::array();
    for (const auto& p : c.points)
      rows.push_back({{"epochs", p.epochs}, {"acc_mean", p.acc_mean}, {"acc_std", p.acc_std}, {"n_seeds", p.n_seeds}});
    return rows;
  };
  if (b.standard) j["standard"] = table(*b.standard);
  if (b.cyclic) j["cyclic"] = table(*b.cyclic);
  if (b.standard && b.cyclic) {
    std::size_t count = 0;
    const auto gap = mean_gap(*b.cyclic, *b.standard, &count);
    j["mean_gap"] = gap ? json(*gap) : json(nullptr);
    j["mean_gap_points"] = count;
  }
  j["wall_clock"] = b.wall_clock ? wall_clock_json(*b.wall_clock) : json(nullptr);
  j["warnings"] = b.warnings;
  return j;
}

void write_bundle(const ResultsBundle& b, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "runs", ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + (dir / "runs").string() + "': " + ec.message());

  json runs = json::array();
  for (const auto& r : b.runs) {
    json entry = {{"mode", to_string(r.mode)}, {"duration", r.duration}, {"seed", r.seed},
                  {"status", r.ok ? "ok" : "failed"}};
    if (r.ok) {
      const std::string name = run_file_name(r);
      entry["file"] = "runs/" + name;
      entry["conv_seconds"] = r.log.conv_seconds;
      entry["conv_calls"] = r.log.conv_calls;
      write_file(dir / "runs" / name,
                 log_to_csv(r.log, std::string("mode=") + to_string(r.mode) + " duration=" + std::to_string(r.duration)));
    } else {
      entry["error"] = r.error;
      entry["error_kind"] = r.error_kind;
      entry["failed_epoch"] = r.failed_epoch;
      entry["failed_step"] = r.failed_step;
    }
    runs.push_back(std::move(entry));
  }

  json curves = json::object();
  if (b.standard) {
    write_file(dir / "curve_standard.json", curve_to_json(*b.standard, b.config).dump(2) + "\n");
    curves["standard"] = "curve_standard.json";
  } else {
    fs::remove(dir / "curve_standard.json", ec);
  }
  if (b.cyclic) {
    write_file(dir / "curve_cyclic.json", curve_to_json(*b.cyclic, b.config).dump(2) + "\n");
    curves["cyclic"] = "curve_cyclic.json";
  } else {
    fs::remove(dir / "curve_cyclic.json", ec);
  }

  json doc = {{"format", "cyclebench-bundle/1"},
              {"fingerprint", b.fingerprint},
              {"label", b.label},
              {"method_set", b.method_set},
              {"tool_version", b.tool_version},
              {"hostname", b.hostname},
              {"started_at", b.started_at},
              {"finished_at", b.finished_at},
              {"partial", b.partial},
              {"peak_rule", to_string(b.peak_rule)},
              {"config", b.config},
              {"runs", runs},
              {"curves", curves},
              {"warnings", b.warnings}};
  doc["plan"] = b.plan ? json{{"first_cycle_start", b.plan->first_cycle_start},
                              {"cycle_end_steps", b.plan->cycle_end_steps},
                              {"cycle_end_epochs", b.plan->cycle_end_epochs}}
                       : json(nullptr);
  doc["wall_clock"] = b.wall_clock ? wall_clock_json(*b.wall_clock) : json(nullptr);

  write_file(dir / "config.toml", "# fingerprint=" + b.fingerprint + "\n" + snapshot_to_toml(b.config));
  json summary = summary_json(b);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_file(dir / "bundle.json", doc.dump(2) + "\n");
}

ResultsBundle load_bundle(const fs::path& dir) {
  const json doc = read_json(dir / "bundle.json");
  ResultsBundle b;
  try {
    b.config = doc.at("config");
    b.fingerprint = doc.at("fingerprint").get<std::string>();
    b.label = doc.at("label").get<std::string>();
    b.method_set = doc.at("method_set").get<std::string>();
    b.tool_version = doc.at("tool_version").get<std::string>();
    b.hostname = doc.at("hostname").get<std::string>();
    b.started_at = doc.at("started_at").get<std::string>();
    b.finished_at = doc.at("finished_at").get<std::string>();
    b.partial = doc.at("partial").get<bool>();
    b.peak_rule = peak_rule_from_string(doc.at("peak_rule").get<std::string>());
    b.warnings = doc.at("warnings").get<std::vector<std::string>>();
    if (!doc.at("plan").is_null()) {
      CyclePlan plan;
      plan.first_cycle_start = doc.at("plan").at("first_cycle_start").get<Step>();
      plan.cycle_end_steps = doc.at("plan").at("cycle_end_steps").get<std::vector<Step>>();
      plan.cycle_end_epochs = doc.at("plan").at("cycle_end_epochs").get<std::vector<double>>();
      b.plan = plan;
    }
    if (!doc.at("wall_clock").is_null()) b.wall_clock = wall_clock_from_json(doc.at("wall_clock"));

    if (snapshot_fingerprint(b.config) != b.fingerprint)
      throw Error(ErrorKind::inconsistent, dir.string() + ": fingerprint does not match the stored config");

    for (const auto& entry : doc.at("runs")) {
      RunRecord r;
      r.mode = mode_from_string(entry.at("mode").get<std::string>());
      r.duration = entry.at("duration").get<std::int64_t>();
      r.seed = entry.at("seed").get<std::uint64_t>();
      r.ok = entry.at("status").get<std::string>() == "ok";
      if (r.ok) {
        const auto file = entry.at("file").get<std::string>();
        r.log = log_from_csv(read_file(dir / file), (dir / file).string());
        if (r.log.fingerprint != b.fingerprint)
          throw Error(ErrorKind::inconsistent, (dir / file).string() + ": fingerprint does not match the bundle");
      } else {
        r.error = entry.at("error").get<std::string>();
        r.error_kind = entry.at("error_kind").get<std::string>();
        r.failed_epoch = entry.at("failed_epoch").get<std::int64_t>();
        r.failed_step = entry.at("failed_step").get<Step>();
      }
      b.runs.push_back(std::move(r));
    }

    for (const auto& [kind, file] : doc.at("curves").items()) {
      TradeoffCurve curve = curve_from_json(read_json(dir / file.get<std::string>()));
      if (curve.fingerprint != b.fingerprint)
        throw Error(ErrorKind::inconsistent, (dir / file.get<std::string>()).string() +
                                                 ": curve fingerprint does not match the bundle");
      if (to_string(curve.kind) != kind)
        throw Error(ErrorKind::inconsistent, (dir / file.get<std::string>()).string() + ": curve kind mismatch");
      (curve.kind == CurveKind::standard ? b.standard : b.cyclic) = std::move(curve);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, (dir / "bundle.json").string() + ": " + e.what());
  }
  return b;
}

}  // namespace cyclebench
