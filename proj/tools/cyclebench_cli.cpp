#include <CLI11.hpp>
#include <cyclebench.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_partial = 2;

struct Failure {
  cb_status status;
  std::string message;
};

void check(cb_status status, const std::string& context) {
  if (status != CB_OK) throw Failure{status, context + ": " + cb_last_error()};
}

struct ConfigDeleter {
  void operator()(cb_config* c) const { cb_config_free(c); }
};
struct BundleDeleter {
  void operator()(cb_bundle* b) const { cb_bundle_free(b); }
};
struct ReportDeleter {
  void operator()(cb_report* r) const { cb_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { cb_string_free(s); }
};

using Config = std::unique_ptr<cb_config, ConfigDeleter>;
using Bundle = std::unique_ptr<cb_bundle, BundleDeleter>;
using Report = std::unique_ptr<cb_report, ReportDeleter>;
using String = std::unique_ptr<char, StringDeleter>;

String take(char* s) { return String(s); }

Config load_config(const std::string& path, const std::vector<std::uint64_t>& seeds) {
  cb_config* raw = nullptr;
  check(cb_config_load(path.c_str(), &raw), "config");
  Config config(raw);
  if (!seeds.empty()) check(cb_config_set_seeds(config.get(), seeds.data(), seeds.size()), "--seeds");
  return config;
}

Bundle load_bundle(const std::string& dir) {
  cb_bundle* raw = nullptr;
  check(cb_bundle_load(dir.c_str(), &raw), "bundle " + dir);
  return Bundle(raw);
}

void print_progress(const char* message, void*) { std::fprintf(stderr, "  %s\n", message); }

int run_mode(cb_mode mode, const std::string& config_path, const std::string& out_flag,
             const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  Config config = load_config(config_path, seeds);
  if (!cb_config_has_mode(config.get(), mode))
    throw Failure{CB_ERR_VALIDATION, std::string("config has no [") + (mode == CB_MODE_SWEEP ? "sweep" : "cyclic") +
                                         "] table"};
  std::string out = out_flag;
  if (out.empty()) {
    char* raw = nullptr;
    check(cb_config_output(config.get(), &raw), "config");
    out = take(raw).get();
  }

  cb_bundle* raw = nullptr;
  check(cb_run(config.get(), mode, jobs, print_progress, nullptr, &raw), "run");
  Bundle bundle(raw);

  if (std::filesystem::exists(std::filesystem::path(out) / "bundle.json")) {
    Bundle existing = load_bundle(out);
    check(cb_bundle_merge(existing.get(), bundle.get()), "merge into " + out);
    bundle = std::move(existing);
  }
  check(cb_bundle_write(bundle.get(), out.c_str()), "write");

  char* summary = nullptr;
  check(cb_bundle_summary(bundle.get(), &summary), "summary");
  std::printf("%s\n", take(summary).get());
  std::fprintf(stderr, "bundle written to %s\n", out.c_str());
  return cb_bundle_partial(bundle.get()) ? exit_partial : exit_ok;
}

cb_x_axis parse_axis(const std::string& x) { return x == "epochs" ? CB_X_EPOCHS : CB_X_WALL_CLOCK; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accuracy/time tradeoff curves from duration sweeps and cyclic learning-rate runs"};
  app.set_version_flag("--version", std::string(cb_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;
  std::string baseline;
  std::string x_axis = "wall_clock";
  std::vector<std::string> bundle_dirs;

  auto* validate = app.add_subcommand("validate", "check a config and echo it with every default filled in");
  validate->add_option("--config", config_path, "experiment config (TOML)")->required()->check(CLI::ExistingFile);
  validate->add_option("--seeds", seeds, "override the seed list")->delimiter(',');

  auto add_run = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config_path, "experiment config (TOML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "bundle directory (default: the config's output)");
    cmd->add_option("--seeds", seeds, "override the seed list")->delimiter(',');
    cmd->add_option("--jobs", jobs, "maximum concurrent runs")->check(CLI::PositiveNumber);
    return cmd;
  };
  auto* sweep = add_run("sweep", "train one cosine-decay run per (duration, seed)");
  auto* cyclic = add_run("cyclic", "train one cyclic-schedule run per seed");

  auto* compare = app.add_subcommand("compare", "relative improvement of method bundles over a baseline bundle");
  compare->add_option("bundles", bundle_dirs, "bundle directories")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--baseline", baseline, "label of the baseline bundle")->required();
  compare->add_option("--out", out, "directory for report.json and plots");
  compare->add_option("--x", x_axis, "x axis of the tradeoff plot")->check(CLI::IsMember({"wall_clock", "epochs"}));

  auto* plot = app.add_subcommand("plot", "render SVG plots of a bundle");
  plot->add_option("bundle", bundle_dirs, "bundle directory")->required()->expected(1)->check(CLI::ExistingDirectory);
  plot->add_option("--out", out, "plot directory (default: <bundle>/plots)");
  plot->add_option("--x", x_axis, "x axis of the tradeoff plot")->check(CLI::IsMember({"wall_clock", "epochs"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_error;
  }

  try {
    if (validate->parsed()) {
      Config config = load_config(config_path, seeds);
      char* toml = nullptr;
      char* fp = nullptr;
      check(cb_config_echo(config.get(), &toml), "config");
      check(cb_config_fingerprint(config.get(), &fp), "config");
      String toml_s = take(toml), fp_s = take(fp);
      std::printf("# fingerprint=%s\n%s", fp_s.get(), toml_s.get());
      return exit_ok;
    }
    if (sweep->parsed()) return run_mode(CB_MODE_SWEEP, config_path, out, seeds, jobs);
    if (cyclic->parsed()) return run_mode(CB_MODE_CYCLIC, config_path, out, seeds, jobs);
    if (compare->parsed()) {
      std::vector<Bundle> owned;
      std::vector<const cb_bundle*> handles;
      for (const auto& dir : bundle_dirs) {
        owned.push_back(load_bundle(dir));
        handles.push_back(owned.back().get());
      }
      cb_report* raw = nullptr;
      check(cb_compare(handles.data(), handles.size(), baseline.c_str(), &raw), "compare");
      Report report(raw);
      char* json = nullptr;
      check(cb_report_json(report.get(), &json), "report");
      String json_s = take(json);
      std::printf("%s\n", json_s.get());
      if (!out.empty()) {
        std::filesystem::create_directories(out);
        const auto path = std::filesystem::path(out) / "report.json";
        if (FILE* f = std::fopen(path.c_str(), "wb")) {
          std::fprintf(f, "%s\n", json_s.get());
          std::fclose(f);
        } else {
          throw Failure{CB_ERR_IO, "cannot write " + path.string()};
        }
        std::size_t written = 0;
        check(cb_plot_report(report.get(), handles.data(), handles.size(), out.c_str(), parse_axis(x_axis), &written),
              "plot");
        std::fprintf(stderr, "report and %zu plots written to %s\n", written, out.c_str());
      }
      return exit_ok;
    }
    if (plot->parsed()) {
      Bundle bundle = load_bundle(bundle_dirs.front());
      const std::string dir = out.empty() ? (std::filesystem::path(bundle_dirs.front()) / "plots").string() : out;
      std::size_t written = 0;
      check(cb_plot_bundle(bundle.get(), dir.c_str(), parse_axis(x_axis), &written), "plot");
      std::fprintf(stderr, "%zu plots written to %s\n", written, dir.c_str());
      return exit_ok;
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", cb_status_name(f.status), f.message.c_str());
    return exit_error;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_error;
  }
  return exit_error;
}
