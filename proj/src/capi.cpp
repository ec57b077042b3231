#include "cyclebench.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "cyclebench/compare.hpp"
#include "cyclebench/config.hpp"
#include "cyclebench/error.hpp"
#include "cyclebench/experiment.hpp"
#include "cyclebench/plot.hpp"
#include "cyclebench/tradeoff.hpp"

struct cb_config {
  cyclebench::ExperimentConfig value;
};

struct cb_bundle {
  cyclebench::ResultsBundle value;
};

struct cb_report {
  cyclebench::ComparisonReport value;
};

namespace {

using cyclebench::Error;
using cyclebench::ErrorKind;

thread_local std::string last_error;

cb_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::range:
    case ErrorKind::shape:
    case ErrorKind::unsupported:
    case ErrorKind::degenerate:
      return CB_ERR_VALIDATION;
    case ErrorKind::io: return CB_ERR_IO;
    case ErrorKind::format: return CB_ERR_FORMAT;
    case ErrorKind::inconsistent:
    case ErrorKind::duplicate:
    case ErrorKind::kind_mismatch:
      return CB_ERR_INCONSISTENT;
    case ErrorKind::domain: return CB_ERR_DOMAIN;
    case ErrorKind::no_overlap: return CB_ERR_NO_OVERLAP;
    case ErrorKind::empty_input: return CB_ERR_EMPTY;
    case ErrorKind::numeric: return CB_ERR_INTERNAL;
  }
  return CB_ERR_INTERNAL;
}

template <typename F>
cb_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return CB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CB_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return CB_ERR_INTERNAL;
  }
}

cb_status argument_error(const char* what) {
  last_error = what;
  return CB_ERR_ARGUMENT;
}

char* duplicate(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

cyclebench::Mode to_mode(cb_mode mode) {
  return mode == CB_MODE_CYCLIC ? cyclebench::Mode::cyclic : cyclebench::Mode::sweep;
}

cyclebench::XAxis to_axis(cb_x_axis x) {
  return x == CB_X_EPOCHS ? cyclebench::XAxis::epochs : cyclebench::XAxis::wall_clock;
}

std::vector<cyclebench::ResultsBundle> copy_bundles(const cb_bundle* const* bundles, size_t count) {
  std::vector<cyclebench::ResultsBundle> out;
  for (size_t i = 0; i < count; ++i) {
    if (!bundles[i]) throw Error(ErrorKind::validation, "null bundle handle");
    out.push_back(bundles[i]->value);
  }
  return out;
}

}  // namespace

extern "C" {

const char* cb_version(void) { return cyclebench::tool_version; }

const char* cb_last_error(void) { return last_error.c_str(); }

const char* cb_status_name(cb_status status) {
  switch (status) {
    case CB_OK: return "ok";
    case CB_ERR_VALIDATION: return "validation";
    case CB_ERR_IO: return "io";
    case CB_ERR_FORMAT: return "format";
    case CB_ERR_INCONSISTENT: return "inconsistent";
    case CB_ERR_DOMAIN: return "domain";
    case CB_ERR_NO_OVERLAP: return "no_overlap";
    case CB_ERR_EMPTY: return "empty";
    case CB_ERR_ARGUMENT: return "argument";
    case CB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void cb_string_free(char* text) { std::free(text); }

cb_status cb_config_load(const char* path, cb_config** out) {
  if (!path || !out) return argument_error("null argument");
  return guarded([&] { *out = new cb_config{cyclebench::parse_config(path)}; });
}

cb_status cb_config_parse(const char* text, cb_config** out) {
  if (!text || !out) return argument_error("null argument");
  return guarded([&] { *out = new cb_config{cyclebench::parse_config_text(text)}; });
}

cb_status cb_config_set_seeds(cb_config* config, const uint64_t* seeds, size_t count) {
  if (!config || (!seeds && count)) return argument_error("null argument");
  return guarded([&] {
    cyclebench::ExperimentConfig next = config->value;
    next.seeds.assign(seeds, seeds + count);
    if (auto issues = cyclebench::validate(next); !issues.empty()) throw cyclebench::ValidationError(issues);
    config->value = std::move(next);
  });
}

cb_status cb_config_set_output(cb_config* config, const char* dir) {
  if (!config || !dir) return argument_error("null argument");
  return guarded([&] { config->value.output_dir = dir; });
}

cb_status cb_config_output(const cb_config* config, char** out) {
  if (!config || !out) return argument_error("null argument");
  return guarded([&] { *out = duplicate(config->value.output_dir); });
}

cb_status cb_config_echo(const cb_config* config, char** toml) {
  if (!config || !toml) return argument_error("null argument");
  return guarded([&] { *toml = duplicate(cyclebench::to_toml(config->value)); });
}

cb_status cb_config_fingerprint(const cb_config* config, char** out) {
  if (!config || !out) return argument_error("null argument");
  return guarded([&] { *out = duplicate(cyclebench::fingerprint(config->value)); });
}

int cb_config_has_mode(const cb_config* config, cb_mode mode) {
  if (!config) return 0;
  return mode == CB_MODE_CYCLIC ? config->value.cyclic.has_value() : config->value.sweep.has_value();
}

void cb_config_free(cb_config* config) { delete config; }

cb_status cb_run(const cb_config* config, cb_mode mode, size_t jobs, cb_progress_fn progress, void* user,
                 cb_bundle** out) {
  if (!config || !out) return argument_error("null argument");
  return guarded([&] {
    cyclebench::RunOptions options;
    options.jobs = jobs;
    if (progress) options.progress = [progress, user](const std::string& message) { progress(message.c_str(), user); };
    *out = new cb_bundle{cyclebench::run_experiment(config->value, to_mode(mode), options)};
  });
}

int cb_bundle_partial(const cb_bundle* bundle) { return bundle && bundle->value.partial ? 1 : 0; }

cb_status cb_bundle_label(const cb_bundle* bundle, char** out) {
  if (!bundle || !out) return argument_error("null argument");
  return guarded([&] { *out = duplicate(bundle->value.label); });
}

cb_status cb_bundle_summary(const cb_bundle* bundle, char** json) {
  if (!bundle || !json) return argument_error("null argument");
  return guarded([&] { *json = duplicate(cyclebench::summary_json(bundle->value).dump(2)); });
}

cb_status cb_bundle_merge(cb_bundle* into, const cb_bundle* from) {
  if (!into || !from) return argument_error("null argument");
  return guarded([&] {
    cyclebench::ResultsBundle merged = into->value;
    cyclebench::merge_bundles(merged, from->value);
    into->value = std::move(merged);
  });
}

cb_status cb_bundle_write(const cb_bundle* bundle, const char* dir) {
  if (!bundle || !dir) return argument_error("null argument");
  return guarded([&] { cyclebench::write_bundle(bundle->value, dir); });
}

cb_status cb_bundle_load(const char* dir, cb_bundle** out) {
  if (!dir || !out) return argument_error("null argument");
  return guarded([&] { *out = new cb_bundle{cyclebench::load_bundle(dir)}; });
}

void cb_bundle_free(cb_bundle* bundle) { delete bundle; }

cb_status cb_compare(const cb_bundle* const* bundles, size_t count, const char* baseline, cb_report** out) {
  if ((!bundles && count) || !baseline || !out) return argument_error("null argument");
  return guarded([&] {
    const auto copies = copy_bundles(bundles, count);
    *out = new cb_report{cyclebench::compare(copies, baseline)};
  });
}

cb_status cb_report_json(const cb_report* report, char** json) {
  if (!report || !json) return argument_error("null argument");
  return guarded([&] { *json = duplicate(cyclebench::to_json(report->value).dump(2)); });
}

void cb_report_free(cb_report* report) { delete report; }

cb_status cb_plot_bundle(const cb_bundle* bundle, const char* dir, cb_x_axis x, size_t* written) {
  if (!bundle || !dir) return argument_error("null argument");
  return guarded([&] {
    const auto files = cyclebench::plot_bundle(bundle->value, dir, to_axis(x));
    if (written) *written = files.size();
  });
}

cb_status cb_plot_report(const cb_report* report, const cb_bundle* const* bundles, size_t count, const char* dir,
                         cb_x_axis x, size_t* written) {
  if (!report || (!bundles && count) || !dir) return argument_error("null argument");
  return guarded([&] {
    const auto copies = copy_bundles(bundles, count);
    const auto files = cyclebench::plot_report(report->value, copies, dir, to_axis(x));
    if (written) *written = files.size();
  });
}

cb_status cb_speedup_ratio(double growth_factor, int64_t cycles, double* out) {
  if (!out) return argument_error("null argument");
  return guarded([&] { *out = cyclebench::speedup_ratio(growth_factor, cycles); });
}

}  // extern "C"
