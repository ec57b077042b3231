#include "cyclebench/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cyclebench/error.hpp"
#include "cyclebench/rng.hpp"
#include "cyclebench/toml_json.hpp"

namespace cyclebench {

using nlohmann::json;

namespace {

// Typed access to one table; remembers which keys were read so leftovers can
// be reported as unknown.
class Table {
 public:
  Table(const json* obj, std::string prefix, std::vector<std::string>& issues)
      : obj_(obj), prefix_(std::move(prefix)), issues_(issues) {
    if (obj_ && !obj_->is_object()) {
      issues_.push_back("'" + prefix_ + "' must be a table");
      obj_ = nullptr;
    }
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  const json* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &obj_->at(key);
  }

  void get(const std::string& key, std::string& out) {
    if (const json* v = raw(key)) {
      if (v->is_string())
        out = v->get<std::string>();
      else
        type_error(key, "a string");
    }
  }

  void get(const std::string& key, bool& out) {
    if (const json* v = raw(key)) {
      if (v->is_boolean())
        out = v->get<bool>();
      else
        type_error(key, "a boolean");
    }
  }

  void get(const std::string& key, double& out) {
    if (const json* v = raw(key)) {
      if (v->is_number())
        out = v->get<double>();
      else
        type_error(key, "a number");
    }
  }

  void get(const std::string& key, std::int64_t& out) {
    if (const json* v = raw(key)) {
      if (v->is_number_integer())
        out = v->get<std::int64_t>();
      else
        type_error(key, "an integer");
    }
  }

  void get(const std::string& key, std::size_t& out) {
    std::int64_t v = static_cast<std::int64_t>(out);
    const bool present = has(key);
    get(key, v);
    if (!present) return;
    if (v < 0)
      issues_.push_back("key '" + path(key) + "' must be non-negative");
    else
      out = static_cast<std::size_t>(v);
  }

  template <typename T>
  void get_list(const std::string& key, std::vector<T>& out) {
    const json* v = raw(key);
    if (!v) return;
    if (!v->is_array()) {
      type_error(key, "an array of integers");
      return;
    }
    std::vector<T> values;
    for (const auto& item : *v) {
      if (!item.is_number_integer() || (std::is_unsigned_v<T> && item.get<std::int64_t>() < 0)) {
        type_error(key, std::is_unsigned_v<T> ? "an array of non-negative integers" : "an array of integers");
        return;
      }
      values.push_back(static_cast<T>(item.get<std::int64_t>()));
    }
    out = std::move(values);
  }

  void finish() {
    if (!obj_) return;
    for (const auto& [key, _] : obj_->items())
      if (!used_.count(key)) issues_.push_back("unknown key '" + path(key) + "'");
  }

 private:
  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  void type_error(const std::string& key, const char* expected) {
    issues_.push_back("key '" + path(key) + "' expects " + expected);
  }

  const json* obj_;
  std::string prefix_;
  std::vector<std::string>& issues_;
  std::set<std::string> used_;
};

const json* child(const json& doc, const char* key) { return doc.contains(key) ? &doc.at(key) : nullptr; }

TaskSpec read_task(const json* node, std::uint64_t& data_seed, std::vector<std::string>& issues) {
  if (!node) {
    issues.emplace_back("missing required table 'task'");
    return GaussianMixtureTask{};
  }
  Table t(node, "task", issues);
  std::string kind;
  if (!t.has("kind")) issues.emplace_back("missing required key 'task.kind'");
  t.get("kind", kind);
  t.get("seed", data_seed);
  TaskSpec task = GaussianMixtureTask{};
  if (kind == "gaussian_mixture" || kind.empty()) {
    GaussianMixtureTask g;
    t.get("classes", g.classes);
    t.get("dim", g.dim);
    t.get("separation", g.separation);
    t.get("label_noise", g.label_noise);
    t.get("samples", g.samples);
    task = g;
  } else if (kind == "spirals") {
    SpiralsTask s;
    t.get("classes", s.classes);
    t.get("noise", s.noise);
    t.get("samples", s.samples);
    task = s;
  } else if (kind == "synthetic_images") {
    SyntheticImagesTask s;
    t.get("classes", s.classes);
    t.get("side", s.side);
    t.get("texture_scale", s.texture_scale);
    t.get("noise", s.noise);
    t.get("samples", s.samples);
    task = s;
  } else if (kind == "idx") {
    IdxTask s;
    if (!t.has("images")) issues.emplace_back("missing required key 'task.images'");
    if (!t.has("labels")) issues.emplace_back("missing required key 'task.labels'");
    t.get("images", s.images);
    t.get("labels", s.labels);
    t.get("classes", s.classes);
    task = s;
  } else {
    issues.push_back("unknown task kind '" + kind + "'");
  }
  t.finish();
  return task;
}

json task_to_json(const TaskSpec& task, std::uint64_t data_seed) {
  json j;
  j["kind"] = task_kind(task);
  j["seed"] = data_seed;
  if (const auto* g = std::get_if<GaussianMixtureTask>(&task)) {
    j["classes"] = g->classes;
    j["dim"] = g->dim;
    j["separation"] = g->separation;
    j["label_noise"] = g->label_noise;
    j["samples"] = g->samples;
  } else if (const auto* s = std::get_if<SpiralsTask>(&task)) {
    j["classes"] = s->classes;
    j["noise"] = s->noise;
    j["samples"] = s->samples;
  } else if (const auto* im = std::get_if<SyntheticImagesTask>(&task)) {
    j["classes"] = im->classes;
    j["side"] = im->side;
    j["texture_scale"] = im->texture_scale;
    j["noise"] = im->noise;
    j["samples"] = im->samples;
  } else {
    const auto& idx = std::get<IdxTask>(task);
    j["images"] = idx.images;
    j["labels"] = idx.labels;
    j["classes"] = idx.classes;
  }
  return j;
}

std::string toml_scalar(const json& v) {
  if (v.is_number_float()) {
    std::string s = v.dump();
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + toml_scalar(v[i]);
    return s + "]";
  }
  return v.dump();
}

}  // namespace

const char* to_string(Mode mode) noexcept { return mode == Mode::sweep ? "sweep" : "cyclic"; }

ExperimentConfig config_from_json(const json& doc) {
  std::vector<std::string> issues;
  ExperimentConfig c;
  if (!doc.is_object()) throw ValidationError({"config document must be a table"});
  Table top(&doc, "", issues);
  top.get("name", c.name);
  top.get_list("seeds", c.seeds);
  top.get("warmup_epochs", c.warmup_epochs);
  top.get("output", c.output_dir);
  top.raw("task");
  top.raw("model");
  top.raw("optimizer");
  top.raw("methods");
  top.raw("sweep");
  top.raw("cyclic");
  top.finish();

  c.task = read_task(child(doc, "task"), c.data_seed, issues);

  {
    Table t(child(doc, "optimizer"), "optimizer", issues);
    t.get("eta_max", c.optimizer.eta_max);
    t.get("eta_min", c.eta_min);
    t.get("momentum", c.optimizer.momentum);
    t.get("weight_decay", c.optimizer.weight_decay);
    t.get("batch_size", c.batch_size);
    t.get("grad_accum", c.grad_accum);
    t.finish();
  }
  {
    Table t(child(doc, "methods"), "methods", issues);
    t.get("blurpool", c.methods.blurpool);
    t.get("channels_last", c.methods.channels_last);
    t.get("label_smoothing", c.methods.label_smoothing);
    t.get("mixup", c.methods.mixup);
    t.get("alpha_ls", c.methods.alpha_ls);
    t.get("alpha_mx", c.methods.alpha_mx);
    t.finish();
  }

  bool widths_given = false;
  {
    const json* node = child(doc, "model");
    Table t(node, "model", issues);
    std::string kind = "mlp";
    t.get("kind", kind);
    if (kind == "mlp") {
      MlpConfig mlp;
      widths_given = t.has("widths");
      t.get_list("widths", mlp.widths);
      c.model = mlp;
    } else if (kind == "tiny_cnn") {
      TinyCnnConfig cnn;
      t.get_list("channels", cnn.channels);
      std::string down = "stride";
      t.get("downsample", down);
      if (down == "blurpool")
        cnn.downsample = Downsample::blurpool;
      else if (down != "stride")
        issues.push_back("model.downsample must be 'stride' or 'blurpool', got '" + down + "'");
      c.model = cnn;
    } else {
      issues.push_back("unknown model kind '" + kind + "'");
    }
    t.finish();
  }

  if (const json* node = child(doc, "sweep")) {
    SweepPlan plan;
    Table t(node, "sweep", issues);
    t.get_list("durations", plan.durations);
    t.finish();
    c.sweep = plan;
  }
  if (const json* node = child(doc, "cyclic")) {
    CyclicPlan plan;
    Table t(node, "cyclic", issues);
    std::string shape = "cosine";
    t.get("shape", shape);
    if (shape == "sawtooth") {
      plan.shape = CyclicShape::sawtooth;
      plan.growth = 1.0;
    } else if (shape != "cosine") {
      issues.push_back("cyclic.shape must be 'cosine' or 'sawtooth', got '" + shape + "'");
    }
    t.get("t0", plan.t0);
    t.get("growth", plan.growth);
    t.get("cycles", plan.cycles);
    t.finish();
    c.cyclic = plan;
  }

  if (c.name.empty()) c.name = method_set_label(c.methods);
  if (c.output_dir.empty()) c.output_dir = "results/" + c.name;

  if (!widths_given && std::holds_alternative<MlpConfig>(c.model) && validate(c.task).empty()) {
    try {
      const TaskShape shape = task_shape(c.task);
      c.model = MlpConfig{{shape.sample.c * shape.sample.h * shape.sample.w, 64, shape.classes}};
    } catch (const Error& e) {
      issues.emplace_back(e.what());
    }
  }
  for (auto& issue : validate(c))
    if (std::find(issues.begin(), issues.end(), issue) == issues.end()) issues.push_back(std::move(issue));
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view origin) {
  return config_from_json(parse_toml(text, origin));
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

Step experiment_steps_per_epoch(const ExperimentConfig& config) {
  const TaskShape shape = task_shape(config.task);
  return steps_per_epoch(shape.train_samples, config.batch_size, config.grad_accum);
}

ScheduleSpec run_schedule(const ExperimentConfig& c, Mode mode, std::int64_t duration, Step spe) {
  const double eta_max = c.optimizer.eta_max;
  if (mode == Mode::sweep) return make_cosine_decay(eta_max, c.eta_min, c.warmup_epochs, duration, spe);
  if (!c.cyclic) throw Error(ErrorKind::validation, "config has no [cyclic] table");
  const CyclicPlan& p = *c.cyclic;
  if (p.shape == CyclicShape::sawtooth) return make_sawtooth(eta_max, c.eta_min, c.warmup_epochs, p.t0, p.cycles, spe);
  return make_warm_restarts(eta_max, c.eta_min, c.warmup_epochs, p.t0, p.growth, p.cycles, spe);
}

std::int64_t cyclic_total_epochs(const ExperimentConfig& config, Step spe) {
  const Step total = total_steps(run_schedule(config, Mode::cyclic, 0, spe));
  if (total % spe != 0)
    throw Error(ErrorKind::validation, "cyclic schedule of " + std::to_string(total) +
                                           " steps does not end on an epoch boundary");
  return total / spe;
}

RunConfig make_run_config(const ExperimentConfig& c, Mode mode, std::int64_t duration, std::uint64_t seed, Step spe) {
  RunConfig run;
  run.task = c.task;
  run.data_seed = c.data_seed;
  run.model = c.model;
  run.optimizer = c.optimizer;
  run.methods = c.methods;
  run.batch_size = c.batch_size;
  run.grad_accum = c.grad_accum;
  run.seed = seed;
  run.schedule = run_schedule(c, mode, duration, spe);
  run.epochs = mode == Mode::sweep ? duration : cyclic_total_epochs(c, spe);
  return run;
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> issues = validate(c.task);
  if (c.seeds.empty()) issues.emplace_back("seeds list is empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    issues.emplace_back("seeds not distinct");
  if (c.warmup_epochs < 0) issues.emplace_back("warmup_epochs negative");
  for (auto& issue : validate(c.optimizer)) issues.push_back(std::move(issue));
  if (!std::isfinite(c.eta_min) || c.eta_min < 0.0) issues.emplace_back("eta_min must be finite and non-negative");
  if (c.eta_min > c.optimizer.eta_max) issues.emplace_back("eta_min exceeds eta_max");
  if (c.batch_size < 1) issues.emplace_back("batch_size below 1");
  if (c.grad_accum < 1) issues.emplace_back("grad_accum below 1");
  if (!(c.methods.alpha_ls >= 0.0 && c.methods.alpha_ls <= 1.0)) issues.emplace_back("alpha_ls outside [0, 1]");
  if (!(c.methods.alpha_mx > 0.0) || !std::isfinite(c.methods.alpha_mx)) issues.emplace_back("alpha_mx must be positive");
  if (c.methods.mixup && c.batch_size < 2) issues.emplace_back("mixup needs batch_size of at least 2");
  if (!c.sweep && !c.cyclic) issues.emplace_back("config defines neither [sweep] nor [cyclic]");
  if (c.sweep) {
    const auto& d = c.sweep->durations;
    if (d.empty()) issues.emplace_back("durations list is empty");
    for (std::size_t i = 1; i < d.size(); ++i)
      if (d[i] <= d[i - 1]) {
        issues.emplace_back("durations not increasing");
        break;
      }
    for (auto v : d)
      if (v <= c.warmup_epochs) {
        issues.push_back("duration " + std::to_string(v) + " does not exceed warmup_epochs");
        break;
      }
  }
  if (c.cyclic) {
    const auto& p = *c.cyclic;
    if (p.t0 < 1) issues.emplace_back("cyclic.t0 below 1");
    if (!std::isfinite(p.growth) || p.growth < 1.0) issues.emplace_back("growth factor below 1");
    if (p.cycles < 1) issues.emplace_back("cyclic.cycles below 1");
    if (p.shape == CyclicShape::sawtooth && p.growth != 1.0) issues.emplace_back("sawtooth cycles need growth = 1");
  }
  if (!issues.empty()) return issues;

  try {
    const TaskShape shape = task_shape(c.task);
    RunConfig probe;
    probe.model = c.model;
    probe.methods = c.methods;
    for (auto& issue : validate(effective_model(probe), shape.sample, shape.classes)) issues.push_back(std::move(issue));
    const Step spe = steps_per_epoch(shape.train_samples, c.batch_size, c.grad_accum);
    if (spe < 1) {
      issues.push_back("batch_size x grad_accum exceeds the " + std::to_string(shape.train_samples) +
                       " training samples");
      return issues;
    }
    if (c.sweep)
      for (auto d : c.sweep->durations)
        for (auto& issue : validate(run_schedule(c, Mode::sweep, d, spe))) issues.push_back(std::move(issue));
    if (c.cyclic) {
      const ScheduleSpec s = run_schedule(c, Mode::cyclic, 0, spe);
      auto schedule_issues = validate(s);
      if (schedule_issues.empty()) cyclic_total_epochs(c, spe);
      for (auto& issue : schedule_issues) issues.push_back(std::move(issue));
    }
  } catch (const ValidationError& e) {
    for (const auto& issue : e.issues()) issues.push_back(issue);
  } catch (const Error& e) {
    issues.emplace_back(e.what());
  }
  return issues;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seeds"] = c.seeds;
  j["warmup_epochs"] = c.warmup_epochs;
  j["output"] = c.output_dir;
  j["task"] = task_to_json(c.task, c.data_seed);
  if (const auto* mlp = std::get_if<MlpConfig>(&c.model)) {
    j["model"] = {{"kind", "mlp"}, {"widths", mlp->widths}};
  } else {
    const auto& cnn = std::get<TinyCnnConfig>(c.model);
    j["model"] = {{"kind", "tiny_cnn"},
                  {"channels", cnn.channels},
                  {"downsample", cnn.downsample == Downsample::stride ? "stride" : "blurpool"}};
  }
  j["optimizer"] = {{"eta_max", c.optimizer.eta_max},         {"eta_min", c.eta_min},
                    {"momentum", c.optimizer.momentum},       {"weight_decay", c.optimizer.weight_decay},
                    {"batch_size", c.batch_size},             {"grad_accum", c.grad_accum}};
  j["methods"] = {{"blurpool", c.methods.blurpool},   {"channels_last", c.methods.channels_last},
                  {"label_smoothing", c.methods.label_smoothing}, {"mixup", c.methods.mixup},
                  {"alpha_ls", c.methods.alpha_ls},   {"alpha_mx", c.methods.alpha_mx}};
  if (c.sweep) j["sweep"] = {{"durations", c.sweep->durations}};
  if (c.cyclic)
    j["cyclic"] = {{"shape", c.cyclic->shape == CyclicShape::cosine ? "cosine" : "sawtooth"},
                   {"t0", c.cyclic->t0},
                   {"growth", c.cyclic->growth},
                   {"cycles", c.cyclic->cycles}};
  return j;
}

std::string to_toml(const ExperimentConfig& c) { return snapshot_to_toml(to_json(c)); }

std::string snapshot_to_toml(const json& j) {
  std::ostringstream out;
  for (const auto& [key, value] : j.items())
    if (!value.is_object()) out << key << " = " << toml_scalar(value) << "\n";
  for (const char* table : {"task", "model", "optimizer", "methods", "sweep", "cyclic"}) {
    if (!j.contains(table)) continue;
    out << "\n[" << table << "]\n";
    for (const auto& [key, value] : j.at(table).items()) out << key << " = " << toml_scalar(value) << "\n";
  }
  return out.str();
}

std::string fingerprint(const ExperimentConfig& config) { return snapshot_fingerprint(to_json(config)); }

std::string snapshot_fingerprint(const json& snapshot) {
  json j = snapshot;
  j.erase("output");
  j.erase("seeds");
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return hex;
}

}  // namespace cyclebench
