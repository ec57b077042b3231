#include <doctest.h>

#include "cyclebench/config.hpp"
#include "cyclebench/error.hpp"
#include "cyclebench/toml_json.hpp"

using namespace cyclebench;

namespace {

const char* const minimal = R"(
[task]
kind = "gaussian_mixture"

[cyclic]
)";

std::string error_text(const std::string& toml) {
  try {
    parse_config_text(toml);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("toml converts to json with integer and float kinds") {
  const auto doc = parse_toml(R"(
# comment
title = "x # not a comment"
count = 1_000
ratio = -2.5e-1
flag = true
list = [1, 2,
        3]  # trailing
"quoted key" = 'literal\n'

[a.b]
deep = 4
)");
  CHECK(doc["title"] == "x # not a comment");
  CHECK(doc["count"] == 1000);
  CHECK(doc["ratio"].get<double>() == -0.25);
  CHECK(doc["flag"] == true);
  CHECK(doc["list"].size() == 3);
  CHECK(doc["quoted key"] == "literal\\n");
  CHECK(doc["a"]["b"]["deep"] == 4);
  CHECK(doc["count"].is_number_integer());
  CHECK(doc["ratio"].is_number_float());
}

TEST_CASE("toml errors carry the line") {
  try {
    parse_toml("a = 1\na = 2\n", "f.toml");
    FAIL("expected duplicate key error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
    CHECK(std::string(e.what()).find("f.toml:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_toml("a = \n"), Error);
  CHECK_THROWS_AS(parse_toml("[t\n"), Error);
  CHECK_THROWS_AS(parse_toml("s = \"open\n"), Error);
  CHECK_THROWS_AS(parse_toml("when = 2024-01-01\n"), Error);
}

TEST_CASE("minimal config materializes every default") {
  const auto c = parse_config_text(minimal);
  CHECK(c.name == "baseline");
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(c.warmup_epochs == 4);
  CHECK(c.optimizer.eta_max == 0.128);
  CHECK(c.optimizer.momentum == 0.875);
  CHECK(c.optimizer.weight_decay == 5e-4);
  CHECK(c.methods.alpha_ls == 0.1);
  CHECK(c.methods.alpha_mx == 0.2);
  CHECK(c.eta_min == 0.0);
  CHECK(std::get<MlpConfig>(c.model).widths == std::vector<std::size_t>{32, 64, 10});
  REQUIRE(c.cyclic.has_value());
  CHECK(c.cyclic->t0 == 4);
  CHECK(c.cyclic->growth == 2.0);
  CHECK(c.cyclic->cycles == 5);
  CHECK_FALSE(c.sweep.has_value());
  CHECK(c.output_dir == "results/baseline");

  const std::string echo = to_toml(c);
  CHECK(echo.find("momentum = 0.875") != std::string::npos);
  CHECK(echo.find("alpha_ls = 0.1") != std::string::npos);
  CHECK(echo.find("widths = [32, 64, 10]") != std::string::npos);
}

TEST_CASE("echo parses back to the same config") {
  const auto c = parse_config_text(minimal);
  const auto again = parse_config_text(to_toml(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(fingerprint(again) == fingerprint(c));
  CHECK(fingerprint(c).size() == 16);
  CHECK(snapshot_fingerprint(to_json(c)) == fingerprint(c));
}

TEST_CASE("fingerprint ignores output and seeds but nothing else") {
  auto c = parse_config_text(minimal);
  const auto base = fingerprint(c);
  c.output_dir = "elsewhere";
  c.seeds = {7};
  CHECK(fingerprint(c) == base);
  c.methods.mixup = true;
  CHECK(fingerprint(c) != base);
}

TEST_CASE("config errors") {
  CHECK(error_text("[task]\nkind = \"spirals\"\n[sweep]\ndurations = [32, 16]\n").find("durations not increasing") !=
        std::string::npos);
  CHECK(error_text("[task]\nkind = \"spirals\"\nbogus = 1\n[cyclic]\n").find("unknown key 'task.bogus'") !=
        std::string::npos);
  CHECK(error_text("colour = 1\n[task]\nkind = \"spirals\"\n[cyclic]\n").find("unknown key 'colour'") !=
        std::string::npos);
  CHECK(error_text("[cyclic]\n").find("missing required table 'task'") != std::string::npos);
  CHECK(error_text("[task]\n[cyclic]\n").find("missing required key 'task.kind'") != std::string::npos);
  CHECK(error_text("[task]\nkind = \"spirals\"\n").find("neither [sweep] nor [cyclic]") != std::string::npos);
  CHECK(error_text("seeds = [1, 1]\n[task]\nkind = \"spirals\"\n[cyclic]\n").find("seeds not distinct") !=
        std::string::npos);
  CHECK(error_text("[task]\nkind = \"spirals\"\n[cyclic]\ngrowth = 0.5\n").find("growth factor below 1") !=
        std::string::npos);
  CHECK(error_text("[task]\nkind = \"spirals\"\n[optimizer]\neta_max = \"fast\"\n[cyclic]\n").find("expects a number") !=
        std::string::npos);
  CHECK(error_text("[task]\nkind = \"spirals\"\n[sweep]\ndurations = [2, 8]\n").find("does not exceed warmup") !=
        std::string::npos);
}

TEST_CASE("violations are reported together") {
  try {
    parse_config_text("seeds = [1, 1]\n[task]\nkind = \"spirals\"\nbogus = 2\n[sweep]\ndurations = [32, 16]\n");
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(e.issues().size() >= 3);
  }
}

TEST_CASE("mlp widths follow the task") {
  const auto c = parse_config_text("[task]\nkind = \"spirals\"\nclasses = 4\n[cyclic]\n");
  CHECK(std::get<MlpConfig>(c.model).widths == std::vector<std::size_t>{2, 64, 4});
}

TEST_CASE("shipped large-scale shape config") {
  const auto c = parse_config(std::string(CYCLEBENCH_SOURCE_DIR) + "/configs/imagenet-shape.toml");
  REQUIRE(c.cyclic.has_value());
  CHECK(c.cyclic->t0 == 8);
  CHECK(c.cyclic->growth == 2.0);
  CHECK(c.cyclic->cycles == 6);
  CHECK(c.warmup_epochs == 8);
  CHECK(c.optimizer.eta_max == 2.048);
  CHECK(c.optimizer.momentum == 0.875);
  CHECK(c.optimizer.weight_decay == 5e-4);
  CHECK(c.grad_accum == 4);
  const Step spe = experiment_steps_per_epoch(c);
  CHECK(cyclic_total_epochs(c, spe) == 512);
  CHECK(cycle_end_steps(run_schedule(c, Mode::cyclic, 0, spe)).cycle_end_epochs ==
        std::vector<double>{16, 32, 64, 128, 256, 512});
}

TEST_CASE("every shipped config validates") {
  for (const char* name : {"desk-reference", "imagenet-shape", "noisy-baseline", "noisy-ls-mx", "budget150-multiplicative",
                           "budget150-period-5", "budget150-period-10", "budget150-period-25"}) {
    INFO(name);
    CHECK_NOTHROW(parse_config(std::string(CYCLEBENCH_SOURCE_DIR) + "/configs/" + name + ".toml"));
  }
}

TEST_CASE("run configs") {
  const auto c = parse_config_text(
      "warmup_epochs = 2\n[task]\nkind = \"spirals\"\n[sweep]\ndurations = [4, 8]\n[cyclic]\nt0 = 2\ncycles = 3\n");
  const Step spe = experiment_steps_per_epoch(c);
  CHECK(spe == 9);  // 1200 training samples / 128
  const RunConfig sweep = make_run_config(c, Mode::sweep, 8, 5, spe);
  CHECK(sweep.epochs == 8);
  CHECK(sweep.seed == 5);
  CHECK(total_steps(sweep.schedule) == 8 * spe);
  CHECK(sweep.schedule.warmup_steps == 2 * spe);
  const RunConfig cyc = make_run_config(c, Mode::cyclic, 0, 0, spe);
  CHECK(cyc.epochs == 2 + 2 + 4 + 8);
  CHECK(shape_name(cyc.schedule) == "warm_restarts");
}

TEST_CASE("sawtooth cyclic plan") {
  const auto c = parse_config_text("[task]\nkind = \"spirals\"\n[cyclic]\nshape = \"sawtooth\"\nt0 = 3\ncycles = 4\n");
  CHECK(c.cyclic->growth == 1.0);
  const Step spe = experiment_steps_per_epoch(c);
  CHECK(cyclic_total_epochs(c, spe) == 4 + 12);
}
