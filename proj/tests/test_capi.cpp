#include <doctest.h>

#include <cyclebench.h>

#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"(
name = "capi"
seeds = [0]
[task]
kind = "gaussian_mixture"
classes = 3
dim = 4
samples = 120
[optimizer]
batch_size = 16
[sweep]
durations = [8, 16]
[cyclic]
t0 = 4
growth = 2.0
cycles = 2
)";

std::string take(char* s) {
  std::string out = s ? s : "";
  cb_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(cb_status_name(CB_OK)) == "ok");
  CHECK(std::string(cb_status_name(CB_ERR_VALIDATION)) == "validation");
  CHECK(std::string(cb_version()).size() > 0);
}

TEST_CASE("speedup ratio through the C interface") {
  double r = 0;
  CHECK(cb_speedup_ratio(2.0, 6, &r) == CB_OK);
  CHECK(r == 1.96875);
  CHECK(cb_speedup_ratio(1.0, 6, &r) == CB_ERR_DOMAIN);
  CHECK(std::string(cb_last_error()).find("growth") != std::string::npos);
  CHECK(cb_speedup_ratio(2.0, 6, nullptr) == CB_ERR_ARGUMENT);
}

TEST_CASE("config errors map to validation status") {
  cb_config* c = nullptr;
  CHECK(cb_config_parse("seeds = [1, 1]\n[task]\nkind = \"spirals\"\n[sweep]\ndurations = [8]\n", &c) ==
        CB_ERR_VALIDATION);
  CHECK(c == nullptr);
  CHECK(std::string(cb_last_error()).find("seeds not distinct") != std::string::npos);
  CHECK(cb_config_load("/nonexistent/file.toml", &c) == CB_ERR_IO);
  CHECK(cb_config_parse(nullptr, &c) == CB_ERR_ARGUMENT);
}

TEST_CASE("full lifecycle through opaque handles") {
  cb_config* c = nullptr;
  REQUIRE(cb_config_parse(kConfig, &c) == CB_OK);
  CHECK(cb_config_has_mode(c, CB_MODE_SWEEP) == 1);
  CHECK(cb_config_has_mode(c, CB_MODE_CYCLIC) == 1);

  char* raw = nullptr;
  REQUIRE(cb_config_fingerprint(c, &raw) == CB_OK);
  const std::string fp = take(raw);
  CHECK(fp.size() == 16);

  const uint64_t seeds[] = {3, 4};
  REQUIRE(cb_config_set_seeds(c, seeds, 2) == CB_OK);
  REQUIRE(cb_config_fingerprint(c, &raw) == CB_OK);
  CHECK(take(raw) == fp);
  REQUIRE(cb_config_echo(c, &raw) == CB_OK);
  CHECK(take(raw).find("seeds = [3, 4]") != std::string::npos);

  int messages = 0;
  cb_bundle* sweep = nullptr;
  cb_bundle* cyclic = nullptr;
  REQUIRE(cb_run(c, CB_MODE_SWEEP, 2, [](const char*, void* u) { ++*static_cast<int*>(u); }, &messages, &sweep) ==
          CB_OK);
  CHECK(messages > 0);
  REQUIRE(cb_run(c, CB_MODE_CYCLIC, 1, nullptr, nullptr, &cyclic) == CB_OK);
  CHECK(cb_bundle_partial(sweep) == 0);
  REQUIRE(cb_bundle_merge(sweep, cyclic) == CB_OK);

  const fs::path dir = fs::temp_directory_path() / "cyclebench_capi";
  fs::remove_all(dir);
  REQUIRE(cb_bundle_write(sweep, dir.c_str()) == CB_OK);
  cb_bundle* loaded = nullptr;
  REQUIRE(cb_bundle_load(dir.c_str(), &loaded) == CB_OK);
  REQUIRE(cb_bundle_label(loaded, &raw) == CB_OK);
  CHECK(take(raw) == "capi");
  REQUIRE(cb_bundle_summary(loaded, &raw) == CB_OK);
  CHECK(take(raw).find(fp) != std::string::npos);

  size_t written = 0;
  REQUIRE(cb_plot_bundle(loaded, (dir / "plots").c_str(), CB_X_EPOCHS, &written) == CB_OK);
  CHECK(written == 3);

  const cb_bundle* pair[] = {loaded, sweep};
  cb_report* report = nullptr;
  REQUIRE(cb_compare(pair, 2, "capi", &report) == CB_OK);
  REQUIRE(cb_report_json(report, &raw) == CB_OK);
  CHECK(take(raw).find("\"baseline\"") != std::string::npos);
  REQUIRE(cb_plot_report(report, pair, 2, (dir / "report").c_str(), CB_X_WALL_CLOCK, nullptr) == CB_OK);
  CHECK(cb_compare(pair, 2, "nobody", &report) != CB_OK);

  cb_report_free(report);
  cb_bundle_free(loaded);
  cb_bundle_free(cyclic);
  cb_bundle_free(sweep);
  cb_config_free(c);
  fs::remove_all(dir);
}

TEST_CASE("loading a missing bundle fails cleanly") {
  cb_bundle* b = nullptr;
  CHECK(cb_bundle_load("/nonexistent/bundle", &b) != CB_OK);
  CHECK(b == nullptr);
  cb_bundle_free(nullptr);
  cb_config_free(nullptr);
  cb_report_free(nullptr);
}
