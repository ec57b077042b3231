#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "cyclebench_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(CYCLEBENCH_CLI) + " " + args + " > " + (kScratch / "stdout.txt").string() +
                          " 2> " + (kScratch / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = kScratch / name;
  std::ofstream(p) << body;
  return p;
}

const char* kSmall = R"(
name = "cli"
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

}  // namespace

TEST_CASE("command line exit codes and outputs") {
  fs::remove_all(kScratch);
  fs::create_directories(kScratch);
  const auto good = write_config("good.toml", kSmall);
  const auto bad = write_config("bad.toml", "seeds = [1, 1]\n[task]\nkind = \"spirals\"\n");

  CHECK(run("validate --config " + good.string()) == 0);
  const auto echo = slurp(kScratch / "stdout.txt");
  CHECK(echo.rfind("# fingerprint=", 0) == 0);

  // the echo is itself a valid config with the same fingerprint
  const auto echoed = write_config("echo.toml", echo);
  CHECK(run("validate --config " + echoed.string()) == 0);
  CHECK(slurp(kScratch / "stdout.txt") == echo);

  CHECK(run("validate --config " + bad.string()) == 1);
  const auto err = slurp(kScratch / "stderr.txt");
  CHECK(err.find("seeds not distinct") != std::string::npos);
  CHECK(err.find("neither [sweep] nor [cyclic]") != std::string::npos);

  CHECK(run("frobnicate") == 1);
  CHECK(run("sweep") == 1);

  const auto out = kScratch / "bundle";
  CHECK(run("sweep --config " + good.string() + " --out " + out.string()) == 0);
  CHECK(run("cyclic --config " + good.string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "curve_standard.json"));
  CHECK(fs::exists(out / "curve_cyclic.json"));
  CHECK(run("plot " + out.string()) == 0);
  CHECK(fs::exists(out / "plots" / "tradeoff.svg"));
  CHECK(run("compare " + out.string() + " " + out.string() + " --baseline cli --out " + (kScratch / "cmp").string()) ==
        0);
  CHECK(fs::exists(kScratch / "cmp" / "report.json"));
  CHECK(run("compare " + out.string() + " " + out.string() + " --baseline nobody") == 1);
  CHECK(run("plot " + (kScratch / "cmp").string()) == 1);

  std::string diverging = kSmall;
  diverging.replace(diverging.find("batch_size = 16"), 15, "batch_size = 16\neta_max = 1e200");
  const auto div = write_config("div.toml", diverging);
  CHECK(run("cyclic --config " + div.string() + " --out " + (kScratch / "div").string()) == 2);
  CHECK(slurp(kScratch / "stdout.txt").find("\"partial\": true") != std::string::npos);
  fs::remove_all(kScratch);
}
