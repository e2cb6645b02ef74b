#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kCli = DPPL_CLI_PATH;

int run(const std::string& args) {
  std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// result.json with volatile timing removed, for byte comparison
std::string strip_wall_clock(const std::string& s) {
  std::string out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line))
    if (line.find("wall_clock") == std::string::npos) out += line + "\n";
  return out;
}

int data_rows(const fs::path& csv) {
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  int rows = -1;  // discount the header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows;
}

const std::string kFastThermo =
    "thermometer --n-samples 80 --leapfrog-steps 40 --skip 20 --gd-steps 8";

}  // namespace

TEST_CASE("thermometer experiment writes a complete result record") {
  fs::path dir = fs::temp_directory_path() / "dppl-cli-a";
  fs::remove_all(dir);
  REQUIRE(run(kFastThermo + " --seed 3 --output-dir " + dir.string()) == 0);

  json r = json::parse(slurp(dir / "result.json"));
  CHECK(r["schema_version"] == 1);
  CHECK(r["config"]["experiment"] == "thermometer");
  CHECK(r["config"]["seed"] == 3);
  CHECK(r["losses"].size() == 9);  // gd-steps + 1
  CHECK(r["final_parameters"].contains("m"));
  CHECK(r["final_inferred"].contains("T"));
  CHECK(r["sample_summary"]["count"] == 60);  // n-samples - skip
  CHECK(r.contains("wall_clock_seconds"));
  CHECK(data_rows(dir / "trace.csv") == 9);
}

TEST_CASE("rerunning an identical config is bit-identical apart from wall clock") {
  fs::path d1 = fs::temp_directory_path() / "dppl-cli-b1";
  fs::path d2 = fs::temp_directory_path() / "dppl-cli-b2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  REQUIRE(run(kFastThermo + " --seed 8 --output-dir " + d1.string()) == 0);
  REQUIRE(run(kFastThermo + " --seed 8 --output-dir " + d2.string()) == 0);
  CHECK(strip_wall_clock(slurp(d1 / "result.json")) == strip_wall_clock(slurp(d2 / "result.json")));
  CHECK(slurp(d1 / "trace.csv") == slurp(d2 / "trace.csv"));
}

TEST_CASE("plots are emitted as self-contained svg files") {
  fs::path dir = fs::temp_directory_path() / "dppl-cli-c";
  fs::remove_all(dir);
  REQUIRE(run(kFastThermo + " --seed 1 --emit-plots --output-dir " + dir.string()) == 0);
  std::string curve = slurp(dir / "loss_curve.svg");
  CHECK(curve.find("<svg") != std::string::npos);
  CHECK(curve.find("polyline") != std::string::npos);
  std::string hist = slurp(dir / "posterior_hist.svg");
  CHECK(hist.find("<svg") != std::string::npos);
  CHECK(hist.find("rect") != std::string::npos);
}

TEST_CASE("multi-seed sweeps fan out into per-seed directories") {
  fs::path dir = fs::temp_directory_path() / "dppl-cli-d";
  fs::remove_all(dir);
  REQUIRE(run(kFastThermo + " --seed 5 --num-seeds 2 --jobs 2 --output-dir " + dir.string()) == 0);
  json r5 = json::parse(slurp(dir / "seed-5" / "result.json"));
  json r6 = json::parse(slurp(dir / "seed-6" / "result.json"));
  CHECK(r5["config"]["seed"] == 5);
  CHECK(r6["config"]["seed"] == 6);
  CHECK(r5["losses"] != r6["losses"]);
}

TEST_CASE("gradcheck exits zero and records per-parameter rows under 5%") {
  fs::path dir = fs::temp_directory_path() / "dppl-cli-e";
  fs::remove_all(dir);
  REQUIRE(run("gradcheck --seed 0 --output-dir " + dir.string()) == 0);
  json r = json::parse(slurp(dir / "result.json"));
  CHECK(r["all_ok"] == true);
  REQUIRE(r["rows"].size() > 0);
  for (const auto& row : r["rows"])
    if (row["checked"].get<bool>()) CHECK(row["relative_error"].get<double>() < 0.05);
}

TEST_CASE("usage errors and invalid values exit nonzero") {
  CHECK(run("not-an-experiment") != 0);
  CHECK(run("thermometer --eps -3 --output-dir /tmp/dppl-cli-f") != 0);
  CHECK(run("thermometer --no-such-flag 1") != 0);
}

TEST_CASE("sampler divergence and unwritable output are reported as failures") {
  // a grossly unstable step size blows the trajectory up immediately
  CHECK(run("thermometer --eps 150 --n-samples 5 --leapfrog-steps 400 --skip 0 --gd-steps 2 "
            "--output-dir /tmp/dppl-cli-g") != 0);
  CHECK(run(kFastThermo + " --output-dir /proc/definitely/not/writable") != 0);
}
