#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "shapuq/serialize.hpp"

namespace fs = std::filesystem;
using shapuq::Json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with the given argument string; stdout is captured, stderr
// passes through to the test log.
RunResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path out_path =
      fs::temp_directory_path() /
      ("shapuq_cli_out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      env + (env.empty() ? "" : " ") + SHAPUQ_CLI_PATH + " " + args + " > " +
      out_path.string();
  const int raw = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WEXITSTATUS(raw);
  result.out = read_file(out_path);
  fs::remove(out_path);
  return result;
}

// A scratch directory wiped at the end of each test case.
struct ScratchDir {
  fs::path path;
  ScratchDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("shapuq_cli_scratch_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  fs::path file(const std::string& name) const { return path / name; }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

const char* kGameA = R"({"n": 2, "values": {"0": 0, "1": 1, "2": 2, "3": 4}})";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("version and help") {
  auto v = run_cli("--version");
  CHECK(v.exit_code == 0);
  CHECK(v.out.find("0.1.0") != std::string::npos);
  auto h = run_cli("--help");
  CHECK(h.exit_code == 0);
  CHECK(h.out.find("solve") != std::string::npos);
  CHECK(h.out.find("experiment") != std::string::npos);
}

TEST_CASE("solve: json and csv output") {
  ScratchDir dir;
  write_file(dir.file("game.json"), kGameA);

  auto res = run_cli("solve " + dir.file("game.json").string());
  REQUIRE(res.exit_code == 0);
  auto j = Json::parse(res.out);
  CHECK(j["n"] == 2);
  CHECK(j["players"][0]["phi"].get<double>() == 1.5);
  CHECK(j["players"][0]["sigma2"].get<double>() == 0.25);
  CHECK(j["players"][1]["phi"].get<double>() == 2.5);

  auto csv = run_cli("solve --format csv " + dir.file("game.json").string());
  REQUIRE(csv.exit_code == 0);
  CHECK(csv.out == "player,phi,sigma2\n1,1.5,0.25\n2,2.5,0.25\n");
}

TEST_CASE("solve: file output writes a manifest sidecar") {
  ScratchDir dir;
  write_file(dir.file("game.json"), kGameA);
  const auto out = dir.file("result.json");
  auto res = run_cli("solve -o " + out.string() + " " +
                     dir.file("game.json").string());
  REQUIRE(res.exit_code == 0);
  auto j = Json::parse(read_file(out));
  CHECK(j["players"][0]["phi"].get<double>() == 1.5);

  auto manifest = Json::parse(read_file(dir.file("result.json.manifest.json")));
  CHECK(manifest["command"] == "solve");
  CHECK(manifest["version"] == "0.1.0");
  CHECK(manifest["parameters"].contains("game"));

  // Rewriting produces a byte-identical data file (timestamps live only in
  // the manifest).
  const std::string first = read_file(out);
  auto again = run_cli("solve -o " + out.string() + " " +
                       dir.file("game.json").string());
  REQUIRE(again.exit_code == 0);
  CHECK(read_file(out) == first);
}

TEST_CASE("exit codes distinguish error classes") {
  ScratchDir dir;
  // Malformed input: exit 2.
  write_file(dir.file("bad.json"), R"({"n": 2, "values": {"0": 0}})");
  CHECK(run_cli("solve " + dir.file("bad.json").string()).exit_code == 2);
  write_file(dir.file("notjson.json"), "not json at all");
  CHECK(run_cli("solve " + dir.file("notjson.json").string()).exit_code == 2);
  CHECK(run_cli("solve " + dir.file("missing.json").string()).exit_code == 2);
  // Capacity overflow: exit 3.
  write_file(dir.file("big.json"), R"({"n": 25, "values": {}})");
  CHECK(run_cli("solve " + dir.file("big.json").string()).exit_code == 3);
  // Unknown arguments: exit 2.
  CHECK(run_cli("solve --no-such-flag x.json").exit_code == 2);
}

TEST_CASE("uncertain: preset noise constants and csv") {
  ScratchDir dir;
  write_file(dir.file("game.json"), kGameA);
  write_file(dir.file("bern.json"), R"({"type": "bernoulli", "p": 0.33, "c": 0.05})");
  write_file(dir.file("gauss.json"), R"({"type": "gaussian", "sigma": 0.01})");

  auto bern = run_cli("uncertain " + dir.file("game.json").string() + " " +
                      dir.file("bern.json").string());
  REQUIRE(bern.exit_code == 0);
  auto bj = Json::parse(bern.out);
  for (int i = 0; i < 2; ++i) {
    CHECK(bj["players"][i]["gamma"].get<double>() == 0.0);
    CHECK(bj["players"][i]["xi"].get<double>() == 0.0);
    CHECK(std::abs(bj["players"][i]["sigma2_gamma"].get<double>() -
                   1.1055e-3) < 1e-12);
    CHECK(bj["players"][i]["phi_tilde"].get<double>() ==
          bj["players"][i]["phi"].get<double>());
  }

  auto gauss = run_cli("uncertain " + dir.file("game.json").string() + " " +
                       dir.file("gauss.json").string());
  REQUIRE(gauss.exit_code == 0);
  auto gj = Json::parse(gauss.out);
  CHECK(std::abs(gj["players"][0]["sigma2_gamma"].get<double>() - 2.0e-4) <
        1e-12);

  auto csv = run_cli("uncertain --format csv " +
                     dir.file("game.json").string() + " " +
                     dir.file("gauss.json").string());
  REQUIRE(csv.exit_code == 0);
  CHECK(csv.out.rfind("player,phi,sigma2,gamma,phi_tilde,sigma2_gamma,xi,"
                      "sigma2_total\n",
                      0) == 0);
}

TEST_CASE("uncertain: emitted shifted game closes the loop") {
  ScratchDir dir;
  write_file(dir.file("game.json"), kGameA);
  write_file(dir.file("bias.json"), R"({
    "type": "table",
    "means": {"0": 0.0, "1": 0.3, "2": 0.1, "3": 0.2}
  })");

  const auto shifted = dir.file("shifted.json");
  auto res = run_cli("uncertain --emit-shifted " + shifted.string() + " " +
                     dir.file("game.json").string() + " " +
                     dir.file("bias.json").string());
  REQUIRE(res.exit_code == 0);
  auto uj = Json::parse(res.out);

  auto solve = run_cli("solve " + shifted.string());
  REQUIRE(solve.exit_code == 0);
  auto sj = Json::parse(solve.out);
  for (int i = 0; i < 2; ++i) {
    const double tilde = uj["players"][i]["phi_tilde"].get<double>();
    const double phi = sj["players"][i]["phi"].get<double>();
    CHECK(std::abs(tilde - phi) < 1e-10);
  }
  // Worked numbers for this bias table.
  CHECK(uj["players"][0]["phi_tilde"].get<double>() ==
        doctest::Approx(1.7).epsilon(1e-12));
  CHECK(Json::parse(read_file(shifted))["values"]["1"].get<double>() ==
        doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("estimate: reproducible runs and seed control") {
  ScratchDir dir;
  write_file(dir.file("game.json"), kGameA);
  write_file(dir.file("gauss.json"), R"({"type": "gaussian", "sigma": 0.3})");
  const std::string base = "estimate --repeats 50 " +
                           dir.file("game.json").string() + " " +
                           dir.file("gauss.json").string();

  auto a = run_cli(base + " --seed 7");
  auto b = run_cli(base + " --seed 7");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);  // byte-identical

  auto c = run_cli(base + " --seed 8");
  CHECK(a.out != c.out);

  // The environment variable sets the default seed; the flag wins over it.
  auto env7 = run_cli(base, "SHAPUQ_SEED=7");
  CHECK(env7.out == a.out);
  auto flag_wins = run_cli(base + " --seed 7", "SHAPUQ_SEED=99");
  CHECK(flag_wins.out == a.out);
  auto bad_env = run_cli(base, "SHAPUQ_SEED=notanumber");
  CHECK(bad_env.exit_code == 2);

  // Estimates straddle the truth and carry the evaluation count.
  auto j = Json::parse(a.out);
  CHECK(j["players"][0]["evaluations"].get<long long>() == 50 * 4);
  const double mean = j["players"][0]["mean"].get<double>();
  const double lo = j["players"][0]["ci_low"].get<double>();
  const double hi = j["players"][0]["ci_high"].get<double>();
  CHECK(lo < mean);
  CHECK(mean < hi);
  CHECK(std::abs(mean - 1.5) < 0.5);

  // Permutation mode runs and is reproducible too.
  const std::string perm = "estimate --permutations 300 --seed 3 " +
                           dir.file("game.json").string() + " " +
                           dir.file("gauss.json").string();
  auto p1 = run_cli(perm);
  auto p2 = run_cli(perm);
  REQUIRE(p1.exit_code == 0);
  CHECK(p1.out == p2.out);
  // Mode flags are mutually exclusive.
  CHECK(run_cli("estimate --repeats 5 --permutations 5 " +
                dir.file("game.json").string() + " " +
                dir.file("gauss.json").string())
            .exit_code == 2);
}

TEST_CASE("dist: exact atoms without noise") {
  ScratchDir dir;
  write_file(dir.file("game.json"), kGameA);
  auto res = run_cli("dist --player 1 " + dir.file("game.json").string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.out == "player,value,mass\n1,1,0.5\n1,2,0.5\n");

  // All players by default.
  auto all = run_cli("dist " + dir.file("game.json").string());
  REQUIRE(all.exit_code == 0);
  CHECK(all.out ==
        "player,value,mass\n1,1,0.5\n1,2,0.5\n2,2,0.5\n2,3,0.5\n");
}

TEST_CASE("dist: noisy mixtures") {
  ScratchDir dir;
  write_file(dir.file("game.json"), kGameA);
  write_file(dir.file("bern.json"), R"({"type": "bernoulli", "p": 0.33, "c": 0.05})");
  write_file(dir.file("gauss.json"), R"({"type": "gaussian", "sigma": 0.01})");

  auto bern = run_cli("dist --player 1 " + dir.file("game.json").string() +
                      " " + dir.file("bern.json").string());
  REQUIRE(bern.exit_code == 0);
  // Six atoms; masses sum to 1.
  std::istringstream lines(bern.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "player,value,mass");
  double mass = 0.0;
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto second_comma = line.find(',', line.find(',') + 1);
    mass += std::stod(line.substr(second_comma + 1));
    ++rows;
  }
  CHECK(rows == 6);
  CHECK(std::abs(mass - 1.0) < 1e-12);

  auto gauss = run_cli("dist --player 2 --grid-min 1.0 --grid-max 4.0 "
                       "--grid-points 512 " +
                       dir.file("game.json").string() + " " +
                       dir.file("gauss.json").string());
  REQUIRE(gauss.exit_code == 0);
  std::istringstream glines(gauss.out);
  std::getline(glines, line);
  CHECK(line == "player,value,density");
  int grows = 0;
  double first = 0.0, last = 0.0;
  while (std::getline(glines, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    last = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    if (grows == 0) first = last;
    ++grows;
  }
  CHECK(grows == 512);
  CHECK(first == 1.0);
  CHECK(last == 4.0);
}

TEST_CASE("experiment: end-to-end outputs and bitwise rerun") {
  ScratchDir dir;
  const auto outdir = dir.file("exp");
  const std::string cmd =
      "experiment --samples 300 --features 5 --noise-level 0.1 "
      "--vf-noise bernoulli --seed 21 --repeats 20 --save-data --outdir " +
      outdir.string();
  auto res = run_cli(cmd);
  REQUIRE(res.exit_code == 0);

  for (const char* name :
       {"values.csv", "distribution.csv", "distribution_noisy.csv",
        "estimates.csv", "dataset.csv", "summary.json", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(outdir / name), "missing " << name);
  }

  auto summary = Json::parse(read_file(outdir / "summary.json"));
  CHECK(summary["num_points"] == 300);
  CHECK(summary["num_features"] == 5);
  CHECK(summary["vf_noise"] == "bernoulli");
  CHECK(summary["seed"] == 21);
  CHECK(std::abs(summary["efficiency_gap"].get<double>()) < 1e-8);
  CHECK(summary["r2_full"].get<double>() > 0.5);
  CHECK(summary["players"].size() == 5);

  // values.csv is the per-player attribution table.
  const std::string values = read_file(outdir / "values.csv");
  CHECK(values.rfind("player,phi,sigma2,gamma,phi_tilde,sigma2_gamma,xi,"
                     "sigma2_total\n",
                     0) == 0);

  // A rerun with the same seed reproduces every data file byte for byte.
  const std::string values_before = values;
  const std::string dist_before = read_file(outdir / "distribution_noisy.csv");
  const std::string est_before = read_file(outdir / "estimates.csv");
  const std::string data_before = read_file(outdir / "dataset.csv");
  auto rerun = run_cli(cmd);
  REQUIRE(rerun.exit_code == 0);
  CHECK(read_file(outdir / "values.csv") == values_before);
  CHECK(read_file(outdir / "distribution_noisy.csv") == dist_before);
  CHECK(read_file(outdir / "estimates.csv") == est_before);
  CHECK(read_file(outdir / "dataset.csv") == data_before);

  // A different seed changes the data.
  auto other = run_cli(
      "experiment --samples 300 --features 5 --noise-level 0.1 "
      "--vf-noise bernoulli --seed 22 --repeats 20 --save-data --outdir " +
      outdir.string());
  REQUIRE(other.exit_code == 0);
  CHECK(read_file(outdir / "values.csv") != values_before);
}

TEST_SUITE_END();
