#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cleanlabel/runner.hpp"

using namespace cleanlabel;
namespace fs = std::filesystem;

namespace {

fs::path unique_dir(const std::string& tag) {
  const fs::path p =
      fs::temp_directory_path() /
      ("cleanlabel_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

const char* kMiniConfig = R"({
  "experiment_id": "mini",
  "experiment": {"kind": "interval", "target": "empty", "density": "uniform"},
  "learners": ["min_interval"],
  "attackers": ["null", "interval_flood"],
  "include_pool": true,
  "m": 20,
  "trials": 3,
  "test_points": 40,
  "seed": 5
})";

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("sha256 matches the reference vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv rows quote awkward fields and leave blanks for absent ones") {
  CHECK(results_csv_header() ==
        "experiment_id,class,learner,attacker,n,d,t,gamma,epsilon,m,trials,"
        "test_points,atk_mean,atk_ci95,err_mean,audit_violations,seed");

  ResultRow row;
  row.experiment_id = "exp";
  row.class_name = "intervals";
  row.learner = "max_interval";
  row.attacker = "budget(interval_flood,t=2)";
  row.m = 50;
  row.trials = 20;
  row.test_points = 100;
  row.atk_mean = 0.5;
  row.atk_ci95 = 0.25;
  row.err_mean = 0.125;
  row.seed = 7;
  const std::string line = results_csv_line(row);
  CHECK(line.find("\"budget(interval_flood,t=2)\"") != std::string::npos);
  CHECK(line.find(",,,,,50,20,100,0.5,0.25,0.125,0,7") != std::string::npos);

  row.t = 2;
  row.gamma = 0.25;
  const std::string filled = results_csv_line(row);
  CHECK(filled.find(",,2,0.25,,50,") != std::string::npos);

  row.attacker = "say \"hi\"";
  const std::string quoted = results_csv_line(row);
  CHECK(quoted.find("\"say \"\"hi\"\"\"") != std::string::npos);
}

TEST_CASE("run_config produces identical csv bytes for equal seeds") {
  const fs::path dir = unique_dir("run");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, kMiniConfig);

  std::ostringstream log;
  RunOptions opt1;
  opt1.config_path = cfg.string();
  opt1.out_dir = (dir / "out1").string();
  CHECK(run_config(opt1, log) == 0);

  const std::string csv1 = read_file(dir / "out1" / "results.csv");
  CHECK(count_lines(csv1) == 4);
  CHECK(csv1.rfind(results_csv_header(), 0) == 0);
  CHECK(csv1.find("interval_flood") != std::string::npos);
  CHECK(csv1.find("pool") != std::string::npos);

  RunOptions opt2 = opt1;
  opt2.out_dir = (dir / "out2").string();
  CHECK(run_config(opt2, log) == 0);
  CHECK(read_file(dir / "out2" / "results.csv") == csv1);

  const auto manifest =
      nlohmann::json::parse(read_file(dir / "out1" / "manifest.json"));
  CHECK(manifest.at("schema").get<int>() == 1);
  CHECK(manifest.at("experiment_id").get<std::string>() == "mini");
  CHECK(manifest.at("seed").get<std::uint64_t>() == 5);
  CHECK(manifest.at("rows").get<int>() == 3);
  CHECK(manifest.at("config_sha256").get<std::string>() ==
        sha256_hex(read_file(cfg)));

  RunOptions opt3 = opt1;
  opt3.out_dir = (dir / "out3").string();
  opt3.seed = 9;
  CHECK(run_config(opt3, log) == 0);
  const auto reseeded =
      nlohmann::json::parse(read_file(dir / "out3" / "manifest.json"));
  CHECK(reseeded.at("seed").get<std::uint64_t>() == 9);

  fs::remove_all(dir);
}

TEST_CASE("run_config rejects malformed configurations") {
  const fs::path dir = unique_dir("badcfg");
  std::ostringstream log;

  const auto run_expecting = [&](const std::string& name,
                                 const std::string& content) {
    const fs::path cfg = dir / name;
    write_file(cfg, content);
    RunOptions opt;
    opt.config_path = cfg.string();
    opt.out_dir = (dir / (name + ".out")).string();
    return run_config(opt, log);
  };

  CHECK(run_expecting("missing.json", R"({"experiment_id": "x", "m": 5})") == 2);
  CHECK(run_expecting("unknown_learner.json", R"({
    "experiment_id": "x",
    "experiment": {"kind": "interval", "target": "empty", "density": "uniform"},
    "learners": ["warp_drive"],
    "attackers": ["null"],
    "m": 5, "trials": 2, "test_points": 5
  })") == 2);
  CHECK(run_expecting("wrong_attacker.json", R"({
    "experiment_id": "x",
    "experiment": {"kind": "interval", "target": "empty", "density": "uniform"},
    "learners": ["min_interval"],
    "attackers": ["svm_one_point"],
    "m": 5, "trials": 2, "test_points": 5
  })") == 2);
  CHECK(run_expecting("parse_error.json", "{ not json") == 2);

  RunOptions gone;
  gone.config_path = (dir / "nope.json").string();
  gone.out_dir = (dir / "nope.out").string();
  CHECK(run_config(gone, log) == 2);

  fs::remove_all(dir);
}

TEST_CASE("audit scopes are validated and geometry passes") {
  std::ostringstream log;
  CHECK(run_audits("bogus", log) == 2);
  CHECK(run_audits("geometry", log) == 0);
  CHECK(log.str().find("geometry") != std::string::npos);
}

TEST_CASE("table aggregation groups rows and averages the rates") {
  const fs::path dir = unique_dir("table");

  const auto csv_row = [](const std::string& learner,
                          const std::string& attacker, double atk,
                          double err) {
    ResultRow row;
    row.experiment_id = "exp";
    row.class_name = "intervals";
    row.learner = learner;
    row.attacker = attacker;
    row.m = 10;
    row.trials = 2;
    row.test_points = 5;
    row.atk_mean = atk;
    row.err_mean = err;
    row.seed = 1;
    return results_csv_line(row);
  };

  const fs::path f1 = dir / "a.csv";
  const fs::path f2 = dir / "b.csv";
  write_file(f1, results_csv_header() + "\n" +
                     csv_row("min_interval", "null", 0.2, 0.1) + "\n" +
                     csv_row("min_interval", "interval_flood", 0.8, 0.1) +
                     "\n");
  write_file(f2, results_csv_header() + "\n" +
                     csv_row("max_interval", "interval_flood", 1.0, 0.3) +
                     "\n");

  std::ostringstream by_learner;
  CHECK(make_table({f1.string(), f2.string()}, {"learner"}, by_learner) == 0);
  const std::string out = by_learner.str();
  CHECK(out.find("min_interval") != std::string::npos);
  CHECK(out.find("max_interval") != std::string::npos);
  CHECK(out.find("0.5") != std::string::npos);

  std::ostringstream overall;
  CHECK(make_table({f1.string(), f2.string()}, {}, overall) == 0);
  CHECK(overall.str().find("(all)") != std::string::npos);
  CHECK(overall.str().find("0.666667") != std::string::npos);

  std::ostringstream broken;
  CHECK(make_table({f1.string()}, {"starship"}, broken) == 2);
  CHECK(make_table({(dir / "missing.csv").string()}, {"learner"}, broken) == 2);

  fs::remove_all(dir);
}

}  // TEST_SUITE
