#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "ldp/csv.hpp"
#include "ldp/errors.hpp"
#include "ldp/runner.hpp"

using namespace ldp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& leaf) {
  fs::path d = fs::temp_directory_path() / "ldp_runner_tests" / leaf;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig parse(const std::string& text) {
  return parse_experiment_config(text, ".");
}

const char* kRateCfg = R"({
  "command": "rate",
  "model": {"name": "bm", "params": {"mu": 0.0, "sigma": 1.0}, "x0": 0.0},
  "seed": 5,
  "rate": {"phi": {"target": "line", "slope": 1.0}, "T": 1.0, "dt": 0.001}
})";

}  // namespace

TEST_CASE("config parses into the expected fields") {
  ExperimentConfig cfg = parse(kRateCfg);
  CHECK(cfg.command == "rate");
  CHECK(cfg.model_name == "bm");
  CHECK(cfg.model_params.at("mu") == 0.0);
  CHECK(cfg.model_params.at("sigma") == 1.0);
  CHECK(cfg.has_x0);
  CHECK(cfg.x0 == 0.0);
  CHECK(cfg.seed == 5);
  CHECK(cfg.rate.phi.kind == PhiSpec::Kind::kLine);
  CHECK(cfg.rate.phi.slope == 1.0);
  CHECK(cfg.rate.T == 1.0);
  CHECK(cfg.rate.dt == 0.001);

  CoefficientModel m = build_config_model(cfg);
  CHECK(m.x0 == 0.0);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(
      parse(R"({"command":"fluid","model":{"name":"ou"},"fluid":{},
                "surprise":1})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"fluid","model":{"name":"ou","zap":2},
                "fluid":{}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"fluid","model":{"name":"ou"},
                "fluid":{"T":1.0,"bogus":3}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"rate","model":{"name":"bm"},
                "rate":{"phi":{"target":"fluid","wat":1},"T":1.0}})"),
      ValidationError);
  // a block for a different command is also an unknown key
  CHECK_THROWS_AS(
      parse(R"({"command":"fluid","model":{"name":"ou"},"fluid":{},
                "rate":{"phi":{"target":"fluid"}}})"),
      ValidationError);
}

TEST_CASE("structural validation") {
  // missing command / model / unknown command
  CHECK_THROWS_AS(parse(R"({"model":{"name":"ou"},"fluid":{}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"command":"fluid","fluid":{}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"command":"dance","model":{"name":"ou"}})"),
                  ValidationError);

  // phi needs exactly one of file / target
  CHECK_THROWS_AS(
      parse(R"({"command":"rate","model":{"name":"bm"},
                "rate":{"phi":{}}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"rate","model":{"name":"bm"},
                "rate":{"phi":{"file":"x.csv","target":"fluid"}}})"),
      ValidationError);
  // slope only belongs to target=line
  CHECK_THROWS_AS(
      parse(R"({"command":"rate","model":{"name":"bm"},
                "rate":{"phi":{"target":"fluid","slope":1.0}}})"),
      ValidationError);
  // referenced file must exist at parse time
  CHECK_THROWS_AS(
      parse(R"({"command":"rate","model":{"name":"bm"},
                "rate":{"phi":{"file":"no_such_file.csv"}}})"),
      ValidationError);

  // numeric ranges
  CHECK_THROWS_AS(
      parse(R"({"command":"fluid","model":{"name":"ou"},"seed":-3,
                "fluid":{}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"fluid","model":{"name":"ou"},
                "fluid":{"T":1.0,"dt":0.3}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"estimate","model":{"name":"bm"},
                "estimate":{"phi":{"target":"fluid"},"n":0.5}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"estimate","model":{"name":"bm"},
                "estimate":{"phi":{"target":"fluid"},"M":0}})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"estimate","model":{"name":"bm"},
                "estimate":{"phi":{"target":"fluid"},"method":"psychic"}})"),
      ValidationError);

  // model catalogue enforcement
  CHECK_THROWS_AS(parse(R"({"command":"fluid","model":{"name":"zen"},
                             "fluid":{}})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"command":"fluid","model":{"name":"bm","params":{"zap":1}},
                "fluid":{}})"),
      ValidationError);
}

TEST_CASE("path csv round trip") {
  fs::path dir = scratch_dir("csv");
  Path p({0.0, 1.0 / 3.0, 0.77, 2.0},
         {1e-17, std::exp(1.0), -std::sqrt(2.0), 0.1}, Interp::kLinear);
  fs::path file = dir / "p.csv";
  write_path_csv(file.string(), p);
  Path q = load_path_csv(file.string(), Interp::kLinear);
  REQUIRE(q.size() == p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(q.times()[i] == p.times()[i]);
    CHECK(q.values()[i] == p.values()[i]);
  }

  auto write_text = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name);
    out << body;
    return (dir / name).string();
  };
  CHECK_THROWS_AS(load_path_csv(write_text("h.csv", "a,b\n0,1\n1,2\n")),
                  ValidationError);
  CHECK_THROWS_AS(
      load_path_csv(write_text("n.csv", "time,value\n0,one\n1,2\n")),
      ValidationError);
  CHECK_THROWS_AS(
      load_path_csv(write_text("i.csv", "time,value\n0,inf\n1,2\n")),
      ValidationError);
  CHECK_THROWS_AS(load_path_csv(write_text("s.csv", "time,value\n0,1\n")),
                  std::exception);  // single sample: grid validation kicks in
}

TEST_CASE("rate experiment writes the expected artifacts") {
  fs::path dir = scratch_dir("rate_run");
  ExperimentConfig cfg = parse(kRateCfg);
  run_experiment(cfg, dir.string());

  json res = json::parse(slurp(dir / "results.json"));
  CHECK(res.at("command") == "rate");
  CHECK(res.at("model") == "bm");
  CHECK(res.at("finite").get<bool>());
  CHECK(res.at("value").get<double>() == doctest::Approx(0.5).epsilon(1e-9));

  json man = json::parse(slurp(dir / "manifest.json"));
  CHECK(man.at("version") == kLdpVersion);
  CHECK(man.at("seed") == 5);
  CHECK(man.at("config_hash").get<std::string>().size() == 16);
  CHECK(man.at("config").contains("model"));
  CHECK_FALSE(man.at("config").contains("threads"));

  CHECK(fs::exists(dir / "per_step_H.csv"));
  CHECK(fs::exists(dir / "phi.csv"));
  Path phi = load_path_csv((dir / "phi.csv").string());
  CHECK(phi.end_time() == 1.0);
}

TEST_CASE("repeat runs are byte-identical") {
  ExperimentConfig cfg = parse(kRateCfg);
  fs::path d1 = scratch_dir("repeat_a");
  fs::path d2 = scratch_dir("repeat_b");
  run_experiment(cfg, d1.string());
  run_experiment(cfg, d2.string());
  CHECK(slurp(d1 / "manifest.json") == slurp(d2 / "manifest.json"));
  CHECK(slurp(d1 / "results.json") == slurp(d2 / "results.json"));
  CHECK(slurp(d1 / "per_step_H.csv") == slurp(d2 / "per_step_H.csv"));
}

TEST_CASE("thread count never leaks into the outputs") {
  const char* kEstCfg = R"({
    "command": "estimate",
    "model": {"name": "bm", "params": {"mu": 0.0, "sigma": 1.0}, "x0": 0.0},
    "seed": 12,
    "estimate": {"phi": {"target": "line", "slope": 1.0}, "n": 8, "T": 1.0,
                 "dt": 0.03125, "M": 500, "delta": 0.25, "method": "tilted"}
  })";
  ExperimentConfig cfg = parse(kEstCfg);
  fs::path d1 = scratch_dir("thr1");
  fs::path d2 = scratch_dir("thr2");
  cfg.threads = 1;
  run_experiment(cfg, d1.string());
  cfg.threads = 2;
  run_experiment(cfg, d2.string());
  CHECK(slurp(d1 / "manifest.json") == slurp(d2 / "manifest.json"));
  CHECK(slurp(d1 / "results.json") == slurp(d2 / "results.json"));

  json res = json::parse(slurp(d1 / "results.json"));
  CHECK(res.at("p_hat").get<double>() >= 0.0);
  CHECK(res.at("p_hat").get<double>() <= 1.0);
  CHECK(res.at("method") == "tilted");
}

TEST_CASE("phi file resolution is anchored at the config directory") {
  fs::path dir = scratch_dir("phi_anchor");
  Path phi({0.0, 0.5, 1.0}, {0.0, 0.6, 1.0}, Interp::kLinear);
  write_path_csv((dir / "target.csv").string(), phi);
  std::ofstream cfgf(dir / "cfg.json");
  cfgf << R"({
    "command": "rate",
    "model": {"name": "bm", "x0": 0.0},
    "rate": {"phi": {"file": "target.csv"}, "T": 1.0, "dt": 0.01}
  })";
  cfgf.close();

  ExperimentConfig cfg = load_experiment_config((dir / "cfg.json").string());
  CHECK(cfg.rate.phi.kind == PhiSpec::Kind::kFile);
  CHECK(cfg.rate.phi.file == "target.csv");

  fs::path out = scratch_dir("phi_anchor_out");
  run_experiment(cfg, out.string());
  json res = json::parse(slurp(out / "results.json"));
  CHECK(res.at("finite").get<bool>());
  CHECK(res.at("value").get<double>() > 0.0);
}

TEST_CASE("fnv hash is stable and order-sensitive") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("ab") != fnv1a64("ba"));
  CHECK(fnv1a64("config") == fnv1a64("config"));
}
