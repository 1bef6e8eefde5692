#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "bosonlc/app.hpp"
#include "bosonlc/config.hpp"
#include "bosonlc/errors.hpp"

using namespace bosonlc;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = BOSONLC_TEST_CONFIGS;

const char* kMinimal = R"(
model:
  graph: {kind: path, length: 5}
  J: 1.0
  U0: 1.0
ensemble: {mu: 1.0, per_site_cap: 2}
experiment:
  scan:
    operator: {kind: b, site: 0}
    probe: {kind: bdag, site: 0}
    r_list: [2, 3]
    t_list: [0.0, 0.001]
)";

std::string config_error(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "bosonlc_config_tests" / name;
  fs::remove_all(p);
  return p;
}

int run(const std::string& sub, std::optional<std::string> config, const fs::path& out_dir,
        std::vector<std::string> overrides = {}) {
  RunOptions opt;
  opt.subcommand = sub;
  opt.config_path = std::move(config);
  opt.out_dir = out_dir.string();
  opt.overrides = std::move(overrides);
  std::ostringstream out, err;
  return run_app(opt, out, err);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("defaults and parsed fields") {
  ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.kind == "scan");
  CHECK(c.seed == 1);
  CHECK(c.model.graph.length == 5);
  CHECK(c.ensemble.per_site_cap == 2);
  CHECK(c.scan.o.sites == std::vector<Vertex>{0});
  CHECK(c.scan.o.annihilate == std::vector<int>{1});
  CHECK(c.scan.probe.create == std::vector<int>{1});
  CHECK(c.scan.t_list.size() == 2);
  CHECK(c.output_dir == "out");
  ModelSpec m = build_model(c.model);
  CHECK(m.graph().num_vertices() == 5);
  CHECK(m.interactions().size() == 5);
}

TEST_CASE("errors name the offending field") {
  CHECK(config_error("experiment: {selftest: {}}\n").starts_with("model: missing"));
  CHECK(config_error(with("J: 1.0", "J: 1.0\n  colour: red")).starts_with("model.colour: unknown key"));
  CHECK(config_error(with("mu: 1.0", "mu: fast")).starts_with("ensemble.mu: expected a number"));
  CHECK(config_error(with("mu: 1.0", "mu: -2")).starts_with("ensemble.mu: must be positive"));
  CHECK(config_error(with("[0.0, 0.001]", "[0.0, 0.001, 0.0005]")).starts_with("experiment.scan.t_list[2]: times must increase"));
  CHECK(config_error(with("r_list: [2, 3]", "r_list: [2, 0]")).starts_with("experiment.scan.r_list[1]: must be >= 1"));
  CHECK(config_error(with("kind: path, length: 5", "kind: ring, length: 5")).starts_with("model.graph.kind:"));
  CHECK(config_error(with("{kind: b, site: 0}", "{kind: b, site: 9}")).starts_with("experiment.scan.operator"));
  CHECK(config_error(std::string(kMinimal) + "  cluster: {}\n").starts_with("experiment:"));
  CHECK(config_error("[1, 2").starts_with("<root>: cannot parse"));
  CHECK(config_error(with("U0: 1.0", "U0: 1.0\n  schedule: [{start: 0.5}]")).starts_with("model.schedule[0].start: first"));
  CHECK(config_error(with("U0: 1.0", "U0: 1.0\n  schedule: []")).empty());
}

TEST_CASE("overrides apply before validation") {
  ExperimentConfig c = parse_config(kMinimal, {"ensemble.per_site_cap=3", "experiment.scan.r_list=[2, 3, 4]", "seed=9"});
  CHECK(c.ensemble.per_site_cap == 3);
  CHECK(c.scan.r_list == std::vector<int>{2, 3, 4});
  CHECK(c.seed == 9);
  CHECK(parse_config(kMinimal, {"constants.C3=2.5"}).constants.C3 == 2.5);
  CHECK(config_error(kMinimal, {"nonsense"}).starts_with("--set nonsense"));
  CHECK(config_error(kMinimal, {"ensemble.per_site_cap=0"}).starts_with("ensemble.per_site_cap: must be >= 1"));
}

TEST_CASE("resolved configs round-trip through their JSON form") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    INFO(entry.path().string());
    ExperimentConfig c = load_config(entry.path().string());
    nlohmann::json j = config_to_json(c);
    CHECK(config_to_json(parse_config(j.dump())) == j);
  }
  CHECK_THROWS_AS(load_config(kConfigs + "/missing.yaml"), ConfigError);
}

TEST_CASE("exit codes and artifacts") {
  SUBCASE("bounds") {
    fs::path out = scratch("bounds");
    CHECK(run("bounds", kConfigs + "/bounds_chain.yaml", out) == kExitOk);
    CHECK(fs::exists(out / "bounds_trace.txt"));
    auto j = nlohmann::json::parse(slurp(out / "bounds.json"));
    CHECK(j["config"]["experiment"].contains("bounds"));
    CHECK(j["constants_ledger"].size() > 3);
    for (const auto& e : j["constants_ledger"]) CHECK(e.contains("provenance"));
  }
  SUBCASE("subcommand mismatch and unreadable config") {
    CHECK(run("scan", kConfigs + "/bounds_chain.yaml", scratch("mismatch")) == kExitConfig);
    CHECK(run("bounds", kConfigs + "/missing.yaml", scratch("missing")) == kExitConfig);
    CHECK(run("bounds", std::nullopt, scratch("none")) == kExitConfig);
  }
  SUBCASE("capacity") {
    CHECK(run("scan", kConfigs + "/scan_small.yaml", scratch("capacity"), {"ensemble.max_states=10"}) == kExitCapacity);
  }
  SUBCASE("degenerate cluster") {
    CHECK(run("cluster", kConfigs + "/cluster_degenerate.yaml", scratch("degenerate")) == kExitProperty);
  }
  SUBCASE("cluster csv") {
    fs::path out = scratch("cluster");
    CHECK(run("cluster", kConfigs + "/cluster_mott.yaml", out) == kExitOk);
    std::string csv = slurp(out / "cluster.csv");
    CHECK(csv.starts_with("# config: "));
    CHECK(csv.find("\nr,exact,bound,ratio\n") != std::string::npos);
  }
  SUBCASE("selftest without a config") {
    fs::path out = scratch("selftest");
    CHECK(run("selftest", std::nullopt, out, {"experiment.selftest.instances=50"}) == kExitOk);
    auto j = nlohmann::json::parse(slurp(out / "selftest.json"));
    CHECK(j["passed"] == true);
  }
}

TEST_CASE("command line front end") {
  const char* cli = std::getenv("BOSONLC_CLI");
  if (!cli) {
    MESSAGE("BOSONLC_CLI not set; skipping");
    return;
  }
  auto status = [&](const std::string& args) {
    int rc = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  fs::path out = scratch("cli");
  CHECK(status("bounds -c " + kConfigs + "/bounds_chain.yaml -o " + out.string()) == 0);
  CHECK(fs::exists(out / "bounds.json"));
  CHECK(status("bounds -c " + kConfigs + "/bounds_chain.yaml -o " + out.string() + " --set ensemble.mu=-1") == 2);
  CHECK(status("frobnicate") == 2);
  CHECK(status("--help") == 0);
}
