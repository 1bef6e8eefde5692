#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "bosonlc/app.hpp"

namespace {

int default_threads() {
  if (const char* env = std::getenv("BOSONLC_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "ignoring BOSONLC_THREADS=" << env << '\n';
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light-cone bounds for boson lattice models, checked against exact dynamics"};
  app.require_subcommand(1);

  bosonlc::RunOptions opt;
  opt.threads = default_threads();
  std::string config, out_dir;

  const std::pair<const char*, const char*> subcommands[] = {
      {"bounds", "derivation trace of every bound constant"},
      {"scan", "exact commutator norms against the light-cone bounds"},
      {"certify", "windowed expectation value with truncation error bars"},
      {"cluster", "ground-state correlations against the clustering bound"},
      {"selftest", "randomized property checks"}};
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config, "experiment config (YAML)");
    sub->add_option("--set", opt.overrides, "override a config field, key.path=value")->take_all();
    sub->add_option("-o,--out", out_dir, "output directory (replaces output.dir)");
    sub->add_option("-j,--threads", opt.threads, "worker threads (default $BOSONLC_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", opt.verbosity, "progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : bosonlc::kExitConfig;
  }
  opt.subcommand = app.get_subcommands().front()->get_name();
  if (!config.empty()) opt.config_path = config;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  return bosonlc::run_app(opt, std::cout, std::cerr);
}
