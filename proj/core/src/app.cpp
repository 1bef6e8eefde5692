#include "bosonlc/app.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <fstream>
#include <ostream>
#include <sstream>

#include "bosonlc/bounds.hpp"
#include "bosonlc/certify.hpp"
#include "bosonlc/checks.hpp"
#include "bosonlc/cluster.hpp"
#include "bosonlc/config.hpp"
#include "bosonlc/errors.hpp"
#include "bosonlc/format.hpp"
#include "bosonlc/scan.hpp"

namespace bosonlc {

namespace {

using nlohmann::json;

json ledger_json(const std::vector<TraceEntry>& trace) {
  json arr = json::array();
  for (const auto& e : trace)
    arr.push_back({{"name", e.name},
                   {"formula", e.formula},
                   {"substituted", e.substituted},
                   {"value", format_double(e.value)},
                   {"provenance", e.provenance}});
  return arr;
}

class Outputs {
 public:
  Outputs(const ExperimentConfig& cfg, std::vector<TraceEntry> trace)
      : dir_(cfg.output_dir), config_(config_to_json(cfg)), ledger_(ledger_json(trace)) {
    std::filesystem::create_directories(dir_);
  }

  // CSV with the resolved config and the constants ledger as comment lines.
  void csv(const std::string& name, const std::function<void(std::ostream&)>& body) const {
    std::ofstream os(path(name));
    os << "# config: " << config_.dump() << '\n';
    os << "# constants: " << ledger_.dump() << '\n';
    body(os);
    check(os, name);
  }

  void json_file(const std::string& name, json payload) const {
    payload["config"] = config_;
    payload["constants_ledger"] = ledger_;
    std::ofstream os(path(name));
    os << payload.dump(2) << '\n';
    check(os, name);
  }

  void text(const std::string& name, const std::string& body) const {
    std::ofstream os(path(name));
    os << body;
    check(os, name);
  }

 private:
  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }
  void check(const std::ostream& os, const std::string& name) const {
    if (!os) throw std::runtime_error("cannot write " + path(name));
  }

  std::string dir_;
  json config_;
  json ledger_;
};

void check_capacity(int sites, int cap, std::optional<int> total, std::size_t max_states) {
  BasisLimits lim;
  lim.num_sites = sites;
  lim.per_site_cap = cap;
  lim.total_cap = total;
  const std::uint64_t n = count_states(lim);
  if (n > max_states)
    throw CapacityError("basis of " + std::to_string(n) + " states exceeds ensemble.max_states = " +
                        std::to_string(max_states));
}

int run_bounds(const ExperimentConfig& cfg, const ModelSpec& model, std::ostream& out) {
  const int K = cfg.bounds.K.value_or(std::max(1, model.graph().max_degree()));
  auto trace = derivation_trace(cfg.ensemble.mu, K, model.range(), cfg.bounds.beta, cfg.constants);
  std::ostringstream text;
  for (const auto& e : trace) {
    text << e.name << " = " << e.formula;
    if (e.substituted != e.formula && e.substituted != format_double(e.value)) text << " = " << e.substituted;
    text << " = " << format_double(e.value) << "  [" << e.provenance << "]\n";
  }
  Outputs files(cfg, trace);
  files.text("bounds_trace.txt", text.str());
  files.json_file("bounds.json", json::object());
  out << text.str();
  return kExitOk;
}

int run_scan(const ExperimentConfig& cfg, const ModelSpec& model, int threads, int verbosity, std::ostream& out,
             std::ostream& err) {
  check_capacity(model.graph().num_vertices(), cfg.ensemble.per_site_cap, cfg.ensemble.total_cap,
                 cfg.ensemble.max_states);
  ScanOptions so;
  so.mu = cfg.ensemble.mu;
  so.per_site_cap = cfg.ensemble.per_site_cap;
  so.total_cap = cfg.ensemble.total_cap;
  so.r_list = cfg.scan.r_list;
  so.t_list = cfg.scan.t_list;
  so.constants = cfg.constants;
  so.evolution = cfg.evolution;
  so.tail_run = cfg.scan.tail_run;
  so.envelope = cfg.scan.envelope;
  so.memory_budget = cfg.scan.memory_budget;
  so.threads = threads;
  ScanResult res = lightcone_scan(model, cfg.scan.o, cfg.scan.probe, so);
  if (verbosity > 0) err << "scan: " << res.cells.size() << " cells in " << res.seconds << " s\n";

  auto trace = derivation_trace(cfg.ensemble.mu, res.K, res.ell, res.beta, cfg.constants);
  Outputs files(cfg, trace);
  files.csv("scan.csv", [&](std::ostream& os) { write_scan_csv(os, res); });
  if (cfg.scan.envelope) files.csv("envelope.csv", [&](std::ostream& os) { write_envelope_csv(os, res); });
  files.json_file("scan.json", {{"result", scan_to_json(res)}});
  out << "scan: " << res.cells.size() << " cells, " << res.violations << " light-cone violations, "
      << res.envelope_violations << " envelope violations\n";
  return res.violations + res.envelope_violations > 0 ? kExitProperty : kExitOk;
}

int run_certify(const ExperimentConfig& cfg, const ModelSpec& model, int verbosity, std::ostream& out,
                std::ostream& err) {
  const CertifyExperiment& ce = cfg.certify;
  CertifyOptions co;
  co.t = ce.t;
  co.assumption = ce.assumption;
  co.constants = cfg.constants;
  co.window_radius = ce.window_radius;
  co.extra_cap = ce.extra_cap;
  co.step_fraction = ce.step_fraction;
  co.max_steps = ce.max_steps;
  co.max_states = cfg.ensemble.max_states;
  co.evolution = cfg.evolution;
  CertifiedValue cv = certified_expectation(model, ce.centre, ce.state, ce.observable, co);
  json payload = {{"certificate", certificate_json(cv)}};

  std::optional<WindowSweep> sweep;
  if (ce.sweep) {
    sweep = window_sweep(model, ce.centre, ce.state, ce.observable, co, ce.sweep->radii,
                         ce.sweep->reference_extra_radius, ce.sweep->reference_extra_cap);
    payload["sweep"] = sweep_json(*sweep);
  }
  auto trace = derivation_trace(cv.assumption.mu, 2, model.range(), 1, cfg.constants);
  Outputs files(cfg, trace);
  files.json_file("certificate.json", payload);
  if (sweep)
    files.csv("window_sweep.csv", [&](std::ostream& os) {
      os << "r,value,error,restriction_bound,total_bound,within,min_constant,cutoff_constant\n";
      for (const auto& p : sweep->points)
        os << p.r << ',' << format_double(p.value.real()) << ',' << format_double(p.error) << ','
           << format_double(p.restriction_bound) << ',' << format_double(p.total_bound) << ',' << (p.within ? 1 : 0)
           << ',' << format_double(p.min_constant) << ',' << format_double(p.cutoff_constant) << '\n';
    });
  out << "certify: value " << format_double(cv.value.real()) << " restriction_error "
      << format_double(cv.restriction_error) << " cutoff_error " << format_double(cv.cutoff_error) << " r " << cv.r
      << " N0 " << cv.N0 << '\n';
  if (sweep)
    out << "sweep: slope " << format_double(sweep->slope) << " limit " << format_double(sweep->slope_limit)
        << (sweep->slope_ok ? " ok" : " above limit") << '\n';
  if (verbosity > 0) err << "certify: basis " << cv.basis_size << " states, " << cv.steps << " steps\n";
  return kExitOk;
}

int run_cluster(const ExperimentConfig& cfg, const ModelSpec& model, std::ostream& out) {
  ClusterOptions co;
  co.o = cfg.cluster.o;
  co.o_prime = cfg.cluster.o_prime;
  co.r_list = cfg.cluster.r_list;
  co.per_site_cap = cfg.ensemble.per_site_cap;
  co.bosons = cfg.cluster.bosons;
  co.assumption = cfg.cluster.assumption;
  co.constants = cfg.constants;
  co.lanczos = cfg.lanczos;
  check_capacity(model.graph().num_vertices(), co.per_site_cap,
                 co.bosons.value_or(model.graph().num_vertices()) + 1, cfg.ensemble.max_states);
  ClusterReport rep = clustering_experiment(model, co);
  auto trace = derivation_trace(rep.assumption.mu, 2, model.range(), 1, cfg.constants);
  Outputs files(cfg, trace);
  files.csv("cluster.csv", [&](std::ostream& os) { write_cluster_csv(os, rep); });
  files.json_file("cluster.json", {{"report", cluster_json(rep)}});
  out << "cluster: gap " << format_double(rep.gap) << " slope " << format_double(rep.fit_slope)
      << (rep.monotone ? " monotone" : " not monotone") << '\n';
  return kExitOk;
}

int run_selftest_cmd(const ExperimentConfig& cfg, int threads, std::ostream& out) {
  SelftestOptions so;
  so.seed = cfg.seed;
  so.instances = cfg.selftest.instances;
  so.threads = threads;
  auto results = run_selftest(so);
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed();
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << " instances=" << r.instances << " violations=" << r.violations
        << " worst_ratio=" << format_double(r.worst_ratio) << '\n';
  }
  Outputs files(cfg, {});
  files.json_file("selftest.json", {{"checks", fuzz_json(results)}, {"passed", ok}});
  return ok ? kExitOk : kExitProperty;
}

}  // namespace

int run_app(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg;
    if (opt.config_path) {
      cfg = load_config(*opt.config_path, opt.overrides);
    } else if (opt.subcommand == "selftest") {
      cfg = parse_config("model: {graph: {kind: path, length: 1}}\nexperiment: {selftest: {}}\n", opt.overrides);
    } else {
      throw ConfigError("--config: required for " + opt.subcommand);
    }
    if (opt.out_dir) cfg.output_dir = *opt.out_dir;
    if (cfg.kind != opt.subcommand)
      throw ConfigError("experiment: config describes '" + cfg.kind + "' but the subcommand is '" + opt.subcommand + "'");
    const int threads = std::max(1, opt.threads);
    ModelSpec model = build_model(cfg.model);
    if (cfg.kind == "bounds") return run_bounds(cfg, model, out);
    if (cfg.kind == "scan") return run_scan(cfg, model, threads, opt.verbosity, out, err);
    if (cfg.kind == "certify") return run_certify(cfg, model, opt.verbosity, out, err);
    if (cfg.kind == "cluster") return run_cluster(cfg, model, out);
    return run_selftest_cmd(cfg, threads, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const PropertyViolation& e) {
    err << "property violation: " << e.what() << '\n';
    return kExitProperty;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace bosonlc
