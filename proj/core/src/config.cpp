#include "bosonlc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "bosonlc/errors.hpp"

namespace bosonlc {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + msg);
}

// A markup node together with its field path, for error messages.
class Field {
 public:
  Field(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  bool present() const { return node_.IsDefined() && !node_.IsNull(); }
  const YAML::Node& node() const { return node_; }

  Field operator[](const std::string& key) const {
    if (present() && !node_.IsMap()) fail(path_, "expected a map");
    return Field(present() ? node_[key] : YAML::Node(), join(path_, key));
  }
  Field at(std::size_t i) const { return Field(node_[i], path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const { return node_.size(); }

  void expect_map(const std::set<std::string>& allowed) const {
    if (!present()) return;
    if (!node_.IsMap()) fail(path_, "expected a map");
    for (const auto& kv : node_) {
      auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(join(path_, key), "unknown key");
    }
  }
  void expect_sequence() const {
    if (!node_.IsSequence()) fail(path_, "expected a list");
  }

  template <class T>
  T as(const char* what) const {
    if (!present()) fail(path_, "missing");
    if (!node_.IsScalar()) fail(path_, std::string("expected ") + what);
    try {
      return node_.as<T>();
    } catch (const YAML::Exception&) {
      fail(path_, std::string("expected ") + what);
    }
  }
  double number() const {
    double x = as<double>("a number");
    if (!std::isfinite(x)) fail(path_, "must be finite");
    return x;
  }
  int integer() const {
    auto x = as<long long>("an integer");
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(path_, "out of range");
    return static_cast<int>(x);
  }
  bool boolean() const { return as<bool>("true or false"); }
  std::string string() const { return as<std::string>("a string"); }

  cplx complex() const {
    if (present() && node_.IsSequence()) {
      if (node_.size() != 2) fail(path_, "expected [re, im]");
      return {at(0).number(), at(1).number()};
    }
    return {number(), 0.0};
  }
  std::vector<int> int_list() const {
    expect_sequence();
    std::vector<int> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).integer());
    return out;
  }
  std::vector<double> number_list() const {
    expect_sequence();
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
  }

  void get(double& x) const { if (present()) x = number(); }
  void get(int& x) const { if (present()) x = integer(); }
  void get(long& x) const { if (present()) x = as<long>("an integer"); }
  void get(bool& x) const { if (present()) x = boolean(); }
  void get(std::string& x) const { if (present()) x = string(); }
  void get(std::optional<int>& x) const { if (present()) x = integer(); }

 private:
  YAML::Node node_;
  std::string path_;
};

void positive(const Field& f, double x) {
  if (!(x > 0.0)) fail(f.path(), "must be positive");
}
void at_least(const Field& f, long x, long lo) {
  if (x < lo) fail(f.path(), "must be >= " + std::to_string(lo));
}

void apply_override(YAML::Node root, const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) fail("--set " + text, "expected key.path=value");
  std::string key = text.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(text.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    fail(key, std::string("cannot parse override value: ") + e.what());
  }
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) fail(key, "empty path component");
    parts.push_back(p);
  }
  // Node handles share storage, so walking by value edits the tree in place.
  std::function<void(YAML::Node, std::size_t)> walk = [&](YAML::Node node, std::size_t i) {
    const std::string& p = parts[i];
    const bool index = node.IsSequence() && !p.empty() && std::all_of(p.begin(), p.end(), ::isdigit);
    if (i + 1 == parts.size()) {
      if (index) {
        std::size_t k = std::stoul(p);
        if (k >= node.size()) fail(key, "index out of range");
        node[k] = value;
      } else {
        node[p] = value;
      }
      return;
    }
    if (index) {
      std::size_t k = std::stoul(p);
      if (k >= node.size()) fail(key, "index out of range");
      walk(node[k], i + 1);
      return;
    }
    if (!node[p].IsMap() && !node[p].IsSequence()) node[p] = YAML::Node(YAML::NodeType::Map);
    walk(node[p], i + 1);
  };
  if (!root.IsMap()) fail("", "config must be a map");
  walk(root, 0);
}

GraphConfig parse_graph(const Field& f) {
  f.expect_map({"kind", "length", "dims", "K", "depth"});
  GraphConfig g;
  f["kind"].get(g.kind);
  if (g.kind == "path") {
    g.length = f["length"].integer();
    at_least(f["length"], g.length, 1);
  } else if (g.kind == "cubic") {
    g.dims = f["dims"].int_list();
    if (g.dims.empty()) fail(f["dims"].path(), "must not be empty");
    for (std::size_t i = 0; i < g.dims.size(); ++i) at_least(f["dims"].at(i), g.dims[i], 2);
  } else if (g.kind == "tree") {
    g.K = f["K"].integer();
    g.depth = f["depth"].integer();
    at_least(f["K"], g.K, 2);
    at_least(f["depth"], g.depth, 0);
  } else {
    fail(f["kind"].path(), "expected path, cubic or tree");
  }
  return g;
}

ModelConfig parse_model(const Field& f) {
  if (!f.present()) fail(f.path(), "missing");
  f.expect_map({"graph", "range", "J", "U0", "terms", "schedule"});
  ModelConfig m;
  m.graph = parse_graph(f["graph"]);
  f["range"].get(m.range);
  at_least(f["range"], m.range, 0);
  if (f["J"].present()) m.J = f["J"].complex();
  if (std::abs(m.J) > 1.0) fail(f["J"].path(), "|J| must be <= 1");
  f["U0"].get(m.U0);
  if (f["terms"].present()) {
    f["terms"].expect_sequence();
    for (std::size_t i = 0; i < f["terms"].size(); ++i) {
      Field t = f["terms"].at(i);
      t.expect_map({"support", "monomials"});
      TermConfig tc;
      tc.support = t["support"].int_list();
      t["monomials"].expect_sequence();
      for (std::size_t k = 0; k < t["monomials"].size(); ++k) {
        Field mono = t["monomials"].at(k);
        mono.expect_map({"coeff", "powers"});
        DensityMonomial dm;
        dm.coeff = mono["coeff"].number();
        dm.powers = mono["powers"].int_list();
        if (dm.powers.size() != tc.support.size()) fail(mono["powers"].path(), "needs one power per support vertex");
        tc.monomials.push_back(dm);
      }
      m.terms.push_back(tc);
    }
  }
  if (f["schedule"].present()) {
    f["schedule"].expect_sequence();
    for (std::size_t i = 0; i < f["schedule"].size(); ++i) {
      Field s = f["schedule"].at(i);
      s.expect_map({"start", "J", "U_scale"});
      SegmentConfig sc;
      sc.start = s["start"].number();
      if (s["J"].present()) sc.J = s["J"].complex();
      if (std::abs(sc.J) > 1.0) fail(s["J"].path(), "|J| must be <= 1");
      s["U_scale"].get(sc.U_scale);
      m.schedule.push_back(sc);
    }
    if (!m.schedule.empty() && m.schedule.front().start != 0.0) fail(f["schedule"].at(0)["start"].path(), "first segment must start at 0");
    for (std::size_t i = 1; i < m.schedule.size(); ++i)
      if (!(m.schedule[i].start > m.schedule[i - 1].start))
        fail(f["schedule"].at(i)["start"].path(), "segment starts must increase");
  }
  return m;
}

MonomialOp parse_monomial(const Field& f) {
  if (!f.present()) fail(f.path(), "missing");
  f.expect_map({"kind", "site", "sites", "create", "annihilate"});
  MonomialOp m;
  if (f["kind"].present()) {
    std::string kind = f["kind"].string();
    int site = f["site"].integer();
    m.sites = {site};
    if (kind == "b") {
      m.create = {0};
      m.annihilate = {1};
    } else if (kind == "bdag") {
      m.create = {1};
      m.annihilate = {0};
    } else if (kind == "n") {
      m.create = {1};
      m.annihilate = {1};
    } else {
      fail(f["kind"].path(), "expected b, bdag or n");
    }
    return m;
  }
  m.sites = f["sites"].int_list();
  m.create = f["create"].int_list();
  m.annihilate = f["annihilate"].int_list();
  if (m.sites.empty()) fail(f["sites"].path(), "must not be empty");
  if (m.create.size() != m.sites.size()) fail(f["create"].path(), "needs one exponent per site");
  if (m.annihilate.size() != m.sites.size()) fail(f["annihilate"].path(), "needs one exponent per site");
  std::set<int> seen(m.sites.begin(), m.sites.end());
  if (seen.size() != m.sites.size()) fail(f["sites"].path(), "sites repeat");
  for (std::size_t i = 0; i < m.sites.size(); ++i) {
    at_least(f["create"].at(i), m.create[i], 0);
    at_least(f["annihilate"].at(i), m.annihilate[i], 0);
  }
  if (m.beta() < 1) fail(f.path(), "monomial needs at least one ladder operator");
  return m;
}

void check_sites(const Field& f, const MonomialOp& m, int num_vertices) {
  for (Vertex s : m.sites)
    if (s < 0 || s >= num_vertices) fail(f.path(), "site " + std::to_string(s) + " is not a graph vertex");
}

DensityAssumption parse_assumption(const Field& f) {
  f.expect_map({"mu", "theta", "K0", "form"});
  DensityAssumption a;
  a.mu = f["mu"].number();
  a.theta = f["theta"].number();
  a.K0 = f["K0"].number();
  positive(f["mu"], a.mu);
  if (a.theta < 1.0) fail(f["theta"].path(), "must be >= 1");
  if (a.K0 < 1.0) fail(f["K0"].path(), "must be >= 1");
  std::string form = "partial_trace";
  f["form"].get(form);
  if (form == "partial_trace") a.form = AnsatzForm::kPartialTrace;
  else if (form == "inner_product") a.form = AnsatzForm::kInnerProduct;
  else fail(f["form"].path(), "expected partial_trace or inner_product");
  return a;
}

InitialState parse_state(const Field& f) {
  if (!f.present()) fail(f.path(), "missing");
  f.expect_map({"kind", "occupations", "amplitudes"});
  InitialState s;
  std::string kind = f["kind"].string();
  if (kind == "fock") {
    s.kind = InitialState::Kind::kFock;
    s.occupations = f["occupations"].int_list();
    if (s.occupations.empty()) fail(f["occupations"].path(), "must not be empty");
    for (std::size_t i = 0; i < s.occupations.size(); ++i) {
      at_least(f["occupations"].at(i), s.occupations[i], 0);
      if (s.occupations[i] > 255) fail(f["occupations"].at(i).path(), "must be <= 255");
    }
  } else if (kind == "product") {
    s.kind = InitialState::Kind::kProduct;
    Field amps = f["amplitudes"];
    amps.expect_sequence();
    if (amps.size() == 0) fail(amps.path(), "must not be empty");
    for (std::size_t i = 0; i < amps.size(); ++i) {
      Field site = amps.at(i);
      site.expect_sequence();
      std::vector<cplx> v;
      double norm = 0.0;
      for (std::size_t n = 0; n < site.size(); ++n) {
        v.push_back(site.at(n).complex());
        norm += std::norm(v.back());
      }
      if (!(norm > 0.0)) fail(site.path(), "amplitudes must not all vanish");
      if (v.size() > 256) fail(site.path(), "at most 256 levels");
      s.amplitudes.push_back(v);
    }
  } else {
    fail(f["kind"].path(), "expected fock or product");
  }
  return s;
}

void parse_constants(const Field& f, ChainConstants& c) {
  f.expect_map({"theta", "K0", "epsilon", "C1", "C3", "C4", "C5"});
  const std::pair<const char*, double*> slots[] = {{"theta", &c.theta}, {"K0", &c.K0}, {"epsilon", &c.epsilon},
                                                   {"C1", &c.C1},       {"C3", &c.C3}, {"C4", &c.C4},
                                                   {"C5", &c.C5}};
  for (const auto& [key, slot] : slots) {
    f[key].get(*slot);
    positive(f[key], *slot);
  }
}

void parse_evolution(const Field& f, EvolutionConfig& e) {
  f.expect_map({"integrator", "tolerance", "max_step", "krylov_dim", "operator_method", "dense_threshold",
                "taylor_span"});
  if (f["integrator"].present()) {
    std::string s = f["integrator"].string();
    if (s == "krylov") e.integrator = Integrator::kKrylov;
    else if (s == "taylor") e.integrator = Integrator::kTaylor;
    else fail(f["integrator"].path(), "expected krylov or taylor");
  }
  if (f["operator_method"].present()) {
    std::string s = f["operator_method"].string();
    if (s == "auto") e.operator_method = OperatorMethod::kAuto;
    else if (s == "taylor") e.operator_method = OperatorMethod::kTaylor;
    else if (s == "spectral") e.operator_method = OperatorMethod::kSpectral;
    else fail(f["operator_method"].path(), "expected auto, taylor or spectral");
  }
  f["tolerance"].get(e.tolerance);
  f["max_step"].get(e.max_step);
  f["krylov_dim"].get(e.krylov_dim);
  f["taylor_span"].get(e.taylor_span);
  if (f["dense_threshold"].present()) {
    int d = f["dense_threshold"].integer();
    at_least(f["dense_threshold"], d, 1);
    e.dense_threshold = static_cast<std::size_t>(d);
  }
  positive(f["tolerance"], e.tolerance);
  positive(f["max_step"], e.max_step);
  positive(f["taylor_span"], e.taylor_span);
  at_least(f["krylov_dim"], e.krylov_dim, 2);
}

void parse_lanczos(const Field& f, LanczosOptions& l) {
  f.expect_map({"max_krylov", "max_restarts", "tolerance", "degeneracy_tol"});
  f["max_krylov"].get(l.max_krylov);
  f["max_restarts"].get(l.max_restarts);
  f["tolerance"].get(l.tolerance);
  f["degeneracy_tol"].get(l.degeneracy_tol);
  at_least(f["max_krylov"], l.max_krylov, 4);
  at_least(f["max_restarts"], l.max_restarts, 1);
  positive(f["tolerance"], l.tolerance);
  positive(f["degeneracy_tol"], l.degeneracy_tol);
}

std::vector<int> positive_ints(const Field& f) {
  std::vector<int> v = f.int_list();
  if (v.empty()) fail(f.path(), "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) at_least(f.at(i), v[i], 1);
  return v;
}

void parse_experiment(const Field& f, ExperimentConfig& c, const Graph& g) {
  if (!f.present()) fail(f.path(), "missing");
  f.expect_map({"bounds", "scan", "certify", "cluster", "selftest"});
  if (f.node().size() != 1) fail(f.path(), "expected exactly one of bounds, scan, certify, cluster, selftest");
  c.kind = f.node().begin()->first.as<std::string>();
  const int nv = g.num_vertices();
  Field e = f[c.kind];
  if (c.kind == "bounds") {
    e.expect_map({"beta", "K"});
    e["beta"].get(c.bounds.beta);
    at_least(e["beta"], c.bounds.beta, 1);
    e["K"].get(c.bounds.K);
    if (c.bounds.K) at_least(e["K"], *c.bounds.K, 1);
  } else if (c.kind == "scan") {
    e.expect_map({"operator", "probe", "r_list", "t_list", "tail_run", "envelope", "memory_budget_mb"});
    c.scan.o = parse_monomial(e["operator"]);
    check_sites(e["operator"], c.scan.o, nv);
    c.scan.probe = parse_monomial(e["probe"]);
    check_sites(e["probe"], c.scan.probe, nv);
    c.scan.r_list = positive_ints(e["r_list"]);
    c.scan.t_list = e["t_list"].number_list();
    if (c.scan.t_list.empty()) fail(e["t_list"].path(), "must not be empty");
    for (std::size_t i = 0; i < c.scan.t_list.size(); ++i) {
      if (c.scan.t_list[i] < 0.0) fail(e["t_list"].at(i).path(), "must be >= 0");
      if (i > 0 && !(c.scan.t_list[i] > c.scan.t_list[i - 1])) fail(e["t_list"].at(i).path(), "times must increase");
    }
    e["tail_run"].get(c.scan.tail_run);
    e["envelope"].get(c.scan.envelope);
    if (e["memory_budget_mb"].present()) {
      int mb = e["memory_budget_mb"].integer();
      at_least(e["memory_budget_mb"], mb, 1);
      c.scan.memory_budget = static_cast<std::size_t>(mb) << 20;
    }
  } else if (c.kind == "certify") {
    if (c.model.graph.kind != "path") fail("model.graph.kind", "certify needs a path graph");
    e.expect_map({"t", "centre", "state", "observable", "assumption", "window_radius", "extra_cap", "step_fraction",
                  "max_steps", "sweep"});
    CertifyExperiment& ce = c.certify;
    ce.t = e["t"].number();
    if (ce.t < 0.0) fail(e["t"].path(), "must be >= 0");
    ce.centre = e["centre"].present() ? e["centre"].integer() : nv / 2;
    if (ce.centre < 0 || ce.centre >= nv) fail(e["centre"].path(), "is not a graph vertex");
    ce.state = parse_state(e["state"]);
    ce.observable = parse_monomial(e["observable"]);
    if (e["assumption"].present()) ce.assumption = parse_assumption(e["assumption"]);
    e["window_radius"].get(ce.window_radius);
    if (ce.window_radius) at_least(e["window_radius"], *ce.window_radius, 1);
    e["extra_cap"].get(ce.extra_cap);
    at_least(e["extra_cap"], ce.extra_cap, 0);
    e["step_fraction"].get(ce.step_fraction);
    positive(e["step_fraction"], ce.step_fraction);
    e["max_steps"].get(ce.max_steps);
    at_least(e["max_steps"], ce.max_steps, 1);
    if (e["sweep"].present()) {
      Field s = e["sweep"];
      s.expect_map({"radii", "reference_extra_radius", "reference_extra_cap"});
      SweepConfig sc;
      sc.radii = positive_ints(s["radii"]);
      s["reference_extra_radius"].get(sc.reference_extra_radius);
      s["reference_extra_cap"].get(sc.reference_extra_cap);
      at_least(s["reference_extra_radius"], sc.reference_extra_radius, 1);
      at_least(s["reference_extra_cap"], sc.reference_extra_cap, 0);
      ce.sweep = sc;
    }
  } else if (c.kind == "cluster") {
    if (c.model.graph.kind != "path") fail("model.graph.kind", "cluster needs a path graph");
    e.expect_map({"operator", "partner", "r_list", "bosons", "assumption"});
    c.cluster.o = parse_monomial(e["operator"]);
    check_sites(e["operator"], c.cluster.o, nv);
    c.cluster.o_prime = parse_monomial(e["partner"]);
    check_sites(e["partner"], c.cluster.o_prime, nv);
    c.cluster.r_list = positive_ints(e["r_list"]);
    e["bosons"].get(c.cluster.bosons);
    if (c.cluster.bosons) at_least(e["bosons"], *c.cluster.bosons, 0);
    if (e["assumption"].present()) c.cluster.assumption = parse_assumption(e["assumption"]);
  } else {
    e.expect_map({"instances"});
    e["instances"].get(c.selftest.instances);
    at_least(e["instances"], c.selftest.instances, 1);
  }
}

ExperimentConfig parse_root(YAML::Node root) {
  Field f(root, "");
  f.expect_map({"seed", "model", "ensemble", "constants", "evolution", "lanczos", "experiment", "output"});
  ExperimentConfig c;
  if (f["seed"].present()) {
    auto s = f["seed"].as<long long>("an integer");
    if (s < 0) fail("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  c.model = parse_model(f["model"]);
  Graph g = build_graph(c.model.graph);

  Field ens = f["ensemble"];
  ens.expect_map({"mu", "per_site_cap", "total_cap", "max_states"});
  ens["mu"].get(c.ensemble.mu);
  positive(ens["mu"], c.ensemble.mu);
  ens["per_site_cap"].get(c.ensemble.per_site_cap);
  at_least(ens["per_site_cap"], c.ensemble.per_site_cap, 1);
  if (c.ensemble.per_site_cap > 255) fail(ens["per_site_cap"].path(), "must be <= 255");
  ens["total_cap"].get(c.ensemble.total_cap);
  if (c.ensemble.total_cap) at_least(ens["total_cap"], *c.ensemble.total_cap, 1);
  if (ens["max_states"].present()) {
    auto m = ens["max_states"].as<long long>("an integer");
    at_least(ens["max_states"], m, 1);
    c.ensemble.max_states = static_cast<std::size_t>(m);
  }

  parse_constants(f["constants"], c.constants);
  parse_evolution(f["evolution"], c.evolution);
  parse_lanczos(f["lanczos"], c.lanczos);
  c.lanczos.seed = c.seed;
  parse_experiment(f["experiment"], c, g);

  Field out = f["output"];
  out.expect_map({"dir"});
  out["dir"].get(c.output_dir);
  if (c.output_dir.empty()) fail(out["dir"].path(), "must not be empty");

  // Term supports and diameters are checked by the model itself.
  try {
    build_model(c.model);
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
  return c;
}

nlohmann::json complex_json(cplx z) {
  if (z.imag() == 0.0) return z.real();
  return nlohmann::json::array({z.real(), z.imag()});
}

nlohmann::json monomial_json(const MonomialOp& m) {
  return {{"sites", m.sites}, {"create", m.create}, {"annihilate", m.annihilate}};
}

nlohmann::json assumption_json(const std::optional<DensityAssumption>& a) {
  if (!a) return nullptr;
  return {{"mu", a->mu},
          {"theta", a->theta},
          {"K0", a->K0},
          {"form", a->form == AnsatzForm::kPartialTrace ? "partial_trace" : "inner_product"}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail("", std::string("cannot parse config: ") + e.what());
  }
  if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);
  return parse_root(root);
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

Graph build_graph(const GraphConfig& g) {
  if (g.kind == "path") return build_path(g.length);
  if (g.kind == "cubic") return build_cubic(g.dims);
  return build_regular_tree(g.K, g.depth);
}

ModelSpec build_model(const ModelConfig& m) {
  Graph g = build_graph(m.graph);
  std::vector<Interaction> inter;
  if (m.U0 != 0.0)
    for (Vertex v = 0; v < g.num_vertices(); ++v) inter.push_back({{v}, {{m.U0, {2}}, {-m.U0, {1}}}});
  for (const TermConfig& t : m.terms) inter.push_back({t.support, t.monomials});
  std::vector<Segment> schedule;
  if (m.schedule.empty()) {
    Segment s;
    s.hopping.assign(g.edges().size(), m.J);
    s.scale.assign(inter.size(), 1.0);
    schedule.push_back(s);
  } else {
    for (const SegmentConfig& sc : m.schedule) {
      Segment s;
      s.start = sc.start;
      s.hopping.assign(g.edges().size(), sc.J);
      s.scale.assign(inter.size(), sc.U_scale);
      schedule.push_back(s);
    }
  }
  return ModelSpec(g, m.range, inter, schedule);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["seed"] = c.seed;
  json graph = {{"kind", c.model.graph.kind}};
  if (c.model.graph.kind == "path") graph["length"] = c.model.graph.length;
  if (c.model.graph.kind == "cubic") graph["dims"] = c.model.graph.dims;
  if (c.model.graph.kind == "tree") {
    graph["K"] = c.model.graph.K;
    graph["depth"] = c.model.graph.depth;
  }
  json terms = json::array();
  for (const auto& t : c.model.terms) {
    json monos = json::array();
    for (const auto& m : t.monomials) monos.push_back({{"coeff", m.coeff}, {"powers", m.powers}});
    terms.push_back({{"support", t.support}, {"monomials", monos}});
  }
  json schedule = json::array();
  for (const auto& s : c.model.schedule)
    schedule.push_back({{"start", s.start}, {"J", complex_json(s.J)}, {"U_scale", s.U_scale}});
  j["model"] = {{"graph", graph},      {"range", c.model.range}, {"J", complex_json(c.model.J)},
                {"U0", c.model.U0},    {"terms", terms},         {"schedule", schedule}};
  j["ensemble"] = {{"mu", c.ensemble.mu},
                   {"per_site_cap", c.ensemble.per_site_cap},
                   {"total_cap", c.ensemble.total_cap ? json(*c.ensemble.total_cap) : json(nullptr)},
                   {"max_states", c.ensemble.max_states}};
  j["constants"] = {{"theta", c.constants.theta}, {"K0", c.constants.K0}, {"epsilon", c.constants.epsilon},
                    {"C1", c.constants.C1},       {"C3", c.constants.C3}, {"C4", c.constants.C4},
                    {"C5", c.constants.C5}};
  const auto& e = c.evolution;
  j["evolution"] = {
      {"integrator", e.integrator == Integrator::kKrylov ? "krylov" : "taylor"},
      {"tolerance", e.tolerance},
      {"max_step", e.max_step},
      {"krylov_dim", e.krylov_dim},
      {"operator_method", e.operator_method == OperatorMethod::kAuto
                              ? "auto"
                              : (e.operator_method == OperatorMethod::kTaylor ? "taylor" : "spectral")},
      {"dense_threshold", e.dense_threshold},
      {"taylor_span", e.taylor_span}};
  j["lanczos"] = {{"max_krylov", c.lanczos.max_krylov},
                  {"max_restarts", c.lanczos.max_restarts},
                  {"tolerance", c.lanczos.tolerance},
                  {"degeneracy_tol", c.lanczos.degeneracy_tol}};
  json ex;
  if (c.kind == "bounds") {
    ex = {{"beta", c.bounds.beta}, {"K", c.bounds.K ? json(*c.bounds.K) : json(nullptr)}};
  } else if (c.kind == "scan") {
    ex = {{"operator", monomial_json(c.scan.o)},
          {"probe", monomial_json(c.scan.probe)},
          {"r_list", c.scan.r_list},
          {"t_list", c.scan.t_list},
          {"tail_run", c.scan.tail_run},
          {"envelope", c.scan.envelope},
          {"memory_budget_mb", c.scan.memory_budget >> 20}};
  } else if (c.kind == "certify") {
    const auto& ce = c.certify;
    json state = {{"kind", ce.state.kind == InitialState::Kind::kFock ? "fock" : "product"}};
    if (ce.state.kind == InitialState::Kind::kFock) {
      state["occupations"] = ce.state.occupations;
    } else {
      json amps = json::array();
      for (const auto& site : ce.state.amplitudes) {
        json a = json::array();
        for (cplx z : site) a.push_back(complex_json(z));
        amps.push_back(a);
      }
      state["amplitudes"] = amps;
    }
    ex = {{"t", ce.t},
          {"centre", ce.centre},
          {"state", state},
          {"observable", monomial_json(ce.observable)},
          {"assumption", assumption_json(ce.assumption)},
          {"window_radius", ce.window_radius ? json(*ce.window_radius) : json(nullptr)},
          {"extra_cap", ce.extra_cap},
          {"step_fraction", ce.step_fraction},
          {"max_steps", ce.max_steps}};
    if (ce.sweep)
      ex["sweep"] = {{"radii", ce.sweep->radii},
                     {"reference_extra_radius", ce.sweep->reference_extra_radius},
                     {"reference_extra_cap", ce.sweep->reference_extra_cap}};
  } else if (c.kind == "cluster") {
    ex = {{"operator", monomial_json(c.cluster.o)},
          {"partner", monomial_json(c.cluster.o_prime)},
          {"r_list", c.cluster.r_list},
          {"bosons", c.cluster.bosons ? json(*c.cluster.bosons) : json(nullptr)},
          {"assumption", assumption_json(c.cluster.assumption)}};
  } else {
    ex = {{"instances", c.selftest.instances}};
  }
  j["experiment"] = {{c.kind, ex}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

}  // namespace bosonlc
