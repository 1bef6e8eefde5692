#include "bosonlc/scan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "bosonlc/format.hpp"
#include "bosonlc/parallel.hpp"

namespace bosonlc {

namespace {

std::vector<Vertex> support_of(const MonomialOp& o) {
  std::set<Vertex> s(o.sites.begin(), o.sites.end());
  return {s.begin(), s.end()};
}

Vertex probe_target(const Graph& g, const std::vector<Vertex>& region, int r) {
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (distance_to_set(g, v, region) == r) return v;
  throw std::invalid_argument("no vertex at distance " + std::to_string(r) + " from the operator support");
}

MonomialOp place_probe(const Graph& g, const MonomialOp& probe, Vertex target) {
  std::vector<Vertex> sites;
  for (Vertex s : probe.sites) {
    Vertex v = s + (target - probe.sites.front());
    if (v < 0 || v >= g.num_vertices()) throw std::invalid_argument("shifted probe leaves the graph");
    sites.push_back(v);
  }
  return probe.moved_to(sites);
}

}  // namespace

SupportSeeds support_seeds(const MonomialOp& o, int beta, double mu) {
  std::vector<Vertex> region = support_of(o);
  const int k = static_cast<int>(region.size());
  int top = 0;
  for (std::size_t i = 0; i < o.sites.size(); ++i) top = std::max({top, o.create.at(i), o.annihilate.at(i)});
  int cap = std::clamp(static_cast<int>(std::ceil(40.0 / mu)) + top, 1, 255);
  while (cap > top + 1 && std::pow(cap + 1.0, k) > 2e6) --cap;
  BasisLimits lim;
  lim.num_sites = k;
  lim.per_site_cap = cap;
  FockBasis basis = FockBasis::enumerate(lim);
  std::vector<Vertex> local;
  for (Vertex s : o.sites) local.push_back(static_cast<Vertex>(std::lower_bound(region.begin(), region.end(), s) - region.begin()));
  OperatorMatrix m = o.moved_to(local).matrix(basis);
  MuWeights w(mu, k);
  SupportSeeds out;
  for (int x = 0; x < k; ++x) out.seeds.push_back(f_beta_raw(m, x, beta, w));
  out.norm2 = weighted_norm2(m, w);
  return out;
}

ScanResult lightcone_scan(const ModelSpec& model, const MonomialOp& o, const MonomialOp& probe, const ScanOptions& opt) {
  const auto clock_start = std::chrono::steady_clock::now();
  const Graph& g = model.graph();
  if (o.sites.empty() || probe.sites.empty()) throw std::invalid_argument("scan operators need a nonempty support");
  for (Vertex v : o.sites)
    if (v < 0 || v >= g.num_vertices()) throw std::invalid_argument("operator site out of range");
  for (int r : opt.r_list)
    if (r < 1) throw std::invalid_argument("scan distances must be >= 1");
  for (std::size_t k = 0; k < opt.t_list.size(); ++k)
    if (opt.t_list[k] < 0 || (k > 0 && opt.t_list[k] < opt.t_list[k - 1]))
      throw std::invalid_argument("scan times must be nonnegative and ascending");

  ScanResult res;
  res.mu = opt.mu;
  res.per_site_cap = opt.per_site_cap;
  res.total_cap = opt.total_cap;
  res.beta = probe.beta();
  res.gamma = probe.gamma();
  res.ell = model.range();
  res.K = std::max(1, g.max_degree());

  BasisLimits lim;
  lim.num_sites = g.num_vertices();
  lim.per_site_cap = opt.per_site_cap;
  lim.total_cap = opt.total_cap;
  FockBasis basis = FockBasis::enumerate(lim);
  res.basis_size = basis.size();
  MuWeights w(opt.mu, g.num_vertices());

  const std::vector<Vertex> region = support_of(o);
  SupportSeeds ss = support_seeds(o, res.beta, opt.mu);
  res.seeds = ss.seeds;
  res.norm2 = ss.norm2;
  ThermalBoundInputs in;
  in.mu = opt.mu;
  in.beta = res.beta;
  in.gamma = res.gamma;
  in.ell = res.ell;
  in.K = res.K;
  for (double s : ss.seeds) in.seed_sum += s;
  in.region_size = static_cast<int>(region.size());
  in.fattened_size = static_cast<int>(fatten(g, region, res.ell).size());
  in.norm2 = ss.norm2;
  res.velocity = velocity_bound(opt.mu, res.K, res.ell, res.beta);
  res.prefactor = thermal_bound_prefactor(in);

  std::vector<Vertex> targets;
  std::vector<SparseBlocks> probes;
  for (int r : opt.r_list) {
    targets.push_back(probe_target(g, region, r));
    probes.push_back(sparse_blocks(basis, place_probe(g, probe, targets.back()).sparse(basis)));
  }

  const OperatorMatrix om = o.matrix(basis);
  std::vector<OperatorMatrix::Key> keys;
  std::size_t bytes_per_time = 0;
  for (const auto& [key, blk] : om.blocks()) {
    keys.push_back(key);
    bytes_per_time += static_cast<std::size_t>(blk.size()) * sizeof(cplx);
  }
  const std::size_t chunk =
      std::max<std::size_t>(1, opt.memory_budget / std::max<std::size_t>(1, 2 * bytes_per_time));

  HeisenbergEvolver ev(model, basis, opt.evolution);
  if (!opt.t_list.empty()) ev.prepare(keys, opt.t_list.back());

  const std::size_t nt = opt.t_list.size(), nr = opt.r_list.size();
  const int nsites = g.num_vertices();
  std::vector<double> exact(nr * nt, 0.0);
  std::vector<double> measured(opt.envelope ? nsites * nt : 0, 0.0);

  for (std::size_t first = 0; first < nt; first += chunk) {
    const std::size_t last = std::min(nt, first + chunk);
    std::vector<double> times(opt.t_list.begin() + first, opt.t_list.begin() + last);
    std::vector<OperatorMatrix> X(times.size(), OperatorMatrix(basis));
    for (auto& x : X)
      for (const auto& key : keys) x.blocks()[key];
    parallel_for(keys.size(), opt.threads, [&](std::size_t i) {
      const auto& key = keys[i];
      auto out = ev.evolve_block(key.first, key.second, *om.find(key.first, key.second), times);
      for (std::size_t k = 0; k < times.size(); ++k) X[k].blocks()[key] = std::move(out[k]);
    });
    const std::size_t per_time = nr + (opt.envelope ? nsites : 0);
    parallel_for(times.size() * per_time, opt.threads, [&](std::size_t task) {
      const std::size_t k = task / per_time, j = task % per_time;
      const std::size_t ti = first + k;
      if (j < nr)
        exact[j * nt + ti] = commutator_weighted_norm(X[k], probes[j], w);
      else
        measured[(j - nr) * nt + ti] = f_beta_expectation(X[k], static_cast<int>(j - nr), res.beta, w);
    });
  }

  std::vector<double> exact_low, measured_low;
  const double q = std::exp(-opt.mu);
  const bool have_tail = opt.tail_run && opt.per_site_cap >= 2 && (!opt.total_cap || *opt.total_cap >= 2);
  if (have_tail) {
    ScanOptions low = opt;
    low.per_site_cap = opt.per_site_cap - 1;
    if (opt.total_cap) low.total_cap = *opt.total_cap - 1;
    low.tail_run = false;
    ScanResult lr = lightcone_scan(model, o, probe, low);
    for (const auto& c : lr.cells) exact_low.push_back(c.exact);
    for (const auto& e : lr.envelope) measured_low.push_back(e.measured);
  }
  auto tail_of = [&](double hi, const std::vector<double>& lows, std::size_t idx) {
    if (!have_tail) return opt.tail_run ? std::numeric_limits<double>::infinity() : 0.0;
    return std::abs(hi - lows[idx]) * q / (1.0 - q);
  };

  for (std::size_t j = 0; j < nr; ++j)
    for (std::size_t ti = 0; ti < nt; ++ti) {
      ScanCell c;
      c.r = opt.r_list[j];
      c.t = opt.t_list[ti];
      c.probe_site = targets[j];
      c.exact = exact[j * nt + ti];
      c.tail = tail_of(c.exact, exact_low, res.cells.size());
      c.bound_thermal = thermal_commutator_bound(c.r, c.t, in);
      c.bound_state = state_commutator_bound(c.r, c.t, opt.mu, res.ell, res.K, opt.constants);
      c.in_cone = res.velocity * c.t < c.r;
      c.ratio = (std::isinf(c.bound_thermal) || c.exact + c.tail == 0.0) ? 0.0 : (c.exact + c.tail) / c.bound_thermal;
      c.violation = c.in_cone && !(c.exact + c.tail <= c.bound_thermal);
      res.violations += c.violation;
      res.cells.push_back(c);
    }

  if (opt.envelope && nt > 0) {
    auto c0 = initial_envelope(g, region, res.ell, opt.mu, res.beta, ss.seeds, ss.norm2);
    auto traj = integrate_envelope(g, m_matrix_bound(opt.mu, res.beta, res.ell, res.K), res.ell, c0, opt.t_list);
    for (std::size_t ti = 0; ti < nt; ++ti)
      for (int x = 0; x < nsites; ++x) {
        EnvelopeCell e;
        e.t = opt.t_list[ti];
        e.site = x;
        e.measured = measured[x * nt + ti];
        e.envelope = traj.values[ti][x];
        e.tail = tail_of(e.measured, measured_low, res.envelope.size());
        e.violation = !(e.measured + e.tail <= e.envelope);
        res.envelope_violations += e.violation;
        res.envelope.push_back(e);
      }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return res;
}

void write_scan_csv(std::ostream& os, const ScanResult& res) {
  os << "r,t,exact,bound_thm51,bound_thm71,ratio,tail_estimate\n";
  for (const auto& c : res.cells)
    os << c.r << ',' << format_double(c.t) << ',' << format_double(c.exact) << ',' << format_double(c.bound_thermal)
       << ',' << format_double(c.bound_state) << ',' << format_double(c.ratio) << ',' << format_double(c.tail) << '\n';
}

void write_envelope_csv(std::ostream& os, const ScanResult& res) {
  os << "t,site,measured,envelope,tail_estimate\n";
  for (const auto& e : res.envelope)
    os << format_double(e.t) << ',' << e.site << ',' << format_double(e.measured) << ',' << format_double(e.envelope)
       << ',' << format_double(e.tail) << '\n';
}

nlohmann::json scan_to_json(const ScanResult& res) {
  using nlohmann::json;
  json j;
  j["mu"] = res.mu;
  j["per_site_cap"] = res.per_site_cap;
  j["total_cap"] = res.total_cap ? json(*res.total_cap) : json(nullptr);
  j["basis_size"] = res.basis_size;
  j["beta"] = res.beta;
  j["gamma"] = res.gamma;
  j["ell"] = res.ell;
  j["K"] = res.K;
  j["velocity"] = {{"value", format_double(res.velocity)}, {"provenance", "formula"}};
  j["prefactor"] = {{"value", format_double(res.prefactor)}, {"provenance", "formula"}};
  j["norm2"] = {{"value", format_double(res.norm2)}, {"provenance", "measured"}};
  json seeds = json::array();
  for (double s : res.seeds) seeds.push_back(format_double(s));
  j["seeds"] = {{"value", seeds}, {"provenance", "measured"}};
  j["violations"] = res.violations;
  j["envelope_violations"] = res.envelope_violations;
  json cells = json::array();
  for (const auto& c : res.cells)
    cells.push_back({{"r", c.r},
                     {"t", format_double(c.t)},
                     {"probe_site", c.probe_site},
                     {"exact", format_double(c.exact)},
                     {"bound_thermal", format_double(c.bound_thermal)},
                     {"bound_state", format_double(c.bound_state)},
                     {"ratio", format_double(c.ratio)},
                     {"tail_estimate", format_double(c.tail)},
                     {"in_cone", c.in_cone},
                     {"violation", c.violation}});
  j["cells"] = cells;
  return j;
}

}  // namespace bosonlc
