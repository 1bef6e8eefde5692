#include "bosonlc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "bosonlc/errors.hpp"
#include "bosonlc/format.hpp"
#include "bosonlc/scan.hpp"

namespace bosonlc {

double clustering_bound(double r, double gap, double mu, double theta, double K0, int ell, double epsilon, double C5) {
  if (!(gap > 0.0)) throw PropertyViolation("clustering bound needs a positive gap, got " + format_double(gap));
  if (!(K0 > 0.0)) throw std::invalid_argument("K0 must be positive");
  ChainConstants c;
  c.theta = theta;
  c.epsilon = epsilon;
  const double v = state_cone_velocity(mu, ell, 2, c);
  return C5 * std::exp(-gap * r / (2.0 * v));
}

ClusterReport clustering_experiment(const ModelSpec& model, const ClusterOptions& opt) {
  const Graph& g = model.graph();
  const int L = g.num_vertices();
  const int N = opt.bosons.value_or(L);
  if (N < 0) throw std::invalid_argument("boson number must be >= 0");
  if (opt.o.sites.empty() || opt.o_prime.sites.empty()) throw std::invalid_argument("cluster operators need sites");
  for (int r : opt.r_list)
    if (r < 1) throw std::invalid_argument("separations must be >= 1");

  ClusterReport rep;
  BasisLimits lim;
  lim.num_sites = L;
  lim.per_site_cap = opt.per_site_cap;
  lim.total_cap = N + 1;
  FockBasis basis = FockBasis::enumerate(lim);
  rep.basis_size = basis.size();
  auto sector = basis.sector_with_total(N);
  if (!sector) throw std::invalid_argument("no states with " + std::to_string(N) + " bosons under the per-site cap");
  const auto& members = basis.sector_states(*sector);
  rep.sector_size = members.size();

  if (!model.time_independent()) throw std::invalid_argument("clustering needs a time-independent model");
  SparseOp H = build_hamiltonian(model, basis, 0.0);
  GroundState gs = ground_state(sector_block(H, basis, *sector, *sector), opt.lanczos);
  rep.e0 = gs.e0;
  rep.e1 = gs.e1;
  rep.gap = gs.gap;
  rep.residual = gs.residual0;
  if (gs.degenerate)
    throw PropertyViolation("ground state is degenerate (gap " + format_double(gs.gap) + "), clustering not certified");

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < members.size(); ++i) psi(static_cast<Eigen::Index>(members[i])) = gs.psi0(static_cast<Eigen::Index>(i));

  // The ground-state density assumption cannot be checked without the infinite
  // chain, so it is recorded as asserted.
  DensityAssumption a;
  if (opt.assumption) {
    a = *opt.assumption;
  } else {
    const double density = static_cast<double>(N) / L;
    a.mu = density > 0.0 ? 1.0 / density : 1.0;
    a.theta = a.K0 = std::exp(1.0) / -std::expm1(-a.mu);
    a.form = AnsatzForm::kInnerProduct;
  }
  rep.assumption_status = "asserted, unverified";
  rep.assumption = a;
  ChainConstants c = opt.constants;
  c.theta = a.theta;
  rep.velocity = state_cone_velocity(a.mu, model.range(), 2, c);
  rep.decay_rate = rep.gap / (2.0 * rep.velocity);

  const double norm_o = support_seeds(opt.o, 1, a.mu).norm2;
  std::set<Vertex> supp(opt.o.sites.begin(), opt.o.sites.end());
  std::vector<Vertex> region(supp.begin(), supp.end());
  const SparseOp O = opt.o.sparse(basis);

  std::vector<double> xs, ys;
  rep.min_C5 = 0.0;
  for (int r : opt.r_list) {
    Vertex target = -1;
    for (Vertex v = 0; v < L && target < 0; ++v)
      if (distance_to_set(g, v, region) == r) target = v;
    if (target < 0) throw std::invalid_argument("no vertex at distance " + std::to_string(r));
    std::vector<Vertex> sites;
    for (Vertex s : opt.o_prime.sites) {
      Vertex v = s + (target - opt.o_prime.sites.front());
      if (v < 0 || v >= L) throw std::invalid_argument("shifted operator leaves the chain");
      sites.push_back(v);
    }
    MonomialOp op = opt.o_prime.moved_to(sites);
    const double norm_p = support_seeds(op, 1, a.mu).norm2;
    ClusterRow row;
    row.r = r;
    row.site = target;
    row.raw = std::abs(connected_correlation(psi, O, op.sparse(basis)));
    row.exact = row.raw / std::sqrt(norm_o * norm_p);
    row.bound = clustering_bound(r, rep.gap, a.mu, a.theta, a.K0, model.range(), c.epsilon, c.C5);
    row.ratio = row.exact / row.bound;
    rep.dominated = rep.dominated && row.exact <= row.bound;
    rep.min_C5 = std::max(rep.min_C5, row.exact / (row.bound / c.C5));
    if (row.exact > 0.0) {
      xs.push_back(r);
      ys.push_back(std::log(row.exact));
    }
    rep.rows.push_back(row);
  }

  rep.monotone = !rep.rows.empty();
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    rep.monotone = rep.monotone && rep.rows[k].exact < rep.rows[k - 1].exact;
  rep.concave = xs.size() == rep.rows.size();
  for (std::size_t k = 1; k + 1 < ys.size(); ++k)
    rep.concave = rep.concave && ys[k + 1] - 2 * ys[k] + ys[k - 1] <= 1e-9 * std::max(1.0, std::abs(ys[k]));
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    rep.fit_slope = sxy / sxx;
    rep.fit_intercept = my - rep.fit_slope * mx;
  } else {
    rep.fit_slope = rep.fit_intercept = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

nlohmann::json cluster_json(const ClusterReport& rep) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"r", r.r},
                    {"site", r.site},
                    {"raw", format_double(r.raw)},
                    {"exact", format_double(r.exact)},
                    {"bound", format_double(r.bound)},
                    {"ratio", format_double(r.ratio)}});
  return {{"e0", format_double(rep.e0)},
          {"e1", format_double(rep.e1)},
          {"gap", {{"value", format_double(rep.gap)}, {"provenance", "measured"}}},
          {"residual", format_double(rep.residual)},
          {"velocity", {{"value", format_double(rep.velocity)}, {"provenance", "formula"},
                        {"formula", "(2 theta)^(8l+4) (1 + epsilon) chain_velocity(mu/2)"}}},
          {"decay_rate", format_double(rep.decay_rate)},
          {"sector_size", rep.sector_size},
          {"basis_size", rep.basis_size},
          {"assumption", {{"mu", format_double(rep.assumption.mu)}, {"theta", format_double(rep.assumption.theta)},
                          {"K0", format_double(rep.assumption.K0)}, {"status", rep.assumption_status}}},
          {"fit_slope", format_double(rep.fit_slope)},
          {"fit_intercept", format_double(rep.fit_intercept)},
          {"monotone", rep.monotone},
          {"concave", rep.concave},
          {"dominated", rep.dominated},
          {"min_C5", format_double(rep.min_C5)},
          {"rows", rows}};
}

void write_cluster_csv(std::ostream& os, const ClusterReport& rep) {
  os << "r,exact,bound,ratio\n";
  for (const auto& r : rep.rows)
    os << r.r << ',' << format_double(r.exact) << ',' << format_double(r.bound) << ',' << format_double(r.ratio) << '\n';
}

}  // namespace bosonlc
