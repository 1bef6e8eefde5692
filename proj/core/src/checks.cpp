#include "bosonlc/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "bosonlc/bounds.hpp"
#include "bosonlc/dynamics.hpp"
#include "bosonlc/fock.hpp"
#include "bosonlc/format.hpp"
#include "bosonlc/lattice.hpp"
#include "bosonlc/model.hpp"
#include "bosonlc/opspace.hpp"
#include "bosonlc/parallel.hpp"

namespace bosonlc {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double log_uniform(Rng& rng, double lo, double hi) { return std::exp(uniform(rng, std::log(lo), std::log(hi))); }
cplx gaussian(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double re = n(rng);
  return {re, n(rng)};
}

void record(FuzzSummary& s, double lhs, double rhs, double slack = 0.0) {
  ++s.instances;
  double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  s.worst_ratio = std::max(s.worst_ratio, ratio);
  if (lhs > rhs * (1.0 + slack)) ++s.violations;
}

class SiteBases {
 public:
  const FockBasis& get(int cap) {
    auto it = cache_.find(cap);
    if (it == cache_.end()) {
      BasisLimits lim;
      lim.num_sites = 1;
      lim.per_site_cap = cap;
      it = cache_.emplace(cap, FockBasis::enumerate(lim)).first;
    }
    return it->second;
  }

 private:
  std::map<int, FockBasis> cache_;
};

// mu in [0.5, 4] with a cap that leaves weight below e^-40 outside the basis.
struct SiteInstance {
  double mu;
  int cap;
};

SiteInstance draw_site(Rng& rng) {
  double mu = log_uniform(rng, 0.5, 4.0);
  return {mu, static_cast<int>(std::ceil(40.0 / mu))};
}

// Random normalized operator on the lowest d levels, sometimes plus a
// multiple of the identity so the identity component is large.
OperatorMatrix random_site_operator(Rng& rng, const FockBasis& basis, const MuWeights& w) {
  const int dim = static_cast<int>(basis.size());
  const int d = uniform_int(rng, 1, std::min(8, dim));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = gaussian(rng);
  if (uniform(rng, 0.0, 1.0) < 0.3) {
    cplx c = gaussian(rng) * 5.0;
    for (int i = 0; i < dim; ++i) m(i, i) += c;
  }
  OperatorMatrix o = OperatorMatrix::from_dense(basis, m);
  o *= cplx(1.0 / std::sqrt(weighted_norm2(o, w)));
  return o;
}

// (nn|A) = sqrt(w_n) A_nn on a single site.
double diag_coefficient(const OperatorMatrix& a, int n, const MuWeights& w) {
  return std::sqrt(w.state_weight(n)) * std::abs(a.at(n, n));
}

Graph random_graph(Rng& rng, int n, int max_degree) {
  std::vector<Edge> edges;
  std::vector<int> deg(n, 0);
  std::set<std::pair<int, int>> seen;
  // A random spanning tree keeps it connected, then extra edges.
  for (int v = 1; v < n; ++v) {
    for (int tries = 0; tries < 50; ++tries) {
      int u = uniform_int(rng, 0, v - 1);
      if (deg[u] < max_degree) {
        edges.push_back({u, v});
        seen.insert({u, v});
        ++deg[u];
        ++deg[v];
        break;
      }
    }
  }
  int extra = uniform_int(rng, 0, n);
  for (int k = 0; k < extra; ++k) {
    int a = uniform_int(rng, 0, n - 1), b = uniform_int(rng, 0, n - 1);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.count({a, b}) || deg[a] >= max_degree || deg[b] >= max_degree) continue;
    edges.push_back({a, b});
    seen.insert({a, b});
    ++deg[a];
    ++deg[b];
  }
  return Graph(n, edges);
}

Graph random_small_graph(Rng& rng) {
  switch (uniform_int(rng, 0, 3)) {
    case 0: return build_path(uniform_int(rng, 2, 4));
    case 1: return build_cubic({2, 2});
    case 2: return build_regular_tree(3, 1);
    default: return random_graph(rng, uniform_int(rng, 2, 4), 3);
  }
}

ModelSpec random_model(Rng& rng, const Graph& g) {
  const int ell = uniform_int(rng, 0, 1);
  std::vector<Interaction> interactions;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    double U = uniform(rng, -2.0, 2.0);
    Interaction in{{v}, {{U, {2}}, {-U, {1}}}};
    if (uniform(rng, 0.0, 1.0) < 0.3) in.terms.push_back({uniform(rng, -0.5, 0.5), {3}});
    interactions.push_back(in);
  }
  if (ell == 1)
    for (const Edge& e : g.edges()) interactions.push_back({{e.u, e.v}, {{uniform(rng, -1.0, 1.0), {1, 1}}}});
  const int segments = uniform_int(rng, 1, 3);
  std::vector<Segment> schedule;
  double start = 0.0;
  for (int k = 0; k < segments; ++k) {
    Segment s;
    s.start = start;
    for (std::size_t e = 0; e < g.edges().size(); ++e)
      s.hopping.push_back(std::polar(uniform(rng, 0.0, 1.0), uniform(rng, -M_PI, M_PI)));
    for (std::size_t i = 0; i < interactions.size(); ++i) s.scale.push_back(uniform(rng, 0.5, 2.0));
    schedule.push_back(s);
    start += uniform(rng, 0.5, 3.0);
  }
  return ModelSpec(g, ell, interactions, schedule);
}

// Basis holding every state with at most n_max bosons, which H cannot leave.
FockBasis closed_basis(int sites, int n_max) {
  BasisLimits lim;
  lim.num_sites = sites;
  lim.per_site_cap = n_max;
  lim.total_cap = n_max;
  return FockBasis::enumerate(lim);
}

OperatorMatrix random_operator(Rng& rng, const FockBasis& basis, double density) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < density) m(i, j) = gaussian(rng);
  return OperatorMatrix::from_dense(basis, m);
}

}  // namespace

FuzzSummary fuzz_identity_component(std::uint64_t seed, long instances) {
  FuzzSummary s{"identity_component_bound", 0, 0, 0.0, "|(nn|(1-P)O)| <= (nn|I), single site, (O|O) = 1"};
  Rng rng(seed);
  SiteBases bases;
  while (s.instances < instances) {
    SiteInstance si = draw_site(rng);
    const FockBasis& basis = bases.get(si.cap);
    MuWeights w(si.mu, 1);
    OperatorMatrix o = random_site_operator(rng, basis, w);
    OperatorMatrix e = identity_component(o, 0, w);
    int n = uniform_int(rng, 0, si.cap);
    record(s, diag_coefficient(e, n, w), std::sqrt(w.state_weight(n)), kRoundoffSlack);
  }
  return s;
}

FuzzSummary fuzz_nonidentity_component(std::uint64_t seed, long instances) {
  FuzzSummary s{"nonidentity_component_bound", 0, 0, 0.0, "|(nn|PO)| <= |(nn|O)| + (nn|I), single site, (O|O) = 1"};
  Rng rng(seed);
  SiteBases bases;
  while (s.instances < instances) {
    SiteInstance si = draw_site(rng);
    const FockBasis& basis = bases.get(si.cap);
    MuWeights w(si.mu, 1);
    OperatorMatrix o = random_site_operator(rng, basis, w);
    OperatorMatrix p = project_nonidentity(o, {0}, w);
    int n = uniform_int(rng, 0, std::min(si.cap, 10));
    record(s, diag_coefficient(p, n, w), diag_coefficient(o, n, w) + std::sqrt(w.state_weight(n)), kRoundoffSlack);
  }
  return s;
}

FuzzSummary fuzz_identity_f_beta(std::uint64_t seed, long instances) {
  FuzzSummary s{"identity_f_beta_bound", 0, 0, 0.0, "(I|F^beta|I) <= beta^beta (1-e^-mu)^-beta, single site"};
  Rng rng(seed);
  SiteBases bases;
  std::map<int, OperatorMatrix> identities;
  while (s.instances < instances) {
    double mu = log_uniform(rng, 0.2, 20.0);
    int beta = uniform_int(rng, 1, 6);
    int cap = std::min(255, static_cast<int>(std::ceil((40.0 + 4.0 * beta) / mu)) + beta);
    const FockBasis& basis = bases.get(cap);
    auto it = identities.find(cap);
    if (it == identities.end()) it = identities.emplace(cap, OperatorMatrix::identity(basis)).first;
    MuWeights w(mu, 1);
    double lhs = f_beta_raw(it->second, 0, beta, w);
    double rhs = std::pow(beta / -std::expm1(-mu), beta);
    record(s, lhs, rhs, kRoundoffSlack);
  }
  return s;
}

FuzzSummary fuzz_commutator_bound(std::uint64_t seed, long instances) {
  FuzzSummary s{"commutator_bound", 0, 0, 0.0,
                "([O,O']|[O,O']) <= 8 beta^beta cosh(mu gamma/2)(1 + beta (beta/(1-e^-mu))^beta) sum_x (O|F_x^beta|O); "
                "O lives on occupations <= c, the basis cap is c + beta + 2"};
  Rng rng(seed);
  std::map<std::pair<int, int>, FockBasis> bases;
  while (s.instances < instances) {
    const int sites = uniform(rng, 0.0, 1.0) < 0.7 ? 2 : 3;
    const int low = sites == 2 ? uniform_int(rng, 1, 2) : 1;
    const int beta = uniform_int(rng, 1, 2);
    const double mu = log_uniform(rng, 0.3, 3.0);
    const int cap = low + beta + 2;
    auto key = std::make_pair(sites, cap);
    auto it = bases.find(key);
    if (it == bases.end()) {
      BasisLimits lim;
      lim.num_sites = sites;
      lim.per_site_cap = cap;
      it = bases.emplace(key, FockBasis::enumerate(lim)).first;
    }
    const FockBasis& basis = it->second;
    MuWeights w(mu, sites);

    MonomialOp probe;
    int k = beta == 1 ? 1 : uniform_int(rng, 1, 2);
    std::vector<Vertex> all(sites);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    probe.sites.assign(all.begin(), all.begin() + k);
    std::sort(probe.sites.begin(), probe.sites.end());
    probe.create.assign(k, 0);
    probe.annihilate.assign(k, 0);
    for (int unit = 0; unit < beta; ++unit) {
      int site = unit < k ? unit : uniform_int(rng, 0, k - 1);
      (uniform(rng, 0.0, 1.0) < 0.5 ? probe.create : probe.annihilate)[site] += 1;
    }

    const auto dim = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    std::vector<Eigen::Index> low_states;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      auto st = basis.state(i);
      if (std::all_of(st.begin(), st.end(), [&](std::uint8_t n) { return n <= low; }))
        low_states.push_back(static_cast<Eigen::Index>(i));
    }
    const double density = uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : 0.2;
    for (Eigen::Index a : low_states)
      for (Eigen::Index b : low_states)
        if (uniform(rng, 0.0, 1.0) < density) m(a, b) = gaussian(rng);
    OperatorMatrix o = OperatorMatrix::from_dense(basis, m);
    CommutatorBoundCheck c = check_commutator_bound(o, probe, w);
    record(s, c.lhs, c.rhs);
  }
  return s;
}

FuzzSummary fuzz_weighted_amgm(std::uint64_t seed, long instances, int beta) {
  FuzzSummary s{"weighted_amgm_beta" + std::to_string(beta), 0, 0, 0.0,
                "sqrt(xu xv) xu^(beta-1) phi psi <= xu^beta phi^2 + xv^beta psi^2 + [beta>1] xu^beta psi^2"};
  Rng rng(seed);
  while (s.instances < instances) {
    double xu = log_uniform(rng, 1e-3, 1e3), xv = log_uniform(rng, 1e-3, 1e3);
    double phi = log_uniform(rng, 1e-3, 1e3), psi = log_uniform(rng, 1e-3, 1e3);
    if (uniform(rng, 0.0, 1.0) < 0.1) xv = xu;
    if (uniform(rng, 0.0, 1.0) < 0.1) psi = phi;
    InequalityPair p = check_weighted_amgm(xu, xv, phi, psi, beta);
    record(s, p.lhs, p.rhs);
  }
  return s;
}

FuzzSummary fuzz_covering_count(std::uint64_t seed, long instances) {
  FuzzSummary s{"covering_count", 0, 0, 0.0, "N_xy <= K^(l+1), and N_xy = 0 when dist(x, y) > 2l+1"};
  Rng rng(seed);
  while (s.instances < instances) {
    Graph g;
    switch (uniform_int(rng, 0, 3)) {
      case 0: g = build_path(uniform_int(rng, 2, 40)); break;
      case 1: g = build_cubic({uniform_int(rng, 2, 6), uniform_int(rng, 2, 6)}); break;
      case 2: g = build_regular_tree(uniform_int(rng, 2, 4), uniform_int(rng, 1, 3)); break;
      default: g = random_graph(rng, uniform_int(rng, 2, 40), uniform_int(rng, 2, 5)); break;
    }
    const int K = g.max_degree();
    for (int pair = 0; pair < 200 && s.instances < instances; ++pair) {
      int ell = uniform_int(rng, 0, 2);
      Vertex x = uniform_int(rng, 0, g.num_vertices() - 1);
      Vertex y = uniform(rng, 0.0, 1.0) < 0.2 ? x : uniform_int(rng, 0, g.num_vertices() - 1);
      int n = count_covering_edges(g, x, y, ell);
      int d = g.distance(x, y);
      double rhs = d <= 2 * ell + 1 ? std::pow(static_cast<double>(K), ell + 1) : 0.0;
      record(s, n, rhs);
    }
  }
  return s;
}

FuzzSummary check_random_number_conservation(std::uint64_t seed, int models) {
  FuzzSummary s{"number_conservation", 0, 0, 0.0, "H N - N H == 0 exactly for random models, every segment"};
  Rng rng(seed);
  for (int k = 0; k < models; ++k) {
    Graph g = random_small_graph(rng);
    ModelSpec model = random_model(rng, g);
    BasisLimits lim;
    lim.num_sites = g.num_vertices();
    lim.per_site_cap = uniform_int(rng, 1, 3);
    if (uniform(rng, 0.0, 1.0) < 0.5) lim.total_cap = uniform_int(rng, 1, lim.per_site_cap * lim.num_sites);
    FockBasis basis = FockBasis::enumerate(lim);
    SparseOp N = total_number_op(basis);
    bool ok = true;
    for (std::size_t seg = 0; seg < model.segments().size(); ++seg)
      ok = ok && check_number_conservation(build_segment_hamiltonian(model, basis, seg), N);
    ++s.instances;
    if (!ok) {
      ++s.violations;
      s.worst_ratio = std::numeric_limits<double>::infinity();
    }
  }
  return s;
}

FuzzSummary check_liouvillian_antihermitian(std::uint64_t seed, int instances, double tolerance) {
  FuzzSummary s{"liouvillian_antihermitian", 0, 0, 0.0,
                "|(A|i[H,B]) + conj((B|i[H,A]))| <= tolerance for unit A, B; ratio is residual / tolerance"};
  Rng rng(seed);
  const cplx I(0.0, 1.0);
  for (int k = 0; k < instances; ++k) {
    Graph g = random_small_graph(rng);
    ModelSpec model = random_model(rng, g);
    FockBasis basis = closed_basis(g.num_vertices(), uniform_int(rng, 1, 3));
    MuWeights w(log_uniform(rng, 0.3, 3.0), g.num_vertices());
    OperatorMatrix H = OperatorMatrix::from_sparse(basis, build_segment_hamiltonian(model, basis, 0));
    OperatorMatrix a = random_operator(rng, basis, 0.5), b = random_operator(rng, basis, 0.5);
    a *= cplx(1.0 / std::sqrt(weighted_norm2(a, w)));
    b *= cplx(1.0 / std::sqrt(weighted_norm2(b, w)));
    cplx lab = weighted_inner(a, I * commutator(H, b), w);
    cplx lba = weighted_inner(b, I * commutator(H, a), w);
    record(s, std::abs(lab + std::conj(lba)), tolerance);
  }
  return s;
}

FuzzSummary check_norm_drift(std::uint64_t seed, int instances, double t_max, double tolerance) {
  FuzzSummary s{"norm_drift", 0, 0, 0.0,
                "|(O(t)|O(t)) / (O|O) - 1| <= tolerance for t <= t_max; ratio is drift / tolerance"};
  Rng rng(seed);
  for (int k = 0; k < instances; ++k) {
    Graph g = random_small_graph(rng);
    ModelSpec model = random_model(rng, g);
    FockBasis basis = closed_basis(g.num_vertices(), uniform_int(rng, 1, 3));
    MuWeights w(log_uniform(rng, 0.3, 3.0), g.num_vertices());
    OperatorMatrix o = random_operator(rng, basis, 0.3);
    const double n0 = weighted_norm2(o, w);
    HeisenbergEvolver ev(model, basis);
    for (double f : {0.05, 0.3, 1.0}) {
      OperatorMatrix ot = ev.evolve(o, f * t_max);
      record(s, std::abs(weighted_norm2(ot, w) / n0 - 1.0), tolerance);
    }
  }
  return s;
}

FuzzSummary check_envelope_dominance(std::uint64_t seed) {
  FuzzSummary s{"envelope_dominance", 0, 0, 0.0,
                "integrated envelope <= (v t / r)^(r/(2l+1)) sum C(0) inside the cone; path, grid, tree"};
  Rng rng(seed);
  struct Case {
    Graph g;
    Vertex centre;
  };
  std::vector<Case> cases{{build_path(21), 10}, {build_cubic({5, 5}), 12}, {build_regular_tree(3, 3), 0}};
  for (const Case& c : cases) {
    const int K = c.g.max_degree();
    for (int ell : {0, 1}) {
      for (double mu : {0.5, 1.0, 2.0}) {
        std::vector<Vertex> region{c.centre};
        std::vector<double> seeds{uniform(rng, 0.5, 5.0)};
        std::vector<double> c0 = initial_envelope(c.g, region, ell, mu, 1, seeds, uniform(rng, 0.5, 2.0));
        std::vector<Vertex> support;
        double G0 = 0.0;
        for (Vertex x = 0; x < c.g.num_vertices(); ++x) {
          G0 += c0[x];
          if (c0[x] > 0.0) support.push_back(x);
        }
        MBound M = m_matrix_bound(mu, 1, ell, K);
        const double v = velocity_from_coupling(M.offdiag, K, ell);
        int r_max = 0;
        for (Vertex x = 0; x < c.g.num_vertices(); ++x) r_max = std::max(r_max, distance_to_set(c.g, x, support));
        std::vector<double> times;
        for (double f : {0.01, 0.05, 0.1, 0.2, 0.4, 0.7, 0.95}) times.push_back(f * r_max / v);
        EnvelopeTrajectory traj = integrate_envelope(c.g, M, ell, c0, times);
        for (std::size_t k = 0; k < times.size(); ++k) {
          for (Vertex x = 0; x < c.g.num_vertices(); ++x) {
            int r = distance_to_set(c.g, x, support);
            if (r < 1 || v * times[k] >= r) continue;
            record(s, traj.values[k][x], closed_form_envelope(r, times[k], M.offdiag, K, ell, G0));
          }
        }
      }
    }
  }
  return s;
}

std::vector<FuzzSummary> run_selftest(const SelftestOptions& opt) {
  const long n = opt.instances;
  auto sub = [&](std::uint64_t k) { return opt.seed ^ (0x9E3779B97F4A7C15ULL * (k + 1)); };
  std::vector<std::function<FuzzSummary()>> jobs{
      [&] { return fuzz_identity_component(sub(0), n); },
      [&] { return fuzz_nonidentity_component(sub(1), n); },
      [&] { return fuzz_identity_f_beta(sub(2), n); },
      [&] { return fuzz_commutator_bound(sub(3), n); },
      [&] { return fuzz_weighted_amgm(sub(4), 10 * n, 1); },
      [&] { return fuzz_weighted_amgm(sub(5), 10 * n, 2); },
      [&] { return fuzz_weighted_amgm(sub(6), 10 * n, 3); },
      [&] { return fuzz_covering_count(sub(7), n); },
      [&] { return check_random_number_conservation(sub(8), 100); },
      [&] { return check_liouvillian_antihermitian(sub(9), 200); },
      [&] { return check_norm_drift(sub(10), 30); },
      [&] { return check_envelope_dominance(sub(11)); },
  };
  std::vector<FuzzSummary> out(jobs.size());
  parallel_for(jobs.size(), opt.threads, [&](std::size_t i) { out[i] = jobs[i](); });
  return out;
}

nlohmann::json fuzz_json(const std::vector<FuzzSummary>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const FuzzSummary& s : results)
    arr.push_back({{"name", s.name},
                   {"instances", s.instances},
                   {"violations", s.violations},
                   {"worst_ratio", format_double(s.worst_ratio)},
                   {"passed", s.passed()},
                   {"statement", s.note}});
  return arr;
}

}  // namespace bosonlc
