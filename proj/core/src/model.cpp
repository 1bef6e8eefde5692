#include "bosonlc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace bosonlc {

namespace {

constexpr double kHopSlack = 1e-12;

}  // namespace

ModelSpec::ModelSpec(Graph graph, int range, std::vector<Interaction> interactions, std::vector<Segment> schedule)
    : graph_(std::move(graph)), range_(range), interactions_(std::move(interactions)), segments_(std::move(schedule)) {
  if (range_ < 0) throw std::invalid_argument("interaction range must be >= 0");
  if (segments_.empty()) throw std::invalid_argument("schedule needs at least one segment");
  if (segments_.front().start != 0.0) throw std::invalid_argument("first schedule segment must start at t = 0");
  const std::size_t n_edges = graph_.edges().size();
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    auto& seg = segments_[k];
    if (k > 0 && !(seg.start > segments_[k - 1].start))
      throw std::invalid_argument("schedule segment starts must increase");
    if (seg.hopping.size() != n_edges)
      throw std::invalid_argument("segment " + std::to_string(k) + " has " + std::to_string(seg.hopping.size()) +
                                  " hopping values for " + std::to_string(n_edges) + " edges");
    for (cplx J : seg.hopping)
      if (std::abs(J) > 1.0 + kHopSlack) throw std::invalid_argument("hopping amplitude exceeds 1");
    if (seg.scale.empty()) seg.scale.assign(interactions_.size(), 1.0);
    if (seg.scale.size() != interactions_.size())
      throw std::invalid_argument("segment " + std::to_string(k) + " scale count does not match interactions");
  }
  for (std::size_t k = 0; k < interactions_.size(); ++k) {
    const auto& in = interactions_[k];
    if (in.support.empty()) throw std::invalid_argument("interaction with empty support");
    std::set<Vertex> uniq(in.support.begin(), in.support.end());
    if (uniq.size() != in.support.size()) throw std::invalid_argument("interaction support repeats a vertex");
    for (Vertex v : in.support)
      if (v < 0 || v >= graph_.num_vertices()) throw std::invalid_argument("interaction support out of range");
    if (set_diameter(graph_, in.support) > range_)
      throw std::invalid_argument("interaction " + std::to_string(k) + " support diameter exceeds range " +
                                  std::to_string(range_));
    for (const auto& term : in.terms) {
      if (term.powers.size() != in.support.size())
        throw std::invalid_argument("monomial power count does not match support size");
      for (int p : term.powers)
        if (p < 0) throw std::invalid_argument("negative monomial power");
    }
  }
}

std::size_t ModelSpec::segment_at(double t) const {
  std::size_t k = 0;
  while (k + 1 < segments_.size() && segments_[k + 1].start <= t) ++k;
  return k;
}

std::vector<double> ModelSpec::breakpoints(double t0, double t1) const {
  std::vector<double> out;
  double lo = std::min(t0, t1), hi = std::max(t0, t1);
  for (const auto& seg : segments_)
    if (seg.start > lo && seg.start < hi) out.push_back(seg.start);
  return out;
}

ModelSpec bose_hubbard(const Graph& graph, double J, double U0) {
  std::vector<Interaction> inter;
  if (U0 != 0.0) {
    for (Vertex v = 0; v < graph.num_vertices(); ++v)
      inter.push_back({{v}, {{U0, {2}}, {-U0, {1}}}});
  }
  Segment seg;
  seg.hopping.assign(graph.edges().size(), cplx(J, 0.0));
  return ModelSpec(graph, 0, std::move(inter), {seg});
}

SparseOp build_segment_hamiltonian(const ModelSpec& model, const FockBasis& basis, std::size_t segment) {
  const Graph& g = model.graph();
  if (basis.num_sites() != g.num_vertices()) throw std::invalid_argument("basis and graph sizes differ");
  const Segment& seg = model.segments().at(segment);
  const auto& edges = g.edges();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(basis.size() * (1 + 2 * edges.size()));
  std::vector<std::uint8_t> buf(basis.num_sites());

  for (std::size_t m = 0; m < basis.size(); ++m) {
    auto occ = basis.state(m);
    double diag = 0.0;
    for (std::size_t k = 0; k < model.interactions().size(); ++k) {
      const auto& in = model.interactions()[k];
      double value = 0.0;
      for (const auto& term : in.terms) {
        double prod = term.coeff;
        for (std::size_t j = 0; j < in.support.size(); ++j) prod *= std::pow(static_cast<double>(occ[in.support[j]]), term.powers[j]);
        value += prod;
      }
      diag += seg.scale[k] * value;
    }
    if (diag != 0.0) trip.emplace_back(m, m, diag);

    for (std::size_t e = 0; e < edges.size(); ++e) {
      cplx J = seg.hopping[e];
      if (J == cplx(0.0, 0.0)) continue;
      // J b+_u b_v and conj(J) b+_v b_u acting on |m>
      for (int dir = 0; dir < 2; ++dir) {
        Vertex to = dir == 0 ? edges[e].u : edges[e].v;
        Vertex from = dir == 0 ? edges[e].v : edges[e].u;
        int n_to = occ[to], n_from = occ[from];
        if (n_from == 0 || n_to == 255) continue;
        std::copy(occ.begin(), occ.end(), buf.begin());
        buf[to] = static_cast<std::uint8_t>(n_to + 1);
        buf[from] = static_cast<std::uint8_t>(n_from - 1);
        auto target = basis.index_of(buf);
        if (!target) continue;
        double amp = std::sqrt(static_cast<double>((n_to + 1) * n_from));
        trip.emplace_back(static_cast<Eigen::Index>(*target), static_cast<Eigen::Index>(m),
                          (dir == 0 ? J : std::conj(J)) * amp);
      }
    }
  }
  SparseOp H(dim, dim);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

SparseOp build_hamiltonian(const ModelSpec& model, const FockBasis& basis, double t) {
  return build_segment_hamiltonian(model, basis, model.segment_at(t));
}

ModelSpec window_chain(const ModelSpec& chain, Vertex center, int radius) {
  const Graph& g = chain.graph();
  const int n = g.num_vertices();
  if (radius < 0) throw std::invalid_argument("window radius must be >= 0");
  for (Vertex v = 0; v < n; ++v)
    if (g.neighbors(v).size() > 2) throw std::invalid_argument("window_chain expects a path graph");
  if (center - radius < 0 || center + radius >= n)
    throw std::invalid_argument("window [" + std::to_string(center - radius) + ", " + std::to_string(center + radius) +
                                "] does not fit the chain of " + std::to_string(n) + " sites");
  const Vertex lo = center - radius;
  const int width = 2 * radius + 1;
  auto inside = [&](Vertex v) { return v >= lo && v < lo + width; };

  std::vector<Edge> edges;
  std::vector<std::size_t> kept_edges;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const Edge& ed = g.edges()[e];
    if (inside(ed.u) && inside(ed.v)) {
      edges.push_back({ed.u - lo, ed.v - lo});
      kept_edges.push_back(e);
    }
  }
  std::vector<Interaction> inter;
  std::vector<std::size_t> kept_inter;
  for (std::size_t k = 0; k < chain.interactions().size(); ++k) {
    const auto& in = chain.interactions()[k];
    if (!std::all_of(in.support.begin(), in.support.end(), inside)) continue;
    Interaction w = in;
    for (auto& v : w.support) v -= lo;
    inter.push_back(std::move(w));
    kept_inter.push_back(k);
  }
  std::vector<Segment> sched;
  for (const auto& seg : chain.segments()) {
    Segment s;
    s.start = seg.start;
    for (std::size_t e : kept_edges) s.hopping.push_back(seg.hopping[e]);
    for (std::size_t k : kept_inter) s.scale.push_back(seg.scale[k]);
    sched.push_back(std::move(s));
  }
  return ModelSpec(Graph(width, std::move(edges)), chain.range(), std::move(inter), std::move(sched));
}

}  // namespace bosonlc
