#include "bosonlc/lattice.hpp"

#include <algorithm>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <string>

namespace bosonlc {

namespace {

std::uint64_t edge_key(Vertex a, Vertex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::vector<int> bfs(const std::vector<std::vector<Vertex>>& adj, Vertex source) {
  std::vector<int> dist(adj.size(), kUnreachable);
  std::queue<Vertex> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop();
    for (Vertex w : adj[v]) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

}  // namespace

struct Graph::Cache {
  std::mutex mu;
  std::vector<std::unique_ptr<const std::vector<int>>> rows;
};

Graph::Graph(int num_vertices, std::vector<Edge> edges) : n_(num_vertices), adj_(num_vertices) {
  if (num_vertices <= 0) throw std::invalid_argument("graph needs at least one vertex");
  edges_.reserve(edges.size());
  for (Edge e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loop at vertex " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
    auto [it, fresh] = edge_ids_.emplace(edge_key(e.u, e.v), static_cast<int>(edges_.size()));
    if (!fresh)
      throw std::invalid_argument("duplicate edge {" + std::to_string(e.u) + "," +
                                  std::to_string(e.v) + "}");
    edges_.push_back(e);
    adj_[e.u].push_back(e.v);
    adj_[e.v].push_back(e.u);
  }
  for (auto& nb : adj_) {
    std::sort(nb.begin(), nb.end());
    max_degree_ = std::max(max_degree_, static_cast<int>(nb.size()));
  }
  cache_ = std::make_shared<Cache>();
  cache_->rows.resize(n_);
}

std::optional<int> Graph::edge_index(Vertex a, Vertex b) const {
  auto it = edge_ids_.find(edge_key(a, b));
  if (it == edge_ids_.end()) return std::nullopt;
  return it->second;
}

const std::vector<int>& Graph::distances_from(Vertex source) const {
  if (source < 0 || source >= n_) throw std::invalid_argument("vertex out of range");
  std::lock_guard lock(cache_->mu);
  auto& row = cache_->rows[source];
  if (!row) row = std::make_unique<const std::vector<int>>(bfs(adj_, source));
  return *row;
}

int Graph::distance(Vertex a, Vertex b) const {
  if (b < 0 || b >= n_) throw std::invalid_argument("vertex out of range");
  return distances_from(a)[b];
}

Graph build_path(int length) {
  if (length < 1) throw std::invalid_argument("path length must be >= 1");
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < length; ++i) edges.push_back({i, i + 1});
  return Graph(length, std::move(edges));
}

Graph build_cubic(const std::vector<int>& dims) {
  if (dims.empty()) throw std::invalid_argument("cubic lattice needs at least one dimension");
  long long total = 1;
  for (int d : dims) {
    if (d < 2) throw std::invalid_argument("cubic lattice side lengths must be >= 2");
    total *= d;
    if (total > std::numeric_limits<int>::max()) throw std::invalid_argument("lattice too large");
  }
  // Last coordinate varies fastest.
  std::vector<long long> stride(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];
  std::vector<Edge> edges;
  for (long long v = 0; v < total; ++v) {
    for (std::size_t k = 0; k < dims.size(); ++k) {
      long long coord = (v / stride[k]) % dims[k];
      if (coord + 1 < dims[k]) edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(v + stride[k])});
    }
  }
  return Graph(static_cast<int>(total), std::move(edges));
}

Graph build_regular_tree(int K, int depth) {
  if (K < 2) throw std::invalid_argument("regular tree needs K >= 2");
  if (depth < 0) throw std::invalid_argument("tree depth must be >= 0");
  std::vector<Edge> edges;
  std::vector<Vertex> frontier{0};
  int next = 1;
  for (int level = 0; level < depth; ++level) {
    std::vector<Vertex> children;
    for (Vertex p : frontier) {
      int fan = (p == 0) ? K : K - 1;
      for (int c = 0; c < fan; ++c) {
        if (next == std::numeric_limits<int>::max()) throw std::invalid_argument("tree too large");
        edges.push_back({p, next});
        children.push_back(next++);
      }
    }
    frontier = std::move(children);
  }
  return Graph(next, std::move(edges));
}

std::vector<Vertex> hop_ball(const Graph& g, Edge e, int ell) {
  if (ell < 0) throw std::invalid_argument("ball radius must be >= 0");
  if (!g.edge_index(e.u, e.v)) throw std::invalid_argument("hop_ball expects an edge of the graph");
  const auto& du = g.distances_from(e.u);
  const auto& dv = g.distances_from(e.v);
  std::vector<Vertex> out;
  for (Vertex y = 0; y < g.num_vertices(); ++y)
    if (std::min(du[y], dv[y]) <= ell) out.push_back(y);
  return out;
}

int count_covering_edges(const Graph& g, Vertex x, Vertex y, int ell) {
  if (ell < 0) throw std::invalid_argument("ball radius must be >= 0");
  const auto& dx = g.distances_from(x);
  const auto& dy = g.distances_from(y);
  int count = 0;
  for (const Edge& e : g.edges()) {
    if (std::min(dx[e.u], dx[e.v]) <= ell && std::min(dy[e.u], dy[e.v]) <= ell) ++count;
  }
  return count;
}

int distance_to_set(const Graph& g, Vertex x, const std::vector<Vertex>& set) {
  const auto& dx = g.distances_from(x);
  int best = kUnreachable;
  for (Vertex s : set) best = std::min(best, dx.at(s));
  return best;
}

std::vector<Vertex> fatten(const Graph& g, const std::vector<Vertex>& region, int ell) {
  if (ell < 0) throw std::invalid_argument("fattening radius must be >= 0");
  std::vector<int> best(g.num_vertices(), kUnreachable);
  for (Vertex s : region) {
    const auto& ds = g.distances_from(s);
    for (Vertex y = 0; y < g.num_vertices(); ++y) best[y] = std::min(best[y], ds[y]);
  }
  std::vector<Vertex> out;
  for (Vertex y = 0; y < g.num_vertices(); ++y)
    if (best[y] <= ell) out.push_back(y);
  return out;
}

int set_diameter(const Graph& g, const std::vector<Vertex>& set) {
  int diam = 0;
  for (Vertex a : set)
    for (Vertex b : set) diam = std::max(diam, g.distance(a, b));
  return diam;
}

}  // namespace bosonlc
