#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

namespace bosonlc {

using Vertex = int;

// Distance between vertices in different components.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

struct Edge {
  Vertex u;
  Vertex v;
};

// Undirected simple graph on vertices 0..n-1. Edges are stored with u < v in
// insertion order. Immutable after construction; BFS distances are memoized
// per source and the cache is shared between copies.
class Graph {
 public:
  Graph() = default;
  Graph(int num_vertices, std::vector<Edge> edges);

  int num_vertices() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vertex>& neighbors(Vertex v) const { return adj_.at(v); }
  int max_degree() const { return max_degree_; }
  std::optional<int> edge_index(Vertex a, Vertex b) const;

  const std::vector<int>& distances_from(Vertex source) const;
  int distance(Vertex a, Vertex b) const;

 private:
  struct Cache;

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adj_;
  std::unordered_map<std::uint64_t, int> edge_ids_;
  int max_degree_ = 0;
  std::shared_ptr<Cache> cache_;
};

Graph build_path(int length);
Graph build_cubic(const std::vector<int>& dims);
// Root has K children, every other internal vertex K-1, so all internal
// vertices have degree K.
Graph build_regular_tree(int K, int depth);

// Vertices within ell hops of either endpoint of the edge, sorted.
std::vector<Vertex> hop_ball(const Graph& g, Edge e, int ell);

// Number of edges e with {x, y} contained in hop_ball(e, ell).
int count_covering_edges(const Graph& g, Vertex x, Vertex y, int ell);

int distance_to_set(const Graph& g, Vertex x, const std::vector<Vertex>& set);

// {x : dist(x, R) <= ell}, sorted.
std::vector<Vertex> fatten(const Graph& g, const std::vector<Vertex>& region, int ell);

int set_diameter(const Graph& g, const std::vector<Vertex>& set);

}  // namespace bosonlc
