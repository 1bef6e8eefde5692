#pragma once

#include <vector>

#include "bosonlc/fock.hpp"
#include "bosonlc/lattice.hpp"

namespace bosonlc {

// coeff * prod_k n_{support[k]}^{powers[k]}
struct DensityMonomial {
  double coeff = 0.0;
  std::vector<int> powers;
};

struct Interaction {
  std::vector<Vertex> support;
  std::vector<DensityMonomial> terms;
};

// Piecewise-constant parameters on [start, next start). hopping[e] is J for
// edge e in the orientation (edges()[e].u, edges()[e].v); the reverse
// direction carries the conjugate. scale[k] multiplies interaction k.
struct Segment {
  double start = 0.0;
  std::vector<cplx> hopping;
  std::vector<double> scale;
};

class ModelSpec {
 public:
  ModelSpec(Graph graph, int range, std::vector<Interaction> interactions, std::vector<Segment> schedule);

  const Graph& graph() const { return graph_; }
  int range() const { return range_; }
  const std::vector<Interaction>& interactions() const { return interactions_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool time_independent() const { return segments_.size() == 1; }

  // Segment active at time t; negative times use the first segment.
  std::size_t segment_at(double t) const;
  // Segment boundaries strictly inside (t0, t1), ascending.
  std::vector<double> breakpoints(double t0, double t1) const;

 private:
  Graph graph_;
  int range_;
  std::vector<Interaction> interactions_;
  std::vector<Segment> segments_;
};

// sum_<xy> J (b+_x b_y + h.c.) + sum_x U0 n_x (n_x - 1), with range 0.
ModelSpec bose_hubbard(const Graph& graph, double J, double U0);

SparseOp build_segment_hamiltonian(const ModelSpec& model, const FockBasis& basis, std::size_t segment);
SparseOp build_hamiltonian(const ModelSpec& model, const FockBasis& basis, double t);

// Restriction of a model on a path to the vertices [center - radius, center + radius],
// relabelled from 0. Terms not contained in the window are dropped.
ModelSpec window_chain(const ModelSpec& chain, Vertex center, int radius);

}  // namespace bosonlc
