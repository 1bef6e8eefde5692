#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonlc/bounds.hpp"
#include "bosonlc/certify.hpp"
#include "bosonlc/dynamics.hpp"
#include "bosonlc/model.hpp"
#include "bosonlc/opspace.hpp"

namespace bosonlc {

struct GraphConfig {
  std::string kind = "path";  // path | cubic | tree
  int length = 0;             // path
  std::vector<int> dims;      // cubic
  int K = 0;                  // tree
  int depth = 0;              // tree
};

struct TermConfig {
  std::vector<Vertex> support;
  std::vector<DensityMonomial> monomials;
};

struct SegmentConfig {
  double start = 0.0;
  cplx J{1.0, 0.0};
  double U_scale = 1.0;
};

struct ModelConfig {
  GraphConfig graph;
  int range = 0;
  cplx J{1.0, 0.0};
  double U0 = 0.0;                     // U0 n (n - 1) on every vertex
  std::vector<TermConfig> terms;       // extra density interactions
  std::vector<SegmentConfig> schedule; // empty: one constant segment
};

struct EnsembleConfig {
  double mu = 1.0;
  int per_site_cap = 3;
  std::optional<int> total_cap;
  std::size_t max_states = 5'000'000;
};

struct BoundsExperiment {
  int beta = 1;
  std::optional<int> K;  // defaults to the graph's maximum degree
};

struct ScanExperiment {
  MonomialOp o;
  MonomialOp probe;
  std::vector<int> r_list;
  std::vector<double> t_list;
  bool tail_run = true;
  bool envelope = true;
  std::size_t memory_budget = std::size_t{1} << 31;
};

struct SweepConfig {
  std::vector<int> radii;
  int reference_extra_radius = 1;
  int reference_extra_cap = 2;
};

struct CertifyExperiment {
  double t = 0.0;
  int centre = 0;
  InitialState state;
  MonomialOp observable;  // sites are offsets from the centre
  std::optional<DensityAssumption> assumption;
  std::optional<int> window_radius;
  int extra_cap = 0;
  double step_fraction = 0.1;
  long max_steps = 10000;
  std::optional<SweepConfig> sweep;
};

struct ClusterExperiment {
  MonomialOp o;
  MonomialOp o_prime;
  std::vector<int> r_list;
  std::optional<int> bosons;
  std::optional<DensityAssumption> assumption;
};

struct SelftestExperiment {
  long instances = 100'000;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  ModelConfig model;
  EnsembleConfig ensemble;
  ChainConstants constants;
  EvolutionConfig evolution;
  LanczosOptions lanczos;
  std::string kind;  // bounds | scan | certify | cluster | selftest
  BoundsExperiment bounds;
  ScanExperiment scan;
  CertifyExperiment certify;
  ClusterExperiment cluster;
  SelftestExperiment selftest;
  std::string output_dir = "out";
};

// Parses markup text with `key.path=value` overrides applied first. Values
// are read as markup, so lists and maps are allowed. Errors are ConfigError
// with the field path first.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

Graph build_graph(const GraphConfig& g);
ModelSpec build_model(const ModelConfig& m);

nlohmann::json config_to_json(const ExperimentConfig& c);

}  // namespace bosonlc
