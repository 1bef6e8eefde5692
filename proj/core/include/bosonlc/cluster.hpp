#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonlc/bounds.hpp"
#include "bosonlc/certify.hpp"
#include "bosonlc/dynamics.hpp"
#include "bosonlc/model.hpp"
#include "bosonlc/opspace.hpp"

namespace bosonlc {

// C5 exp(-gap r / (2 v)) with v = (2 theta)^{8l+4} (1 + eps) v_{mu/2} on a chain.
// A gap <= 0 is refused with PropertyViolation.
double clustering_bound(double r, double gap, double mu, double theta, double K0, int ell, double epsilon, double C5);

struct ClusterOptions {
  MonomialOp o;        // absolute sites
  MonomialOp o_prime;  // placed so its first site is at distance r from supp o
  std::vector<int> r_list;
  int per_site_cap = 2;
  std::optional<int> bosons;  // defaults to one per site
  std::optional<DensityAssumption> assumption;
  ChainConstants constants;
  LanczosOptions lanczos;
};

struct ClusterRow {
  int r = 0;
  Vertex site = 0;
  double raw = 0.0;    // |Cor(O, O'_r)|
  double exact = 0.0;  // raw / sqrt((O|O)(O'|O'))
  double bound = 0.0;
  double ratio = 0.0;
};

struct ClusterReport {
  double e0 = 0.0;
  double e1 = 0.0;
  double gap = 0.0;
  double residual = 0.0;
  double velocity = 0.0;
  double decay_rate = 0.0;  // gap / (2 v)
  std::size_t sector_size = 0;
  std::size_t basis_size = 0;
  DensityAssumption assumption;
  std::string assumption_status;
  std::vector<ClusterRow> rows;
  double fit_slope = 0.0;  // least-squares d log|Cor| / d r
  double fit_intercept = 0.0;
  bool monotone = false;
  bool concave = false;
  bool dominated = true;
  double min_C5 = 0.0;
};

// Exact connected correlations in the ground state of the fixed-N sector,
// next to the clustering bound. A degenerate ground state is refused with
// PropertyViolation.
ClusterReport clustering_experiment(const ModelSpec& model, const ClusterOptions& opt);

nlohmann::json cluster_json(const ClusterReport& rep);
void write_cluster_csv(std::ostream& os, const ClusterReport& rep);

}  // namespace bosonlc
