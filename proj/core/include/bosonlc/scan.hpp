#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonlc/bounds.hpp"
#include "bosonlc/dynamics.hpp"
#include "bosonlc/model.hpp"
#include "bosonlc/opspace.hpp"

namespace bosonlc {

struct ScanOptions {
  double mu = 1.0;
  int per_site_cap = 3;
  std::optional<int> total_cap;
  std::vector<int> r_list;
  std::vector<double> t_list;
  ChainConstants constants;
  EvolutionConfig evolution;
  // Repeat the run with per_site_cap - 1 to estimate the truncation tail.
  bool tail_run = true;
  // Compare (O(t)|F_x|O(t)) with the integrated envelope at every time.
  bool envelope = true;
  // Bytes of evolved operators held at once; decides how many times share a pass.
  std::size_t memory_budget = std::size_t{1} << 31;
  int threads = 1;
};

struct ScanCell {
  int r = 0;
  double t = 0.0;
  Vertex probe_site = 0;
  double exact = 0.0;
  double bound_thermal = 0.0;  // thermal_commutator_bound
  double bound_state = 0.0;    // state_commutator_bound
  double ratio = 0.0;          // (exact + tail) / bound_thermal
  double tail = 0.0;
  bool in_cone = false;        // v t < r
  bool violation = false;
};

struct EnvelopeCell {
  double t = 0.0;
  Vertex site = 0;
  double measured = 0.0;  // (O(t)|P F^beta P|O(t)) on the truncated basis
  double envelope = 0.0;  // integrated C_x(t)
  double tail = 0.0;
  bool violation = false;
};

struct ScanResult {
  double mu = 0.0;
  int per_site_cap = 0;
  std::optional<int> total_cap;
  std::size_t basis_size = 0;
  int beta = 1;
  int gamma = 0;
  int ell = 0;
  int K = 1;
  double velocity = 0.0;
  double prefactor = 0.0;
  double norm2 = 0.0;                // (O|O), untruncated
  std::vector<double> seeds;         // (O|F_x^beta|O) for x in supp O, untruncated
  std::vector<ScanCell> cells;       // r-major, then t in input order
  std::vector<EnvelopeCell> envelope;
  int violations = 0;
  int envelope_violations = 0;
  double seconds = 0.0;
};

// Weighted norms of [O(t), O'_r] on a truncated basis, where O'_r is the probe
// moved so its first site sits at distance r from supp O (the lowest such
// vertex). Every cell carries the thermal and state-dependent bounds.
ScanResult lightcone_scan(const ModelSpec& model, const MonomialOp& o, const MonomialOp& probe, const ScanOptions& opt);

// (O|F_x^beta|O) for x in supp O and (O|O) on a basis holding only supp O
// with per-site cap large enough that the neglected weight is below e^-40.
struct SupportSeeds {
  std::vector<double> seeds;
  double norm2 = 0.0;
};
SupportSeeds support_seeds(const MonomialOp& o, int beta, double mu);

void write_scan_csv(std::ostream& os, const ScanResult& res);
void write_envelope_csv(std::ostream& os, const ScanResult& res);
nlohmann::json scan_to_json(const ScanResult& res);

}  // namespace bosonlc
