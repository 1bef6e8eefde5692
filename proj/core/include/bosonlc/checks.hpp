#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bosonlc {

// Outcome of one randomized property check. worst_ratio is the largest
// lhs / rhs seen (or the largest residual / tolerance for identities).
struct FuzzSummary {
  std::string name;
  long instances = 0;
  long violations = 0;
  double worst_ratio = 0.0;
  std::string note;

  bool passed() const { return violations == 0 && instances > 0; }
};

// Relative slack for inequalities whose two sides can meet with equality.
inline constexpr double kRoundoffSlack = 1e-12;

// Single-site bounds on the identity component of a normalized operator:
// |(nn|1-P|O)| <= (nn|I) and |(nn|P|O)| <= |(nn|O)| + (nn|I).
FuzzSummary fuzz_identity_component(std::uint64_t seed, long instances);
FuzzSummary fuzz_nonidentity_component(std::uint64_t seed, long instances);
// (I|F^beta|I) <= beta^beta (1 - e^-mu)^-beta on one site.
FuzzSummary fuzz_identity_f_beta(std::uint64_t seed, long instances);
// check_commutator_bound on random operators over 2 and 3 site bases.
FuzzSummary fuzz_commutator_bound(std::uint64_t seed, long instances);
FuzzSummary fuzz_weighted_amgm(std::uint64_t seed, long instances, int beta);
// N_xy <= K^{l+1}, and 0 beyond distance 2l+1, on paths, grids, trees and
// random bounded-degree graphs.
FuzzSummary fuzz_covering_count(std::uint64_t seed, long instances);

FuzzSummary check_random_number_conservation(std::uint64_t seed, int models);
// (A|i[H,B]) = -conj((B|i[H,A])) on bases closed under H.
FuzzSummary check_liouvillian_antihermitian(std::uint64_t seed, int instances, double tolerance = 1e-10);
// |(O(t)|O(t)) / (O|O) - 1| for t <= t_max on bases closed under H.
FuzzSummary check_norm_drift(std::uint64_t seed, int instances, double t_max = 10.0, double tolerance = 1e-9);
// Integrated envelope against its closed form inside the cone on a path, a
// grid and a tree.
FuzzSummary check_envelope_dominance(std::uint64_t seed);

struct SelftestOptions {
  std::uint64_t seed = 1;
  long instances = 100'000;
  int threads = 1;
};

// Every check above, in a fixed order.
std::vector<FuzzSummary> run_selftest(const SelftestOptions& opt);

nlohmann::json fuzz_json(const std::vector<FuzzSummary>& results);

}  // namespace bosonlc
