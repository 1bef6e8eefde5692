#include <doctest.h>

#include "bosonlc/checks.hpp"

using namespace bosonlc;

namespace {

void require_clean(const FuzzSummary& s, long expected) {
  INFO(s.name << ": " << s.note);
  CHECK(s.instances == expected);
  CHECK(s.violations == 0);
  CHECK(s.passed());
  CHECK(s.worst_ratio <= 1.0 + kRoundoffSlack);
}

}  // namespace

TEST_CASE("operator-space fuzzers") {
  require_clean(fuzz_identity_component(11, 3000), 3000);
  require_clean(fuzz_nonidentity_component(12, 3000), 3000);
  require_clean(fuzz_identity_f_beta(13, 3000), 3000);
  require_clean(fuzz_commutator_bound(14, 300), 300);
  for (int beta = 1; beta <= 3; ++beta) require_clean(fuzz_weighted_amgm(15 + beta, 20000, beta), 20000);
  require_clean(fuzz_covering_count(19, 300), 300);
}

TEST_CASE("dynamics checks") {
  require_clean(check_random_number_conservation(21, 20), 20);
  FuzzSummary lv = check_liouvillian_antihermitian(22, 20);
  require_clean(lv, 20);
  FuzzSummary nd = check_norm_drift(23, 4, 10.0);
  CHECK(nd.violations == 0);
  CHECK(nd.instances >= 4);
  FuzzSummary env = check_envelope_dominance(24);
  CHECK(env.instances > 100);
  CHECK(env.violations == 0);
}

TEST_CASE("fuzzers are reproducible from the seed") {
  FuzzSummary a = fuzz_identity_component(7, 500), b = fuzz_identity_component(7, 500);
  CHECK(a.worst_ratio == b.worst_ratio);
  FuzzSummary c = fuzz_identity_component(8, 500);
  CHECK(c.worst_ratio != a.worst_ratio);
  CHECK_FALSE(FuzzSummary{"empty"}.passed());
}

TEST_CASE("selftest runs every check in a fixed order") {
  SelftestOptions opt;
  opt.instances = 200;
  auto one = run_selftest(opt);
  REQUIRE(one.size() == 12);
  CHECK(one.front().name == "identity_component_bound");
  CHECK(one.back().name == "envelope_dominance");
  for (const auto& s : one) {
    INFO(s.name);
    CHECK(s.passed());
  }
  opt.threads = 3;
  auto three = run_selftest(opt);
  CHECK(fuzz_json(one).dump() == fuzz_json(three).dump());
  auto j = fuzz_json(one);
  CHECK(j[0]["passed"] == true);
  CHECK(j[4]["instances"] == 2000);
}
