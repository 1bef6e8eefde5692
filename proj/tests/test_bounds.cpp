#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bosonlc/bounds.hpp"
#include "bosonlc/scan.hpp"

using namespace bosonlc;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("coupling constants") {
  MBound m = m_matrix_bound(1.0, 1, 0, 2);
  CHECK(m.offdiag == 110.0);
  CHECK(m.diag == 220.0);
  CHECK(m_matrix_bound(1.0, 1, 0, 3).diag == 330.0);
  CHECK(m_matrix_bound(1.0, 2, 0, 2).offdiag == 39744.0);
  // l > 0: 2^{beta+8} beta^{2 beta} (1 + 2/mu)^{2 beta} K^{l+1}
  CHECK(m_matrix_bound(2.0, 1, 1, 2).offdiag == doctest::Approx(512.0 * 4.0 * 4.0));
  CHECK(m_matrix_bound(1.0, 2, 2, 3).offdiag == doctest::Approx(1024.0 * 16.0 * 81.0 * 27.0));
  CHECK_THROWS(m_matrix_bound(0.0, 1, 0, 2));
  CHECK_THROWS(m_matrix_bound(1.0, 0, 0, 2));
}

TEST_CASE("velocities") {
  CHECK(velocity_bound(1.0, 2, 0, 1) == 880.0);
  CHECK(velocity_bound(kInf, 2, 0, 1) == 496.0);
  CHECK(velocity_bound(2.0, 2, 0, 1) == 496.0 + 192.0);
  CHECK(velocity_bound(1.0, 2, 0, 2) == doctest::Approx(92.0 * 2 * 64.0 * 27.0));
  CHECK(velocity_bound(1.0, 2, 1, 1) == doctest::Approx(2048.0 * 3 * 32.0 * 9.0));

  CHECK(velocity_bound_exact(2, Rational::make(0, 1)) == Rational::make(496, 1));
  CHECK(velocity_bound_exact(2, Rational::make(1, 1)) == Rational::make(880, 1));
  CHECK(velocity_bound_exact(2, Rational::make(3, 7)) == Rational::make(4624, 7));
  for (int K = 1; K <= 6; ++K)
    for (int p = 0; p <= 5; ++p)
      for (int q = 1; q <= 5; ++q) {
        Rational im = Rational::make(p, q);
        // 8K(31 + 24/mu) = 4K(62 + 48/mu)
        Rational composed = Rational::make(4 * K, 1) * (Rational::make(62, 1) + Rational::make(48, 1) * im);
        CHECK(velocity_bound_exact(K, im) == composed);
      }
  for (double mu : {0.3, 1.0, 2.5})
    for (int K : {2, 4}) {
      CHECK(velocity_bound(mu, K, 0, 1) == doctest::Approx(velocity_from_coupling(m_matrix_bound(mu, 1, 0, K).offdiag, K, 0)));
      CHECK(chain_velocity(mu, K, 0) == velocity_bound(mu, K, 0, 1));
    }
  CHECK(bose_hubbard_density_velocity(0.0) == 496.0);
  CHECK(reference_velocity(0.5) == 4.0);
}

TEST_CASE("velocity monotone in 1/mu") {
  for (int ell = 0; ell <= 1; ++ell)
    for (int beta = 1; beta <= 3; ++beta) {
      double prev = 0.0;
      for (double mu : {8.0, 4.0, 2.0, 1.0, 0.5, 0.25}) {
        double v = velocity_bound(mu, 2, ell, beta);
        CHECK(v >= prev);
        prev = v;
      }
    }
}

TEST_CASE("initial envelope") {
  Graph p = build_path(9);
  const double mu = std::log(2.0);
  auto c = initial_envelope(p, {4}, 1, mu, 1, {0.75}, 1.0);
  CHECK(c[3] == doctest::Approx(8.0));
  CHECK(c[5] == doctest::Approx(8.0));
  CHECK(c[4] == doctest::Approx(4.0 + 1.5));
  CHECK(c[2] == 0.0);
  CHECK(c[8] == 0.0);
  auto c0 = initial_envelope(p, {4}, 0, mu, 1, {0.75}, 1.0);
  CHECK(c0[3] == 0.0);
  CHECK_THROWS(initial_envelope(p, {4, 5}, 0, mu, 1, {0.75}, 1.0));
}

TEST_CASE("integrated envelope") {
  SUBCASE("zero coupling keeps the envelope constant") {
    Graph p = build_path(5);
    std::vector<double> c0{1, 2, 3, 4, 5};
    auto tr = integrate_envelope(p, {0.0, 0.0}, 0, c0, {0.0, 1.0, 5.0});
    for (const auto& v : tr.values) CHECK(v == c0);
  }
  SUBCASE("single vertex grows exponentially") {
    Graph one(1, {});
    const double B = 3.0;
    auto tr = integrate_envelope(one, {0.0, B}, 0, {2.0}, {0.0, 0.5, 1.0, 2.0});
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const double exact = 2.0 * std::exp(B * tr.times[k]);
      CHECK(tr.values[k][0] >= exact);
      CHECK(tr.values[k][0] == doctest::Approx(exact).epsilon(1e-8));
    }
  }
  SUBCASE("nondecreasing and dominated by the closed form on a path") {
    Graph p = build_path(21);
    const int ell = 0, K = 2;
    MBound M = m_matrix_bound(1.0, 1, ell, K);
    std::vector<double> c0(21, 0.0);
    c0[10] = 1.0;
    const double v = velocity_from_coupling(M.offdiag, K, ell);
    std::vector<double> times;
    for (int k = 0; k <= 20; ++k) times.push_back(k * 4.0 / (20 * v));
    auto tr = integrate_envelope(p, M, ell, c0, times);
    for (std::size_t k = 1; k < times.size(); ++k)
      for (int x = 0; x < 21; ++x) CHECK(tr.values[k][x] >= tr.values[k - 1][x]);
    for (std::size_t k = 0; k < times.size(); ++k)
      for (int x = 0; x < 21; ++x) {
        const int r = std::abs(x - 10);
        if (r == 0 || v * times[k] >= r) continue;
        CHECK(tr.values[k][x] <= closed_form_envelope(r, times[k], M.offdiag, K, ell, 1.0));
      }
  }
  CHECK_THROWS(integrate_envelope(build_path(3), {1.0, 1.0}, 0, {1, 1, 1}, {1.0, 0.5}));
}

TEST_CASE("closed-form envelope") {
  const double B = 110.0;
  const int K = 2;
  const double v = velocity_from_coupling(B, K, 0);
  CHECK(v == 880.0);
  CHECK(closed_form_envelope(6, 6.0 / v, B, K, 0, 3.0) == doctest::Approx(3.0));
  CHECK(closed_form_envelope(6, 3.0 / v, B, K, 0, 3.0) == doctest::Approx(3.0 / 64.0));
  CHECK(closed_form_envelope(6, 7.0 / v, B, K, 0, 3.0) == kInf);
  CHECK(closed_form_envelope(6, 0.0, B, K, 0, 3.0) == 0.0);
  CHECK_THROWS(closed_form_envelope(0, 0.1, B, K, 0, 1.0));
}

TEST_CASE("thermal commutator bound") {
  ThermalBoundInputs in;
  in.mu = 1.0;
  in.K = 2;
  const double q = std::exp(-1.0);
  // O = b_0: seeds and norm from the geometric series.
  in.seed_sum = 2.0 * std::sqrt(q) / ((1 - q) * (1 - q));
  in.norm2 = std::sqrt(q) / (1 - q);
  in.gamma = 1;

  auto seeds = support_seeds(MonomialOp{{0}, {0}, {1}}, 1, 1.0);
  CHECK(seeds.norm2 == doctest::Approx(in.norm2).epsilon(1e-12));
  CHECK(seeds.seeds.at(0) == doctest::Approx(in.seed_sum).epsilon(1e-12));

  const double c = 1.0 / (1 - q);
  const double C = 16.0 * std::cosh(0.5) * (1 + c) * (in.seed_sum + c * 2 * in.norm2);
  CHECK(thermal_bound_prefactor(in) == doctest::Approx(C).epsilon(1e-14));
  const double v = velocity_bound(1.0, 2, 0, 1);
  CHECK(thermal_commutator_bound(6, 6.0 / (2 * v), in) == doctest::Approx(C / 64.0).epsilon(1e-14));
  CHECK(thermal_commutator_bound(6, 6.0 / v, in) == kInf);
  CHECK(thermal_commutator_bound(6, 0.0, in) == 0.0);

  ThermalBoundInputs neutral = in;
  neutral.gamma = 0;
  CHECK(thermal_bound_prefactor(in) / thermal_bound_prefactor(neutral) == doctest::Approx(std::cosh(0.5)));

  // Exponent linear in r at fixed v t / r.
  const double b4 = thermal_commutator_bound(4, 4.0 / (3 * v), in);
  const double b8 = thermal_commutator_bound(8, 8.0 / (3 * v), in);
  CHECK(std::log(b8 / C) == doctest::Approx(2.0 * std::log(b4 / C)));
}

TEST_CASE("bounds are monotone in t and r") {
  ThermalBoundInputs in;
  in.seed_sum = 2.0;
  ChainConstants c;
  c.theta = 1.2;
  for (int ell = 0; ell <= 1; ++ell) {
    in.ell = ell;
    const double v = velocity_bound(in.mu, in.K, ell, in.beta);
    const double vs = state_cone_velocity(1.0, ell, 2, c);
    for (int r = 1; r <= 8; ++r)
      for (int k = 1; k <= 10; ++k) {
        const double t = k * r / (10.0 * v), ts = k * r / (10.0 * vs);
        CHECK(thermal_commutator_bound(r, t, in) >= thermal_commutator_bound(r, t * 0.9, in));
        CHECK(thermal_commutator_bound(r + 1, t, in) <= thermal_commutator_bound(r, t, in));
        CHECK(state_commutator_bound(r, ts, 1.0, ell, 2, c) >= state_commutator_bound(r, ts * 0.9, 1.0, ell, 2, c));
        CHECK(state_commutator_bound(r + 1, ts, 1.0, ell, 2, c) <= state_commutator_bound(r, ts, 1.0, ell, 2, c));
        ThermalBoundInputs hot = in;
        hot.mu = 0.5;
        CHECK(thermal_commutator_bound(r, t, hot) >= thermal_commutator_bound(r, t, in));
      }
  }
}

TEST_CASE("state-dependent bound") {
  ChainConstants c;
  c.theta = 1.5;
  c.epsilon = 0.1;
  c.C1 = 2.0;
  // v' uses mu/2: 8K(31 + 24/(mu/2)).
  CHECK(state_velocity(1.0, 0, 2, 0.1) == doctest::Approx(1.1 * 16.0 * (31.0 + 48.0)));
  const double vs = state_cone_velocity(1.0, 0, 2, c);
  CHECK(vs == doctest::Approx(std::pow(3.0, 4) * state_velocity(1.0, 0, 2, 0.1)));
  CHECK(state_commutator_bound(5, 5.0 / vs * (1 - 1e-12), 1.0, 0, 2, c) == doctest::Approx(2.0));
  CHECK(state_commutator_bound(5, 5.0 / vs, 1.0, 0, 2, c) == kInf);
  CHECK(state_cone_velocity(1.0, 1, 2, c) == doctest::Approx(std::pow(3.0, 12) * state_velocity(1.0, 1, 2, 0.1)));
}

TEST_CASE("matrix element bound") {
  MatrixElementBound b1 = matrix_element_bound(1000, 0.0, 1, 0, 0.1);
  CHECK(b1.mu == 1.0);
  CHECK(b1.theta == doctest::Approx(2.0 * std::exp(1.0)));
  CHECK(b1.K0 == 4.0);
  CHECK(b1.value == 0.0);
  double prev = 0.0;
  for (int m = 1; m <= 5; ++m) {
    auto b = matrix_element_bound(10, 1.0, m, 0, 0.1);
    CHECK(b.v_star > prev);
    CHECK(b.value == kInf);
    prev = b.v_star;
  }
}

TEST_CASE("weighted AM-GM") {
  auto eq = check_weighted_amgm(2.0, 2.0, 1.5, 1.5, 1);
  CHECK(eq.lhs <= eq.rhs);
  auto zero = check_weighted_amgm(2.0, 3.0, 0.0, 1.5, 2);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.lhs <= zero.rhs);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int k = 0; k < 20000; ++k)
    for (int beta = 1; beta <= 3; ++beta) {
      auto r = check_weighted_amgm(std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)), beta);
      CHECK(r.lhs <= r.rhs * (1 + 1e-12));
    }
  CHECK_THROWS(check_weighted_amgm(0.0, 1.0, 1.0, 1.0, 1));
}

TEST_CASE("resummation prefactor") {
  CHECK(resummation_prefactor(0.1, 0) == doctest::Approx(1.0 / (1.0 - std::pow(1.1, -0.5))));
  CHECK(resummation_prefactor(0.1, 1) == doctest::Approx(1.0 / (1.0 - std::pow(1.1, -1.0 / 6.0))));
  CHECK_THROWS(resummation_prefactor(0.0, 0));
}

TEST_CASE("derivation trace") {
  ChainConstants c;
  auto tr = derivation_trace(1.0, 2, 0, 1, c);
  bool saw_velocity = false, saw_density = false;
  for (const auto& e : tr) {
    CHECK((e.provenance == "config" || e.provenance == "formula" || e.provenance == "measured"));
    if (e.name == "velocity") {
      saw_velocity = true;
      CHECK(e.value == 880.0);
    }
    if (e.name == "velocity.composed") CHECK(e.value == 880.0);
    if (e.name == "velocity.density_form") saw_density = true;
  }
  CHECK(saw_velocity);
  CHECK(saw_density);
}
