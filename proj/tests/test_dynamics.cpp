#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bosonlc/dynamics.hpp"
#include "bosonlc/errors.hpp"

using namespace bosonlc;

namespace {

FockBasis closed_basis(int sites, int n) {
  BasisLimits lim;
  lim.num_sites = sites;
  lim.per_site_cap = n;
  lim.total_cap = n;
  return FockBasis::enumerate(lim);
}

FockBasis sector_basis(int sites, int cap, int n) {
  BasisLimits lim;
  lim.num_sites = sites;
  lim.per_site_cap = cap;
  lim.fixed_total = n;
  return FockBasis::enumerate(lim);
}

// exp(-i h t) from a dense eigendecomposition.
Eigen::MatrixXcd dense_exp(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd phase = (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd hopping_matrix(const Graph& g, const std::vector<cplx>& J) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(g.num_vertices(), g.num_vertices());
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    h(g.edges()[e].u, g.edges()[e].v) = J[e];
    h(g.edges()[e].v, g.edges()[e].u) = std::conj(J[e]);
  }
  return h;
}

ModelSpec random_hopping_model(std::mt19937_64& rng, int L, double U0) {
  std::uniform_real_distribution<double> u(0.2, 1.0), ph(-3.0, 3.0);
  Graph g = build_path(L);
  Segment s;
  for (std::size_t e = 0; e < g.edges().size(); ++e) s.hopping.push_back(std::polar(u(rng), ph(rng)));
  std::vector<Interaction> inter;
  for (int v = 0; v < L; ++v) inter.push_back({{v}, {{U0, {2}}, {-U0, {1}}}});
  s.scale.assign(inter.size(), 1.0);
  return ModelSpec(g, 0, inter, {s});
}

Eigen::VectorXcd random_state(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(d);
  for (std::size_t i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
  return v.normalized();
}

double op_distance(const OperatorMatrix& a, const OperatorMatrix& b) { return (a.to_dense() - b.to_dense()).norm(); }

}  // namespace

TEST_CASE("state evolution basics") {
  std::mt19937_64 rng(1);
  ModelSpec m = bose_hubbard(build_path(3), 1.0, 0.5);
  FockBasis b = closed_basis(3, 3);
  Eigen::VectorXcd psi = random_state(rng, b.size());
  CHECK((evolve_state(psi, m, b, 0.0, 0.0) - psi).norm() == 0.0);
  Eigen::VectorXcd later = evolve_state(psi, m, b, 0.0, 2.5);
  CHECK(later.norm() == doctest::Approx(1.0).epsilon(1e-10));

  // Dense propagator oracle.
  Eigen::MatrixXcd H(build_hamiltonian(m, b, 0.0));
  CHECK((later - dense_exp(H, 2.5) * psi).norm() < 1e-8);

  EvolutionConfig taylor;
  taylor.integrator = Integrator::kTaylor;
  CHECK((evolve_state(psi, m, b, 0.0, 2.5, taylor) - later).norm() < 1e-8);
}

TEST_CASE("diagonal Hamiltonian gives per-state phases") {
  std::mt19937_64 rng(2);
  ModelSpec m = bose_hubbard(build_path(3), 0.0, 0.8);
  FockBasis b = closed_basis(3, 3);
  SparseOp H = build_hamiltonian(m, b, 0.0);
  Eigen::VectorXcd psi = random_state(rng, b.size());
  Eigen::VectorXcd out = evolve_state(psi, m, b, 0.0, 1.7);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(std::abs(out(i) - std::exp(cplx(0.0, -1.7) * H.coeff(i, i)) * psi(i)) < 1e-10);
}

TEST_CASE("single-particle propagator") {
  std::mt19937_64 rng(3);
  ModelSpec m = random_hopping_model(rng, 5, 0.0);
  Eigen::MatrixXcd G0 = single_particle_propagator(m, 0.0);
  CHECK((G0 - Eigen::MatrixXcd::Identity(5, 5)).norm() == 0.0);
  Eigen::MatrixXcd G = single_particle_propagator(m, 1.3);
  CHECK((G.adjoint() * G - Eigen::MatrixXcd::Identity(5, 5)).norm() < 1e-12);
  CHECK((G - dense_exp(hopping_matrix(m.graph(), m.segments()[0].hopping), 1.3)).norm() < 1e-12);

  // One boson: b+_y |0> evolves into sum_x G_xy b+_x |0>.
  FockBasis one = sector_basis(5, 1, 1);
  for (int y = 0; y < 5; ++y) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(5);
    std::vector<std::uint8_t> occ(5, 0);
    occ[y] = 1;
    psi(*one.index_of(occ)) = 1.0;
    Eigen::VectorXcd out = evolve_state(psi, m, one, 0.0, 1.3);
    for (int x = 0; x < 5; ++x) {
      std::fill(occ.begin(), occ.end(), 0);
      occ[x] = 1;
      CHECK(std::abs(out(*one.index_of(occ)) - G(x, y)) < 1e-9);
    }
  }
}

TEST_CASE("propagator approaches Bessel functions on a long chain") {
  const int L = 61, c = 30;
  ModelSpec m = bose_hubbard(build_path(L), 1.0, 0.0);
  for (double t : {0.5, 1.0, 2.0, 3.0}) {
    Eigen::MatrixXcd G = single_particle_propagator(m, t);
    for (int x = 0; x <= 10; ++x) CHECK(std::abs(std::abs(G(c + x, c)) - std::abs(std::cyl_bessel_j(x, 2.0 * t))) < 1e-12);
  }
}

TEST_CASE("free commutator equals the propagator on a closed basis") {
  const int L = 5, Ncap = 3;
  ModelSpec m = bose_hubbard(build_path(L), 1.0, 0.0);
  FockBasis b = closed_basis(L, Ncap);
  auto bd0 = MonomialOp{{0}, {1}, {0}}.matrix(b);
  const double t = 0.9;
  Eigen::MatrixXcd G = single_particle_propagator(m, t);
  for (int x = 0; x < L; ++x) {
    auto bx = MonomialOp{{x}, {0}, {1}}.matrix(b);
    OperatorMatrix c = commutator(evolve_operator(bx, m, t), bd0);
    for (const auto& [key, blk] : c.blocks()) {
      if (b.sector_total(key.second) >= Ncap) continue;
      REQUIRE(key.first == key.second);
      const auto d = blk.rows();
      CHECK((blk - G(x, 0) * Eigen::MatrixXcd::Identity(d, d)).norm() < 1e-9);
    }
  }
}

TEST_CASE("operator evolution") {
  std::mt19937_64 rng(5);
  ModelSpec m = random_hopping_model(rng, 4, 0.6);
  FockBasis b = closed_basis(4, 3);
  MuWeights w(1.0, 4);
  auto N = OperatorMatrix::from_sparse(b, total_number_op(b));
  CHECK(op_distance(evolve_operator(N, m, 2.0), N) < 1e-10);

  auto a1 = MonomialOp{{1}, {1}, {1}}.matrix(b);
  CHECK(op_distance(evolve_operator(a1, m, 0.0), a1) == 0.0);

  auto hop = MonomialOp{{0, 2}, {1, 0}, {0, 1}}.matrix(b);
  for (double t : {0.3, 2.0, 10.0}) {
    auto ot = evolve_operator(hop, m, t);
    CHECK(weighted_norm2(ot, w) / weighted_norm2(hop, w) == doctest::Approx(1.0).epsilon(1e-9));
    // Time reversal.
    CHECK(std::sqrt(weighted_norm2(evolve_operator(ot, m, -t) - hop, w)) < 1e-8);
  }

  // Dense oracle U+ O U.
  Eigen::MatrixXcd U = dense_exp(Eigen::MatrixXcd(build_hamiltonian(m, b, 0.0)), 0.7);
  Eigen::MatrixXcd oracle = U.adjoint() * hop.to_dense() * U;
  CHECK((evolve_operator(hop, m, 0.7).to_dense() - oracle).norm() < 1e-9);

  EvolutionConfig spectral;
  spectral.operator_method = OperatorMethod::kSpectral;
  EvolutionConfig taylor;
  taylor.operator_method = OperatorMethod::kTaylor;
  CHECK((evolve_operator(hop, m, 0.7, spectral).to_dense() - oracle).norm() < 1e-9);
  CHECK((evolve_operator(hop, m, 0.7, taylor).to_dense() - oracle).norm() < 1e-9);
}

TEST_CASE("segment subdivision does not change results") {
  std::mt19937_64 rng(7);
  ModelSpec base = random_hopping_model(rng, 4, 0.4);
  const Segment& s = base.segments()[0];
  Segment s1 = s, s2 = s;
  s1.start = 0.37;
  s2.start = 1.1;
  ModelSpec split(base.graph(), 0, base.interactions(), {s, s1, s2});
  FockBasis b = closed_basis(4, 3);
  auto o = MonomialOp{{1}, {0}, {1}}.matrix(b);
  CHECK(op_distance(evolve_operator(o, base, 1.6), evolve_operator(o, split, 1.6)) < 1e-10);
  Eigen::VectorXcd psi = random_state(rng, b.size());
  CHECK((evolve_state(psi, base, b, 0.0, 1.6) - evolve_state(psi, split, b, 0.0, 1.6)).norm() < 1e-10);
  CHECK((single_particle_propagator(base, 1.6) - single_particle_propagator(split, 1.6)).norm() < 1e-12);
}

TEST_CASE("piecewise schedules compose in time order") {
  std::mt19937_64 rng(11);
  ModelSpec a = random_hopping_model(rng, 3, 0.5), c = random_hopping_model(rng, 3, 0.5);
  Segment s0 = a.segments()[0], s1 = c.segments()[0];
  s1.start = 0.4;
  ModelSpec m(a.graph(), 0, a.interactions(), {s0, s1});
  FockBasis b = closed_basis(3, 2);
  Eigen::MatrixXcd H0(build_hamiltonian(a, b, 0.0)), H1(build_hamiltonian(c, b, 0.0));
  Eigen::MatrixXcd U = dense_exp(H1, 0.5) * dense_exp(H0, 0.4);
  Eigen::VectorXcd psi = random_state(rng, b.size());
  CHECK((evolve_state(psi, m, b, 0.0, 0.9) - U * psi).norm() < 1e-9);
  auto o = MonomialOp{{0}, {1}, {1}}.matrix(b);
  CHECK((evolve_operator(o, m, 0.9).to_dense() - U.adjoint() * o.to_dense() * U).norm() < 1e-9);
  Eigen::MatrixXcd G = dense_exp(hopping_matrix(m.graph(), s1.hopping), 0.5) *
                       dense_exp(hopping_matrix(m.graph(), s0.hopping), 0.4);
  CHECK((single_particle_propagator(m, 0.9) - G).norm() < 1e-12);
}

TEST_CASE("otoc") {
  ModelSpec m = bose_hubbard(build_path(4), 1.0, 1.0);
  FockBasis b = closed_basis(4, 3);
  MuWeights w(1.0, 4);
  auto a0 = MonomialOp{{0}, {0}, {1}}.matrix(b);
  auto n3 = MonomialOp{{3}, {1}, {1}}.matrix(b);
  auto at0 = otoc(a0, n3, m, w, 0.0);
  CHECK(at0.weighted == 0.0);
  CHECK(at0.thermal == cplx(0.0));
  auto hop = MonomialOp{{0, 1}, {1, 0}, {0, 1}}.matrix(b);
  for (double t : {0.5, 1.5}) {
    auto v = otoc(hop, n3, m, w, t);
    CHECK(v.weighted == doctest::Approx(commutator_weighted_norm(evolve_operator(hop, m, t), n3, w)));
    // Cauchy-Schwarz against the identity: |(I|C)| <= sqrt((I|I)(C|C)).
    CHECK(std::abs(v.thermal) <= std::sqrt(v.weighted * weighted_norm2(OperatorMatrix::identity(b), w)) * (1 + 1e-12));
  }
}

TEST_CASE("commutator bound along an evolution") {
  ModelSpec m = bose_hubbard(build_path(3), 1.0, 1.0);
  FockBasis b = closed_basis(3, 6);
  MuWeights w(2.0, 3);
  auto a0 = MonomialOp{{0}, {0}, {1}}.matrix(b);
  MonomialOp probe{{2}, {1}, {0}};
  auto probe_blocks = sparse_blocks(b, probe.sparse(b));
  for (double t : {0.0, 0.05, 0.2, 0.5}) {
    auto ot = evolve_operator(a0, m, t);
    auto c = check_commutator_bound(ot, probe, w);
    // Blocks touching the top sector see the cap instead of the dynamics.
    std::map<OperatorMatrix::Key, double> parts;
    commutator_weighted_norm(ot, probe_blocks, w, &parts);
    double lhs = 0.0;
    for (const auto& [key, v] : parts)
      if (std::max(b.sector_total(key.first), b.sector_total(key.second)) < 6) lhs += v;
    CHECK(lhs <= c.rhs);
    if (t == 0.0) CHECK(lhs == 0.0);
  }
}

TEST_CASE("ground states") {
  SUBCASE("bonding state of two sites") {
    ModelSpec m = bose_hubbard(build_path(2), 1.0, 0.0);
    FockBasis b = sector_basis(2, 1, 1);
    GroundState gs = ground_state(build_hamiltonian(m, b, 0.0));
    CHECK(gs.e0 == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(gs.gap == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(gs.residual0 <= 1e-8);
    CHECK_FALSE(gs.degenerate);
  }
  SUBCASE("diagonal Hamiltonian") {
    ModelSpec m = bose_hubbard(build_path(3), 0.0, 1.0);
    FockBasis b = sector_basis(3, 4, 4);
    GroundState gs = ground_state(build_hamiltonian(m, b, 0.0));
    CHECK(gs.e0 == doctest::Approx(2.0).epsilon(1e-12));  // (2,1,1) and its permutations
    CHECK(gs.degenerate);
    FockBasis unit = sector_basis(3, 4, 3);
    GroundState mott = ground_state(build_hamiltonian(m, unit, 0.0));
    CHECK(mott.e0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mott.gap == doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("dense oracle") {
    std::mt19937_64 rng(13);
    ModelSpec m = random_hopping_model(rng, 5, 0.7);
    FockBasis b = sector_basis(5, 3, 4);
    SparseOp H = build_hamiltonian(m, b, 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(H)};
    GroundState gs = ground_state(H);
    CHECK(gs.e0 == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
    CHECK(gs.e1 == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-8));
    CHECK((H * gs.psi0 - gs.e0 * gs.psi0).norm() <= 1e-8);
  }
}

TEST_CASE("connected correlations") {
  std::mt19937_64 rng(17);
  FockBasis b = sector_basis(4, 2, 4);
  Eigen::VectorXcd psi = random_state(rng, b.size());
  SparseOp n0 = ladder_op(b, 0, Ladder::kNumber), n2 = ladder_op(b, 2, Ladder::kNumber);
  SparseOp id(b.size(), b.size());
  id.setIdentity();
  CHECK(std::abs(connected_correlation(psi, n0, id)) < 1e-14);
  cplx oracle = psi.dot(n0 * (n2 * psi)) - psi.dot(n0 * psi) * psi.dot(n2 * psi);
  CHECK(std::abs(connected_correlation(psi, n0, n2) - oracle) < 1e-13);

  // Product Fock state.
  Eigen::VectorXcd fock = Eigen::VectorXcd::Zero(b.size());
  std::uint8_t occ[4] = {1, 1, 1, 1};
  fock(*b.index_of(occ)) = 1.0;
  CHECK(std::abs(connected_correlation(fock, n0, n2)) < 1e-15);
  CHECK(expectation(fock, n0).real() == doctest::Approx(1.0));
}
