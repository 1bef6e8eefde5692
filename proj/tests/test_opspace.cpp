#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bosonlc/fock.hpp"
#include "bosonlc/opspace.hpp"

using namespace bosonlc;

namespace {

FockBasis product_basis(int sites, int cap) {
  BasisLimits lim;
  lim.num_sites = sites;
  lim.per_site_cap = cap;
  return FockBasis::enumerate(lim);
}

// Grand-canonical weight of a state, written out from the occupations.
double state_weight(const FockBasis& b, std::size_t m, double mu) {
  double w = 1.0;
  for (int s = 0; s < b.num_sites(); ++s) w *= (1.0 - std::exp(-mu)) * std::exp(-mu * b.occupation(m, s));
  return w;
}

cplx dense_inner(const FockBasis& b, const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double mu) {
  cplx s = 0.0;
  for (std::size_t m = 0; m < b.size(); ++m)
    for (std::size_t n = 0; n < b.size(); ++n)
      s += std::conj(A(m, n)) * B(m, n) * std::sqrt(state_weight(b, m, mu) * state_weight(b, n, mu));
  return s;
}

Eigen::MatrixXcd random_dense(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

// Weighted average over the occupation of `site` on a product basis.
Eigen::MatrixXcd dense_identity_component(const FockBasis& b, const Eigen::MatrixXcd& A, int site, double mu) {
  const int cap = b.per_site_cap();
  double z = 0.0;
  for (int k = 0; k <= cap; ++k) z += std::exp(-mu * k);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(A.rows(), A.cols());
  std::vector<std::uint8_t> r(b.num_sites()), c(b.num_sites());
  for (std::size_t m = 0; m < b.size(); ++m)
    for (std::size_t n = 0; n < b.size(); ++n) {
      if (b.occupation(m, site) != b.occupation(n, site)) continue;
      auto sm = b.state(m), sn = b.state(n);
      std::copy(sm.begin(), sm.end(), r.begin());
      std::copy(sn.begin(), sn.end(), c.begin());
      cplx acc = 0.0;
      for (int k = 0; k <= cap; ++k) {
        r[site] = c[site] = static_cast<std::uint8_t>(k);
        acc += std::exp(-mu * k) * A(*b.index_of(r), *b.index_of(c));
      }
      out(m, n) = acc / z;
    }
  return out;
}

double frob(const OperatorMatrix& a) { return a.to_dense().norm(); }

}  // namespace

TEST_CASE("weights") {
  MuWeights w(1.0, 3);
  double total = 0.0;
  for (int n = 0; n < 200; ++n) total += w.site_weight(n);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.state_weight(2) == doctest::Approx(std::pow(1 - std::exp(-1.0), 3) * std::exp(-2.0)));
  CHECK(w.pair_weight(1, 3) == doctest::Approx(std::sqrt(w.state_weight(1) * w.state_weight(3))));
  CHECK(w.state_weight(0) <= 1.0);
  CHECK_THROWS(MuWeights(0.0, 1));
  CHECK_THROWS(MuWeights(-1.0, 1));
}

TEST_CASE("single-site inner products against series") {
  FockBasis b = product_basis(1, 80);
  SUBCASE("identity has unit norm") {
    MuWeights w(0.7, 1);
    CHECK(weighted_norm2(OperatorMatrix::identity(b), w) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("(b|b) at mu = ln 2 is sqrt 2") {
    MuWeights w(std::log(2.0), 1);
    MonomialOp a{{0}, {0}, {1}};
    CHECK(weighted_norm2(a.matrix(b), w) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("number sectors are orthogonal") {
    MuWeights w(1.0, 1);
    MonomialOp a{{0}, {0}, {1}}, ad{{0}, {1}, {0}};
    CHECK(weighted_inner(a.matrix(b), ad.matrix(b), w) == cplx(0.0));
  }
}

TEST_CASE("inner product axioms on random operators") {
  std::mt19937_64 rng(17);
  FockBasis b = product_basis(2, 2);
  MuWeights w(0.9, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXcd A = random_dense(rng, b.size()), B = random_dense(rng, b.size()), C = random_dense(rng, b.size());
    auto oa = OperatorMatrix::from_dense(b, A), ob = OperatorMatrix::from_dense(b, B), oc = OperatorMatrix::from_dense(b, C);
    cplx ab = weighted_inner(oa, ob, w);
    CHECK(std::abs(ab - dense_inner(b, A, B, 0.9)) < 1e-12 * std::abs(ab) + 1e-14);
    CHECK(std::abs(ab - std::conj(weighted_inner(ob, oa, w))) < 1e-12);
    const cplx alpha(0.3, -1.1);
    cplx lin = weighted_inner(oa, ob + alpha * oc, w);
    CHECK(std::abs(lin - (ab + alpha * weighted_inner(oa, oc, w))) < 1e-11);
    CHECK(weighted_norm2(oa, w) > 0.0);
  }
  CHECK(weighted_norm2(OperatorMatrix(b), w) == 0.0);
}

TEST_CASE("thermal relation") {
  FockBasis b = product_basis(2, 40);
  MuWeights w(1.0, 2);
  const double nbar = 1.0 / (std::exp(1.0) - 1.0);
  MonomialOp a{{0}, {0}, {1}};
  auto ob = a.matrix(b);
  ThermalCheck c = check_thermal_relation(ob, ob, w);
  CHECK(c.residual <= c.tail + 1e-14);
  CHECK(std::abs(c.inner - std::exp(0.5) * nbar) < 1e-12);

  ThermalCheck id = check_thermal_relation(OperatorMatrix::identity(b), OperatorMatrix::identity(b), w);
  CHECK(std::abs(id.thermal - 1.0) <= id.tail + 1e-14);

  MonomialOp hop{{0, 1}, {1, 0}, {0, 1}};
  auto mixed = check_thermal_relation(ob, hop.matrix(b), w);
  CHECK(mixed.inner == cplx(0.0));
  CHECK(mixed.thermal == cplx(0.0));
}

TEST_CASE("identity component matches a dense oracle") {
  std::mt19937_64 rng(23);
  FockBasis b = product_basis(3, 2);
  const double mu = 1.3;
  MuWeights w(mu, 3);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd A = random_dense(rng, b.size());
    auto oa = OperatorMatrix::from_dense(b, A);
    for (int site = 0; site < 3; ++site) {
      Eigen::MatrixXcd lib = identity_component(oa, site, w).to_dense();
      CHECK((lib - dense_identity_component(b, A, site, mu)).norm() < 1e-12 * A.norm());
    }
  }
}

TEST_CASE("non-identity projection") {
  std::mt19937_64 rng(29);
  FockBasis b = product_basis(3, 2);
  MuWeights w(1.0, 3);
  std::vector<Vertex> all{0, 1, 2};
  CHECK(frob(project_nonidentity(OperatorMatrix::identity(b), all, w)) < 1e-13);

  auto a1 = MonomialOp{{1}, {0}, {1}}.matrix(b);
  CHECK(frob(project_nonidentity(a1, {1}, w) - a1) == 0.0);

  for (int trial = 0; trial < 5; ++trial) {
    auto oa = OperatorMatrix::from_dense(b, random_dense(rng, b.size()));
    std::vector<Vertex> R{0, 2};
    auto p = project_nonidentity(oa, R, w);
    CHECK(frob(project_nonidentity(p, R, w) - p) < 1e-12 * frob(oa));
    // Orthogonal for the weighted product: (A - PA | PA) = 0.
    CHECK(std::abs(weighted_inner(oa - p, p, w)) < 1e-12 * weighted_norm2(oa, w));
  }
}

TEST_CASE("Q projections resolve the identity on a three-site chain") {
  std::mt19937_64 rng(31);
  FockBasis b = product_basis(3, 2);
  const double mu = 0.8;
  MuWeights w(mu, 3);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd A = random_dense(rng, b.size());
    auto oa = OperatorMatrix::from_dense(b, A);
    double z = 0.0;
    cplx c = 0.0;
    for (std::size_t m = 0; m < b.size(); ++m) {
      z += state_weight(b, m, mu);
      c += state_weight(b, m, mu) * A(m, m);
    }
    Eigen::MatrixXcd sum = (c / z) * Eigen::MatrixXcd::Identity(b.size(), b.size());
    sum += project_Q(oa, 0, w).to_dense() + project_Q(oa, 1, w).to_dense();
    CHECK((sum - A).norm() < 1e-12 * A.norm());
  }
  CHECK(frob(project_Q(OperatorMatrix::identity(b), 0, w)) < 1e-13);
  CHECK(frob(project_Q(OperatorMatrix::identity(b), 1, w)) < 1e-13);

  // Supported on the middle site only: Q_0 removes the identity component.
  Eigen::MatrixXcd local = random_dense(rng, 3);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(b.size(), b.size());
  for (std::size_t m = 0; m < b.size(); ++m)
    for (std::size_t n = 0; n < b.size(); ++n)
      if (b.occupation(m, 0) == b.occupation(n, 0) && b.occupation(m, 2) == b.occupation(n, 2))
        A(m, n) = local(b.occupation(m, 1), b.occupation(n, 1));
  auto oa = OperatorMatrix::from_dense(b, A);
  CHECK(frob(project_Q(oa, 0, w) - (oa - identity_component(oa, 1, w))) < 1e-12);
  CHECK(frob(project_Q(oa, 1, w)) < 1e-12);
  CHECK_THROWS(project_Q(OperatorMatrix::from_dense(product_basis(2, 1), Eigen::MatrixXcd::Identity(4, 4)), 0,
                         MuWeights(1.0, 2)));
}

TEST_CASE("F-beta expectations against series") {
  const double mu = 1.0, q = std::exp(-mu);
  FockBasis b = product_basis(1, 90);
  MuWeights w(mu, 1);
  auto id = OperatorMatrix::identity(b);
  CHECK(f_beta_raw(id, 0, 1, w) == doctest::Approx(1.0 / (1.0 - q)).epsilon(1e-12));
  for (int beta = 1; beta <= 4; ++beta)
    CHECK(f_beta_raw(id, 0, beta, w) <= std::pow(beta, beta) * std::pow(1.0 - q, -beta) * (1 + 1e-12));
  CHECK(f_beta_expectation(id, 0, 2, w) < 1e-20);

  // sum_n n (n + 1) (1 - q) q^{n - 1/2} = 2 sqrt(q) / (1 - q)^2
  auto a = MonomialOp{{0}, {0}, {1}}.matrix(b);
  CHECK(f_beta_expectation(a, 0, 1, w) == doctest::Approx(2.0 * std::sqrt(q) / std::pow(1.0 - q, 2)).epsilon(1e-12));
  CHECK(f_beta_expectation(a, 0, 1, w) == doctest::Approx(f_beta_raw(a, 0, 1, w)).epsilon(1e-14));
}

TEST_CASE("F-beta expectation equals the raw form of the projected operator") {
  std::mt19937_64 rng(37);
  FockBasis b = product_basis(2, 3);
  MuWeights w(1.1, 2);
  for (int trial = 0; trial < 5; ++trial) {
    auto oa = OperatorMatrix::from_dense(b, random_dense(rng, b.size()));
    for (int site = 0; site < 2; ++site)
      for (int beta = 1; beta <= 3; ++beta) {
        auto p = project_nonidentity(oa, {site}, w);
        CHECK(f_beta_expectation(oa, site, beta, w) == doctest::Approx(f_beta_raw(p, site, beta, w)).epsilon(1e-11));
      }
  }
}

TEST_CASE("commutator norms") {
  FockBasis b = product_basis(2, 60);
  MuWeights w(1.0, 2);
  auto a0 = MonomialOp{{0}, {0}, {1}}.matrix(b);
  auto ad0 = MonomialOp{{0}, {1}, {0}}.matrix(b);
  auto ad1 = MonomialOp{{1}, {1}, {0}}.matrix(b);
  CHECK(commutator_weighted_norm(a0, ad1, w) == 0.0);
  CHECK(commutator_weighted_norm(a0, ad0, w) == doctest::Approx(1.0).epsilon(1e-10));

  std::mt19937_64 rng(41);
  FockBasis small = product_basis(2, 2);
  MuWeights ws(0.6, 2);
  for (int trial = 0; trial < 10; ++trial) {
    auto A = OperatorMatrix::from_dense(small, random_dense(rng, small.size()));
    auto B = OperatorMatrix::from_dense(small, random_dense(rng, small.size()));
    double c = commutator_weighted_norm(A, B, ws);
    CHECK(c <= 2 * weighted_norm2(A * B, ws) + 2 * weighted_norm2(B * A, ws));
    auto sb = sparse_blocks(small, B.to_sparse());
    CHECK(commutator_weighted_norm(A, sb, ws) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("monomials") {
  MonomialOp m{{0, 2}, {2, 0}, {1, 3}};
  CHECK(m.beta() == 6);
  CHECK(m.gamma() == -2);
  CHECK(m.moved_to({4, 5}).sites == std::vector<Vertex>{4, 5});
  CHECK_THROWS(m.moved_to({1}));

  // Annihilators first, then creators, via truncated ladder products.
  BasisLimits lim{3, 3, 5};
  FockBasis b = FockBasis::enumerate(lim);
  SparseOp oracle = ladder_op(b, 0, Ladder::kCreate) * ladder_op(b, 0, Ladder::kCreate);
  SparseOp lower = ladder_op(b, 0, Ladder::kAnnihilate);
  for (int k = 0; k < 3; ++k) lower = SparseOp(ladder_op(b, 2, Ladder::kAnnihilate) * lower);
  oracle = SparseOp(oracle * lower);
  CHECK((Eigen::MatrixXcd(m.sparse(b)) - Eigen::MatrixXcd(oracle)).norm() < 1e-12);
  CHECK_THROWS(MonomialOp({{5}, {1}, {0}}).sparse(b));
}

TEST_CASE("commutator bound helper") {
  FockBasis b = product_basis(3, 3);
  MuWeights w(1.0, 3);
  auto o = MonomialOp{{0}, {0}, {1}}.matrix(b);
  MonomialOp probe{{2}, {1}, {0}};
  auto c = check_commutator_bound(o, probe, w);
  CHECK(c.lhs == 0.0);
  CHECK(c.rhs >= 0.0);
  MonomialOp near{{0}, {1}, {0}};
  auto d = check_commutator_bound(o, near, w);
  CHECK(d.lhs > 0.0);
  CHECK(d.lhs <= d.rhs);
}
