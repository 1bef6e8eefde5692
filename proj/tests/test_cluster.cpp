#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "bosonlc/cluster.hpp"
#include "bosonlc/errors.hpp"

using namespace bosonlc;

namespace {

MonomialOp number(Vertex v) { return {{v}, {1}, {1}}; }

ClusterOptions number_pair(std::vector<int> rs, int cap = 2) {
  ClusterOptions opt;
  opt.o = number(0);
  opt.o_prime = number(0);
  opt.r_list = std::move(rs);
  opt.per_site_cap = cap;
  return opt;
}

}  // namespace

TEST_CASE("clustering bound") {
  // l = 0 on a chain: v = (2 theta)^4 (1 + eps) 16 (31 + 48 / mu).
  const double v = std::pow(3.0, 4) * 1.1 * 16.0 * (31.0 + 48.0 / 2.0);
  CHECK(v == doctest::Approx(78408.0));
  CHECK(clustering_bound(0.0, 0.5, 2.0, 1.5, 1.0, 0, 0.1, 7.0) == 7.0);
  for (double r : {1.0, 5.0, 40.0})
    CHECK(clustering_bound(r, 0.5, 2.0, 1.5, 1.0, 0, 0.1, 1.0) == doctest::Approx(std::exp(-0.5 * r / (2 * v))));
  CHECK(clustering_bound(3.0, 2.0, 2.0, 1.5, 1.0, 0, 0.1, 1.0) < clustering_bound(3.0, 1.0, 2.0, 1.5, 1.0, 0, 0.1, 1.0));
  CHECK_THROWS_AS(clustering_bound(1.0, 0.0, 1.0, 1.0, 1.0, 0, 0.1, 1.0), PropertyViolation);
  CHECK_THROWS_AS(clustering_bound(1.0, -1e-3, 1.0, 1.0, 1.0, 0, 0.1, 1.0), PropertyViolation);
}

TEST_CASE("decoupled Mott chain has no correlations") {
  ModelSpec m = bose_hubbard(build_path(6), 0.0, 1.0);
  ClusterReport rep = clustering_experiment(m, number_pair({1, 2, 3}));
  CHECK(rep.e0 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.gap == doctest::Approx(2.0).epsilon(1e-9));
  for (const auto& row : rep.rows) CHECK(row.raw < 1e-12);
}

TEST_CASE("degenerate ground states are refused") {
  ModelSpec free0 = bose_hubbard(build_path(4), 0.0, 0.0);
  CHECK_THROWS_AS(clustering_experiment(free0, number_pair({1})), PropertyViolation);
}

TEST_CASE("correlations match a dense ground state") {
  const int L = 5;
  ModelSpec m = bose_hubbard(build_path(L), 1.0, 3.0);
  ClusterOptions opt = number_pair({1, 2, 3});
  opt.o = MonomialOp{{0, 1}, {1, 0}, {0, 1}};
  opt.o_prime = number(0);
  ClusterReport rep = clustering_experiment(m, opt);

  BasisLimits lim{L, 2};
  lim.fixed_total = L;
  FockBasis b = FockBasis::enumerate(lim);
  CHECK(rep.sector_size == b.size());
  Eigen::MatrixXcd H(build_hamiltonian(m, b, 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  CHECK(rep.e0 == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-9));
  CHECK(rep.gap == doctest::Approx(es.eigenvalues()(1) - es.eigenvalues()(0)).epsilon(1e-8));

  // The hopping term passes through N - 1 bosons, so embed the ground state
  // in a basis that holds both sectors.
  BasisLimits wide{L, 2, L};
  FockBasis w = FockBasis::enumerate(wide);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(w.size());
  for (std::size_t i = 0; i < b.size(); ++i) psi(*w.index_of(b.state(i))) = es.eigenvectors()(i, 0);

  Eigen::MatrixXcd O = Eigen::MatrixXcd(ladder_op(w, 0, Ladder::kCreate)) * Eigen::MatrixXcd(ladder_op(w, 1, Ladder::kAnnihilate));
  for (const auto& row : rep.rows) {
    Eigen::MatrixXcd P(ladder_op(w, row.site, Ladder::kNumber));
    const cplx cor = psi.dot(O * P * psi) - psi.dot(O * psi) * psi.dot(P * psi);
    CHECK(row.raw == doctest::Approx(std::abs(cor)).epsilon(1e-7));
    CHECK(row.site == row.r + 1);
  }

  // Normalisation by the untruncated weighted norms at unit density: (n|n) =
  // <n^2> = q (1 + q) / (1 - q)^2 with q = e^-1, and (b|b) = (b+|b+) = q^1/2 / (1 - q).
  const double q = std::exp(-1.0);
  const double nn = q * (1 + q) / ((1 - q) * (1 - q));
  const double hop = q / ((1 - q) * (1 - q));
  for (const auto& row : rep.rows) CHECK(row.exact == doctest::Approx(row.raw / std::sqrt(nn * hop)).epsilon(1e-9));
}

TEST_CASE("deep Mott chain decays monotonically") {
  ModelSpec m = bose_hubbard(build_path(8), 1.0, 20.0);
  ClusterReport rep = clustering_experiment(m, number_pair({1, 2, 3, 4, 5}));
  CHECK(rep.gap > 0.0);
  CHECK(rep.monotone);
  CHECK(rep.dominated);
  CHECK(rep.fit_slope < 0.0);
  for (const auto& row : rep.rows) CHECK(row.ratio == doctest::Approx(row.exact / row.bound));
  auto j = cluster_json(rep);
  CHECK(j["rows"].size() == 5);
  CHECK(j["assumption"]["status"] == "asserted, unverified");
}

TEST_CASE("separations outside the chain are rejected") {
  ModelSpec m = bose_hubbard(build_path(4), 1.0, 5.0);
  CHECK_THROWS(clustering_experiment(m, number_pair({9})));
  CHECK_THROWS(clustering_experiment(m, number_pair({0})));
}
