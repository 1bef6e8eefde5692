#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bosonlc/fock.hpp"
#include "bosonlc/lattice.hpp"

namespace bosonlc {

// Product weights w_m = prod_v (1 - e^-mu) e^{-mu n_v}. They depend on a state
// only through its total occupation N.
class MuWeights {
 public:
  MuWeights(double mu, int num_sites);

  double mu() const { return mu_; }
  int num_sites() const { return num_sites_; }
  double site_weight(int n) const;
  double state_weight(int total) const;
  // sqrt(w_a w_b) for states with totals a and b.
  double pair_weight(int total_a, int total_b) const;

 private:
  double mu_;
  int num_sites_;
  double log_norm_;  // num_sites * log(1 - e^-mu)
};

// Operator on a FockBasis stored as dense blocks between total-occupation
// sectors. Key is (row sector, column sector); absent blocks are zero.
class OperatorMatrix {
 public:
  using Key = std::pair<int, int>;

  explicit OperatorMatrix(FockBasis basis) : basis_(std::move(basis)) {}

  static OperatorMatrix from_sparse(const FockBasis& basis, const SparseOp& op);
  static OperatorMatrix from_dense(const FockBasis& basis, const Eigen::MatrixXcd& m);
  static OperatorMatrix identity(const FockBasis& basis);

  const FockBasis& basis() const { return basis_; }
  const std::map<Key, Eigen::MatrixXcd>& blocks() const { return blocks_; }
  std::map<Key, Eigen::MatrixXcd>& blocks() { return blocks_; }

  // Zero-initialized on first access.
  Eigen::MatrixXcd& block(int row_sector, int col_sector);
  const Eigen::MatrixXcd* find(int row_sector, int col_sector) const;

  cplx at(std::size_t row, std::size_t col) const;
  SparseOp to_sparse() const;
  Eigen::MatrixXcd to_dense() const;

  OperatorMatrix adjoint() const;
  // N_col - N_row shared by every block, if any.
  std::optional<int> charge() const;

  OperatorMatrix& operator+=(const OperatorMatrix& other);
  OperatorMatrix& operator-=(const OperatorMatrix& other);
  OperatorMatrix& operator*=(cplx s);

 private:
  FockBasis basis_;
  std::map<Key, Eigen::MatrixXcd> blocks_;
};

OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b);
OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b);
OperatorMatrix operator*(cplx s, OperatorMatrix a);
OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

// (A|B) = sum conj(A_mn) B_mn sqrt(w_m) sqrt(w_n)
cplx weighted_inner(const OperatorMatrix& a, const OperatorMatrix& b, const MuWeights& w);
double weighted_norm2(const OperatorMatrix& a, const MuWeights& w);

struct ThermalCheck {
  cplx inner;        // (A|B)
  cplx thermal;      // e^{mu k/2} tr(rho A^dagger B), k the charge of B
  double residual;
  double tail;       // truncated mass of the product weights, scaled by |A| |B|
};

// B must carry a single charge.
ThermalCheck check_thermal_relation(const OperatorMatrix& a, const OperatorMatrix& b, const MuWeights& w);

// Orthogonal projection (for the weighted inner product) onto operators that
// act as the identity on `site`: the rho-weighted average over that site.
OperatorMatrix identity_component(const OperatorMatrix& a, int site, const MuWeights& w);

// P_R A = A - prod_{v in R} (1 - P_v) A
OperatorMatrix project_nonidentity(const OperatorMatrix& a, const std::vector<Vertex>& sites, const MuWeights& w);

// Q_x on a chain whose sites carry labels -L..L (index = label + L).
OperatorMatrix project_Q(const OperatorMatrix& a, int label, const MuWeights& w);

// (A|F_x^beta|A): |A_mn|^2 weighted by (max(n_x, n'_x) + beta)^beta.
double f_beta_raw(const OperatorMatrix& a, int site, int beta, const MuWeights& w);
// (A|P_x F_x^beta P_x|A)
double f_beta_expectation(const OperatorMatrix& a, int site, int beta, const MuWeights& w);

double commutator_weighted_norm(const OperatorMatrix& a, const OperatorMatrix& b, const MuWeights& w);

using SparseBlocks = std::map<OperatorMatrix::Key, SparseOp>;

// Nonzero sector blocks of a sparse operator.
SparseBlocks sparse_blocks(const FockBasis& basis, const SparseOp& op);

// ([A, B]|[A, B]) for sparse B, one output block at a time. If `per_block` is
// given it receives the contribution of every output block.
double commutator_weighted_norm(const OperatorMatrix& a, const SparseBlocks& b, const MuWeights& w,
                                std::map<OperatorMatrix::Key, double>* per_block = nullptr);

// prod_{x} (b+_x)^{create_x} b_x^{annihilate_x}, normal ordered.
struct MonomialOp {
  std::vector<Vertex> sites;
  std::vector<int> create;
  std::vector<int> annihilate;

  int beta() const;
  int gamma() const;
  SparseOp sparse(const FockBasis& basis) const;
  OperatorMatrix matrix(const FockBasis& basis) const;
  MonomialOp moved_to(const std::vector<Vertex>& new_sites) const;
};

struct CommutatorBoundCheck {
  double lhs;
  double rhs;
};

// ([O, O']|[O, O']) against 8 beta^beta cosh(mu gamma/2) (1 + beta (beta/(1-e^-mu))^beta)
// sum_{x in supp O'} (O|F_x^beta|O).
CommutatorBoundCheck check_commutator_bound(const OperatorMatrix& o, const MonomialOp& probe, const MuWeights& w);

}  // namespace bosonlc
