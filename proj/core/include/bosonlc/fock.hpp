#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace bosonlc {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct BasisLimits {
  int num_sites = 1;
  int per_site_cap = 1;                // at most 255, occupations are stored as bytes
  std::optional<int> total_cap;        // keep states with total <= total_cap
  std::optional<int> fixed_total;      // keep only states with exactly this total
  std::size_t max_states = 50'000'000;
};

// Number of states selected by the limits, saturating at UINT64_MAX.
std::uint64_t count_states(const BasisLimits& limits);

// Truncated bosonic Fock basis in lexicographic order (site 0 most
// significant). States are grouped into sectors of equal total occupation,
// sorted by that total. Copies share the immutable storage.
class FockBasis {
 public:
  static FockBasis enumerate(const BasisLimits& limits);

  int num_sites() const;
  int per_site_cap() const;
  std::optional<int> total_cap() const;
  std::size_t size() const;

  std::span<const std::uint8_t> state(std::size_t i) const;
  int occupation(std::size_t i, int site) const { return state(i)[site]; }
  int total(std::size_t i) const;
  std::optional<std::size_t> index_of(std::span<const std::uint8_t> occupations) const;

  int num_sectors() const;
  int sector_total(int s) const;
  const std::vector<std::size_t>& sector_states(int s) const;
  int sector_of_state(std::size_t i) const;
  std::size_t local_index(std::size_t i) const;
  std::optional<int> sector_with_total(int total) const;

  bool same_as(const FockBasis& other) const { return impl_ == other.impl_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

enum class Ladder { kCreate, kAnnihilate, kNumber };

// Matrix of b^dagger, b or n on one site. Transitions leaving the basis are
// dropped.
SparseOp ladder_op(const FockBasis& basis, int site, Ladder kind);

SparseOp total_number_op(const FockBasis& basis);

// Exact structural test of H N - N H == 0.
bool check_number_conservation(const SparseOp& H, const SparseOp& number);

// Rows of sector `row_sector`, columns of sector `col_sector`, in local indices.
SparseOp sector_block(const SparseOp& op, const FockBasis& basis, int row_sector, int col_sector);

// One "row col re im" line per stored entry, rows in order.
void dump_sparse(std::ostream& os, const SparseOp& op);

}  // namespace bosonlc
