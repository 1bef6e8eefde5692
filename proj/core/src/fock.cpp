#include "bosonlc/fock.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "bosonlc/errors.hpp"
#include "bosonlc/format.hpp"

namespace bosonlc {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return (a > kSaturated - b) ? kSaturated : a + b; }

void validate(const BasisLimits& lim) {
  if (lim.num_sites < 1) throw std::invalid_argument("basis needs at least one site");
  if (lim.per_site_cap < 0 || lim.per_site_cap > 255)
    throw std::invalid_argument("per-site cap must be in [0, 255]");
  if (lim.total_cap && *lim.total_cap < 0) throw std::invalid_argument("total cap must be >= 0");
  if (lim.fixed_total && *lim.fixed_total < 0) throw std::invalid_argument("fixed total must be >= 0");
}

int max_total(const BasisLimits& lim) {
  long long m = static_cast<long long>(lim.num_sites) * lim.per_site_cap;
  if (lim.total_cap) m = std::min<long long>(m, *lim.total_cap);
  if (lim.fixed_total) m = std::min<long long>(m, *lim.fixed_total);
  return static_cast<int>(std::min<long long>(m, std::numeric_limits<int>::max() / 2));
}

bool total_allowed(const BasisLimits& lim, int n) {
  if (lim.total_cap && n > *lim.total_cap) return false;
  if (lim.fixed_total && n != *lim.fixed_total) return false;
  return true;
}

// Counts past this are reported as saturated; no budget comes close.
constexpr std::uint64_t kCountLimit = std::uint64_t{1} << 53;

// Allowed fillings of `sites` sites with per-site cap `cap`, total in
// [lo, hi], by rolling rows of the composition counts.
std::uint64_t count_range(int sites, int cap, int lo, int hi) {
  std::vector<std::uint64_t> row(hi + 1, 0), next(hi + 1);
  row[0] = 1;
  for (int s = 1; s <= sites; ++s) {
    std::fill(next.begin(), next.end(), 0);
    for (int n = 0; n <= hi; ++n)
      for (int k = 0; k <= std::min(cap, n); ++k) next[n] = sat_add(next[n], row[n - k]);
    row.swap(next);
  }
  std::uint64_t total = 0;
  for (int n = lo; n <= hi; ++n) total = sat_add(total, row[n]);
  return total;
}

}  // namespace

// Sub-windows of 1, 2, 4, ... sites give lower bounds (the other sites hold a
// fixed filling), so huge windows are rejected without the full table.
std::uint64_t count_states(const BasisLimits& lim) {
  validate(lim);
  const long long L = lim.num_sites, c = lim.per_site_cap;
  const int nmax = max_total(lim);
  if (lim.fixed_total && (*lim.fixed_total > L * c || *lim.fixed_total > nmax)) return 0;
  for (long long sub = 1;; sub = std::min(L, 2 * sub)) {
    int lo = 0, hi = static_cast<int>(std::min<long long>(nmax, sub * c));
    if (lim.fixed_total) {
      const long long N = *lim.fixed_total;
      const long long share = std::clamp<long long>(N * sub / L, N - (L - sub) * c, sub * c);
      lo = hi = static_cast<int>(share);
    }
    const std::uint64_t n = count_range(static_cast<int>(sub), static_cast<int>(c), lo, hi);
    if (sub == L) return n;
    if (n > kCountLimit) return kSaturated;
  }
}

struct FockBasis::Impl {
  BasisLimits limits;
  std::string storage;  // size * num_sites bytes
  std::unordered_map<std::string_view, std::uint32_t> index;
  std::vector<int> totals;
  std::vector<int> sector_totals;
  std::vector<std::vector<std::size_t>> sectors;
  std::vector<int> sector_of;
  std::vector<std::size_t> local;
};

FockBasis FockBasis::enumerate(const BasisLimits& lim) {
  std::uint64_t n_states = count_states(lim);
  if (n_states > lim.max_states || n_states > std::numeric_limits<std::uint32_t>::max())
    throw CapacityError("Fock basis with " + (n_states == kSaturated ? std::string("overflowing") : std::to_string(n_states)) +
                        " states exceeds the budget of " + std::to_string(lim.max_states));

  auto impl = std::make_shared<Impl>();
  impl->limits = lim;
  const int L = lim.num_sites;
  const int cap = lim.per_site_cap;
  const int nmax = max_total(lim);
  impl->storage.reserve(n_states * L);
  impl->totals.reserve(n_states);

  // Depth-first fill in lexicographic order; prune when the remaining sites
  // cannot reach an allowed total.
  int min_total = lim.fixed_total ? *lim.fixed_total : 0;
  std::string cur(L, '\0');
  auto recurse = [&](auto&& self, int site, int sum) -> void {
    if (site == L) {
      if (!total_allowed(lim, sum)) return;
      impl->storage.append(cur);
      impl->totals.push_back(sum);
      return;
    }
    int remaining = L - site - 1;
    for (int k = 0; k <= cap && sum + k <= nmax; ++k) {
      if (sum + k + static_cast<long long>(remaining) * cap < min_total) continue;
      cur[site] = static_cast<char>(static_cast<std::uint8_t>(k));
      self(self, site + 1, sum + k);
    }
  };
  recurse(recurse, 0, 0);

  const std::size_t size = impl->totals.size();
  impl->index.reserve(size);
  for (std::size_t i = 0; i < size; ++i)
    impl->index.emplace(std::string_view(impl->storage.data() + i * L, L), static_cast<std::uint32_t>(i));

  std::map<int, std::vector<std::size_t>> by_total;
  for (std::size_t i = 0; i < size; ++i) by_total[impl->totals[i]].push_back(i);
  impl->sector_of.resize(size);
  impl->local.resize(size);
  for (auto& [n, members] : by_total) {
    int s = static_cast<int>(impl->sectors.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      impl->sector_of[members[k]] = s;
      impl->local[members[k]] = k;
    }
    impl->sector_totals.push_back(n);
    impl->sectors.push_back(std::move(members));
  }

  FockBasis b;
  b.impl_ = std::move(impl);
  return b;
}

int FockBasis::num_sites() const { return impl_->limits.num_sites; }
int FockBasis::per_site_cap() const { return impl_->limits.per_site_cap; }
std::optional<int> FockBasis::total_cap() const { return impl_->limits.total_cap; }
std::size_t FockBasis::size() const { return impl_->totals.size(); }

std::span<const std::uint8_t> FockBasis::state(std::size_t i) const {
  const int L = impl_->limits.num_sites;
  return {reinterpret_cast<const std::uint8_t*>(impl_->storage.data()) + i * L, static_cast<std::size_t>(L)};
}

int FockBasis::total(std::size_t i) const { return impl_->totals[i]; }

std::optional<std::size_t> FockBasis::index_of(std::span<const std::uint8_t> occ) const {
  if (occ.size() != static_cast<std::size_t>(impl_->limits.num_sites)) return std::nullopt;
  auto it = impl_->index.find(std::string_view(reinterpret_cast<const char*>(occ.data()), occ.size()));
  if (it == impl_->index.end()) return std::nullopt;
  return it->second;
}

int FockBasis::num_sectors() const { return static_cast<int>(impl_->sectors.size()); }
int FockBasis::sector_total(int s) const { return impl_->sector_totals.at(s); }
const std::vector<std::size_t>& FockBasis::sector_states(int s) const { return impl_->sectors.at(s); }
int FockBasis::sector_of_state(std::size_t i) const { return impl_->sector_of[i]; }
std::size_t FockBasis::local_index(std::size_t i) const { return impl_->local[i]; }

std::optional<int> FockBasis::sector_with_total(int total) const {
  const auto& t = impl_->sector_totals;
  auto it = std::lower_bound(t.begin(), t.end(), total);
  if (it == t.end() || *it != total) return std::nullopt;
  return static_cast<int>(it - t.begin());
}

SparseOp ladder_op(const FockBasis& basis, int site, Ladder kind) {
  if (site < 0 || site >= basis.num_sites()) throw std::invalid_argument("site out of range");
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(basis.size());
  std::vector<std::uint8_t> buf(basis.num_sites());
  for (std::size_t m = 0; m < basis.size(); ++m) {
    auto occ = basis.state(m);
    int n = occ[site];
    if (kind == Ladder::kNumber) {
      if (n != 0) trip.emplace_back(m, m, static_cast<double>(n));
      continue;
    }
    int target_n = (kind == Ladder::kCreate) ? n + 1 : n - 1;
    if (target_n < 0 || target_n > 255) continue;
    std::copy(occ.begin(), occ.end(), buf.begin());
    buf[site] = static_cast<std::uint8_t>(target_n);
    auto target = basis.index_of(buf);
    if (!target) continue;
    double amp = std::sqrt(static_cast<double>(std::max(n, target_n)));
    trip.emplace_back(static_cast<Eigen::Index>(*target), static_cast<Eigen::Index>(m), amp);
  }
  SparseOp op(dim, dim);
  op.setFromTriplets(trip.begin(), trip.end());
  return op;
}

SparseOp total_number_op(const FockBasis& basis) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t m = 0; m < basis.size(); ++m)
    if (basis.total(m) != 0) trip.emplace_back(m, m, static_cast<double>(basis.total(m)));
  SparseOp op(dim, dim);
  op.setFromTriplets(trip.begin(), trip.end());
  return op;
}

bool check_number_conservation(const SparseOp& H, const SparseOp& number) {
  if (H.rows() != number.rows() || H.cols() != number.cols() || H.rows() != H.cols())
    throw std::invalid_argument("dimension mismatch in number conservation check");
  SparseOp c = SparseOp(H * number) - SparseOp(number * H);
  for (Eigen::Index k = 0; k < c.outerSize(); ++k)
    for (SparseOp::InnerIterator it(c, k); it; ++it)
      if (it.value() != cplx(0.0, 0.0)) return false;
  return true;
}

SparseOp sector_block(const SparseOp& op, const FockBasis& basis, int row_sector, int col_sector) {
  const auto& rows = basis.sector_states(row_sector);
  const auto& cols = basis.sector_states(col_sector);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (SparseOp::InnerIterator it(op, static_cast<Eigen::Index>(rows[i])); it; ++it) {
      auto c = static_cast<std::size_t>(it.col());
      if (basis.sector_of_state(c) == col_sector) trip.emplace_back(i, basis.local_index(c), it.value());
    }
  SparseOp out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void dump_sparse(std::ostream& os, const SparseOp& op) {
  for (Eigen::Index k = 0; k < op.outerSize(); ++k)
    for (SparseOp::InnerIterator it(op, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << format_double(it.value().real()) << ' '
         << format_double(it.value().imag()) << '\n';
}

}  // namespace bosonlc
