#include "bosonlc/opspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

namespace bosonlc {

MuWeights::MuWeights(double mu, int num_sites) : mu_(mu), num_sites_(num_sites) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive and finite");
  if (num_sites < 1) throw std::invalid_argument("weights need at least one site");
  log_norm_ = num_sites * std::log1p(-std::exp(-mu));
}

double MuWeights::site_weight(int n) const { return -std::expm1(-mu_) * std::exp(-mu_ * n); }
double MuWeights::state_weight(int total) const { return std::exp(log_norm_ - mu_ * total); }
double MuWeights::pair_weight(int a, int b) const { return std::exp(log_norm_ - 0.5 * mu_ * (a + b)); }

OperatorMatrix OperatorMatrix::from_sparse(const FockBasis& basis, const SparseOp& op) {
  if (op.rows() != static_cast<Eigen::Index>(basis.size()) || op.cols() != op.rows())
    throw std::invalid_argument("sparse operator does not match the basis dimension");
  OperatorMatrix out(basis);
  for (Eigen::Index k = 0; k < op.outerSize(); ++k)
    for (SparseOp::InnerIterator it(op, k); it; ++it) {
      auto i = static_cast<std::size_t>(it.row()), j = static_cast<std::size_t>(it.col());
      out.block(basis.sector_of_state(i), basis.sector_of_state(j))(basis.local_index(i), basis.local_index(j)) +=
          it.value();
    }
  return out;
}

OperatorMatrix OperatorMatrix::from_dense(const FockBasis& basis, const Eigen::MatrixXcd& m) {
  if (m.rows() != static_cast<Eigen::Index>(basis.size()) || m.cols() != m.rows())
    throw std::invalid_argument("dense operator does not match the basis dimension");
  OperatorMatrix out(basis);
  for (int a = 0; a < basis.num_sectors(); ++a)
    for (int b = 0; b < basis.num_sectors(); ++b) {
      const auto& rows = basis.sector_states(a);
      const auto& cols = basis.sector_states(b);
      Eigen::MatrixXcd blk(rows.size(), cols.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) blk(i, j) = m(rows[i], cols[j]);
      if (blk.cwiseAbs().maxCoeff() != 0.0) out.blocks_[{a, b}] = std::move(blk);
    }
  return out;
}

OperatorMatrix OperatorMatrix::identity(const FockBasis& basis) {
  OperatorMatrix out(basis);
  for (int s = 0; s < basis.num_sectors(); ++s) {
    auto d = static_cast<Eigen::Index>(basis.sector_states(s).size());
    out.blocks_[{s, s}] = Eigen::MatrixXcd::Identity(d, d);
  }
  return out;
}

Eigen::MatrixXcd& OperatorMatrix::block(int a, int b) {
  auto it = blocks_.find({a, b});
  if (it != blocks_.end()) return it->second;
  auto rows = static_cast<Eigen::Index>(basis_.sector_states(a).size());
  auto cols = static_cast<Eigen::Index>(basis_.sector_states(b).size());
  return blocks_.emplace(Key{a, b}, Eigen::MatrixXcd::Zero(rows, cols)).first->second;
}

const Eigen::MatrixXcd* OperatorMatrix::find(int a, int b) const {
  auto it = blocks_.find({a, b});
  return it == blocks_.end() ? nullptr : &it->second;
}

cplx OperatorMatrix::at(std::size_t row, std::size_t col) const {
  const auto* blk = find(basis_.sector_of_state(row), basis_.sector_of_state(col));
  if (!blk) return {0.0, 0.0};
  return (*blk)(basis_.local_index(row), basis_.local_index(col));
}

SparseOp OperatorMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (const auto& [key, blk] : blocks_) {
    const auto& rows = basis_.sector_states(key.first);
    const auto& cols = basis_.sector_states(key.second);
    for (Eigen::Index j = 0; j < blk.cols(); ++j)
      for (Eigen::Index i = 0; i < blk.rows(); ++i)
        if (blk(i, j) != cplx(0.0, 0.0)) trip.emplace_back(rows[i], cols[j], blk(i, j));
  }
  auto dim = static_cast<Eigen::Index>(basis_.size());
  SparseOp op(dim, dim);
  op.setFromTriplets(trip.begin(), trip.end());
  return op;
}

Eigen::MatrixXcd OperatorMatrix::to_dense() const {
  auto dim = static_cast<Eigen::Index>(basis_.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [key, blk] : blocks_) {
    const auto& rows = basis_.sector_states(key.first);
    const auto& cols = basis_.sector_states(key.second);
    for (Eigen::Index j = 0; j < blk.cols(); ++j)
      for (Eigen::Index i = 0; i < blk.rows(); ++i) m(rows[i], cols[j]) = blk(i, j);
  }
  return m;
}

OperatorMatrix OperatorMatrix::adjoint() const {
  OperatorMatrix out(basis_);
  for (const auto& [key, blk] : blocks_) out.blocks_[{key.second, key.first}] = blk.adjoint();
  return out;
}

std::optional<int> OperatorMatrix::charge() const {
  std::optional<int> k;
  for (const auto& [key, blk] : blocks_) {
    int c = basis_.sector_total(key.second) - basis_.sector_total(key.first);
    if (k && *k != c) return std::nullopt;
    k = c;
  }
  return k.value_or(0);
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& other) {
  if (!basis_.same_as(other.basis_)) throw std::invalid_argument("operators live on different bases");
  for (const auto& [key, blk] : other.blocks_) block(key.first, key.second) += blk;
  return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& other) {
  if (!basis_.same_as(other.basis_)) throw std::invalid_argument("operators live on different bases");
  for (const auto& [key, blk] : other.blocks_) block(key.first, key.second) -= blk;
  return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(cplx s) {
  for (auto& [key, blk] : blocks_) blk *= s;
  return *this;
}

OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
OperatorMatrix operator*(cplx s, OperatorMatrix a) { return a *= s; }

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!a.basis().same_as(b.basis())) throw std::invalid_argument("operators live on different bases");
  OperatorMatrix out(a.basis());
  std::multimap<int, const std::pair<const OperatorMatrix::Key, Eigen::MatrixXcd>*> by_row;
  for (const auto& entry : b.blocks()) by_row.emplace(entry.first.first, &entry);
  for (const auto& [ka, blk_a] : a.blocks()) {
    auto range = by_row.equal_range(ka.second);
    for (auto it = range.first; it != range.second; ++it) {
      const auto& [kb, blk_b] = *it->second;
      out.block(ka.first, kb.second).noalias() += blk_a * blk_b;
    }
  }
  return out;
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) { return a * b - b * a; }

cplx weighted_inner(const OperatorMatrix& a, const OperatorMatrix& b, const MuWeights& w) {
  const FockBasis& basis = a.basis();
  cplx sum = 0.0;
  for (const auto& [key, blk_a] : a.blocks()) {
    const auto* blk_b = b.find(key.first, key.second);
    if (!blk_b) continue;
    double pw = w.pair_weight(basis.sector_total(key.first), basis.sector_total(key.second));
    sum += pw * (blk_a.array().conjugate() * blk_b->array()).sum();
  }
  return sum;
}

double weighted_norm2(const OperatorMatrix& a, const MuWeights& w) {
  const FockBasis& basis = a.basis();
  double sum = 0.0;
  for (const auto& [key, blk] : a.blocks())
    sum += w.pair_weight(basis.sector_total(key.first), basis.sector_total(key.second)) * blk.squaredNorm();
  return sum;
}

ThermalCheck check_thermal_relation(const OperatorMatrix& a, const OperatorMatrix& b, const MuWeights& w) {
  auto k = b.charge();
  if (!k) throw std::invalid_argument("thermal relation needs an operator of definite charge");
  const FockBasis& basis = a.basis();
  ThermalCheck out{weighted_inner(a, b, w), 0.0, 0.0, 0.0};
  cplx tr = 0.0;
  for (const auto& [key, blk_b] : b.blocks()) {
    const auto* blk_a = a.find(key.first, key.second);
    if (!blk_a) continue;
    tr += w.state_weight(basis.sector_total(key.second)) * (blk_a->array().conjugate() * blk_b.array()).sum();
  }
  out.thermal = std::exp(0.5 * w.mu() * *k) * tr;
  out.residual = std::abs(out.inner - out.thermal);
  int cap = basis.per_site_cap();
  if (basis.total_cap()) cap = std::min(cap, *basis.total_cap());
  double scale = std::max({1.0, std::abs(out.inner), std::abs(out.thermal)});
  out.tail = basis.num_sites() * std::exp(-w.mu() * cap) * scale;
  return out;
}

namespace {

// Per-state decomposition n = n_site + rest, with rest configurations indexed
// within their own total.
struct SiteSplit {
  std::vector<int> n;
  std::vector<std::uint32_t> rest_local;
  std::map<int, std::size_t> rest_size;                  // rest total -> count
  std::vector<std::vector<std::vector<std::size_t>>> by_n;  // [sector][n] -> local indices
};

SiteSplit split_site(const FockBasis& basis, int site) {
  if (site < 0 || site >= basis.num_sites()) throw std::invalid_argument("site out of range");
  SiteSplit sp;
  const std::size_t dim = basis.size();
  sp.n.resize(dim);
  sp.rest_local.resize(dim);
  std::map<int, std::unordered_map<std::string, std::uint32_t>> ids;
  std::string key(basis.num_sites() - 1, '\0');
  for (std::size_t m = 0; m < dim; ++m) {
    auto occ = basis.state(m);
    int n = occ[site];
    sp.n[m] = n;
    for (int v = 0, k = 0; v < basis.num_sites(); ++v)
      if (v != site) key[k++] = static_cast<char>(occ[v]);
    auto& table = ids[basis.total(m) - n];
    auto [it, fresh] = table.emplace(key, static_cast<std::uint32_t>(table.size()));
    sp.rest_local[m] = it->second;
  }
  for (auto& [total, table] : ids) sp.rest_size[total] = table.size();
  sp.by_n.resize(basis.num_sectors());
  for (int s = 0; s < basis.num_sectors(); ++s) {
    const auto& members = basis.sector_states(s);
    sp.by_n[s].resize(basis.per_site_cap() + 1);
    for (std::size_t i = 0; i < members.size(); ++i) sp.by_n[s][sp.n[members[i]]].push_back(i);
  }
  return sp;
}

using RestKey = std::pair<int, int>;

bool in_basis(const FockBasis& basis, int n, int rest_total) {
  return n <= basis.per_site_cap() && basis.sector_with_total(n + rest_total).has_value();
}

double average_norm(const FockBasis& basis, const MuWeights& w, int rr, int rc) {
  double z = 0.0;
  for (int n = 0; n <= basis.per_site_cap(); ++n)
    if (in_basis(basis, n, rr) && in_basis(basis, n, rc)) z += w.site_weight(n);
  return z;
}

// S[(R_r, R_c)](rest_r, rest_c) = sum_n w_n A[(n, rest_r), (n, rest_c)] / sum_n w_n
std::map<RestKey, Eigen::MatrixXcd> identity_averages(const OperatorMatrix& a, const SiteSplit& sp,
                                                      const MuWeights& w) {
  const FockBasis& basis = a.basis();
  std::map<RestKey, Eigen::MatrixXcd> S;
  for (const auto& [key, blk] : a.blocks()) {
    const int na = basis.sector_total(key.first), nb = basis.sector_total(key.second);
    const auto& rows = basis.sector_states(key.first);
    const auto& cols = basis.sector_states(key.second);
    for (int n = 0; n <= basis.per_site_cap(); ++n) {
      const auto& ri = sp.by_n[key.first][n];
      const auto& ci = sp.by_n[key.second][n];
      if (ri.empty() || ci.empty()) continue;
      RestKey rk{na - n, nb - n};
      auto it = S.find(rk);
      if (it == S.end())
        it = S.emplace(rk, Eigen::MatrixXcd::Zero(sp.rest_size.at(rk.first), sp.rest_size.at(rk.second))).first;
      const double wn = w.site_weight(n);
      for (std::size_t jj = 0; jj < ci.size(); ++jj) {
        auto col_rest = sp.rest_local[cols[ci[jj]]];
        for (std::size_t ii = 0; ii < ri.size(); ++ii)
          it->second(sp.rest_local[rows[ri[ii]]], col_rest) += wn * blk(ri[ii], ci[jj]);
      }
    }
  }
  for (auto& [rk, m] : S) m /= average_norm(basis, w, rk.first, rk.second);
  return S;
}

std::vector<double> f_table(int cap, int beta) {
  std::vector<double> f((cap + 1) * (cap + 1));
  for (int n = 0; n <= cap; ++n)
    for (int m = 0; m <= cap; ++m) f[n * (cap + 1) + m] = std::pow(static_cast<double>(std::max(n, m) + beta), beta);
  return f;
}

}  // namespace

OperatorMatrix identity_component(const OperatorMatrix& a, int site, const MuWeights& w) {
  const FockBasis& basis = a.basis();
  SiteSplit sp = split_site(basis, site);
  auto S = identity_averages(a, sp, w);
  OperatorMatrix out(basis);
  for (const auto& [rk, avg] : S) {
    for (int n = 0; n <= basis.per_site_cap(); ++n) {
      if (!in_basis(basis, n, rk.first) || !in_basis(basis, n, rk.second)) continue;
      int sa = *basis.sector_with_total(n + rk.first), sb = *basis.sector_with_total(n + rk.second);
      const auto& ri = sp.by_n[sa][n];
      const auto& ci = sp.by_n[sb][n];
      if (ri.empty() || ci.empty()) continue;
      const auto& rows = basis.sector_states(sa);
      const auto& cols = basis.sector_states(sb);
      auto& blk = out.block(sa, sb);
      for (std::size_t jj = 0; jj < ci.size(); ++jj)
        for (std::size_t ii = 0; ii < ri.size(); ++ii)
          blk(ri[ii], ci[jj]) = avg(sp.rest_local[rows[ri[ii]]], sp.rest_local[cols[ci[jj]]]);
    }
  }
  return out;
}

OperatorMatrix project_nonidentity(const OperatorMatrix& a, const std::vector<Vertex>& sites, const MuWeights& w) {
  OperatorMatrix e = a;
  for (Vertex v : sites) e = identity_component(e, v, w);
  return a - e;
}

OperatorMatrix project_Q(const OperatorMatrix& a, int label, const MuWeights& w) {
  const int L = a.basis().num_sites();
  if (L % 2 == 0) throw std::invalid_argument("project_Q needs a chain with an odd number of sites");
  const int half = (L - 1) / 2;
  if (label < 0 || label > half) throw std::invalid_argument("Q label must lie in [0, L]");
  OperatorMatrix outer = a;
  for (int y = label + 1; y <= half; ++y) {
    outer = identity_component(outer, half + y, w);
    outer = identity_component(outer, half - y, w);
  }
  OperatorMatrix inner = identity_component(outer, half + label, w);
  if (label > 0) inner = identity_component(inner, half - label, w);
  return outer - inner;
}

double f_beta_raw(const OperatorMatrix& a, int site, int beta, const MuWeights& w) {
  const FockBasis& basis = a.basis();
  if (site < 0 || site >= basis.num_sites()) throw std::invalid_argument("site out of range");
  const int cap = basis.per_site_cap();
  auto f = f_table(cap, beta);
  double sum = 0.0;
  for (const auto& [key, blk] : a.blocks()) {
    const auto& rows = basis.sector_states(key.first);
    const auto& cols = basis.sector_states(key.second);
    double part = 0.0;
    for (Eigen::Index j = 0; j < blk.cols(); ++j) {
      int nc = basis.occupation(cols[j], site);
      for (Eigen::Index i = 0; i < blk.rows(); ++i)
        part += std::norm(blk(i, j)) * f[basis.occupation(rows[i], site) * (cap + 1) + nc];
    }
    sum += w.pair_weight(basis.sector_total(key.first), basis.sector_total(key.second)) * part;
  }
  return sum;
}

double f_beta_expectation(const OperatorMatrix& a, int site, int beta, const MuWeights& w) {
  const FockBasis& basis = a.basis();
  SiteSplit sp = split_site(basis, site);
  auto S = identity_averages(a, sp, w);
  const int cap = basis.per_site_cap();
  auto f = f_table(cap, beta);
  double sum = 0.0;

  // Blocks of A, with the identity component subtracted where it lives.
  for (const auto& [key, blk] : a.blocks()) {
    const int na = basis.sector_total(key.first), nb = basis.sector_total(key.second);
    const auto& rows = basis.sector_states(key.first);
    const auto& cols = basis.sector_states(key.second);
    double part = 0.0;
    for (Eigen::Index j = 0; j < blk.cols(); ++j) {
      const std::size_t gc = cols[j];
      const int nc = sp.n[gc];
      const Eigen::MatrixXcd* avg = nullptr;
      auto it = S.find({na - nc, nb - nc});
      if (it != S.end()) avg = &it->second;
      for (Eigen::Index i = 0; i < blk.rows(); ++i) {
        const std::size_t gr = rows[i];
        const int nr = sp.n[gr];
        cplx v = blk(i, j);
        if (nr == nc && avg) v -= (*avg)(sp.rest_local[gr], sp.rest_local[gc]);
        part += std::norm(v) * f[nr * (cap + 1) + nc];
      }
    }
    sum += w.pair_weight(na, nb) * part;
  }

  // Identity component landing on blocks that A does not store.
  for (const auto& [rk, avg] : S) {
    for (int n = 0; n <= cap; ++n) {
      if (!in_basis(basis, n, rk.first) || !in_basis(basis, n, rk.second)) continue;
      int sa = *basis.sector_with_total(n + rk.first), sb = *basis.sector_with_total(n + rk.second);
      if (a.find(sa, sb)) continue;
      const auto& ri = sp.by_n[sa][n];
      const auto& ci = sp.by_n[sb][n];
      const auto& rows = basis.sector_states(sa);
      const auto& cols = basis.sector_states(sb);
      double part = 0.0;
      for (std::size_t jj = 0; jj < ci.size(); ++jj)
        for (std::size_t ii = 0; ii < ri.size(); ++ii)
          part += std::norm(avg(sp.rest_local[rows[ri[ii]]], sp.rest_local[cols[ci[jj]]]));
      sum += w.pair_weight(basis.sector_total(sa), basis.sector_total(sb)) * part * f[n * (cap + 1) + n];
    }
  }
  return sum;
}

double commutator_weighted_norm(const OperatorMatrix& a, const OperatorMatrix& b, const MuWeights& w) {
  return weighted_norm2(commutator(a, b), w);
}

SparseBlocks sparse_blocks(const FockBasis& basis, const SparseOp& op) {
  if (op.rows() != static_cast<Eigen::Index>(basis.size()) || op.cols() != op.rows())
    throw std::invalid_argument("sparse operator does not match the basis dimension");
  std::map<OperatorMatrix::Key, std::vector<Eigen::Triplet<cplx>>> trips;
  for (Eigen::Index k = 0; k < op.outerSize(); ++k)
    for (SparseOp::InnerIterator it(op, k); it; ++it) {
      if (it.value() == cplx(0.0, 0.0)) continue;
      auto i = static_cast<std::size_t>(it.row()), j = static_cast<std::size_t>(it.col());
      trips[{basis.sector_of_state(i), basis.sector_of_state(j)}].emplace_back(
          static_cast<Eigen::Index>(basis.local_index(i)), static_cast<Eigen::Index>(basis.local_index(j)), it.value());
    }
  SparseBlocks out;
  for (auto& [key, t] : trips) {
    SparseOp blk(static_cast<Eigen::Index>(basis.sector_states(key.first).size()),
                 static_cast<Eigen::Index>(basis.sector_states(key.second).size()));
    blk.setFromTriplets(t.begin(), t.end());
    out.emplace(key, std::move(blk));
  }
  return out;
}

double commutator_weighted_norm(const OperatorMatrix& a, const SparseBlocks& b, const MuWeights& w,
                                std::map<OperatorMatrix::Key, double>* per_block) {
  const FockBasis& basis = a.basis();
  std::multimap<int, const SparseBlocks::value_type*> b_by_row, b_by_col;
  for (const auto& entry : b) {
    b_by_row.emplace(entry.first.first, &entry);
    b_by_col.emplace(entry.first.second, &entry);
  }
  // Output key -> contributing pairs; A B and B A terms.
  std::map<OperatorMatrix::Key, std::vector<std::pair<const Eigen::MatrixXcd*, const SparseOp*>>> ab, ba;
  for (const auto& [ka, blk] : a.blocks()) {
    auto r1 = b_by_row.equal_range(ka.second);
    for (auto it = r1.first; it != r1.second; ++it)
      ab[{ka.first, it->second->first.second}].emplace_back(&blk, &it->second->second);
    auto r2 = b_by_col.equal_range(ka.first);
    for (auto it = r2.first; it != r2.second; ++it)
      ba[{it->second->first.first, ka.second}].emplace_back(&blk, &it->second->second);
  }
  std::vector<OperatorMatrix::Key> keys;
  for (const auto& kv : ab) keys.push_back(kv.first);
  for (const auto& kv : ba)
    if (!ab.count(kv.first)) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  double sum = 0.0;
  for (const auto& key : keys) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.sector_states(key.first).size()),
                                                 static_cast<Eigen::Index>(basis.sector_states(key.second).size()));
    if (auto it = ab.find(key); it != ab.end())
      for (const auto& [dense, sparse] : it->second) c += *dense * *sparse;
    if (auto it = ba.find(key); it != ba.end())
      for (const auto& [dense, sparse] : it->second) c -= *sparse * *dense;
    double part = w.pair_weight(basis.sector_total(key.first), basis.sector_total(key.second)) * c.squaredNorm();
    if (per_block) (*per_block)[key] = part;
    sum += part;
  }
  return sum;
}

int MonomialOp::beta() const {
  int s = 0;
  for (std::size_t k = 0; k < sites.size(); ++k) s += create.at(k) + annihilate.at(k);
  return s;
}

int MonomialOp::gamma() const {
  int s = 0;
  for (std::size_t k = 0; k < sites.size(); ++k) s += create.at(k) - annihilate.at(k);
  return s;
}

SparseOp MonomialOp::sparse(const FockBasis& basis) const {
  if (create.size() != sites.size() || annihilate.size() != sites.size())
    throw std::invalid_argument("monomial exponent lists must match its sites");
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (create[k] < 0 || annihilate[k] < 0) throw std::invalid_argument("negative monomial exponent");
    if (sites[k] < 0 || sites[k] >= basis.num_sites()) throw std::invalid_argument("monomial site out of range");
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<Eigen::Triplet<cplx>> trip;
  std::vector<std::uint8_t> buf(basis.num_sites());
  for (std::size_t m = 0; m < basis.size(); ++m) {
    auto occ = basis.state(m);
    std::copy(occ.begin(), occ.end(), buf.begin());
    // Annihilators act first on every site, then creators; only the final
    // state has to lie in the basis.
    double amp = 1.0;
    for (std::size_t k = 0; k < sites.size() && amp != 0.0; ++k)
      for (int p = 0; p < annihilate[k]; ++p) {
        int n = buf[sites[k]];
        if (n == 0) {
          amp = 0.0;
          break;
        }
        amp *= std::sqrt(static_cast<double>(n));
        buf[sites[k]] = static_cast<std::uint8_t>(n - 1);
      }
    for (std::size_t k = 0; k < sites.size() && amp != 0.0; ++k)
      for (int p = 0; p < create[k]; ++p) {
        int n = buf[sites[k]];
        if (n == 255) {
          amp = 0.0;
          break;
        }
        amp *= std::sqrt(static_cast<double>(n + 1));
        buf[sites[k]] = static_cast<std::uint8_t>(n + 1);
      }
    if (amp == 0.0) continue;
    auto target = basis.index_of(buf);
    if (target) trip.emplace_back(static_cast<Eigen::Index>(*target), static_cast<Eigen::Index>(m), amp);
  }
  SparseOp out(dim, dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

OperatorMatrix MonomialOp::matrix(const FockBasis& basis) const { return OperatorMatrix::from_sparse(basis, sparse(basis)); }

MonomialOp MonomialOp::moved_to(const std::vector<Vertex>& new_sites) const {
  if (new_sites.size() != sites.size()) throw std::invalid_argument("site count mismatch when moving a monomial");
  MonomialOp out = *this;
  out.sites = new_sites;
  return out;
}

CommutatorBoundCheck check_commutator_bound(const OperatorMatrix& o, const MonomialOp& probe, const MuWeights& w) {
  const int beta = probe.beta();
  const double mu = w.mu();
  const double bb = std::pow(static_cast<double>(beta), beta);
  const double ratio = beta / (-std::expm1(-mu));
  double prefactor = 8.0 * bb * std::cosh(0.5 * mu * probe.gamma()) * (1.0 + beta * std::pow(ratio, beta));
  double seeds = 0.0;
  for (Vertex x : probe.sites) seeds += f_beta_expectation(o, x, beta, w);
  return {commutator_weighted_norm(o, probe.matrix(o.basis()), w), prefactor * seeds};
}

}  // namespace bosonlc
