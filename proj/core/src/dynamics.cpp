#include "bosonlc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "bosonlc/errors.hpp"

namespace bosonlc {

namespace {

const cplx kI(0.0, 1.0);

double inf_norm(const SparseOp& H) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < H.outerSize(); ++r) {
    double row = 0.0;
    for (SparseOp::InnerIterator it(H, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

struct LanczosBasis {
  Eigen::MatrixXcd V;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;  // beta(j) couples j and j+1
  int m = 0;
  bool breakdown = false;
};

// Unit start vector, full reorthogonalization against V and `deflate`.
LanczosBasis lanczos(const SparseOp& H, const Eigen::VectorXcd& start, int m_max,
                     const std::vector<Eigen::VectorXcd>& deflate = {}) {
  const Eigen::Index n = start.size();
  LanczosBasis lb;
  lb.V.resize(n, m_max);
  lb.alpha.resize(m_max);
  lb.beta.resize(m_max);
  lb.V.col(0) = start;
  double scale = 0.0;
  for (int j = 0; j < m_max; ++j) {
    Eigen::VectorXcd w = H * lb.V.col(j);
    double a = lb.V.col(j).dot(w).real();
    lb.alpha(j) = a;
    w -= a * lb.V.col(j);
    if (j > 0) w -= lb.beta(j - 1) * lb.V.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k <= j; ++k) w -= lb.V.col(k).dot(w) * lb.V.col(k);
      for (const auto& d : deflate) w -= d.dot(w) * d;
    }
    double b = w.norm();
    lb.beta(j) = b;
    lb.m = j + 1;
    scale = std::max({scale, std::abs(a), b});
    if (b <= 1e-13 * std::max(1.0, scale)) {
      lb.breakdown = true;
      break;
    }
    if (j + 1 < m_max) lb.V.col(j + 1) = w / b;
  }
  return lb;
}

Eigen::MatrixXd tridiagonal(const LanczosBasis& lb) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(lb.m, lb.m);
  for (int j = 0; j < lb.m; ++j) {
    T(j, j) = lb.alpha(j);
    if (j + 1 < lb.m) T(j, j + 1) = T(j + 1, j) = lb.beta(j);
  }
  return T;
}

Eigen::VectorXcd expv_krylov(const SparseOp& H, const Eigen::VectorXcd& v, double dt, const EvolutionConfig& cfg) {
  const double sign = dt < 0 ? -1.0 : 1.0;
  double remaining = std::abs(dt);
  double h = std::min(remaining, cfg.max_step);
  Eigen::VectorXcd x = v;
  const int m_max = static_cast<int>(std::min<Eigen::Index>(cfg.krylov_dim, v.size()));
  while (remaining > 0.0) {
    double b0 = x.norm();
    if (b0 == 0.0) break;
    LanczosBasis lb = lanczos(H, x / b0, m_max);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiagonal(lb));
    const Eigen::VectorXd first = es.eigenvectors().row(0).transpose();
    Eigen::VectorXcd y;
    double err = 0.0;
    int halvings = 0;
    for (;;) {
      h = std::min(h, remaining);
      Eigen::VectorXcd phase(lb.m);
      for (int k = 0; k < lb.m; ++k) phase(k) = std::exp(-kI * (sign * h * es.eigenvalues()(k))) * first(k);
      y = es.eigenvectors().cast<cplx>() * phase;
      err = lb.breakdown ? 0.0 : b0 * lb.beta(lb.m - 1) * std::abs(y(lb.m - 1));
      if (err <= cfg.tolerance * b0) break;
      if (++halvings > 60) throw ConvergenceError("Krylov step did not converge", err / b0);
      h *= 0.5;
    }
    x = b0 * (lb.V.leftCols(lb.m) * y);
    remaining -= h;
    if (remaining < 1e-15 * std::abs(dt)) remaining = 0.0;
    if (halvings == 0) h = std::min(cfg.max_step, 1.5 * h);
  }
  return x;
}

Eigen::VectorXcd expv_taylor(const SparseOp& H, const Eigen::VectorXcd& v, double dt, const EvolutionConfig& cfg) {
  const double norm = inf_norm(H);
  long steps = std::max<long>(1, static_cast<long>(std::ceil(std::abs(dt) * norm)));
  steps = std::max<long>(steps, static_cast<long>(std::ceil(std::abs(dt) / cfg.max_step)));
  const double h = dt / steps;
  Eigen::VectorXcd x = v;
  for (long s = 0; s < steps; ++s) {
    Eigen::VectorXcd term = x, acc = x;
    int k = 1;
    for (;; ++k) {
      term = (-kI * h / static_cast<double>(k)) * (H * term);
      acc += term;
      double tn = term.norm();
      if (tn <= 1e-2 * cfg.tolerance * acc.norm() || tn == 0.0) break;
      if (k > 100) throw ConvergenceError("Taylor step did not converge", tn / acc.norm());
    }
    x = acc;
  }
  return x;
}

Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd phase = (-kI * t * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Eigen::VectorXcd expv(const SparseOp& H, const Eigen::VectorXcd& v, double dt, const EvolutionConfig& cfg) {
  if (dt == 0.0) return v;
  if (H.rows() != v.size()) throw std::invalid_argument("state and Hamiltonian dimensions differ");
  return cfg.integrator == Integrator::kKrylov ? expv_krylov(H, v, dt, cfg) : expv_taylor(H, v, dt, cfg);
}

Eigen::VectorXcd evolve_state(const Eigen::VectorXcd& psi, const ModelSpec& model, const FockBasis& basis, double t0,
                              double t1, const EvolutionConfig& cfg) {
  if (psi.size() != static_cast<Eigen::Index>(basis.size())) throw std::invalid_argument("state does not match basis");
  if (t0 == t1) return psi;
  std::vector<double> marks{t0};
  auto inner = model.breakpoints(t0, t1);
  if (t1 < t0) std::reverse(inner.begin(), inner.end());
  marks.insert(marks.end(), inner.begin(), inner.end());
  marks.push_back(t1);
  std::map<std::size_t, SparseOp> cache;
  Eigen::VectorXcd x = psi;
  for (std::size_t k = 0; k + 1 < marks.size(); ++k) {
    std::size_t seg = model.segment_at(0.5 * (marks[k] + marks[k + 1]));
    auto it = cache.find(seg);
    if (it == cache.end()) it = cache.emplace(seg, build_segment_hamiltonian(model, basis, seg)).first;
    x = expv(it->second, x, marks[k + 1] - marks[k], cfg);
  }
  return x;
}

HeisenbergEvolver::HeisenbergEvolver(ModelSpec model, FockBasis basis, EvolutionConfig cfg)
    : model_(std::move(model)), basis_(std::move(basis)), cfg_(cfg), full_(model_.segments().size()) {
  if (basis_.num_sites() != model_.graph().num_vertices()) throw std::invalid_argument("basis and model sizes differ");
}

HeisenbergEvolver::SectorData& HeisenbergEvolver::data(std::size_t segment, int sector) {
  auto key = std::make_pair(segment, sector);
  auto it = sectors_.find(key);
  if (it != sectors_.end()) return it->second;
  if (full_[segment].rows() == 0) full_[segment] = build_segment_hamiltonian(model_, basis_, segment);
  SectorData d;
  d.H = sector_block(full_[segment], basis_, sector, sector);
  d.norm = inf_norm(d.H);
  return sectors_.emplace(key, std::move(d)).first->second;
}

double HeisenbergEvolver::sector_norm(std::size_t segment, int sector) { return data(segment, sector).norm; }

const SparseOp& HeisenbergEvolver::sector_hamiltonian(std::size_t segment, int sector) {
  return data(segment, sector).H;
}

const HeisenbergEvolver::Spectral& HeisenbergEvolver::spectral(std::size_t segment, int sector) {
  SectorData& d = data(segment, sector);
  if (d.spectral) return *d.spectral;
  Eigen::MatrixXcd dense = Eigen::MatrixXcd(d.H);
  auto sp = std::make_unique<Spectral>();
  if (dense.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense.real());
    sp->energies = es.eigenvalues();
    sp->vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    sp->energies = es.eigenvalues();
    sp->vectors = es.eigenvectors();
  }
  d.spectral = std::move(sp);
  return *d.spectral;
}

bool HeisenbergEvolver::use_taylor(std::size_t segment, int a, int b, double t) {
  const std::size_t dim = std::max(basis_.sector_states(a).size(), basis_.sector_states(b).size());
  if (dim > cfg_.dense_threshold) return true;
  switch (cfg_.operator_method) {
    case OperatorMethod::kTaylor:
      return true;
    case OperatorMethod::kSpectral:
      return false;
    case OperatorMethod::kAuto:
      break;
  }
  return (data(segment, a).norm + data(segment, b).norm) * std::abs(t) <= cfg_.taylor_span;
}

std::vector<Eigen::MatrixXcd> HeisenbergEvolver::taylor_grid(std::size_t segment, int a, int b,
                                                             const Eigen::MatrixXcd& y,
                                                             const std::vector<double>& taus) {
  const SparseOp& Ha = data(segment, a).H;
  const SparseOp& Hb = data(segment, b).H;
  const double sigma = data(segment, a).norm + data(segment, b).norm;
  std::vector<Eigen::MatrixXcd> out(taus.size());
  if (sigma == 0.0 || y.squaredNorm() == 0.0) {
    for (auto& m : out) m = y;
    return out;
  }
  const double hmax = 1.0 / sigma;
  Eigen::MatrixXcd x = y;
  double s = 0.0;
  std::size_t idx = 0;
  while (idx < taus.size()) {
    std::vector<double> local;
    std::size_t end = idx;
    while (end < taus.size() && std::abs(taus[end] - s) <= hmax * (1.0 + 1e-12)) local.push_back(taus[end++] - s);
    const bool intermediate = local.empty();
    if (intermediate) local.push_back(taus[idx] > 0 ? hmax : -hmax);
    const double reach = std::abs(local.back());

    std::vector<Eigen::MatrixXcd> acc(local.size(), x);
    Eigen::MatrixXcd term = x;
    const double base = x.norm();
    double power = 1.0;
    for (int k = 1;; ++k) {
      Eigen::MatrixXcd next = Ha * term;
      next.noalias() -= term * Hb;
      term = (kI / static_cast<double>(k)) * next;
      power *= reach;
      for (std::size_t j = 0; j < local.size(); ++j) acc[j] += std::pow(local[j], k) * term;
      if (power * term.norm() <= 1e-17 * base) break;
      if (k > 80) throw ConvergenceError("operator Taylor series did not converge", power * term.norm() / base);
    }
    x = acc.back();
    s += local.back();
    if (!intermediate) {
      for (std::size_t j = 0; j < acc.size(); ++j) out[idx + j] = std::move(acc[j]);
      idx = end;
    }
  }
  return out;
}

std::vector<Eigen::MatrixXcd> HeisenbergEvolver::spectral_grid(std::size_t segment, int a, int b,
                                                               const Eigen::MatrixXcd& y,
                                                               const std::vector<double>& taus) {
  const Spectral& sa = spectral(segment, a);
  const Spectral& sb = spectral(segment, b);
  Eigen::MatrixXcd rotated = sa.vectors.adjoint() * y * sb.vectors;
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    Eigen::MatrixXcd m = rotated;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        m(i, j) *= std::exp(kI * ((sa.energies(i) - sb.energies(j)) * tau));
    out.push_back(sa.vectors * m * sb.vectors.adjoint());
  }
  return out;
}

Eigen::MatrixXcd HeisenbergEvolver::apply_segment(std::size_t segment, int a, int b, const Eigen::MatrixXcd& y,
                                                  double tau) {
  if (use_taylor(segment, a, b, tau)) return taylor_grid(segment, a, b, y, {tau}).front();
  return spectral_grid(segment, a, b, y, {tau}).front();
}

std::vector<Eigen::MatrixXcd> HeisenbergEvolver::evolve_block(int a, int b, const Eigen::MatrixXcd& y,
                                                              const std::vector<double>& times) {
  if (times.empty()) return {};
  const bool negative = times.front() < 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if ((times[k] < 0) != negative && times[k] != 0.0) throw std::invalid_argument("evolution times must share a sign");
    if (k > 0 && std::abs(times[k]) < std::abs(times[k - 1]))
      throw std::invalid_argument("evolution times must be sorted by magnitude");
  }
  if (model_.time_independent()) {
    std::size_t split = 0;
    while (split < times.size() && use_taylor(0, a, b, times[split])) ++split;
    std::vector<double> small(times.begin(), times.begin() + split), large(times.begin() + split, times.end());
    auto out = small.empty() ? std::vector<Eigen::MatrixXcd>{} : taylor_grid(0, a, b, y, small);
    if (!large.empty()) {
      auto rest = spectral_grid(0, a, b, y, large);
      for (auto& m : rest) out.push_back(std::move(m));
    }
    return out;
  }
  if (negative) throw std::invalid_argument("negative times need a time-independent model");
  std::vector<Eigen::MatrixXcd> out;
  for (double t : times) {
    Eigen::MatrixXcd x = y;
    const std::size_t last = model_.segment_at(t);
    for (std::size_t k = last + 1; k-- > 0;) {
      const double start = model_.segments()[k].start;
      const double stop = (k == last) ? t : model_.segments()[k + 1].start;
      if (stop > start) x = apply_segment(k, a, b, x, stop - start);
    }
    out.push_back(std::move(x));
  }
  return out;
}

OperatorMatrix HeisenbergEvolver::evolve(const OperatorMatrix& o, double t) {
  if (!o.basis().same_as(basis_)) throw std::invalid_argument("operator lives on a different basis");
  OperatorMatrix out(basis_);
  for (const auto& [key, blk] : o.blocks())
    out.blocks()[key] = std::move(evolve_block(key.first, key.second, blk, {t}).front());
  return out;
}

void HeisenbergEvolver::prepare(const std::vector<OperatorMatrix::Key>& keys, double t_max) {
  for (std::size_t seg = 0; seg < model_.segments().size(); ++seg)
    for (const auto& [a, b] : keys) {
      data(seg, a);
      data(seg, b);
      if (!use_taylor(seg, a, b, t_max)) {
        spectral(seg, a);
        spectral(seg, b);
      }
    }
}

OperatorMatrix evolve_operator(const OperatorMatrix& o, const ModelSpec& model, double t, const EvolutionConfig& cfg) {
  if (t == 0.0) return o;
  HeisenbergEvolver ev(model, o.basis(), cfg);
  return ev.evolve(o, t);
}

Eigen::MatrixXcd single_particle_propagator(const ModelSpec& model, double t) {
  const Graph& g = model.graph();
  const int n = g.num_vertices();
  auto hopping = [&](std::size_t seg) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      cplx J = model.segments()[seg].hopping[e];
      h(g.edges()[e].u, g.edges()[e].v) += J;
      h(g.edges()[e].v, g.edges()[e].u) += std::conj(J);
    }
    return h;
  };
  if (t < 0) {
    if (!model.time_independent()) throw std::invalid_argument("negative times need a time-independent model");
    return hermitian_exp(hopping(0), t);
  }
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(n, n);
  const std::size_t last = model.segment_at(t);
  for (std::size_t k = 0; k <= last; ++k) {
    const double start = model.segments()[k].start;
    const double stop = (k == last) ? t : model.segments()[k + 1].start;
    if (stop > start) G = hermitian_exp(hopping(k), stop - start) * G;
  }
  return G;
}

OtocValue otoc(const OperatorMatrix& a, const OperatorMatrix& b, const ModelSpec& model, const MuWeights& w, double t,
               const EvolutionConfig& cfg) {
  OperatorMatrix c = commutator(evolve_operator(a, model, t, cfg), b);
  OtocValue out{weighted_norm2(c, w), 0.0};
  for (const auto& [key, blk] : c.blocks())
    if (key.first == key.second) out.thermal += w.state_weight(c.basis().sector_total(key.first)) * blk.trace();
  return out;
}

namespace {

struct RitzPair {
  double value;
  Eigen::VectorXcd vector;
  double residual;
};

RitzPair lowest_pair(const SparseOp& H, const std::vector<Eigen::VectorXcd>& deflate, const LanczosOptions& opts,
                     std::mt19937_64& rng) {
  const Eigen::Index n = H.rows();
  const Eigen::Index avail = n - static_cast<Eigen::Index>(deflate.size());
  if (avail <= 0) throw std::invalid_argument("no room left for another eigenvector");
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = cplx(gauss(rng), gauss(rng));
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& d : deflate) x -= d.dot(x) * d;
  x.normalize();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.max_krylov, avail));
  RitzPair best{0.0, x, 0.0};
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    LanczosBasis lb = lanczos(H, x, m_max, deflate);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiagonal(lb));
    Eigen::VectorXcd v = lb.V.leftCols(lb.m) * es.eigenvectors().col(0).cast<cplx>();
    for (const auto& d : deflate) v -= d.dot(v) * d;
    v.normalize();
    const double theta = v.dot(H * v).real();
    const double res = (H * v - theta * v).norm();
    best = {theta, v, res};
    if (res <= opts.tolerance * std::max(1.0, std::abs(theta))) return best;
    x = v;
  }
  throw ConvergenceError("Lanczos did not converge", best.residual);
}

}  // namespace

GroundState ground_state(const SparseOp& H, const LanczosOptions& opts) {
  if (H.rows() != H.cols() || H.rows() == 0) throw std::invalid_argument("ground state needs a square nonempty matrix");
  std::mt19937_64 rng(opts.seed);
  RitzPair first = lowest_pair(H, {}, opts, rng);
  GroundState gs;
  gs.e0 = first.value;
  gs.psi0 = first.vector;
  gs.residual0 = first.residual;
  if (H.rows() == 1) {
    gs.e1 = std::numeric_limits<double>::infinity();
    gs.gap = gs.e1;
    return gs;
  }
  RitzPair second = lowest_pair(H, {first.vector}, opts, rng);
  gs.e1 = second.value;
  gs.residual1 = second.residual;
  gs.gap = gs.e1 - gs.e0;
  gs.degenerate = gs.gap <= opts.degeneracy_tol * std::max(1.0, std::abs(gs.e0));
  return gs;
}

cplx expectation(const Eigen::VectorXcd& psi, const SparseOp& op) { return psi.dot(op * psi); }

cplx connected_correlation(const Eigen::VectorXcd& psi, const SparseOp& o, const SparseOp& o_prime) {
  Eigen::VectorXcd right = o_prime * psi;
  return psi.dot(o * right) - expectation(psi, o) * expectation(psi, o_prime);
}

}  // namespace bosonlc
