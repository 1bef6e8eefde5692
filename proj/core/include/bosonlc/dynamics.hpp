#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bosonlc/fock.hpp"
#include "bosonlc/model.hpp"
#include "bosonlc/opspace.hpp"

namespace bosonlc {

enum class Integrator { kKrylov, kTaylor };
enum class OperatorMethod { kAuto, kTaylor, kSpectral };

struct EvolutionConfig {
  Integrator integrator = Integrator::kKrylov;
  double tolerance = 1e-10;   // per-step error for state evolution
  double max_step = 1.0;
  int krylov_dim = 30;
  OperatorMethod operator_method = OperatorMethod::kAuto;
  std::size_t dense_threshold = 4096;  // largest sector eigendecomposed densely
  double taylor_span = 16.0;           // auto: Taylor while (|H_a| + |H_b|) |t| <= span
};

// exp(-i H dt) v for a fixed Hermitian H.
Eigen::VectorXcd expv(const SparseOp& H, const Eigen::VectorXcd& v, double dt, const EvolutionConfig& cfg);

// Schroedinger evolution from t0 to t1; steps never straddle a schedule boundary.
Eigen::VectorXcd evolve_state(const Eigen::VectorXcd& psi, const ModelSpec& model, const FockBasis& basis, double t0,
                              double t1, const EvolutionConfig& cfg = {});

// Heisenberg picture O(t) = U(t)^dagger O U(t), U(t) the time-ordered
// propagator. Works block by block between number sectors.
class HeisenbergEvolver {
 public:
  HeisenbergEvolver(ModelSpec model, FockBasis basis, EvolutionConfig cfg = {});

  const FockBasis& basis() const { return basis_; }
  const ModelSpec& model() const { return model_; }

  // Evolve the (row_sector, col_sector) block y to each time. Times must share
  // a sign and be sorted by magnitude.
  std::vector<Eigen::MatrixXcd> evolve_block(int row_sector, int col_sector, const Eigen::MatrixXcd& y,
                                             const std::vector<double>& times);
  OperatorMatrix evolve(const OperatorMatrix& o, double t);

  // Build every cached matrix the given blocks need up to time |t_max|, after
  // which evolve_block only reads shared state and may run concurrently.
  void prepare(const std::vector<OperatorMatrix::Key>& keys, double t_max);

  // Infinity norm of the sector block of the segment Hamiltonian.
  double sector_norm(std::size_t segment, int sector);
  const SparseOp& sector_hamiltonian(std::size_t segment, int sector);

 private:
  struct Spectral {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd vectors;
  };
  struct SectorData {
    SparseOp H;
    double norm = 0.0;
    std::unique_ptr<Spectral> spectral;
  };

  SectorData& data(std::size_t segment, int sector);
  const Spectral& spectral(std::size_t segment, int sector);
  bool use_taylor(std::size_t segment, int a, int b, double t);
  Eigen::MatrixXcd apply_segment(std::size_t segment, int a, int b, const Eigen::MatrixXcd& y, double tau);
  std::vector<Eigen::MatrixXcd> taylor_grid(std::size_t segment, int a, int b, const Eigen::MatrixXcd& y,
                                            const std::vector<double>& taus);
  std::vector<Eigen::MatrixXcd> spectral_grid(std::size_t segment, int a, int b, const Eigen::MatrixXcd& y,
                                              const std::vector<double>& taus);

  ModelSpec model_;
  FockBasis basis_;
  EvolutionConfig cfg_;
  std::vector<SparseOp> full_;
  std::map<std::pair<std::size_t, int>, SectorData> sectors_;
};

OperatorMatrix evolve_operator(const OperatorMatrix& o, const ModelSpec& model, double t, const EvolutionConfig& cfg = {});

// G with b_x(t) = sum_y G_xy(t) b_y for the quadratic part of the model, so
// [b_x(t), b+_y] = G_xy(t). Composed across schedule segments.
Eigen::MatrixXcd single_particle_propagator(const ModelSpec& model, double t);

struct OtocValue {
  double weighted;  // ([A(t), B]|[A(t), B])
  cplx thermal;     // tr(rho [A(t), B])
};

OtocValue otoc(const OperatorMatrix& a, const OperatorMatrix& b, const ModelSpec& model, const MuWeights& w, double t,
               const EvolutionConfig& cfg = {});

struct LanczosOptions {
  int max_krylov = 200;
  int max_restarts = 500;
  double tolerance = 1e-10;
  double degeneracy_tol = 1e-8;
  std::uint64_t seed = 20240917;
};

struct GroundState {
  double e0 = 0.0;
  double e1 = 0.0;
  double gap = 0.0;
  bool degenerate = false;
  Eigen::VectorXcd psi0;
  double residual0 = 0.0;
  double residual1 = 0.0;
};

// Two lowest eigenpairs by Lanczos with full reorthogonalization; the second
// is found with the first deflated, so degenerate ground states show up as a
// vanishing gap.
GroundState ground_state(const SparseOp& H, const LanczosOptions& opts = {});

cplx expectation(const Eigen::VectorXcd& psi, const SparseOp& op);
// <O O'> - <O><O'>
cplx connected_correlation(const Eigen::VectorXcd& psi, const SparseOp& o, const SparseOp& o_prime);

}  // namespace bosonlc
