#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonlc/bounds.hpp"
#include "bosonlc/dynamics.hpp"
#include "bosonlc/model.hpp"
#include "bosonlc/opspace.hpp"

namespace bosonlc {

// Finite-density assumption on the initial state. The inner-product form
// compares tr(sqrt(rho) A+ sqrt(rho) A) with the grand-canonical weights; the
// partial-trace form bounds tr(rho_mu^-1/2 sigma rho_mu^-1/2 sigma) for the
// reduced state sigma on [-x, x] by K0 theta^{2x}.
enum class AnsatzForm { kInnerProduct, kPartialTrace };

struct DensityAssumption {
  double mu = 1.0;
  double theta = 1.0;
  double K0 = 1.0;
  AnsatzForm form = AnsatzForm::kPartialTrace;
};

// e (2 theta)^{4l+2} v' t
double truncation_radius(double t, double theta, int ell, double v_prime);
// ceil((2r + 2l + 1) max(4, 1/(e^{mu/3} - 1), (2/mu)(1 + 8 ln 2 + ln(theta (1 - e^-mu) / mu^4))))
int boson_cutoff(double r, int ell, double mu, double theta);
// C3 r t ((2 theta)^{4l+2} v' t / r)^{r/(4l+2)}; +inf unless r > (2 theta)^{4l+2} v' t.
double restriction_error_bound(double r, double t, double theta, int ell, double v_prime, double C3);
// C4 r^2 e^{-r/(4l+2)}
double total_error_bound(double r, int ell, double C4);

// Parameters of the partial-trace form implied by the inner-product form,
// stored so that the bound reads K0' theta'^{2x}: K0' = (K0 q)^2 and
// theta' = (theta q)^2 with q = sqrt(1 - e^-mu) / (1 - e^{-mu/2}).
struct ConvertedAnsatz {
  double K0;
  double theta;
  double q;
};
ConvertedAnsatz convert_ansatz(double K0, double theta, double mu);

// Initial states given as a tile repeated along the chain; offset 0 is the
// window centre.
struct InitialState {
  enum class Kind { kFock, kProduct };
  Kind kind = Kind::kFock;
  std::vector<int> occupations;                // Fock tile
  std::vector<std::vector<cplx>> amplitudes;   // product tile, one vector per site

  int occupation_at(int offset) const;
  const std::vector<cplx>& amplitudes_at(int offset) const;
};

// tr(rho_mu^-1/2 sigma rho_mu^-1/2 sigma) for the reduced state on [-x, x], exact
// for both state kinds.
double partial_trace_functional(const InitialState& state, int x, double mu);

struct AssumptionCheck {
  std::string status;  // "verified" or "violated"
  int checked_up_to = 0;
  double worst_log_margin = 0.0;  // min over x of log(K0 theta^2x) - log(lhs)
};
AssumptionCheck check_assumption(const InitialState& state, const DensityAssumption& a, int x_max);

// mu from the tile density, K0 = theta = e / (1 - e^-mu).
DensityAssumption default_assumption(const InitialState& state);

struct CertifyOptions {
  double t = 0.0;
  std::optional<DensityAssumption> assumption;
  ChainConstants constants;
  std::optional<int> window_radius;  // replaces the formula radius
  int extra_cap = 0;                 // added to the per-site cap
  double step_fraction = 0.1;
  long max_steps = 10000;
  std::size_t max_states = 5'000'000;
  EvolutionConfig evolution;
};

struct CertifiedValue {
  cplx value;
  double restriction_error = 0.0;
  double cutoff_error = 0.0;
  double r_formula = 0.0;
  int r = 0;
  int N0 = 0;
  int window_sites = 0;
  int per_site_cap = 0;
  std::size_t basis_size = 0;
  double v_prime = 0.0;
  double t0 = 0.0;
  long steps = 0;
  bool radius_overridden = false;
  DensityAssumption assumption;  // partial-trace form actually used
  AssumptionCheck check;
  nlohmann::json ledger;
};

// tr(rho_{<=N0} O(t)) on the window [-r-l, r+l] around `centre`, with both
// error components. The observable's sites are offsets from the centre.
CertifiedValue certified_expectation(const ModelSpec& chain, Vertex centre, const InitialState& state,
                                     const MonomialOp& observable, const CertifyOptions& opt);

nlohmann::json certificate_json(const CertifiedValue& v);

struct SweepPoint {
  int r = 0;
  cplx value;
  double error = 0.0;  // |value - reference|
  double restriction_bound = 0.0;
  double total_bound = 0.0;
  bool within = false;
  double min_constant = 0.0;  // smallest common C3 = C4 that covers the error
  double cutoff_constant = 0.0;  // smallest C4 with error <= C4 r^2 e^{-r/(4l+2)}
};

struct WindowSweep {
  std::vector<SweepPoint> points;
  cplx reference;
  int reference_radius = 0;
  int reference_cap = 0;
  double slope = 0.0;        // least-squares d log(error) / d r
  double slope_limit = 0.0;  // -1/(4l+2) + 0.1
  bool bounds_hold = true;
  bool slope_ok = false;
};

// Certified runs at each radius against one reference with a larger window
// and per-site cap.
WindowSweep window_sweep(const ModelSpec& chain, Vertex centre, const InitialState& state,
                         const MonomialOp& observable, const CertifyOptions& opt, const std::vector<int>& radii,
                         int reference_extra_radius = 1, int reference_extra_cap = 2);

nlohmann::json sweep_json(const WindowSweep& s);

}  // namespace bosonlc
