#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bosonlc/lattice.hpp"

namespace bosonlc {

// Coupling bounds for the envelope equation: off-diagonal M_uv for
// 0 < dist(u, v) <= 2l+1, and the diagonal M_uu.
struct MBound {
  double offdiag;
  double diag;
};

MBound m_matrix_bound(double mu, int beta, int ell, int K);

// Light-cone velocity for thermal correlators. mu may be +infinity.
double velocity_bound(double mu, int K, int ell, int beta);
// 4 (2l+1) K^{2l+1} B, the velocity produced by couplings bounded by B.
double velocity_from_coupling(double B, int K, int ell);
// Velocity entering the state-dependent bounds on chains (beta = 1 row).
double chain_velocity(double mu, int K, int ell);

// Exact rational arithmetic for the l = 0, beta = 1 velocity 8K(31 + 24/mu).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  Rational operator+(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Rational velocity_bound_exact(int K, Rational inverse_mu);

// Density form quoted for the Bose-Hubbard chain, 496 + 384 nbar.
double bose_hubbard_density_velocity(double nbar);
// Non-rigorous reference velocity 2 + 4 nbar (units J a / hbar).
double reference_velocity(double nbar);

// C_x(0) from seeds (O|F_x^beta|O) for x in R (same order as `region`).
std::vector<double> initial_envelope(const Graph& g, const std::vector<Vertex>& region, int ell, double mu, int beta,
                                     const std::vector<double>& seeds, double norm2);

struct EnvelopeTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[k][x] at times[k]
  double step = 0.0;
  long steps = 0;
};

// Upper solution of dC_u/dt = sum_v M_uv C_v. Steps satisfy h |M|_inf <=
// step_control; each applies the Taylor series of exp(hM) until the bound on
// the remainder is below 1e-290, adds that bound, and rounds up.
EnvelopeTrajectory integrate_envelope(const Graph& g, MBound M, int ell, const std::vector<double>& c0,
                                      const std::vector<double>& times, double step_control = 1.0 / 128.0);

// (v t / r)^{r/(2l+1)} G0 with v = velocity_from_coupling(B, K, l); +inf when v t > r.
double closed_form_envelope(int r, double t, double B, int K, int ell, double G0);

struct ThermalBoundInputs {
  double mu = 1.0;
  int beta = 1;
  int gamma = 0;
  int ell = 0;
  int K = 2;
  double seed_sum = 0.0;  // sum_{x in R} (O|F_x^beta|O)
  int region_size = 1;    // |R|
  int fattened_size = 1;  // |R_l|
  double norm2 = 1.0;     // (O|O)
};

double thermal_bound_prefactor(const ThermalBoundInputs& in);
// C (v|t|/r)^{r/(2l+1)} for v|t| < r, +inf otherwise; v from velocity_bound.
double thermal_commutator_bound(int r, double t, const ThermalBoundInputs& in);

// Constants of the state-dependent bounds. C1, C3, C4, C5 are not given in
// closed form and default to 1; every report flags them.
struct ChainConstants {
  double theta = 1.0;
  double K0 = 1.0;
  double epsilon = 0.1;
  double C1 = 1.0;
  double C3 = 1.0;
  double C4 = 1.0;
  double C5 = 1.0;
};

// (1 + eps) v_{mu/2} on a chain of degree K.
double state_velocity(double mu, int ell, int K, double epsilon);
// (2 theta)^{8l+4} v'
double state_cone_velocity(double mu, int ell, int K, const ChainConstants& c);
// C1 ((2 theta)^{8l+4} v' t / r)^{r/(2l+1)} for r > (2 theta)^{8l+4} v' t, +inf otherwise.
double state_commutator_bound(int r, double t, double mu, int ell, int K, const ChainConstants& c);

struct MatrixElementBound {
  double value;
  double v_star;
  double mu;
  double theta;
  double K0;
};

// Per-site occupation cap m: mu = 1/m, theta = e(1+m), K0 = 4.
MatrixElementBound matrix_element_bound(int r, double t, int m, int ell, double epsilon, double C1 = 1.0);

struct InequalityPair {
  double lhs;
  double rhs;
};

// sqrt(xu xv) xu^{beta-1} phi psi <= xu^beta phi^2 + xv^beta psi^2 + [beta > 1] xu^beta psi^2
InequalityPair check_weighted_amgm(double xi_u, double xi_v, double phi, double psi, int beta);

// (1 - (1+eps)^{-1/(4l+2)})^{-1}
double resummation_prefactor(double epsilon, int ell);

struct TraceEntry {
  std::string name;
  std::string formula;
  std::string substituted;
  double value;
  std::string provenance;  // "config", "formula" or "measured"
};

std::vector<TraceEntry> derivation_trace(double mu, int K, int ell, int beta, const ChainConstants& c);

}  // namespace bosonlc
