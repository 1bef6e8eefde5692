#include "bosonlc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bosonlc/format.hpp"

namespace bosonlc {

namespace {

void check_common(double mu, int K, int ell, int beta) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (K < 1) throw std::invalid_argument("max degree K must be >= 1");
  if (ell < 0) throw std::invalid_argument("range must be >= 0");
  if (beta < 1) throw std::invalid_argument("beta must be >= 1");
}

double inv(double mu) { return std::isinf(mu) ? 0.0 : 1.0 / mu; }

double ipow(double base, int e) { return std::pow(base, e); }

std::string f(double x) { return format_double(x); }

}  // namespace

MBound m_matrix_bound(double mu, int beta, int ell, int K) {
  check_common(mu, K, ell, beta);
  const double im = inv(mu);
  if (ell == 0) {
    double off = (beta == 1) ? 62.0 + 48.0 * im
                             : 23.0 * ipow(2.0 * beta, beta + 1) * ipow(1.0 + 2.0 * im, beta + 1);
    return {off, off * K};
  }
  double off = ipow(2.0, beta + 8) * ipow(beta, 2 * beta) * ipow(1.0 + 2.0 * im, 2 * beta) * ipow(K, ell + 1);
  return {off, off};
}

double velocity_bound(double mu, int K, int ell, int beta) {
  check_common(mu, K, ell, beta);
  const double im = inv(mu);
  if (ell == 0 && beta == 1) return 8.0 * K * (31.0 + 24.0 * im);
  if (ell == 0) return 92.0 * K * ipow(2.0 * beta, beta + 1) * ipow(1.0 + 2.0 * im, beta + 1);
  return ipow(2.0, beta + 10) * (2 * ell + 1) * ipow(K, 3 * ell + 2) * ipow(beta, 2 * beta) *
         ipow(1.0 + 2.0 * im, 2 * beta);
}

double velocity_from_coupling(double B, int K, int ell) {
  return 4.0 * (2 * ell + 1) * ipow(K, 2 * ell + 1) * B;
}

double chain_velocity(double mu, int K, int ell) {
  check_common(mu, K, ell, 1);
  const double im = inv(mu);
  if (ell == 0) return 8.0 * K * (31.0 + 24.0 * im);
  return 2048.0 * (2 * ell + 1) * ipow(K, 3 * ell + 2) * ipow(1.0 + 2.0 * im, 2);
}

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) num = -num, den = -den;
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  return {num / g, den / g};
}

Rational Rational::operator+(const Rational& o) const { return make(num * o.den + o.num * den, den * o.den); }
Rational Rational::operator*(const Rational& o) const { return make(num * o.num, den * o.den); }

Rational velocity_bound_exact(int K, Rational inverse_mu) {
  if (K < 1) throw std::invalid_argument("max degree K must be >= 1");
  if (inverse_mu.num < 0) throw std::invalid_argument("1/mu must be >= 0");
  return Rational::make(8 * K, 1) * (Rational::make(31, 1) + Rational::make(24, 1) * inverse_mu);
}

double bose_hubbard_density_velocity(double nbar) { return 496.0 + 384.0 * nbar; }
double reference_velocity(double nbar) { return 2.0 + 4.0 * nbar; }

std::vector<double> initial_envelope(const Graph& g, const std::vector<Vertex>& region, int ell, double mu, int beta,
                                     const std::vector<double>& seeds, double norm2) {
  check_common(mu, std::max(1, g.max_degree()), ell, beta);
  if (seeds.size() != region.size()) throw std::invalid_argument("one seed per region vertex is required");
  const double c = ipow(beta / -std::expm1(-mu), beta);
  std::vector<double> out(g.num_vertices(), 0.0);
  for (Vertex x = 0; x < g.num_vertices(); ++x) {
    int d = distance_to_set(g, x, region);
    if (d > 0 && d <= ell) out[x] = 4.0 * c * norm2;
  }
  for (std::size_t k = 0; k < region.size(); ++k) out[region[k]] = 2.0 * c * norm2 + 2.0 * seeds[k];
  return out;
}

namespace {
constexpr double kTailFloor = 1e-290;
constexpr int kMaxOrder = 400;
// Sums of nonnegative terms carry relative rounding below this per step.
constexpr double kRoundUp = 1.0 + 1e-13;
}  // namespace

EnvelopeTrajectory integrate_envelope(const Graph& g, MBound M, int ell, const std::vector<double>& c0,
                                      const std::vector<double>& times, double step_control) {
  const int n = g.num_vertices();
  if (static_cast<int>(c0.size()) != n) throw std::invalid_argument("initial envelope size does not match the graph");
  if (!(step_control > 0.0)) throw std::invalid_argument("step control must be positive");
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] < 0 || (k > 0 && times[k] < times[k - 1]))
      throw std::invalid_argument("envelope times must be nonnegative and ascending");

  std::vector<std::vector<Vertex>> near(n);
  std::size_t widest = 0;
  for (Vertex u = 0; u < n; ++u) {
    const auto& du = g.distances_from(u);
    for (Vertex v = 0; v < n; ++v)
      if (v != u && du[v] <= 2 * ell + 1) near[u].push_back(v);
    widest = std::max(widest, near[u].size());
  }
  const double norm = M.diag + M.offdiag * static_cast<double>(widest);

  EnvelopeTrajectory out;
  out.times = times;
  out.step = norm > 0.0 ? step_control / norm : 0.0;
  std::vector<double> c = c0, term(n), next(n), sum(n);
  double now = 0.0;
  for (double target : times) {
    while (now < target && norm > 0.0) {
      const double h = std::min(out.step, target - now);
      const double hn = h * norm;
      const double top = *std::max_element(c.begin(), c.end());
      // Taylor terms of exp(hM) c are nonnegative; stop once the bound on the
      // rest, (hn)^{k+1}/(k+1)! e^{hn} top, is negligible and add it everywhere.
      sum = c;
      term = c;
      double tail = hn * std::exp(hn) * top;
      int k = 0;
      while (tail > kTailFloor && k < kMaxOrder) {
        ++k;
        for (Vertex u = 0; u < n; ++u) {
          double acc = M.diag * term[u];
          for (Vertex v : near[u]) acc += M.offdiag * term[v];
          next[u] = acc * h / k;
        }
        term.swap(next);
        for (Vertex u = 0; u < n; ++u) sum[u] += term[u];
        tail *= hn / (k + 1);
      }
      for (Vertex u = 0; u < n; ++u) c[u] = (sum[u] + tail) * kRoundUp;
      now = (target - now <= out.step) ? target : now + h;
      ++out.steps;
    }
    out.values.push_back(c);
  }
  return out;
}

double closed_form_envelope(int r, double t, double B, int K, int ell, double G0) {
  if (r <= 0) throw std::invalid_argument("closed-form envelope needs r >= 1");
  const double v = velocity_from_coupling(B, K, ell);
  const double vt = v * std::abs(t);
  if (vt > r) return std::numeric_limits<double>::infinity();
  return G0 * std::pow(vt / r, static_cast<double>(r) / (2 * ell + 1));
}

double thermal_bound_prefactor(const ThermalBoundInputs& in) {
  check_common(in.mu, in.K, in.ell, in.beta);
  const double c = ipow(in.beta / -std::expm1(-in.mu), in.beta);
  const double head = 16.0 * ipow(in.beta, in.beta) * std::cosh(0.5 * in.mu * in.gamma) * (1.0 + in.beta * c);
  return head * (in.seed_sum + c * (in.region_size + in.fattened_size) * in.norm2);
}

double thermal_commutator_bound(int r, double t, const ThermalBoundInputs& in) {
  if (r <= 0) throw std::invalid_argument("commutator bound needs r >= 1");
  const double v = velocity_bound(in.mu, in.K, in.ell, in.beta);
  const double vt = v * std::abs(t);
  if (vt >= r) return std::numeric_limits<double>::infinity();
  return thermal_bound_prefactor(in) * std::pow(vt / r, static_cast<double>(r) / (2 * in.ell + 1));
}

double state_velocity(double mu, int ell, int K, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  return (1.0 + epsilon) * chain_velocity(0.5 * mu, K, ell);
}

double state_cone_velocity(double mu, int ell, int K, const ChainConstants& c) {
  if (!(c.theta > 0.0)) throw std::invalid_argument("theta must be positive");
  return ipow(2.0 * c.theta, 8 * ell + 4) * state_velocity(mu, ell, K, c.epsilon);
}

double state_commutator_bound(int r, double t, double mu, int ell, int K, const ChainConstants& c) {
  if (r <= 0) throw std::invalid_argument("commutator bound needs r >= 1");
  const double vt = state_cone_velocity(mu, ell, K, c) * std::abs(t);
  if (!(r > vt)) return std::numeric_limits<double>::infinity();
  return c.C1 * std::pow(vt / r, static_cast<double>(r) / (2 * ell + 1));
}

MatrixElementBound matrix_element_bound(int r, double t, int m, int ell, double epsilon, double C1) {
  if (m < 1) throw std::invalid_argument("occupation cap m must be >= 1");
  ChainConstants c;
  c.theta = std::exp(1.0) * (1 + m);
  c.K0 = 4.0;
  c.epsilon = epsilon;
  c.C1 = C1;
  const double mu = 1.0 / m;
  return {state_commutator_bound(r, t, mu, ell, 2, c), state_cone_velocity(mu, ell, 2, c), mu, c.theta, c.K0};
}

InequalityPair check_weighted_amgm(double xi_u, double xi_v, double phi, double psi, int beta) {
  if (!(xi_u > 0.0) || !(xi_v > 0.0)) throw std::invalid_argument("xi values must be positive");
  if (beta < 1) throw std::invalid_argument("beta must be >= 1");
  const double xb = ipow(xi_u, beta);
  double lhs = std::sqrt(xi_u * xi_v) * ipow(xi_u, beta - 1) * phi * psi;
  double rhs = xb * phi * phi + ipow(xi_v, beta) * psi * psi + (beta > 1 ? xb * psi * psi : 0.0);
  return {lhs, rhs};
}

double resummation_prefactor(double epsilon, int ell) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (ell < 0) throw std::invalid_argument("range must be >= 0");
  return 1.0 / -std::expm1(-std::log1p(epsilon) / (4 * ell + 2));
}

std::vector<TraceEntry> derivation_trace(double mu, int K, int ell, int beta, const ChainConstants& c) {
  std::vector<TraceEntry> out;
  const double im = inv(mu);
  out.push_back({"mu", "input", f(mu), mu, "config"});
  out.push_back({"K", "input (max degree)", std::to_string(K), static_cast<double>(K), "config"});
  out.push_back({"ell", "input (interaction range)", std::to_string(ell), static_cast<double>(ell), "config"});
  out.push_back({"beta", "input (probe degree)", std::to_string(beta), static_cast<double>(beta), "config"});

  MBound M = m_matrix_bound(mu, beta, ell, K);
  std::string off_formula, off_sub;
  if (ell == 0 && beta == 1) {
    off_formula = "62 + 48/mu";
    off_sub = "62 + 48*" + f(im);
  } else if (ell == 0) {
    off_formula = "23 (2 beta)^(beta+1) (1 + 2/mu)^(beta+1)";
    off_sub = "23 * " + f(2.0 * beta) + "^" + std::to_string(beta + 1) + " * " + f(1.0 + 2.0 * im) + "^" +
              std::to_string(beta + 1);
  } else {
    off_formula = "2^(beta+8) beta^(2 beta) (1 + 2/mu)^(2 beta) K^(ell+1)";
    off_sub = "2^" + std::to_string(beta + 8) + " * " + std::to_string(beta) + "^" + std::to_string(2 * beta) + " * " +
              f(1.0 + 2.0 * im) + "^" + std::to_string(2 * beta) + " * " + std::to_string(K) + "^" +
              std::to_string(ell + 1);
  }
  out.push_back({"coupling.offdiag", off_formula, off_sub, M.offdiag, "formula"});
  out.push_back({"coupling.diag", ell == 0 ? "K * coupling.offdiag" : "coupling.offdiag",
                 ell == 0 ? std::to_string(K) + " * " + f(M.offdiag) : f(M.offdiag), M.diag, "formula"});

  const double v = velocity_bound(mu, K, ell, beta);
  std::string v_formula, v_sub;
  if (ell == 0 && beta == 1) {
    v_formula = "8K (31 + 24/mu)";
    v_sub = "8*" + std::to_string(K) + "*(31 + 24*" + f(im) + ")";
  } else if (ell == 0) {
    v_formula = "92K (2 beta)^(beta+1) (1 + 2/mu)^(beta+1)";
    v_sub = "92*" + std::to_string(K) + " * " + f(2.0 * beta) + "^" + std::to_string(beta + 1) + " * " +
            f(1.0 + 2.0 * im) + "^" + std::to_string(beta + 1);
  } else {
    v_formula = "2^(beta+10) (2 ell + 1) K^(3 ell + 2) beta^(2 beta) (1 + 2/mu)^(2 beta)";
    v_sub = "2^" + std::to_string(beta + 10) + " * " + std::to_string(2 * ell + 1) + " * " + std::to_string(K) + "^" +
            std::to_string(3 * ell + 2) + " * " + std::to_string(beta) + "^" + std::to_string(2 * beta) + " * " +
            f(1.0 + 2.0 * im) + "^" + std::to_string(2 * beta);
  }
  out.push_back({"velocity", v_formula, v_sub, v, "formula"});
  out.push_back({"velocity.composed", "4 (2 ell + 1) K^(2 ell + 1) coupling.offdiag",
                 "4*" + std::to_string(2 * ell + 1) + "*" + std::to_string(K) + "^" + std::to_string(2 * ell + 1) +
                     "*" + f(M.offdiag),
                 velocity_from_coupling(M.offdiag, K, ell), "formula"});
  const double nbar = std::isinf(mu) ? 0.0 : 1.0 / std::expm1(mu);
  out.push_back({"nbar", "1/(e^mu - 1), thermal occupation per site", "1/(e^" + f(mu) + " - 1)", nbar, "formula"});
  if (ell == 0 && beta == 1 && K == 2)
    out.push_back({"velocity.density_form", "496 + 384 nbar (quoted density form; the proven form is 496 + 384/mu)",
                   "496 + 384*" + f(nbar), bose_hubbard_density_velocity(nbar), "formula"});
  out.push_back({"velocity.reference", "2 + 4 nbar (non-rigorous reference line, not a bound)",
                 "2 + 4*" + f(nbar), reference_velocity(nbar), "formula"});

  const double vc = chain_velocity(0.5 * mu, K, ell);
  out.push_back({"chain_velocity(mu/2)", ell == 0 ? "8K (31 + 48/mu)" : "2^11 (2 ell + 1) K^(3 ell + 2) (1 + 4/mu)^2",
                 "evaluated at mu/2 = " + f(0.5 * mu), vc, "formula"});
  out.push_back({"epsilon", "input", f(c.epsilon), c.epsilon, "config"});
  out.push_back({"state_velocity", "(1 + epsilon) chain_velocity(mu/2)", f(1.0 + c.epsilon) + "*" + f(vc),
                 state_velocity(mu, ell, K, c.epsilon), "formula"});
  out.push_back({"theta", "input", f(c.theta), c.theta, "config"});
  out.push_back({"K0", "input", f(c.K0), c.K0, "config"});
  out.push_back({"state_cone_velocity", "(2 theta)^(8 ell + 4) state_velocity",
                 f(2.0 * c.theta) + "^" + std::to_string(8 * ell + 4) + "*" + f(state_velocity(mu, ell, K, c.epsilon)),
                 state_cone_velocity(mu, ell, K, c), "formula"});
  out.push_back({"resummation_prefactor", "(1 - (1 + epsilon)^(-1/(4 ell + 2)))^-1",
                 "(1 - " + f(1.0 + c.epsilon) + "^(-1/" + std::to_string(4 * ell + 2) + "))^-1",
                 resummation_prefactor(c.epsilon, ell), "formula"});
  out.push_back({"C1", "unspecified constant", f(c.C1), c.C1, "config"});
  out.push_back({"C3", "unspecified constant", f(c.C3), c.C3, "config"});
  out.push_back({"C4", "unspecified constant", f(c.C4), c.C4, "config"});
  out.push_back({"C5", "unspecified constant", f(c.C5), c.C5, "config"});
  return out;
}

}  // namespace bosonlc
