#include "bosonlc/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bosonlc/errors.hpp"
#include "bosonlc/format.hpp"

namespace bosonlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int wrap(int offset, std::size_t period) {
  const int p = static_cast<int>(period);
  return ((offset % p) + p) % p;
}

double max_row_sum(const SparseOp& H) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < H.outerSize(); ++r) {
    double row = 0.0;
    for (SparseOp::InnerIterator it(H, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

// log of the partial-trace functional on [-x, x].
double log_functional(const InitialState& s, int x, double mu) {
  const double log_norm = std::log1p(-std::exp(-mu));
  double sum = 0.0;
  for (int k = -x; k <= x; ++k) {
    if (s.kind == InitialState::Kind::kFock) {
      sum += mu * s.occupation_at(k) - log_norm;
    } else {
      const auto& amp = s.amplitudes_at(k);
      double norm = 0.0, inner = 0.0;
      for (std::size_t n = 0; n < amp.size(); ++n) {
        norm += std::norm(amp[n]);
        inner += std::norm(amp[n]) * std::exp(0.5 * mu * static_cast<double>(n));
      }
      // (sum_n |phi_n|^2 w_n^{-1/2})^2 with w_n = (1 - e^-mu) e^{-mu n}
      sum += 2.0 * std::log(inner / norm) - log_norm;
    }
  }
  return sum;
}

void validate_state(const InitialState& s) {
  if (s.kind == InitialState::Kind::kFock) {
    if (s.occupations.empty()) throw std::invalid_argument("Fock state needs a nonempty occupation tile");
    for (int n : s.occupations)
      if (n < 0 || n > 255) throw std::invalid_argument("Fock occupations must lie in [0, 255]");
  } else {
    if (s.amplitudes.empty()) throw std::invalid_argument("product state needs a nonempty amplitude tile");
    for (const auto& a : s.amplitudes) {
      if (a.empty() || a.size() > 256) throw std::invalid_argument("product amplitudes need 1 to 256 entries per site");
      double norm = 0.0;
      for (cplx c : a) norm += std::norm(c);
      if (!(norm > 0.0)) throw std::invalid_argument("product amplitudes must not vanish");
    }
  }
}

struct WindowPlan {
  int radius = 0;
  int sites = 0;
  int N0 = 0;
  int bosons = 0;  // Fock states only
  BasisLimits limits;
};

WindowPlan plan_window(const InitialState& s, int radius, int ell, const DensityAssumption& a, int extra_cap,
                       std::size_t max_states) {
  WindowPlan p;
  p.radius = radius;
  const int half = radius + ell;
  p.sites = 2 * half + 1;
  p.N0 = boson_cutoff(radius, ell, a.mu, a.theta);
  p.limits.num_sites = p.sites;
  p.limits.max_states = max_states;
  if (s.kind == InitialState::Kind::kFock) {
    for (int k = -half; k <= half; ++k) p.bosons += s.occupation_at(k);
    p.limits.fixed_total = p.bosons;
    p.limits.per_site_cap = std::min({p.N0, std::max(p.bosons, 1), 255 - extra_cap}) + extra_cap;
  } else {
    p.limits.per_site_cap = std::min(p.N0, 255 - extra_cap) + extra_cap;
    p.limits.total_cap = p.N0 + extra_cap;
  }
  return p;
}

}  // namespace

double truncation_radius(double t, double theta, int ell, double v_prime) {
  if (t < 0) throw std::invalid_argument("time must be >= 0");
  return std::exp(1.0) * std::pow(2.0 * theta, 4 * ell + 2) * v_prime * t;
}

int boson_cutoff(double r, int ell, double mu, double theta) {
  if (!(mu > 0.0) || !(theta > 0.0)) throw std::invalid_argument("mu and theta must be positive");
  const double b2 = 1.0 / std::expm1(mu / 3.0);
  const double b3 = (2.0 / mu) * (1.0 + 8.0 * std::log(2.0) + std::log(theta * -std::expm1(-mu) / std::pow(mu, 4)));
  const double value = (2.0 * r + 2.0 * ell + 1.0) * std::max({4.0, b2, b3});
  if (value > 1e9) throw CapacityError("boson cutoff " + format_double(value) + " is out of range");
  return static_cast<int>(std::ceil(value - 1e-9));
}

double restriction_error_bound(double r, double t, double theta, int ell, double v_prime, double C3) {
  const double edge = std::pow(2.0 * theta, 4 * ell + 2) * v_prime * std::abs(t);
  if (!(r > edge)) return kInf;
  return C3 * r * std::abs(t) * std::pow(edge / r, r / (4 * ell + 2));
}

double total_error_bound(double r, int ell, double C4) { return C4 * r * r * std::exp(-r / (4 * ell + 2)); }

ConvertedAnsatz convert_ansatz(double K0, double theta, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  const double q = std::isinf(mu) ? 1.0 : std::sqrt(-std::expm1(-mu)) / -std::expm1(-0.5 * mu);
  return {K0 * K0 * q * q, theta * theta * q * q, q};
}

int InitialState::occupation_at(int offset) const { return occupations.at(wrap(offset, occupations.size())); }

const std::vector<cplx>& InitialState::amplitudes_at(int offset) const {
  return amplitudes.at(wrap(offset, amplitudes.size()));
}

double partial_trace_functional(const InitialState& state, int x, double mu) {
  validate_state(state);
  if (x < 0) throw std::invalid_argument("x must be >= 0");
  return std::exp(log_functional(state, x, mu));
}

AssumptionCheck check_assumption(const InitialState& state, const DensityAssumption& a, int x_max) {
  validate_state(state);
  if (a.form != AnsatzForm::kPartialTrace) throw std::invalid_argument("convert the assumption before checking it");
  AssumptionCheck out;
  out.checked_up_to = x_max;
  out.worst_log_margin = kInf;
  for (int x = 0; x <= x_max; ++x) {
    const double rhs = std::log(a.K0) + 2.0 * x * std::log(a.theta);
    const double lhs = log_functional(state, x, a.mu);
    out.worst_log_margin = std::min(out.worst_log_margin, rhs - lhs);
  }
  // The closed-form Fock choice meets the bound with equality.
  out.status = out.worst_log_margin >= -1e-12 * (1 + x_max) ? "verified" : "violated";
  return out;
}

DensityAssumption default_assumption(const InitialState& state) {
  validate_state(state);
  double density = 0.0;
  if (state.kind == InitialState::Kind::kFock) {
    density = std::accumulate(state.occupations.begin(), state.occupations.end(), 0.0) / state.occupations.size();
  } else {
    for (const auto& a : state.amplitudes) {
      double norm = 0.0, mean = 0.0;
      for (std::size_t n = 0; n < a.size(); ++n) {
        norm += std::norm(a[n]);
        mean += n * std::norm(a[n]);
      }
      density += mean / norm;
    }
    density /= state.amplitudes.size();
  }
  DensityAssumption a;
  a.mu = density > 0.0 ? 1.0 / density : 1.0;
  a.theta = a.K0 = std::exp(1.0) / -std::expm1(-a.mu);
  a.form = AnsatzForm::kPartialTrace;
  return a;
}

CertifiedValue certified_expectation(const ModelSpec& chain, Vertex centre, const InitialState& state,
                                     const MonomialOp& observable, const CertifyOptions& opt) {
  validate_state(state);
  if (!(opt.t >= 0.0)) throw std::invalid_argument("certified runs need t >= 0");
  const int ell = chain.range();
  const int K = 2;

  const DensityAssumption declared = opt.assumption.value_or(default_assumption(state));
  DensityAssumption used = declared;
  if (declared.form == AnsatzForm::kInnerProduct) {
    ConvertedAnsatz c = convert_ansatz(declared.K0, declared.theta, declared.mu);
    used = {declared.mu, c.theta, c.K0, AnsatzForm::kPartialTrace};
  }
  if (!(used.theta > 0.0) || !(used.K0 > 0.0)) throw std::invalid_argument("theta and K0 must be positive");

  CertifiedValue out;
  out.assumption = used;
  out.v_prime = state_velocity(used.mu, ell, K, opt.constants.epsilon);
  out.r_formula = truncation_radius(opt.t, used.theta, ell, out.v_prime);
  out.radius_overridden = opt.window_radius.has_value();
  if (opt.window_radius) {
    if (*opt.window_radius < 0) throw std::invalid_argument("window radius must be >= 0");
    out.r = *opt.window_radius;
  } else {
    if (out.r_formula > 1e6) {
      const double per_unit = out.r_formula / opt.t;
      throw CapacityError("certified radius " + format_double(out.r_formula) + " is out of range; t <= " +
                          format_double(1e6 / per_unit) + " keeps it below 1e6");
    }
    out.r = static_cast<int>(std::ceil(out.r_formula));
  }
  if (opt.t > 0.0 && out.r < 1) throw std::invalid_argument("certified runs with t > 0 need r >= 1");

  WindowPlan plan = plan_window(state, out.r, ell, used, opt.extra_cap, opt.max_states);
  const std::uint64_t needed = count_states(plan.limits);
  if (needed > opt.max_states) {
    std::string msg = "certified window of " + std::to_string(plan.sites) + " sites needs " + std::to_string(needed) +
                      " states, budget " + std::to_string(opt.max_states);
    if (!opt.window_radius) {
      // The state count grows with r, so bisect for the largest radius that fits.
      auto fits = [&](int r) {
        return count_states(plan_window(state, r, ell, used, opt.extra_cap, opt.max_states).limits) <= opt.max_states;
      };
      int fit = 0, over = out.r;
      while (over - fit > 1) {
        const int mid = fit + (over - fit) / 2;
        (fits(mid) ? fit : over) = mid;
      }
      const double per_unit = out.r_formula / opt.t;
      msg += fit >= 1 ? "; largest t that fits: " + format_double(fit / per_unit) + " (r = " + std::to_string(fit) + ")"
                      : "; no t > 0 fits";
    }
    throw CapacityError(msg);
  }
  out.N0 = plan.N0;
  out.window_sites = plan.sites;
  out.per_site_cap = plan.limits.per_site_cap;

  out.check = check_assumption(state, used, plan.radius + ell);
  if (out.check.status != "verified")
    throw PropertyViolation("initial state violates the density assumption (log margin " +
                            format_double(out.check.worst_log_margin) + ")");

  const int half = out.r + ell;
  const ModelSpec window = window_chain(chain, centre, half);
  std::vector<Vertex> sites;
  for (Vertex s : observable.sites) {
    if (s < -half || s > half) throw std::invalid_argument("observable does not fit the certified window");
    sites.push_back(s + half);
  }
  const MonomialOp obs = observable.moved_to(sites);

  const bool empty = state.kind == InitialState::Kind::kFock && plan.bosons > plan.N0;
  FockBasis basis = FockBasis::enumerate(empty ? BasisLimits{plan.sites, 1, 0, std::nullopt, plan.limits.max_states}
                                               : plan.limits);
  out.basis_size = basis.size();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  if (!empty) {
    if (state.kind == InitialState::Kind::kFock) {
      std::vector<std::uint8_t> occ;
      for (int k = -half; k <= half; ++k) occ.push_back(static_cast<std::uint8_t>(state.occupation_at(k)));
      psi(static_cast<Eigen::Index>(*basis.index_of(occ))) = 1.0;
    } else {
      std::vector<double> norms;
      for (int k = -half; k <= half; ++k) {
        double n2 = 0.0;
        for (cplx c : state.amplitudes_at(k)) n2 += std::norm(c);
        norms.push_back(std::sqrt(n2));
      }
      for (std::size_t m = 0; m < basis.size(); ++m) {
        cplx amp = 1.0;
        for (int k = 0; k < plan.sites && amp != cplx(0.0, 0.0); ++k) {
          const auto& a = state.amplitudes_at(k - half);
          const std::size_t n = basis.occupation(m, k);
          amp *= n < a.size() ? a[n] / norms[k] : cplx(0.0, 0.0);
        }
        psi(static_cast<Eigen::Index>(m)) = amp;
      }
    }
  }

  const SparseOp O = obs.sparse(basis);
  double normH = 0.0;
  for (std::size_t seg = 0; seg < window.segments().size(); ++seg)
    normH = std::max(normH, max_row_sum(build_segment_hamiltonian(window, basis, seg)));
  const double normO = max_row_sum(O);

  if (opt.t > 0.0) {
    out.restriction_error =
        restriction_error_bound(out.r, opt.t, used.theta, ell, out.v_prime, opt.constants.C3);
    out.cutoff_error = total_error_bound(out.r, ell, opt.constants.C4);
  }
  const double budget = out.restriction_error + out.cutoff_error;
  bool step_cap_hit = false;
  if (opt.t > 0.0) {
    out.t0 = opt.t;
    const double scale = normO * normH * normH * opt.t;
    if (std::isfinite(budget) && scale > 0.0) out.t0 = std::min(opt.t, opt.step_fraction * budget / scale);
    double steps = std::ceil(opt.t / out.t0 - 1e-12);
    if (steps > opt.max_steps) {
      steps = static_cast<double>(opt.max_steps);
      step_cap_hit = true;
    }
    out.steps = static_cast<long>(steps);
    for (long k = 0; k < out.steps; ++k)
      psi = evolve_state(psi, window, basis, opt.t * k / out.steps, opt.t * (k + 1) / out.steps, opt.evolution);
  }
  out.value = psi.dot(O * psi);

  using nlohmann::json;
  auto constant = [](double v, const char* note) {
    return json{{"value", format_double(v)}, {"provenance", "config"}, {"note", note}};
  };
  out.ledger = {
      {"C3", constant(opt.constants.C3, "constant left implicit by the source, default 1")},
      {"C4", constant(opt.constants.C4, "constant left implicit by the source, default 1")},
      {"epsilon", constant(opt.constants.epsilon, "velocity slack, default 0.1")},
      {"v_prime", {{"value", format_double(out.v_prime)}, {"provenance", "formula"},
                   {"formula", "(1 + epsilon) chain_velocity(mu/2)"}}},
      {"r", {{"value", format_double(out.r_formula)}, {"provenance", "formula"},
             {"formula", "e (2 theta)^(4l+2) v' t"}, {"used", out.r}, {"overridden", out.radius_overridden}}},
      {"N0", {{"value", out.N0}, {"provenance", "formula"},
              {"formula", "(2r+2l+1) max(4, 1/(e^(mu/3)-1), (2/mu)(1+8 ln 2+ln(theta (1-e^-mu)/mu^4)))"}}},
      {"restriction_error", {{"value", format_double(out.restriction_error)}, {"provenance", "formula"},
                             {"formula", "C3 r t ((2 theta)^(4l+2) v' t / r)^(r/(4l+2))"}}},
      {"cutoff_error", {{"value", format_double(out.cutoff_error)}, {"provenance", "formula"},
                        {"formula", "C4 r^2 e^(-r/(4l+2))"}}},
      {"step", {{"t0", format_double(out.t0)}, {"steps", out.steps}, {"fraction", format_double(opt.step_fraction)},
                {"norm_O", format_double(normO)}, {"norm_H", format_double(normH)},
                {"discretization_estimate", format_double(normO * normH * normH * out.t0 * opt.t)},
                {"step_budget_reached", step_cap_hit}}},
      {"assumption",
       {{"declared", {{"mu", format_double(declared.mu)}, {"theta", format_double(declared.theta)},
                      {"K0", format_double(declared.K0)},
                      {"form", declared.form == AnsatzForm::kInnerProduct ? "inner_product" : "partial_trace"}}},
        {"used", {{"mu", format_double(used.mu)}, {"theta", format_double(used.theta)}, {"K0", format_double(used.K0)},
                  {"form", "partial_trace"}}},
        {"status", out.check.status},
        {"checked_up_to", out.check.checked_up_to},
        {"worst_log_margin", format_double(out.check.worst_log_margin)}}},
      {"empty_projection", empty}};
  return out;
}

nlohmann::json certificate_json(const CertifiedValue& v) {
  return {{"value", {{"re", format_double(v.value.real())}, {"im", format_double(v.value.imag())}}},
          {"restriction_error", format_double(v.restriction_error)},
          {"cutoff_error", format_double(v.cutoff_error)},
          {"r", v.r},
          {"r_formula", format_double(v.r_formula)},
          {"N0", v.N0},
          {"window_sites", v.window_sites},
          {"per_site_cap", v.per_site_cap},
          {"basis_size", v.basis_size},
          {"ledger", v.ledger}};
}

WindowSweep window_sweep(const ModelSpec& chain, Vertex centre, const InitialState& state,
                         const MonomialOp& observable, const CertifyOptions& opt, const std::vector<int>& radii,
                         int reference_extra_radius, int reference_extra_cap) {
  if (radii.empty()) throw std::invalid_argument("window sweep needs at least one radius");
  WindowSweep out;
  const int ell = chain.range();
  out.slope_limit = -1.0 / (4 * ell + 2) + 0.1;
  out.reference_radius = *std::max_element(radii.begin(), radii.end()) + reference_extra_radius;
  CertifyOptions ref_opt = opt;
  ref_opt.window_radius = out.reference_radius;
  ref_opt.extra_cap = opt.extra_cap + reference_extra_cap;
  CertifiedValue ref = certified_expectation(chain, centre, state, observable, ref_opt);
  out.reference = ref.value;
  out.reference_cap = ref.per_site_cap;

  std::vector<double> xs, ys;
  for (int r : radii) {
    CertifyOptions o = opt;
    o.window_radius = r;
    CertifiedValue cv = certified_expectation(chain, centre, state, observable, o);
    SweepPoint p;
    p.r = r;
    p.value = cv.value;
    p.error = std::abs(cv.value - ref.value);
    p.restriction_bound = cv.restriction_error;
    p.total_bound = cv.cutoff_error;
    p.within = p.error <= p.restriction_bound + p.total_bound;
    const double unit = (std::isinf(cv.restriction_error) ? 0.0 : cv.restriction_error / opt.constants.C3) +
                        cv.cutoff_error / opt.constants.C4;
    p.min_constant = p.error == 0.0 ? 0.0 : (unit > 0.0 ? p.error / unit : kInf);
    if (std::isinf(cv.restriction_error)) p.min_constant = 0.0;
    p.cutoff_constant = p.error / total_error_bound(r, ell, 1.0);
    out.bounds_hold = out.bounds_hold && p.within;
    if (p.error > 0.0) {
      xs.push_back(r);
      ys.push_back(std::log(p.error));
    }
    out.points.push_back(p);
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    out.slope = sxy / sxx;
    out.slope_ok = out.slope <= out.slope_limit;
  } else {
    out.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

nlohmann::json sweep_json(const WindowSweep& s) {
  using nlohmann::json;
  json pts = json::array();
  for (const auto& p : s.points)
    pts.push_back({{"r", p.r},
                   {"value", format_double(p.value.real())},
                   {"error", format_double(p.error)},
                   {"restriction_bound", format_double(p.restriction_bound)},
                   {"total_bound", format_double(p.total_bound)},
                   {"within", p.within},
                   {"min_constant", format_double(p.min_constant)},
                   {"cutoff_constant", format_double(p.cutoff_constant)}});
  return {{"reference", format_double(s.reference.real())},
          {"reference_radius", s.reference_radius},
          {"reference_cap", s.reference_cap},
          {"slope", format_double(s.slope)},
          {"slope_limit", format_double(s.slope_limit)},
          {"bounds_hold", s.bounds_hold},
          {"slope_ok", s.slope_ok},
          {"points", pts}};
}

}  // namespace bosonlc
