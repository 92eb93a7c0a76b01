#include "bdkin/equilibrium.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "bdkin/numeric.hpp"

namespace bdkin {

namespace {
constexpr Real kInf = std::numeric_limits<Real>::infinity();
} // namespace

std::string EqClassification::verdict_name() const {
  switch (verdict) {
    case Verdict::EQ: return "EQ";
    case Verdict::NEQ: return "NEQ";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string EqClassification::branch_name() const {
  switch (branch) {
    case Branch::f_at_1_gt_1: return "f_at_1_gt_1";
    case Branch::f_eq_1_g_finite: return "f_eq_1_g_finite";
    case Branch::f_lt_1: return "f_lt_1";
    case Branch::f_eq_1_g_infinite: return "f_eq_1_g_infinite";
    case Branch::undecided: return "undecided";
  }
  return "?";
}

EqClassification classify(const EnergyLadder& ladder, Real tol,
                          const SeriesOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("classify: tol must be > 0");
  EqClassification c;
  c.tol = tol;
  c.f_at_1 = f_tilde(ladder, 1.0, opts);
  c.g_at_1 = g_tilde(ladder, 1.0, opts);

  if (c.f_at_1.diverged() || c.f_at_1.lower() > 1.0 + tol) {
    // Partial sums are lower bounds, so exceeding 1 is decisive even when
    // the evaluation itself did not converge.
    c.verdict = EqClassification::Verdict::EQ;
    c.branch = EqClassification::Branch::f_at_1_gt_1;
  } else if (c.f_at_1.converged() && c.f_at_1.upper() < 1.0 - tol) {
    c.verdict = EqClassification::Verdict::NEQ;
    c.branch = EqClassification::Branch::f_lt_1;
  } else {
    // Either the series is within tol of 1 (equality with 1 is not
    // certifiable in floating point) or the horizon ran out.
    c.verdict = EqClassification::Verdict::inconclusive;
    c.branch = EqClassification::Branch::undecided;
  }
  return c;
}

EquilibriumSolution::EquilibriumSolution(EnergyLadder ladder, Real mu_bar,
                                         Real rho_bar, Real g_at_mu)
    : ladder_(std::move(ladder)),
      mu_bar_(mu_bar),
      rho_bar_(rho_bar),
      g_mu_(g_at_mu),
      N_bar_(rho_bar / g_at_mu) {}

Real EquilibriumSolution::a_tilde() const { return rho_bar_ * std::log(mu_bar_); }

Real EquilibriumSolution::z(Index l) const {
  return N_bar_ * std::exp(ladder_.log_q_tilde(l) +
                           static_cast<Real>(l) * std::log(mu_bar_));
}

Array EquilibriumSolution::truncated(Index m) const {
  if (m < 2) throw std::invalid_argument("truncated: m must be >= 2");
  Array out(m);
  for (Index l = 1; l <= m; ++l) out[l - 1] = z(l);
  return out;
}

EquilibriumSolution solve_equilibrium(const EnergyLadder& ladder, Real rho_bar,
                                      Real root_tol, const SeriesOptions& opts) {
  if (!(rho_bar > 0.0)) throw std::invalid_argument("rho_bar must be > 0");
  if (!(root_tol > 0.0)) throw std::invalid_argument("root_tol must be > 0");

  const EqClassification cls = classify(ladder, 1e-9, opts);
  if (cls.verdict != EqClassification::Verdict::EQ)
    throw std::domain_error("no equilibrium: classification is " +
                            cls.verdict_name());

  SeriesOptions eval = opts;
  eval.tol = std::min(eval.tol, 0.1 * root_tol);

  // Bisection on certified comparisons against 1. A partial sum above 1
  // certifies f~ > 1 even when the evaluation is inconclusive; deciding
  // f~ < 1 requires a converged upper bound.
  Real lo = 0.0, hi = 1.0;
  Real mid = 0.5;
  for (int it = 0; it < 200 && (hi - lo) > 8.0 * std::numeric_limits<Real>::epsilon() * hi;
       ++it) {
    mid = 0.5 * (lo + hi);
    const SeriesValue fv = f_tilde(ladder, mid, eval);
    if (fv.lower() > 1.0) {
      hi = mid;
    } else if (fv.converged() && fv.upper() < 1.0) {
      lo = mid;
    } else if (fv.converged()) {
      // 1 lies inside [value, value + error_bound]: root found to within
      // the series tolerance.
      lo = hi = mid;
    } else {
      throw std::runtime_error(
          "equilibrium root: series comparison could not be certified");
    }
  }
  Real mu = 0.5 * (lo + hi);

  // Secant refinement on the converged values; bisection already confines
  // the root, so reject any step leaving [lo, hi].
  Real x0 = std::max(lo - (hi - lo), 0.25 * lo);
  Real x1 = mu;
  Real f0 = f_tilde(ladder, x0, eval).value - 1.0;
  Real f1 = f_tilde(ladder, x1, eval).value - 1.0;
  for (int it = 0; it < 12 && std::abs(f1) > 0.5 * root_tol; ++it) {
    const Real df = f1 - f0;
    if (df == 0.0) break;
    const Real x2 = x1 - f1 * (x1 - x0) / df;
    if (!(x2 > 0.0) || !(x2 < 1.0)) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f_tilde(ladder, x1, eval).value - 1.0;
  }
  if (std::abs(f1) <= std::abs(f_tilde(ladder, mu, eval).value - 1.0)) mu = x1;

  const SeriesValue check = f_tilde(ladder, mu, eval);
  if (!check.converged() || std::abs(check.value - 1.0) > root_tol)
    throw std::runtime_error("equilibrium root did not reach tolerance");

  const SeriesValue g = g_tilde(ladder, mu, eval);
  if (!g.converged())
    throw std::runtime_error("g~(mu_bar) could not be certified finite");
  return EquilibriumSolution(ladder, mu, rho_bar, g.value);
}

OptimumValue optimum_value(const EnergyLadder& ladder, Real rho_bar) {
  if (!(rho_bar > 0.0)) throw std::invalid_argument("rho_bar must be > 0");
  const EqClassification cls = classify(ladder);
  OptimumValue opt;
  switch (cls.verdict) {
    case EqClassification::Verdict::EQ: {
      opt.attained = true;
      opt.solution = solve_equilibrium(ladder, rho_bar);
      opt.value = opt.solution->a_tilde();
      return opt;
    }
    case EqClassification::Verdict::NEQ: {
      // The infimum over states of the given mass is 0 and is not attained.
      opt.attained = false;
      opt.value = 0.0;
      return opt;
    }
    case EqClassification::Verdict::inconclusive:
      throw std::domain_error("optimum_value: classification inconclusive");
  }
  throw std::logic_error("unreachable");
}

MinimizingElement::MinimizingElement(EnergyLadder ladder, Index m, Real rho_bar,
                                     Real s, Real pi_m, Real g_value)
    : ladder_(std::move(ladder)),
      m_(m),
      rho_bar_(rho_bar),
      s_(s),
      pi_m_(pi_m),
      N_(rho_bar / g_value) {}

Real MinimizingElement::value() const { return rho_bar_ * std::log1p(-s_); }

Real MinimizingElement::weight(Index l) const {
  return std::max(std::exp(ladder_.log_q_tilde(l)), pi_m_);
}

Real MinimizingElement::z(Index l) const {
  return N_ * weight(l) * std::exp(static_cast<Real>(l) * std::log1p(-s_));
}

Array MinimizingElement::weights_truncated(Index m_out) const {
  Array out(m_out);
  for (Index l = 1; l <= m_out; ++l) out[l - 1] = weight(l);
  return out;
}

Array MinimizingElement::truncated(Index m_out) const {
  Array out(m_out);
  for (Index l = 1; l <= m_out; ++l) out[l - 1] = z(l);
  return out;
}

namespace {

/// sum_{l=1}^{m} max(qtilde_l, pi) mu^l + pi mu^{m+1}/(1-mu) with mu = 1-s.
/// Exact split: pi = sup_{l>m} qtilde_l dominates every tail weight, so the
/// tail is a pure geometric series. Powers go through log1p so that s near
/// machine epsilon keeps full relative accuracy.
Real modified_partition_sum(const EnergyLadder& ladder, Index m, Real pi, Real s) {
  const Real lmu = std::log1p(-s);
  Real sum = 0.0, comp = 0.0;
  for (Index l = 1; l <= m; ++l) {
    const Real w = std::max(std::exp(ladder.log_q_tilde(l)), pi);
    const Real t = w * std::exp(static_cast<Real>(l) * lmu);
    const Real y = t - comp;
    const Real u = sum + y;
    comp = (u - sum) - y;
    sum = u;
  }
  return sum + pi * std::exp(static_cast<Real>(m + 1) * lmu) / s;
}

/// Weighted analogue sum_l l q^(m)_l mu^l, with the closed-form tail
/// sum_{l>m} l mu^l = mu^{m+1} (1 + m s) / s^2.
Real modified_partition_mass(const EnergyLadder& ladder, Index m, Real pi, Real s) {
  const Real lmu = std::log1p(-s);
  Real sum = 0.0, comp = 0.0;
  for (Index l = 1; l <= m; ++l) {
    const Real w = std::max(std::exp(ladder.log_q_tilde(l)), pi);
    const Real t = static_cast<Real>(l) * w * std::exp(static_cast<Real>(l) * lmu);
    const Real y = t - comp;
    const Real u = sum + y;
    comp = (u - sum) - y;
    sum = u;
  }
  const Real tail = pi * std::exp(static_cast<Real>(m + 1) * lmu) *
                    (1.0 + static_cast<Real>(m) * s) / (s * s);
  return sum + tail;
}

} // namespace

MinimizingElement minimizing_sequence(const EnergyLadder& ladder, Real rho_bar,
                                      Index m) {
  if (!(rho_bar > 0.0)) throw std::invalid_argument("rho_bar must be > 0");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  const EqClassification cls = classify(ladder);
  if (cls.verdict != EqClassification::Verdict::NEQ)
    throw std::domain_error("minimizing sequence needs the NEQ phase, got " +
                            cls.verdict_name());
  if (ladder.log_qtilde_ratio_sup(m + 1) > 0.0)
    throw std::domain_error(
        "minimizing sequence needs a nonincreasing qtilde tail");

  const Real pi = ladder.qtilde_tail_sup(m);
  if (!(pi > 0.0)) throw std::runtime_error("tail sup must be positive");

  // F(s) = partition sum at mu = 1-s is strictly decreasing in s, diverges
  // as s -> 0 and vanishes as s -> 1. Bracket then bisect in log s.
  auto F = [&](Real s) { return modified_partition_sum(ladder, m, pi, s); };
  Real s_hi = 0.5;
  while (F(s_hi) > 1.0 && s_hi < 1.0 - 1e-12) s_hi = 0.5 * (1.0 + s_hi);
  if (F(s_hi) > 1.0) throw std::runtime_error("minimizing sequence: no bracket");
  Real s_lo = s_hi;
  while (F(s_lo) < 1.0) {
    s_lo *= 0.25;
    if (s_lo < 1e-300)
      throw std::runtime_error("minimizing sequence: no bracket");
  }
  Real s = s_lo;
  for (int it = 0; it < 300; ++it) {
    s = std::sqrt(s_lo * s_hi);
    const Real fs = F(s);
    if (std::abs(fs - 1.0) <= 1e-13) break;
    if (fs > 1.0)
      s_lo = s;
    else
      s_hi = s;
    if ((s_hi - s_lo) <= 4.0 * std::numeric_limits<Real>::epsilon() * s_lo) {
      s = std::sqrt(s_lo * s_hi);
      break;
    }
  }

  const Real g = modified_partition_mass(ladder, m, pi, s);
  return MinimizingElement(ladder, m, rho_bar, s, pi, g);
}

StandardEquilibrium::StandardEquilibrium(StandardModelParams sm, Real mu, Real rho)
    : sm_(sm), mu_(mu), rho_(rho) {}

Real StandardEquilibrium::z(Index l) const {
  if (mu_ == 0.0) return 0.0;
  return std::exp(sm_.log_Q(l) + static_cast<Real>(l) * std::log(mu_));
}

Array StandardEquilibrium::truncated(Index m) const {
  if (m < 2) throw std::invalid_argument("truncated: m must be >= 2");
  Array out(m);
  if (mu_ == 0.0) {
    out.setZero();
    return out;
  }
  const Real lmu = std::log(mu_);
  Real logQ = 0.0;
  for (Index l = 1; l <= m; ++l) {
    if (l > 1) logQ += std::log(sm_.c(l - 1)) - std::log(sm_.d(l));
    out[l - 1] = std::exp(logQ + static_cast<Real>(l) * lmu);
  }
  return out;
}

StandardEquilibrium standard_equilibrium(const StandardModelParams& sm, Real mu,
                                         const SeriesOptions& opts) {
  sm.validate();
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (mu > sm.z_s)
    throw std::domain_error("supersaturated: mu exceeds z_s");
  if (mu == 0.0) return StandardEquilibrium(sm, 0.0, 0.0);

  const Real lmu = std::log(mu);
  const Real b = sm.q / sm.z_s;
  const Real c1 = 0.5 * b / (1.0 - sm.gamma);

  // Incremental ln Q_l; sum_power_series consumes terms in order.
  auto logQ_state = std::make_shared<std::pair<Index, Real>>(1, 0.0);
  TermSeries ts;
  ts.log_term = [sm, lmu, logQ_state](Index l) {
    auto& [at, logQ] = *logQ_state;
    if (l < at) { // restart (defensive; evaluation is single-pass)
      at = 1;
      logQ = 0.0;
    }
    while (at < l) {
      logQ += std::log(sm.c(at)) - std::log(sm.d(at + 1));
      ++at;
    }
    return std::log(static_cast<Real>(l)) + logQ + static_cast<Real>(l) * lmu;
  };
  ts.tail_bound = [sm, mu, b, c1](Index L, Real tL) {
    Real bound = kInf;
    const Real Lr = static_cast<Real>(L);
    // Geometric envelope: every later ratio is below
    // ((L+1)/L)^(1-alpha) * mu / z_s.
    const Real r = std::pow((Lr + 1.0) / Lr, 1.0 - sm.alpha) * mu / sm.z_s;
    if (r < 1.0) bound = tL * r / (1.0 - r);
    // Subexponential envelope, valid up to mu = z_s: once
    //   (1-alpha)(L+1)^gamma / L + (b^2/2)(L+1)^-gamma <= b/2
    // the term ratio is below exp(-(b/2)(l+1)^-gamma) and the tail is
    // dominated by an incomplete-gamma integral.
    const Real Lp1g = std::pow(Lr + 1.0, sm.gamma);
    const Real h = (1.0 - sm.alpha) * Lp1g / Lr + 0.5 * b * b / Lp1g;
    if (h <= 0.5 * b) {
      const Real p = 1.0 - sm.gamma;
      const Real sub = tL * std::exp(c1 * std::pow(Lr + 1.0, p)) *
                       tail_integral_exp_power(c1, p, 0.0, Lr + 1.0);
      bound = std::min(bound, sub);
    }
    return bound;
  };
  ts.ratio_inf = [](Index) { return 0.0; };

  const SeriesValue rho = sum_power_series(ts, opts);
  if (!rho.converged())
    throw std::runtime_error("standard equilibrium mass series did not converge");
  return StandardEquilibrium(sm, mu, rho.value);
}

} // namespace bdkin
