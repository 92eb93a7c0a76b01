#include "bdkin/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bdkin/numeric.hpp"

namespace bdkin {

namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr Real kTwoThirds = 2.0 / 3.0;

} // namespace

Real upper_incomplete_gamma(Real s, Real x) {
  if (x < 0.0 || s <= 0.0) throw std::invalid_argument("gamma_inc: bad args");
  if (x == 0.0) return std::tgamma(s);
  if (x < s + 1.0) {
    // Gamma(s,x) = Gamma(s) - gamma(s,x), lower series
    Real term = 1.0 / s;
    Real sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (s + n);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    const Real lower = sum * std::exp(-x + s * std::log(x));
    return std::tgamma(s) - lower;
  }
  // Continued fraction: Gamma(s,x) = e^-x x^s / (x+1-s- 1(1-s)/(x+3-s- ...))
  const Real tiny = 1e-300;
  Real b = x + 1.0 - s;
  Real c = 1.0 / tiny;
  Real d = 1.0 / b;
  Real h = d;
  for (int i = 1; i < 500; ++i) {
    const Real an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const Real delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + s * std::log(x));
}

Real tail_integral_exp_power(Real c, Real p, Real k, Real L) {
  const Real s = (k + 1.0) / p;
  const Real x = c * std::pow(L, p);
  return (1.0 / p) * std::pow(c, -s) * upper_incomplete_gamma(s, x);
}

EnergyLadder::EnergyLadder(LadderKind kind, Real p1, Real p2,
                           std::vector<Real> table, Real log_R)
    : kind_(kind), p1_(p1), p2_(p2), table_(std::move(table)), log_R_(log_R) {}

EnergyLadder EnergyLadder::example1(Real delta, Real gamma) {
  if (!(delta > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("example1 ladder needs delta > 0 and gamma > 0");
  return EnergyLadder(LadderKind::example1, delta, gamma, {}, -delta);
}

EnergyLadder EnergyLadder::example2(Real beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("example2 ladder needs beta > 0");
  return EnergyLadder(LadderKind::example2, beta, 0.0, {}, beta);
}

EnergyLadder EnergyLadder::geometric(Real beta) {
  if (!std::isfinite(beta))
    throw std::invalid_argument("geometric ladder needs finite beta");
  return EnergyLadder(LadderKind::geometric, beta, 0.0, {}, beta);
}

EnergyLadder EnergyLadder::table(std::vector<Real> a, Real R) {
  if (!(R > 0.0) || !std::isfinite(R))
    throw std::invalid_argument("table ladder needs R > 0");
  if (a.empty() || a.front() != 0.0)
    throw std::invalid_argument("table ladder needs a_1 = 0");
  for (Real v : a)
    if (!std::isfinite(v))
      throw std::invalid_argument("table ladder entries must be finite");
  return EnergyLadder(LadderKind::table, 0.0, 0.0, std::move(a), std::log(R));
}

std::string EnergyLadder::kind_name() const {
  switch (kind_) {
    case LadderKind::example1: return "example1";
    case LadderKind::example2: return "example2";
    case LadderKind::geometric: return "geometric";
    case LadderKind::table: return "table";
  }
  return "?";
}

Real EnergyLadder::a(Index l) const {
  if (l < 1) throw std::out_of_range("ladder: l must be >= 1");
  switch (kind_) {
    case LadderKind::example1:
      if (l == 1) return 0.0;
      return -p1_ * static_cast<Real>(l) +
             p2_ * std::pow(static_cast<Real>(l), kTwoThirds);
    case LadderKind::example2:
      if (l == 1) return 0.0;
      return p1_ * static_cast<Real>(l);
    case LadderKind::geometric:
      return p1_ * static_cast<Real>(l - 1);
    case LadderKind::table: {
      const Index n = static_cast<Index>(table_.size());
      if (l <= n) return table_[l - 1];
      return table_[n - 1] + static_cast<Real>(l - n) * log_R_;
    }
  }
  return 0.0;
}

Real EnergyLadder::R() const { return std::exp(log_R_); }

Real EnergyLadder::log_q_tilde(Index l) const {
  return -a(l) + static_cast<Real>(l) * log_R_;
}

Real EnergyLadder::q_ratio(Index l) const { return std::exp(a(l + 1) - a(l)); }

Real EnergyLadder::log_qtilde_ratio(Index l) const {
  return log_R_ - (a(l + 1) - a(l));
}

Real EnergyLadder::log_qtilde_ratio_sup(Index L) const {
  if (L < 1) throw std::out_of_range("ladder: L must be >= 1");
  switch (kind_) {
    case LadderKind::geometric:
      return 0.0;
    case LadderKind::example2:
      // ratio is -beta at l = 1 and 0 afterwards
      return 0.0;
    case LadderKind::example1:
      // For l >= 2 the ratios -gamma*((l+1)^(2/3)-l^(2/3)) increase to 0.
      if (L >= 2) return 0.0;
      return std::max(log_qtilde_ratio(1), 0.0);
    case LadderKind::table: {
      const Index n = static_cast<Index>(table_.size());
      Real sup = 0.0; // constant extension beyond the table
      for (Index l = L; l < n; ++l)
        sup = std::max(sup, log_qtilde_ratio(l));
      return sup;
    }
  }
  return 0.0;
}

Real EnergyLadder::log_qtilde_ratio_inf(Index L) const {
  if (L < 1) throw std::out_of_range("ladder: L must be >= 1");
  switch (kind_) {
    case LadderKind::geometric:
      return 0.0;
    case LadderKind::example2:
      return (L == 1) ? std::min(-p1_, 0.0) : 0.0;
    case LadderKind::example1: {
      // Ratios increase for l >= 2, so the infimum sits at the window start.
      const Real at2 = log_qtilde_ratio(std::max<Index>(L, 2));
      return (L == 1) ? std::min(log_qtilde_ratio(1), at2) : at2;
    }
    case LadderKind::table: {
      const Index n = static_cast<Index>(table_.size());
      Real inf = 0.0;
      for (Index l = L; l < n; ++l)
        inf = std::min(inf, log_qtilde_ratio(l));
      return inf;
    }
  }
  return 0.0;
}

Real EnergyLadder::qtilde_tail_sum_bound(Index L) const {
  if (L < 1) throw std::out_of_range("ladder: L must be >= 1");
  if (kind_ != LadderKind::example1) return kInf;
  // qtilde_l = exp(-gamma l^(2/3)) for l >= 2 is decreasing in l, so the
  // tail is dominated by the integral from L.
  return tail_integral_exp_power(p2_, kTwoThirds, 0.0, static_cast<Real>(L));
}

Real EnergyLadder::qtilde_weighted_tail_sum_bound(Index L) const {
  if (L < 1) throw std::out_of_range("ladder: L must be >= 1");
  if (kind_ != LadderKind::example1) return kInf;
  // l*exp(-gamma l^(2/3)) decreases once l > (3/(2 gamma))^(3/2); march to
  // that point explicitly, then integrate.
  const Real lc = std::pow(1.5 / p2_, 1.5);
  Index L0 = L;
  Real explicit_part = 0.0;
  while (static_cast<Real>(L0) < lc) {
    const Index l = L0 + 1;
    explicit_part += static_cast<Real>(l) *
                     std::exp(-p2_ * std::pow(static_cast<Real>(l), kTwoThirds));
    ++L0;
  }
  return explicit_part +
         tail_integral_exp_power(p2_, kTwoThirds, 1.0, static_cast<Real>(L0));
}

Real EnergyLadder::qtilde_tail_sup(Index L) const {
  if (L < 1) throw std::out_of_range("ladder: L must be >= 1");
  switch (kind_) {
    case LadderKind::geometric:
      return std::exp(log_R_);
    case LadderKind::example2:
      return 1.0;
    case LadderKind::example1:
      // decreasing for l >= 2 and L+1 >= 2
      return std::exp(log_q_tilde(L + 1));
    case LadderKind::table: {
      const Index n = static_cast<Index>(table_.size());
      Real sup = std::exp(log_q_tilde(std::max(L + 1, n))); // constant beyond
      for (Index l = L + 1; l <= n; ++l)
        sup = std::max(sup, std::exp(log_q_tilde(l)));
      return sup;
    }
  }
  return 0.0;
}

KineticCoefficients KineticCoefficients::constant(Real value) {
  if (!(value > 0.0))
    throw std::invalid_argument("kinetic coefficients must be positive");
  KineticCoefficients k;
  k.power_ = false;
  k.value_ = value;
  return k;
}

KineticCoefficients KineticCoefficients::power(Real alpha) {
  if (!(alpha >= 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("power kinetics need alpha in [0, 1)");
  KineticCoefficients k;
  k.power_ = true;
  k.alpha_ = alpha;
  return k;
}

Real KineticCoefficients::gamma(Index l) const {
  if (l < 1) throw std::out_of_range("kinetics: l must be >= 1");
  if (!power_) return value_;
  return std::pow(static_cast<Real>(l), alpha_);
}

void StandardModelParams::validate() const {
  if (!(alpha >= 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("standard model needs alpha in [0, 1)");
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("standard model needs gamma in (0, 1)");
  if (!(z_s > 0.0)) throw std::invalid_argument("standard model needs z_s > 0");
  if (!(q > 0.0)) throw std::invalid_argument("standard model needs q > 0");
}

Real StandardModelParams::c(Index l) const {
  if (l < 1) throw std::out_of_range("standard model: l must be >= 1");
  return std::pow(static_cast<Real>(l), alpha);
}

Real StandardModelParams::d(Index l) const {
  if (l < 2) throw std::out_of_range("standard model: d defined for l >= 2");
  return c(l) * (z_s + q / std::pow(static_cast<Real>(l), gamma));
}

Real StandardModelParams::log_Q(Index l) const {
  if (l < 1) throw std::out_of_range("standard model: l must be >= 1");
  Real s = 0.0;
  for (Index n = 1; n < l; ++n) s += std::log(c(n)) - std::log(d(n + 1));
  return s;
}

} // namespace bdkin
