#include "bdkin/series.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bdkin {

namespace {
constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr Real kEps = std::numeric_limits<Real>::epsilon();
} // namespace

Real SeriesValue::upper() const {
  return converged() ? partial_sum + error_bound : kInf;
}

SeriesValue sum_power_series(const TermSeries& terms, const SeriesOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("series tol must be > 0");
  if (opts.horizon < 2) throw std::invalid_argument("series horizon too small");

  SeriesValue out;
  Real sum = 0.0, comp = 0.0;
  for (Index l = 1; l <= opts.horizon; ++l) {
    const Real t = std::exp(terms.log_term(l));
    if (!std::isfinite(t))
      throw std::runtime_error("series term overflow at l=" + std::to_string(l));
    {
      const Real y = t - comp;
      const Real s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
    out.partial_sum = sum;
    out.terms_used = l;

    if (sum > opts.divergence_threshold) {
      out.status = SeriesValue::Status::diverged;
      out.value = kInf;
      return out;
    }
    if (t > 0.0 && terms.ratio_inf && terms.ratio_inf(l) >= 1.0) {
      // Terms can never decrease again; the series is divergent.
      out.status = SeriesValue::Status::diverged;
      out.value = kInf;
      return out;
    }
    const Real tail = terms.tail_bound(l, t);
    if (tail <= opts.tol) {
      out.status = SeriesValue::Status::converged;
      out.value = sum;
      // Allow for accumulated rounding on top of the certified tail.
      out.error_bound = tail + 8.0 * kEps * (std::abs(sum) + 1.0);
      return out;
    }
  }
  out.status = SeriesValue::Status::inconclusive;
  out.value = out.partial_sum;
  return out;
}

namespace {

TermSeries make_ladder_series(const EnergyLadder& ladder, Real mu, bool weighted) {
  if (!(mu >= 0.0) || !(mu <= 1.0))
    throw std::invalid_argument("series argument mu must lie in [0, 1]");
  const Real log_mu = std::log(mu); // -inf at mu = 0 gives zero terms
  TermSeries s;
  s.log_term = [&ladder, log_mu, weighted](Index l) {
    Real v = ladder.log_q_tilde(l) + static_cast<Real>(l) * log_mu;
    if (weighted) v += std::log(static_cast<Real>(l));
    return v;
  };
  s.tail_bound = [&ladder, mu, log_mu, weighted](Index L, Real tL) {
    Real bound = kInf;
    // Geometric envelope: t_{l+1}/t_l <= weight * exp(sup + ln mu).
    Real r = std::exp(ladder.log_qtilde_ratio_sup(L) + log_mu);
    if (weighted) r *= static_cast<Real>(L + 1) / static_cast<Real>(L);
    if (r < 1.0) bound = tL * r / (1.0 - r);
    // Integral envelope (decaying ladders only): sum_{l>L} t_l is at most
    // mu^{L+1} times the unweighted/weighted qtilde tail.
    const Real qtail = weighted ? ladder.qtilde_weighted_tail_sum_bound(L)
                                : ladder.qtilde_tail_sum_bound(L);
    if (std::isfinite(qtail)) {
      const Real scale =
          (mu == 0.0) ? 0.0 : std::exp(static_cast<Real>(L + 1) * log_mu);
      bound = std::min(bound, scale * qtail);
    }
    return bound;
  };
  s.ratio_inf = [&ladder, log_mu](Index L) {
    // For the weighted series the extra factor (l+1)/l > 1 only strengthens
    // divergence, so the unweighted infimum stays a valid certificate.
    return std::exp(ladder.log_qtilde_ratio_inf(L) + log_mu);
  };
  return s;
}

} // namespace

SeriesValue f_tilde(const EnergyLadder& ladder, Real mu, const SeriesOptions& opts) {
  if (mu == 0.0) {
    SeriesValue v;
    v.status = SeriesValue::Status::converged;
    v.value = v.partial_sum = 0.0;
    v.error_bound = 0.0;
    v.terms_used = 0;
    return v;
  }
  return sum_power_series(make_ladder_series(ladder, mu, false), opts);
}

SeriesValue g_tilde(const EnergyLadder& ladder, Real mu, const SeriesOptions& opts) {
  if (mu == 0.0) {
    SeriesValue v;
    v.status = SeriesValue::Status::converged;
    v.value = v.partial_sum = 0.0;
    v.error_bound = 0.0;
    v.terms_used = 0;
    return v;
  }
  return sum_power_series(make_ladder_series(ladder, mu, true), opts);
}

} // namespace bdkin
