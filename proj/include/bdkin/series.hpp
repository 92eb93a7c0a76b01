#ifndef BDKIN_SERIES_HPP_
#define BDKIN_SERIES_HPP_

#include <functional>

#include "bdkin/ladder.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

/// Result of summing a nonnegative power series with certified tail control.
///
/// converged:    the true sum lies in [value, value + error_bound];
///               value is the computed partial sum.
/// diverged:     the sum is certified to exceed every finite bound, or at
///               least the requested divergence threshold; value is +inf and
///               partial_sum keeps the last computed partial.
/// inconclusive: the horizon was exhausted without a certificate either way;
///               value is the partial sum, which is always a lower bound.
struct SeriesValue {
  enum class Status { converged, diverged, inconclusive };
  Status status = Status::inconclusive;
  Real value = 0.0;
  Real error_bound = 0.0;
  Real partial_sum = 0.0;
  Index terms_used = 0;

  bool converged() const { return status == Status::converged; }
  bool diverged() const { return status == Status::diverged; }
  /// Certified lower bound for the true sum (partial sums are monotone).
  Real lower() const { return partial_sum; }
  /// Certified upper bound; +inf unless converged.
  Real upper() const;
};

struct SeriesOptions {
  Real tol = 1e-13;          // absolute tail tolerance for convergence
  Index horizon = 200000;    // maximum number of terms
  Real divergence_threshold = 1e15;
};

/// Term generator for sum_{l>=1} t_l with t_l >= 0.
///   log_term(l):       ln t_l (-inf allowed for zero terms)
///   tail_bound(L, tL): certified upper bound on sum_{l>L} t_l given
///                      t_L = tL, or +inf when no certificate applies
///   ratio_inf(L):      certified inf_{l>=L} t_{l+1}/t_l, or 0 when unknown
struct TermSeries {
  std::function<Real(Index)> log_term;
  std::function<Real(Index, Real)> tail_bound;
  std::function<Real(Index)> ratio_inf;
};

SeriesValue sum_power_series(const TermSeries& terms, const SeriesOptions& opts);

/// Generating function f~(mu) = sum_l qtilde_l mu^l for mu in [0, 1].
/// Tail certificates combine a geometric bound from the ladder's ratio
/// envelope with kind-specific integral bounds, so example1 converges at
/// mu = 1 while the nondecaying ladders are certified divergent there.
SeriesValue f_tilde(const EnergyLadder& ladder, Real mu,
                    const SeriesOptions& opts = {});

/// Weighted series g~(mu) = sum_l l qtilde_l mu^l for mu in [0, 1].
SeriesValue g_tilde(const EnergyLadder& ladder, Real mu,
                    const SeriesOptions& opts = {});

} // namespace bdkin

#endif // BDKIN_SERIES_HPP_
