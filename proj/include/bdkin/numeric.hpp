#ifndef BDKIN_NUMERIC_HPP_
#define BDKIN_NUMERIC_HPP_

#include "bdkin/types.hpp"

namespace bdkin {

/// Upper incomplete gamma Gamma(s, x) for s > 0, x >= 0. Lower series for
/// x < s + 1, Lentz continued fraction otherwise.
Real upper_incomplete_gamma(Real s, Real x);

/// integral_L^inf s^k exp(-c s^p) ds
///   = (1/p) c^(-(k+1)/p) Gamma((k+1)/p, c L^p),  c > 0, 0 < p <= 1.
/// A certified upper bound for sum_{l>L} l^k exp(-c l^p) whenever the
/// summand is nonincreasing on [L, inf).
Real tail_integral_exp_power(Real c, Real p, Real k, Real L);

} // namespace bdkin

#endif // BDKIN_NUMERIC_HPP_
