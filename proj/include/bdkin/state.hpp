#ifndef BDKIN_STATE_HPP_
#define BDKIN_STATE_HPP_

#include "bdkin/types.hpp"

namespace bdkin {

/// Compensated (Kahan) sum of an array, ascending index order.
Real kahan_sum(const Array& v);

/// Throws std::invalid_argument unless z has at least two entries and
/// every entry is nonnegative and finite.
void require_valid_state(const Array& z);

/// Like require_valid_state but allows negative entries. Used where the
/// formulas are polynomial in z and adaptive integrator stages may leave
/// the nonnegative cone transiently.
void require_finite_state(const Array& z);

/// Total mass sum_l l * z_l, summed in ascending index order.
/// With compensated=true (default) a Kahan accumulator is used.
Real mass(const Array& z, bool compensated = true);

/// Number density of clusters of size >= from: sum_{l>=from} z_l.
/// from is a cluster size (1-based); from > m gives 0.
Real droplet_count(const Array& z, Index from = 1, bool compensated = true);

/// Tail sums zeta_l = sum_{n>=l} z_n for l = 1..m. Accepts any real-valued
/// input (also used to transform time derivatives).
Array to_zeta(const Array& z);

/// Inverse of to_zeta: z_l = zeta_l - zeta_{l+1} with zeta_{m+1} = 0.
/// Requires zeta nonincreasing with zeta_m >= 0 (up to a small rounding
/// slack); throws std::invalid_argument otherwise.
Array from_zeta(const Array& zeta);

/// Monodisperse state of mass rho0: z_1 = rho0, all other entries zero.
Array monodisperse(Real rho0, Index m);

} // namespace bdkin

#endif // BDKIN_STATE_HPP_
