#ifndef BDKIN_ENERGY_HPP_
#define BDKIN_ENERGY_HPP_

#include "bdkin/ladder.hpp"
#include "bdkin/series.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

/// Production terms at a boundary configuration (some z_l = 0 with a
/// nonzero partner) are -inf analytically; they are clipped to this
/// sentinel and flagged in AvailabilityReport.
inline constexpr Real kProductionSentinel = -1e300;

/// Free energy A(z) = sum_l z_l ln(z_l / (q_l N)) with N = sum_l z_l,
/// 0 ln 0 = 0 and A(0) = 0. Evaluated as
///   sum_l z_l (ln z_l + a_l) - N ln N
/// so that steep ladders never materialize q_l.
Real availability(const Array& z, const EnergyLadder& ladder);

/// Shifted free energy A~(z) = sum_l z_l ln(z_l / (qtilde_l N))
///                           = A(z) - mass(z) * ln R,
/// computed directly from ln qtilde_l for numerical stability.
Real availability_shifted(const Array& z, const EnergyLadder& ladder);

/// Relative free energy against an arbitrary positive weight sequence p:
/// sum_l z_l ln(z_l / (p_l N)). p must have at least as many entries as z.
Real generic_availability(const Array& z, const Array& p);

/// Time derivative of A along the modified dynamics:
///   dA/dt = sum_{l<m} Gamma_l (c_l - w_l)(ln w_l - ln c_l) <= 0,
/// with c_l = z_1 z_l and w_l = N (q_l/q_{l+1}) z_{l+1}. Terms with exactly
/// one of c_l, w_l zero are -inf and are clipped to kProductionSentinel.
Real availability_production(const Array& z, const EnergyLadder& ladder,
                             const KineticCoefficients& kin);

/// Entropy-dissipation lower bound sum_l Gamma_l (c_l - w_l)^2 / max(c_l, w_l)
/// on -dA/dt, using (c - w)(ln c - ln w) >= (c - w)^2 / max(c, w).
Real dissipation_lower_bound(const Array& z, const EnergyLadder& ladder,
                             const KineticCoefficients& kin);

/// Convexity bound A~(z) >= rho ln mu - N ln f~(mu) for any mu in (0, 1)
/// with f~(mu) finite. The certified upper bound of f~ is used so the
/// returned value never exceeds the analytic bound. Throws
/// std::domain_error when f~(mu) cannot be certified finite.
Real jensen_lower_bound(const Array& z, const EnergyLadder& ladder, Real mu,
                        const SeriesOptions& opts = {});

/// Lyapunov functional of the classic model:
/// L(z) = sum_l z_l (ln(z_l / Q_l) - 1), with 0 ln 0 = 0.
Real standard_lyapunov(const Array& z, const StandardModelParams& sm);

struct AvailabilityReport {
  Real A = 0.0;
  Real A_tilde = 0.0;
  Real production = 0.0;
  Real dissipation_lb = 0.0;
  bool boundary_flag = false; // some production term was clipped
};

AvailabilityReport availability_report(const Array& z, const EnergyLadder& ladder,
                                       const KineticCoefficients& kin);

} // namespace bdkin

#endif // BDKIN_ENERGY_HPP_
