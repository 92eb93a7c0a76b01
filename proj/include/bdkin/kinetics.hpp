#ifndef BDKIN_KINETICS_HPP_
#define BDKIN_KINETICS_HPP_

#include "bdkin/ladder.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

/// Fluxes of the modified (thermodynamically consistent) system:
///   J_l = Gamma_l * (z_1 z_l - N(z) * (q_l/q_{l+1}) * z_{l+1}),  1 <= l <= m-1,
/// where N(z) = sum_l z_l. Returns J_1..J_{m-1} (entry i holds J_{i+1}).
Array flux_modified(const Array& z, const EnergyLadder& ladder,
                    const KineticCoefficients& kin);

/// Monomer production flux J_0 = -sum_{l=1}^{m-1} J_l.
Real flux_zero(const Array& flux);

/// Classic fluxes J_l = c_l z_1 z_l - d_{l+1} z_{l+1}, 1 <= l <= m-1.
Array flux_standard(const Array& z, const StandardModelParams& sm);

/// Mass-conserving truncation of the modified system:
///   zdot_l = J_{l-1} - J_l (2 <= l <= m-1),  zdot_m = J_{m-1},
///   zdot_1 = -J_1 - sum_{l=1}^{m-1} J_l.
/// sum_l l * zdot_l telescopes to zero exactly.
Array rhs_truncated(const Array& z, const EnergyLadder& ladder,
                    const KineticCoefficients& kin);

/// Same closure for the classic fluxes.
Array rhs_standard(const Array& z, const StandardModelParams& sm);

/// Tail-sum form of the truncated system. With zeta_l = sum_{n>=l} z_n and
/// zeta_{m+1} = zeta_{m+2} = 0,
///   J_l(zeta) = Gamma_l * ((zeta_1 - zeta_2)(zeta_l - zeta_{l+1})
///               - zeta_1 (q_l/q_{l+1})(zeta_{l+1} - zeta_{l+2})),
///   zetadot_1 = -sum_{l=1}^{m-1} J_l,  zetadot_l = J_{l-1} (l >= 2).
Array rhs_zeta(const Array& zeta, const EnergyLadder& ladder,
               const KineticCoefficients& kin);

/// Consistency report for the structural requirements on a model: the ratio
/// q_l/q_{l+1} must approach the declared R and Gamma_l/l must decay.
struct AssumptionReport {
  Real declared_R = 0.0;
  Real ratio_at_horizon = 0.0;    // q_l/q_{l+1} evaluated at l = horizon
  Real ratio_extrapolated = 0.0;  // Aitken-extrapolated limit of the ratio
  Real ratio_rel_deviation = 0.0; // |extrapolated - R| / R
  bool ratio_ok = false;
  Real gamma_over_l_first = 0.0;
  Real gamma_over_l_last = 0.0;
  bool gamma_decays = false;
  bool pass = false;
};

/// Checks the declared ratio limit by sampling q_l/q_{l+1} at horizon/4,
/// horizon/2 and horizon and extrapolating in log space, and checks that
/// Gamma_l / l is nonincreasing and shrinking over the horizon.
AssumptionReport validate_assumptions(const EnergyLadder& ladder,
                                      const KineticCoefficients& kin,
                                      Index horizon, Real ratio_tol = 1e-2);

} // namespace bdkin

#endif // BDKIN_KINETICS_HPP_
