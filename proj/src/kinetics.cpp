#include "bdkin/kinetics.hpp"

#include <cmath>
#include <stdexcept>

#include "bdkin/state.hpp"

namespace bdkin {

Array flux_modified(const Array& z, const EnergyLadder& ladder,
                    const KineticCoefficients& kin) {
  // Finite only: Runge-Kutta stages may dip below zero and the flux is a
  // polynomial in z, so negative entries are acceptable here.
  require_finite_state(z);
  const Index m = z.size();
  const Real N = droplet_count(z);
  const Real z1 = z[0];
  Array J(m - 1);
  for (Index l = 1; l < m; ++l)
    J[l - 1] = kin.gamma(l) * (z1 * z[l - 1] - N * ladder.q_ratio(l) * z[l]);
  return J;
}

Real flux_zero(const Array& flux) { return -kahan_sum(flux); }

Array flux_standard(const Array& z, const StandardModelParams& sm) {
  require_finite_state(z);
  sm.validate();
  const Index m = z.size();
  const Real z1 = z[0];
  Array J(m - 1);
  for (Index l = 1; l < m; ++l)
    J[l - 1] = sm.c(l) * z1 * z[l - 1] - sm.d(l + 1) * z[l];
  return J;
}

namespace {

Array close_rhs(const Array& J) {
  const Index m = J.size() + 1;
  Array dz(m);
  // zdot_1 = -J_1 - sum J_l; the extra -J_1 balances the monomer consumed
  // by the l = 1 reaction itself.
  dz[0] = -J[0] - kahan_sum(J);
  for (Index l = 2; l < m; ++l) dz[l - 1] = J[l - 2] - J[l - 1];
  dz[m - 1] = J[m - 2];
  return dz;
}

} // namespace

Array rhs_truncated(const Array& z, const EnergyLadder& ladder,
                    const KineticCoefficients& kin) {
  return close_rhs(flux_modified(z, ladder, kin));
}

Array rhs_standard(const Array& z, const StandardModelParams& sm) {
  return close_rhs(flux_standard(z, sm));
}

Array rhs_zeta(const Array& zeta, const EnergyLadder& ladder,
               const KineticCoefficients& kin) {
  const Index m = zeta.size();
  if (m < 2) throw std::invalid_argument("zeta needs at least two entries");
  auto at = [&](Index l) -> Real { return l <= m ? zeta[l - 1] : 0.0; };
  const Real z1 = at(1) - at(2);
  Array J(m - 1);
  for (Index l = 1; l < m; ++l)
    J[l - 1] = kin.gamma(l) *
               (z1 * (at(l) - at(l + 1)) -
                at(1) * ladder.q_ratio(l) * (at(l + 1) - at(l + 2)));
  Array dzeta(m);
  dzeta[0] = -kahan_sum(J);
  for (Index l = 2; l <= m; ++l) dzeta[l - 1] = J[l - 2];
  return dzeta;
}

AssumptionReport validate_assumptions(const EnergyLadder& ladder,
                                      const KineticCoefficients& kin,
                                      Index horizon, Real ratio_tol) {
  if (horizon < 8) throw std::invalid_argument("horizon must be >= 8");
  const Real R = ladder.R();
  if (!(R > 0.0) || !std::isfinite(R))
    throw std::invalid_argument("declared R must be positive and finite");

  AssumptionReport rep;
  rep.declared_R = R;
  rep.ratio_at_horizon = ladder.q_ratio(horizon);

  // The raw ratio at the horizon can still carry a slowly decaying
  // correction (example1 approaches R only like exp(c*l^(-1/3))), so the
  // limit is estimated by Aitken extrapolation of ln(q_l/q_{l+1}) sampled
  // at horizon/4, horizon/2 and horizon.
  const Real s0 = ladder.a(horizon / 4 + 1) - ladder.a(horizon / 4);
  const Real s1 = ladder.a(horizon / 2 + 1) - ladder.a(horizon / 2);
  const Real s2 = ladder.a(horizon + 1) - ladder.a(horizon);
  const Real denom = (s2 - s1) - (s1 - s0);
  Real log_limit = s2;
  if (std::abs(denom) > 1e-14 * (std::abs(s2) + 1.0))
    log_limit = s2 - (s2 - s1) * (s2 - s1) / denom;
  rep.ratio_extrapolated = std::exp(log_limit);
  rep.ratio_rel_deviation = std::abs(rep.ratio_extrapolated - R) / R;
  rep.ratio_ok = rep.ratio_rel_deviation <= ratio_tol;

  rep.gamma_over_l_first = kin.gamma(1) / 1.0;
  rep.gamma_over_l_last = kin.gamma(horizon) / static_cast<Real>(horizon);
  bool monotone = true;
  Real prev = rep.gamma_over_l_first;
  for (Index l = 2; l <= horizon; ++l) {
    const Real cur = kin.gamma(l) / static_cast<Real>(l);
    if (cur > prev * (1.0 + 1e-12)) {
      monotone = false;
      break;
    }
    prev = cur;
  }
  rep.gamma_decays = monotone && rep.gamma_over_l_last < rep.gamma_over_l_first;
  rep.pass = rep.ratio_ok && rep.gamma_decays;
  return rep;
}

} // namespace bdkin
