#include "bdkin/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "bdkin/state.hpp"

namespace bdkin {

namespace {

/// Kahan-accumulated sum of f(l) over l = 1..m, ascending.
template <class F>
Real sum_terms(Index m, F&& f) {
  Real s = 0.0, c = 0.0;
  for (Index l = 1; l <= m; ++l) {
    const Real y = f(l) - c;
    const Real t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

struct ProductionAccum {
  Real value = 0.0;
  bool boundary = false;
};

ProductionAccum production_terms(const Array& z, const EnergyLadder& ladder,
                                 const KineticCoefficients& kin) {
  require_valid_state(z);
  const Index m = z.size();
  const Real N = droplet_count(z);
  const Real z1 = z[0];
  ProductionAccum acc;
  Real s = 0.0, comp = 0.0;
  for (Index l = 1; l < m; ++l) {
    const Real c = z1 * z[l - 1];
    const Real w = N * ladder.q_ratio(l) * z[l];
    Real term;
    if (c == w) {
      term = 0.0; // includes c = w = 0
    } else if (c == 0.0 || w == 0.0) {
      acc.boundary = true;
      acc.value = kProductionSentinel;
      return acc;
    } else {
      term = kin.gamma(l) * (c - w) * (std::log(w) - std::log(c));
    }
    const Real y = term - comp;
    const Real t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  acc.value = s;
  return acc;
}

} // namespace

Real availability(const Array& z, const EnergyLadder& ladder) {
  require_valid_state(z);
  const Real N = droplet_count(z);
  if (N == 0.0) return 0.0;
  const Real lnN = std::log(N);
  return sum_terms(z.size(), [&](Index l) {
    const Real zl = z[l - 1];
    if (zl == 0.0) return 0.0;
    return zl * (std::log(zl) + ladder.a(l) - lnN);
  });
}

Real availability_shifted(const Array& z, const EnergyLadder& ladder) {
  require_valid_state(z);
  const Real N = droplet_count(z);
  if (N == 0.0) return 0.0;
  const Real lnN = std::log(N);
  return sum_terms(z.size(), [&](Index l) {
    const Real zl = z[l - 1];
    if (zl == 0.0) return 0.0;
    return zl * (std::log(zl) - ladder.log_q_tilde(l) - lnN);
  });
}

Real generic_availability(const Array& z, const Array& p) {
  require_valid_state(z);
  if (p.size() < z.size())
    throw std::invalid_argument("weight sequence shorter than state");
  for (Index i = 0; i < z.size(); ++i)
    if (!(p[i] > 0.0) || !std::isfinite(p[i]))
      throw std::invalid_argument("weights must be positive and finite");
  const Real N = droplet_count(z);
  if (N == 0.0) return 0.0;
  const Real lnN = std::log(N);
  return sum_terms(z.size(), [&](Index l) {
    const Real zl = z[l - 1];
    if (zl == 0.0) return 0.0;
    return zl * (std::log(zl) - std::log(p[l - 1]) - lnN);
  });
}

Real availability_production(const Array& z, const EnergyLadder& ladder,
                             const KineticCoefficients& kin) {
  return production_terms(z, ladder, kin).value;
}

Real dissipation_lower_bound(const Array& z, const EnergyLadder& ladder,
                             const KineticCoefficients& kin) {
  require_valid_state(z);
  const Index m = z.size();
  const Real N = droplet_count(z);
  const Real z1 = z[0];
  return sum_terms(m - 1, [&](Index l) {
    const Real c = z1 * z[l - 1];
    const Real w = N * ladder.q_ratio(l) * z[l];
    const Real hi = std::max(c, w);
    if (hi == 0.0) return 0.0;
    const Real diff = c - w;
    return kin.gamma(l) * diff * diff / hi;
  });
}

Real jensen_lower_bound(const Array& z, const EnergyLadder& ladder, Real mu,
                        const SeriesOptions& opts) {
  require_valid_state(z);
  if (!(mu > 0.0) || !(mu < 1.0))
    throw std::invalid_argument("jensen bound needs mu in (0, 1)");
  const SeriesValue f = f_tilde(ladder, mu, opts);
  if (!f.converged())
    throw std::domain_error("f~(mu) could not be certified finite");
  const Real rho = mass(z);
  const Real N = droplet_count(z);
  if (N == 0.0) return 0.0;
  return rho * std::log(mu) - N * std::log(f.upper());
}

Real standard_lyapunov(const Array& z, const StandardModelParams& sm) {
  require_valid_state(z);
  sm.validate();
  const Index m = z.size();
  // ln Q_l built incrementally to keep the evaluation O(m).
  Real logQ = 0.0;
  Real s = 0.0, comp = 0.0;
  for (Index l = 1; l <= m; ++l) {
    if (l > 1) logQ += std::log(sm.c(l - 1)) - std::log(sm.d(l));
    const Real zl = z[l - 1];
    const Real term = (zl == 0.0) ? 0.0 : zl * (std::log(zl) - logQ - 1.0);
    const Real y = term - comp;
    const Real t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

AvailabilityReport availability_report(const Array& z, const EnergyLadder& ladder,
                                       const KineticCoefficients& kin) {
  AvailabilityReport rep;
  rep.A = availability(z, ladder);
  rep.A_tilde = availability_shifted(z, ladder);
  const ProductionAccum prod = production_terms(z, ladder, kin);
  rep.production = prod.value;
  rep.boundary_flag = prod.boundary;
  rep.dissipation_lb = dissipation_lower_bound(z, ladder, kin);
  return rep;
}

} // namespace bdkin
