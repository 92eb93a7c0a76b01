#include "bdkin/state.hpp"

#include <cmath>
#include <stdexcept>

namespace bdkin {

namespace {

// Neumaier's variant of compensated summation: unlike the plain Kahan
// update it keeps the correction when a term exceeds the running sum.
struct Compensated {
  Real s = 0.0, c = 0.0;
  void add(Real x) {
    const Real t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  Real total() const { return s + c; }
};

} // namespace

Real kahan_sum(const Array& v) {
  Compensated acc;
  for (Index i = 0; i < v.size(); ++i) acc.add(v[i]);
  return acc.total();
}

void require_valid_state(const Array& z) {
  if (z.size() < 2)
    throw std::invalid_argument("state needs at least two entries");
  for (Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i]) || z[i] < 0.0)
      throw std::invalid_argument("state entries must be finite and nonnegative");
  }
}

void require_finite_state(const Array& z) {
  if (z.size() < 2)
    throw std::invalid_argument("state needs at least two entries");
  for (Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i]))
      throw std::invalid_argument("state entries must be finite");
  }
}

Real mass(const Array& z, bool compensated) {
  if (compensated) {
    Compensated acc;
    for (Index i = 0; i < z.size(); ++i)
      acc.add(static_cast<Real>(i + 1) * z[i]);
    return acc.total();
  }
  Real s = 0.0;
  for (Index i = 0; i < z.size(); ++i) s += static_cast<Real>(i + 1) * z[i];
  return s;
}

Real droplet_count(const Array& z, Index from, bool compensated) {
  if (from < 1) throw std::out_of_range("droplet_count: from must be >= 1");
  if (from > z.size()) return 0.0;
  if (compensated) {
    Compensated acc;
    for (Index i = from - 1; i < z.size(); ++i) acc.add(z[i]);
    return acc.total();
  }
  Real s = 0.0;
  for (Index i = from - 1; i < z.size(); ++i) s += z[i];
  return s;
}

Array to_zeta(const Array& z) {
  const Index m = z.size();
  Array zeta(m);
  Real acc = 0.0, c = 0.0;
  for (Index i = m - 1; i >= 0; --i) {
    const Real y = z[i] - c;
    const Real t = acc + y;
    c = (t - acc) - y;
    acc = t;
    zeta[i] = acc;
  }
  return zeta;
}

Array from_zeta(const Array& zeta) {
  const Index m = zeta.size();
  if (m < 2) throw std::invalid_argument("zeta needs at least two entries");
  // Rounding from repeated partial sums may leave differences a hair below
  // zero; anything beyond this slack is a genuine ordering violation.
  const Real slack = 16.0 * std::numeric_limits<Real>::epsilon() *
                     (1.0 + std::abs(zeta[0]));
  Array z(m);
  for (Index i = 0; i < m; ++i) {
    const Real next = (i + 1 < m) ? zeta[i + 1] : 0.0;
    const Real d = zeta[i] - next;
    if (!std::isfinite(d) || d < -slack)
      throw std::invalid_argument("zeta must be nonincreasing with zeta_m >= 0");
    z[i] = d < 0.0 ? 0.0 : d;
  }
  return z;
}

Array monodisperse(Real rho0, Index m) {
  if (m < 2) throw std::invalid_argument("monodisperse: m must be >= 2");
  if (!(rho0 >= 0.0) || !std::isfinite(rho0))
    throw std::invalid_argument("monodisperse: rho0 must be finite and >= 0");
  Array z = Array::Zero(m);
  z[0] = rho0;
  return z;
}

} // namespace bdkin
