#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"

#include "bdkin/kinetics.hpp"
#include "bdkin/state.hpp"

using namespace bdkin;

namespace {

Array random_state(std::mt19937& rng, Index m, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  Array z(m);
  for (Index i = 0; i < m; ++i) z[i] = u(rng);
  return z;
}

} // namespace

TEST_CASE("modified fluxes on a worked three-cluster example") {
  const EnergyLadder ladder = EnergyLadder::geometric(std::log(2.0));
  const KineticCoefficients kin = KineticCoefficients::constant();
  Array z(3);
  z << 0.5, 0.25, 0.125;
  // N = 0.875, q_l/q_{l+1} = 2:
  //   J_1 = z1^2 - N*2*z2 = 0.25 - 0.4375, J_2 = z1 z2 - N*2*z3.
  Array J = flux_modified(z, ladder, kin);
  REQUIRE(J.size() == 2);
  CHECK(J[0] == doctest::Approx(-0.1875).epsilon(1e-15));
  CHECK(J[1] == doctest::Approx(-0.09375).epsilon(1e-15));
  CHECK(flux_zero(J) == doctest::Approx(0.28125).epsilon(1e-15));

  Array dz = rhs_truncated(z, ladder, kin);
  CHECK(dz[0] == doctest::Approx(0.46875).epsilon(1e-15));
  CHECK(dz[1] == doctest::Approx(-0.09375).epsilon(1e-15));
  CHECK(dz[2] == doctest::Approx(-0.09375).epsilon(1e-15));
}

TEST_CASE("truncated closure conserves mass exactly on random states") {
  const EnergyLadder ladder = EnergyLadder::example1(2.0, 2.0);
  const KineticCoefficients kin = KineticCoefficients::power(0.5);
  std::mt19937 rng(123u);
  for (int rep = 0; rep < 300; ++rep) {
    Array z = random_state(rng, 64, 2.0);
    Array dz = rhs_truncated(z, ladder, kin);
    const double rho = mass(z);
    CHECK(std::abs(mass(dz)) <= 1e-12 * rho * rho);
  }
}

TEST_CASE("standard closure conserves mass exactly on random states") {
  StandardModelParams sm;
  std::mt19937 rng(321u);
  for (int rep = 0; rep < 100; ++rep) {
    Array z = random_state(rng, 32);
    Array dz = rhs_standard(z, sm);
    const double rho = mass(z);
    CHECK(std::abs(mass(dz)) <= 1e-12 * rho * rho);
  }
}

TEST_CASE("standard fluxes on a worked example") {
  StandardModelParams sm; // alpha = gamma = 1/3, z_s = q = 1
  Array z(3);
  z << 0.5, 0.25, 0.125;
  Array J = flux_standard(z, sm);
  const double c2 = std::cbrt(2.0), c3 = std::cbrt(3.0);
  CHECK(J[0] == doctest::Approx(0.25 - (c2 + 1.0) * 0.25).epsilon(1e-15));
  CHECK(J[1] ==
        doctest::Approx(c2 * 0.125 - (c3 + 1.0) * 0.125).epsilon(1e-15));
}

TEST_CASE("tail-sum rhs is the tail-sum transform of the state rhs") {
  const EnergyLadder ladder = EnergyLadder::example2(std::log(2.0));
  const KineticCoefficients kin = KineticCoefficients::constant(0.7);
  std::mt19937 rng(99u);
  for (int rep = 0; rep < 200; ++rep) {
    const Index m = 2 + static_cast<Index>(rng() % 19);
    Array z = random_state(rng, m);
    Array dz = rhs_truncated(z, ladder, kin);
    Array dzeta = rhs_zeta(to_zeta(z), ladder, kin);
    REQUIRE(dzeta.size() == m);
    CHECK((dzeta - to_zeta(dz)).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("tail-sum rhs conserves the plain sum") {
  // sum_l zeta_l equals the mass, so the closure must keep it constant.
  const EnergyLadder ladder = EnergyLadder::geometric(-std::log(2.0));
  const KineticCoefficients kin = KineticCoefficients::power(0.25);
  std::mt19937 rng(5150u);
  for (int rep = 0; rep < 100; ++rep) {
    Array z = random_state(rng, 48);
    Array dzeta = rhs_zeta(to_zeta(z), ladder, kin);
    CHECK(std::abs(kahan_sum(dzeta)) <= 1e-12 * mass(z) * mass(z));
  }
}

TEST_CASE("fluxes accept transiently negative entries but not NaN") {
  const EnergyLadder ladder = EnergyLadder::geometric(std::log(2.0));
  const KineticCoefficients kin = KineticCoefficients::constant();
  Array z(3);
  z << 0.5, -1e-14, 0.125;
  CHECK_NOTHROW(flux_modified(z, ladder, kin));
  z[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(flux_modified(z, ladder, kin), std::invalid_argument);
}

TEST_CASE("kinetic coefficient families and their bounds") {
  CHECK(KineticCoefficients::constant(3.0).gamma(17) == 3.0);
  CHECK(KineticCoefficients::power(0.5).gamma(9) == doctest::Approx(3.0));
  CHECK_THROWS_AS(KineticCoefficients::power(1.0), std::invalid_argument);
  CHECK_THROWS_AS(KineticCoefficients::power(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(KineticCoefficients::constant().gamma(0), std::out_of_range);
}

TEST_CASE("assumption check passes the built-in families") {
  const KineticCoefficients kin = KineticCoefficients::constant();

  SUBCASE("slowly converging ratio needs the extrapolation") {
    // q_l/q_{l+1} = exp(-2 + 2((l+1)^(2/3) - l^(2/3))) approaches
    // exp(-2) only like exp(c l^(-1/3)); the raw horizon sample misses
    // the 1e-2 band that the extrapolated estimate meets.
    AssumptionReport rep =
        validate_assumptions(EnergyLadder::example1(2.0, 2.0), kin, 1000);
    CHECK(rep.pass);
    CHECK(rep.ratio_rel_deviation <= 1e-2);
    CHECK(rep.ratio_at_horizon > rep.declared_R);
    CHECK(rep.gamma_decays);
  }

  SUBCASE("exact geometric ratio is reproduced to rounding") {
    AssumptionReport rep = validate_assumptions(
        EnergyLadder::geometric(std::log(2.0)), kin, 100);
    CHECK(rep.pass);
    CHECK(rep.ratio_rel_deviation <= 1e-12);
    CHECK(rep.declared_R == doctest::Approx(2.0));
  }

  SUBCASE("linear ladder matches beyond the first rung") {
    AssumptionReport rep = validate_assumptions(
        EnergyLadder::example2(std::log(2.0)), kin, 100);
    CHECK(rep.pass);
  }
}

TEST_CASE("assumption check flags a ladder that misdeclares its ratio") {
  // Table with a strict geometric trend exp(-0.5) per rung, declared with
  // a different extension ratio: the sampled trend wins.
  std::vector<double> a;
  for (int l = 0; l < 40; ++l) a.push_back(0.5 * l);
  AssumptionReport rep = validate_assumptions(
      EnergyLadder::table(a, 2.0), KineticCoefficients::constant(), 16);
  CHECK_FALSE(rep.ratio_ok);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("per-size rate decay is visible even near the power cutoff") {
  // alpha = 0.9 gives gamma_l / l = l^(-0.1), a slow but genuine decay.
  AssumptionReport rep = validate_assumptions(
      EnergyLadder::geometric(0.1), KineticCoefficients::power(0.9), 64);
  CHECK(rep.gamma_over_l_last < rep.gamma_over_l_first);
  CHECK(rep.gamma_decays);
}
