#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"

#include "bdkin/energy.hpp"
#include "bdkin/longtime.hpp"
#include "bdkin/state.hpp"

using namespace bdkin;

namespace {

constexpr double kBorderlineDelta = 0.0720397143462391008378;

// Independent evaluation of the minimal-majorant operator: at a fixed point
// every entry equals one of its update candidates (the slack bound xi+,
// the next entry, the difference-ratio combination, or the tail closure at
// the window edge). Enumerating which candidate is active at each position
// turns the fixed-point condition into a small linear system; the least
// fixed point is the pointwise minimum over all self-consistent solutions.
struct OracleResult {
  Array sigma; // entries l0..L only
  bool found = false;
};

OracleResult hat_oracle(const MajorantSpace& space, const Array& xi,
                        TailMode mode) {
  const Index L = xi.size();
  const Index l0 = space.l0;
  const Index n = L - l0 + 1;
  const double eta0 = space.eta0();
  const double scale = std::max(1.0, xi.abs().maxCoeff());
  const double tol = 1e-9 * scale;

  auto base = [&](Index l) { return std::max(xi[l - 1], 0.0); };
  auto tail_weight = [&]() {
    const double etaL = space.eta_at(L);
    return mode == TailMode::geometric ? 1.0 + etaL - eta0 : 1.0 + etaL;
  };

  // Candidate codes: 0 = base, 1 = next entry (tail closure at l = L),
  // 2 = difference-ratio (only for l0 < l < L).
  auto kind_count = [&](Index l) { return (l == l0 || l == L) ? 2 : 3; };

  OracleResult out;
  out.sigma = Array::Constant(n, std::numeric_limits<double>::infinity());

  std::vector<int> pattern(n, 0);
  while (true) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (Index l = l0; l <= L; ++l) {
      const Index r = l - l0;
      const int p = pattern[r];
      if (p == 0) {
        A(r, r) = 1.0;
        b(r) = base(l);
      } else if (l == L) {
        A(r, r) = tail_weight();
        A(r, r - 1) = -space.eta_at(L);
      } else if (p == 1) {
        A(r, r) = 1.0;
        A(r, r + 1) = -1.0;
      } else {
        const double e = space.eta_at(l);
        A(r, r) = 1.0 + e;
        A(r, r + 1) = -1.0;
        A(r, r - 1) = -e;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
      Eigen::VectorXd x = lu.solve(b);
      bool consistent = x.allFinite();
      for (Index l = l0; consistent && l <= L; ++l) {
        const Index r = l - l0;
        double cand = base(l);
        if (l == L) {
          cand = std::max(cand, space.eta_at(L) * x(r - 1) / tail_weight());
        } else {
          cand = std::max(cand, x(r + 1));
          if (l > l0) {
            const double e = space.eta_at(l);
            cand = std::max(cand, (x(r + 1) + e * x(r - 1)) / (1.0 + e));
          }
        }
        if (std::abs(x(r) - cand) > tol || x(r) < -tol) consistent = false;
      }
      if (consistent) {
        out.found = true;
        for (Index r = 0; r < n; ++r)
          out.sigma[r] = std::min(out.sigma[r], x(r));
      }
    }
    // Advance the mixed-radix pattern counter.
    Index pos = 0;
    while (pos < n) {
      if (++pattern[pos] < kind_count(l0 + pos)) break;
      pattern[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return out;
}

} // namespace

TEST_CASE("majorant space parameters are validated") {
  CHECK_THROWS_AS(MajorantSpace::constant(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MajorantSpace::constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MajorantSpace::constant(0.5, 0), std::invalid_argument);

  MajorantSpace s;
  s.l0 = 2;
  s.eta = Array(2);
  s.eta << 0.9, 0.3;
  s.validate();
  CHECK(s.eta_at(1) == 0.9);
  CHECK(s.eta_at(2) == 0.3);
  CHECK(s.eta_at(17) == 0.3); // repeats the last entry
  CHECK_THROWS_AS(s.eta_at(0), std::invalid_argument);
  CHECK(s.eta0() == 0.3); // the sup starts at l0
}

TEST_CASE("minimal majorant matches exhaustive candidate enumeration") {
  std::mt19937 rng(8080u);
  std::uniform_real_distribution<double> ueta(0.1, 0.9);
  std::uniform_real_distribution<double> uxi(-0.3, 1.0);
  std::uniform_int_distribution<int> uwin(3, 8);
  std::uniform_int_distribution<int> ul0(1, 2);
  std::uniform_int_distribution<int> uesz(1, 4);

  for (int rep = 0; rep < 60; ++rep) {
    const Index L = uwin(rng);
    Index l0 = ul0(rng);
    if (L < l0 + 2) l0 = 1;
    MajorantSpace space;
    space.l0 = l0;
    space.eta = Array(uesz(rng));
    for (Index i = 0; i < space.eta.size(); ++i) space.eta[i] = ueta(rng);
    Array xi(L);
    for (Index i = 0; i < L; ++i) xi[i] = uxi(rng);

    for (TailMode mode : {TailMode::geometric, TailMode::zero}) {
      Array sigma = hat_operator(space, xi, mode);
      OracleResult oracle = hat_oracle(space, xi, mode);
      REQUIRE(oracle.found);
      for (Index l = l0; l <= L; ++l)
        CHECK(sigma[l - 1] ==
              doctest::Approx(oracle.sigma[l - l0]).epsilon(1e-8));
      // Entries below l0 copy the first constrained entry.
      for (Index l = 1; l < l0; ++l) CHECK(sigma[l - 1] == sigma[l0 - 1]);
      // Cone membership and domination of the data.
      for (Index l = l0; l < L; ++l) {
        CHECK(sigma[l - 1] >= sigma[l] - 1e-12);
        if (l > l0)
          CHECK(sigma[l - 1] - sigma[l] >=
                space.eta_at(l) * (sigma[l - 2] - sigma[l - 1]) - 1e-9);
      }
      for (Index l = l0; l <= L; ++l)
        CHECK(sigma[l - 1] >= std::max(xi[l - 1], 0.0) - 1e-12);
    }
  }
}

TEST_CASE("minimal majorant input validation") {
  MajorantSpace space = MajorantSpace::constant(0.5, 3);
  Array xi = Array::Ones(4); // needs at least l0 + 2 = 5 entries
  CHECK_THROWS_AS(hat_operator(space, xi), std::invalid_argument);
  Array bad = Array::Ones(6);
  bad[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(hat_operator(space, bad), std::invalid_argument);
}

TEST_CASE("point-mass majorant has the closed form") {
  MajorantSpace space = MajorantSpace::constant(0.5);
  DiracMajorant d = dirac_majorant(space, 3, 9);
  REQUIRE(d.sigma.size() == 9);
  for (Index l = 1; l <= 3; ++l) CHECK(d.sigma[l - 1] == 1.0);
  for (Index l = 4; l <= 9; ++l)
    CHECK(d.sigma[l - 1] == doctest::Approx(std::pow(0.5, l - 3)));
  CHECK(d.sup_norm == 1.0);
  CHECK(d.l1_bound == doctest::Approx(3.0 + 1.0));

  // The closed form is exactly the minimal majorant of the indicator.
  Array xi = Array::Zero(9);
  xi[2] = 1.0;
  Array sigma = hat_operator(space, xi, TailMode::geometric);
  CHECK((sigma - d.sigma).abs().maxCoeff() <= 1e-12);
  // The zero-tail variant may only be smaller.
  Array sz = hat_operator(space, xi, TailMode::zero);
  CHECK((sz <= sigma + 1e-15).all());

  CHECK_THROWS_AS(dirac_majorant(MajorantSpace::constant(0.5, 4), 3, 9),
                  std::invalid_argument);
  CHECK_THROWS_AS(dirac_majorant(space, 3, 0), std::invalid_argument);
}

TEST_CASE("layered majorant dominates the minimal one") {
  MajorantSpace space = MajorantSpace::constant(0.4);
  std::mt19937 rng(55u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    // Random nonincreasing nonnegative sequence.
    Array xi(8);
    double level = 1.0 + u(rng);
    for (Index i = 0; i < 8; ++i) {
      level -= 0.1 * u(rng);
      level = std::max(level, 0.0);
      xi[i] = level;
    }
    SummableMajorant sm = summable_majorant(space, xi);
    Array hat = hat_operator(space, xi, TailMode::geometric);
    CHECK((sm.sigma >= xi - 1e-13).all());
    CHECK((sm.sigma >= hat - 1e-9).all());
    CHECK(sm.sigma.sum() <= sm.l1_bound + 1e-12);
  }

  Array rising(3);
  rising << 0.1, 0.5, 0.2;
  CHECK_THROWS_AS(summable_majorant(space, rising), std::invalid_argument);
  Array negative(3);
  negative << 0.5, -0.1, 0.0;
  CHECK_THROWS_AS(summable_majorant(space, negative), std::invalid_argument);
}

TEST_CASE("weighted tail supremum on hand states") {
  Array zeta(4);
  zeta << 3.0, 2.0, 1.0, 0.5;
  Array sigma(4);
  sigma << 1.0, 1.0, 0.5, 0.25;
  CHECK(h_sigma(zeta, sigma, 1, 3.0) == doctest::Approx(3.0));
  CHECK(h_sigma(zeta, sigma, 2, 3.0) == doctest::Approx(3.0));
  // A heavier tail dominates the mass anchor.
  zeta[3] = 2.0;
  CHECK(h_sigma(zeta, sigma, 1, 3.0) == doctest::Approx(8.0));

  Array flat = Array::Ones(4);
  CHECK_THROWS_AS(h_sigma(zeta, Array::Zero(4), 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(h_sigma(zeta, flat, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(h_sigma(zeta, flat, 9, 1.0), std::invalid_argument);
}

TEST_CASE("weighted tail supremum decays along a relaxing run") {
  const EnergyLadder ladder = EnergyLadder::geometric(std::log(2.0));
  const KineticCoefficients kin = KineticCoefficients::constant();
  const Index m = 48;
  // All mass starts in 12-clusters, so the tail ratio starts far above the
  // mass anchor and must come down as the run approaches equilibrium.
  Array z0 = Array::Zero(m);
  z0[11] = 1.0 / 12.0;
  IntegratorConfig cfg;
  cfg.t_end = 100.0;
  cfg.record_every = 2.0;
  Trajectory traj = simulate(z0, ladder, kin, cfg);
  REQUIRE(traj.status == RunStatus::ok);

  MajorantSpace space = MajorantSpace::constant(0.5);
  for (Index anchor : {4, 8, 16}) {
    DiracMajorant d = dirac_majorant(space, anchor, m);
    double prev = std::numeric_limits<double>::infinity();
    for (const Snapshot& s : traj.snapshots) {
      const double h = h_sigma(to_zeta(s.z), d.sigma, 1, traj.rho0);
      CHECK(h <= prev + 1e-8);
      prev = h;
    }
    // The run ends pinned at the mass anchor rho0 / sigma_1 = 1.
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("window certificate for the free-atom ratio") {
  const EnergyLadder ladder = EnergyLadder::geometric(std::log(2.0));
  const KineticCoefficients kin = KineticCoefficients::constant();
  IntegratorConfig cfg;
  cfg.t_end = 100.0;
  cfg.record_every = 5.0;
  Trajectory traj = simulate(monodisperse(1.0, 48), ladder, kin, cfg);
  REQUIRE(traj.status == RunStatus::ok);

  SUBCASE("holds at R' between the terminal ratio and R") {
    MassCertificate cert = mass_certificate(traj, ladder, 50.0, 100.0, 1.5);
    CHECK(cert.certified);
    CHECK(cert.reason.empty());
    CHECK(cert.samples == 11);
    CHECK(cert.lambda_sup == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }
  SUBCASE("fails when R' undercuts the ratio") {
    MassCertificate cert = mass_certificate(traj, ladder, 50.0, 100.0, 0.5);
    CHECK_FALSE(cert.certified);
    CHECK(cert.reason.find("exceeds") != std::string::npos);
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(mass_certificate(traj, ladder, 0.0, 100.0, 2.0),
                    std::invalid_argument); // R' must be < R
    CHECK_THROWS_AS(mass_certificate(traj, ladder, 80.0, 20.0, 1.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(mass_certificate(traj, ladder, 51.0, 54.0, 1.5),
                    std::invalid_argument); // no samples in the window
  }
  SUBCASE("undefined ratio is an honest failure") {
    IntegratorConfig zc;
    zc.t_end = 0.0;
    Trajectory empty = simulate(Array::Zero(4), ladder, kin, zc);
    MassCertificate cert = mass_certificate(empty, ladder, 0.0, 0.0, 0.5);
    CHECK_FALSE(cert.certified);
    CHECK(cert.reason.find("undefined") != std::string::npos);
  }
}

TEST_CASE("regime classification covers the case table") {
  RegimeBudget budget;
  budget.truncation = 48;
  budget.t_end = 100.0;
  budget.record_every = 2.0;
  const KineticCoefficients kin = KineticCoefficients::constant();

  SUBCASE("decaying ladder collapses") {
    RegimeReport rep =
        regime_classify(EnergyLadder::example1(2.0, 2.0), kin, 1.0, budget);
    CHECK(rep.label == CaseLabel::NEQ);
    CHECK(rep.predicted_limit == PredictedLimit::zero_state);
    CHECK(rep.simulated);
    CHECK(std::isnan(rep.mu_bar));
    CHECK(std::isfinite(rep.A_tilde_terminal));
    CHECK(case_label_name(rep.label) == "NEQ");
    CHECK(predicted_limit_name(rep.predicted_limit) == "zero_state");
  }
  SUBCASE("supported ratio above one relaxes to equilibrium") {
    RegimeReport rep =
        regime_classify(EnergyLadder::geometric(std::log(2.0)), kin, 1.0, budget);
    CHECK(rep.label == CaseLabel::EQ2);
    CHECK(rep.predicted_limit == PredictedLimit::equilibrium);
    CHECK(rep.mu_bar == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(rep.N_bar == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(rep.R_prime == doctest::Approx(1.5));
    CHECK(rep.mass_certified);
    CHECK(rep.A_tilde_terminal ==
          doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-6));
    CHECK(rep.lambda_sup_window == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
    CHECK_FALSE(rep.truncation_affected);
  }
  SUBCASE("inverted ratio still reaches equilibrium when A~ settles below 0") {
    // The inverted ladder relaxes an order of magnitude more slowly than the
    // R > 1 case, so it gets a longer horizon of its own.
    RegimeBudget slow = budget;
    slow.truncation = 96;
    slow.t_end = 800.0;
    slow.record_every = 8.0;
    RegimeReport rep = regime_classify(EnergyLadder::geometric(-std::log(2.0)),
                                       kin, 1.0, slow);
    CHECK(rep.label == CaseLabel::EQ3b);
    CHECK(rep.predicted_limit == PredictedLimit::equilibrium);
    CHECK(rep.mu_bar == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(rep.N_bar == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(rep.A_tilde_terminal ==
          doctest::Approx(std::log(2.0 / 3.0)).epsilon(1e-6));
    // R' = (q~_1 mu_bar + R)/2 = (1/3 + 1/2)/2
    CHECK(rep.R_prime == doctest::Approx(5.0 / 12.0).epsilon(1e-9));
    CHECK(rep.mass_certified);
    CHECK(std::isfinite(rep.a_tilde_tol));
  }
  SUBCASE("borderline ladder stays open and skips the simulation") {
    RegimeReport rep = regime_classify(
        EnergyLadder::example1(kBorderlineDelta, 2.0), kin, 1.0, budget);
    CHECK(rep.label == CaseLabel::EQ1);
    CHECK(rep.predicted_limit == PredictedLimit::open);
    CHECK_FALSE(rep.simulated);
    CHECK(std::isnan(rep.A_tilde_terminal));
    CHECK(rep.notes.find("open") != std::string::npos);
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(regime_classify(EnergyLadder::geometric(0.1), kin, 0.0),
                    std::invalid_argument);
    RegimeBudget bad;
    bad.truncation = 1;
    CHECK_THROWS_AS(
        regime_classify(EnergyLadder::geometric(0.1), kin, 1.0, bad),
        std::invalid_argument);
  }
}

TEST_CASE("tail-sum derivative equals the incoming flux at snapshots") {
  const EnergyLadder ladder = EnergyLadder::example1(2.0, 2.0);
  const KineticCoefficients kin = KineticCoefficients::constant();
  IntegratorConfig cfg;
  cfg.t_end = 5.0;
  cfg.record_every = 1.0;
  Trajectory traj = simulate(monodisperse(1.0, 24), ladder, kin, cfg);
  REQUIRE(traj.status == RunStatus::ok);
  for (const Snapshot& s : traj.snapshots) {
    Array dzeta = to_zeta(rhs_truncated(s.z, ladder, kin));
    REQUIRE(s.J.size() == s.z.size() - 1);
    for (Index l = 2; l <= s.z.size(); ++l)
      CHECK(dzeta[l - 1] == doctest::Approx(s.J[l - 2]).epsilon(1e-10));
  }
}
