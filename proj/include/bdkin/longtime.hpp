#ifndef BDKIN_LONGTIME_HPP_
#define BDKIN_LONGTIME_HPP_

#include <string>

#include "bdkin/equilibrium.hpp"
#include "bdkin/integrate.hpp"
#include "bdkin/ladder.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

/// Cone parameters for the majorant calculus: sequences sigma that are
/// nonnegative, nonincreasing, and satisfy the difference-ratio constraint
///   sigma_l - sigma_{l+1} >= eta_l * (sigma_{l-1} - sigma_l)   for l >= l0,
/// where eta0 = sup_{l >= l0} eta_l < 1. Entry i of eta holds eta_{i+1};
/// lookups beyond the stored window repeat the last entry.
struct MajorantSpace {
  Index l0 = 1;
  Array eta;

  static MajorantSpace constant(Real eta, Index l0 = 1);

  Real eta_at(Index l) const;
  Real eta0() const;
  void validate() const;
};

/// Tail convention for windowed majorant computations. zero treats the
/// sequence as absent beyond the window; geometric extends it by
/// sigma_{L+k} = sigma_L * eta0^k, which keeps the extension inside the cone.
enum class TailMode { zero, geometric };

/// Minimal majorant of xi within the cone: the least sequence sigma with
/// sigma >= xi on l >= l0 that satisfies the cone constraints. Computed as
/// the least fixed point of the monotone update
///   sigma_l <- max(xi_l [l >= l0], sigma_{l+1},
///                  (sigma_{l+1} + eta_l sigma_{l-1}) / (1 + eta_l))
/// iterated from below; entries below l0 equal sigma_{l0}. Window length
/// must be at least l0 + 2. Throws std::runtime_error when the iteration
/// fails to converge.
Array hat_operator(const MajorantSpace& space, const Array& xi,
                   TailMode tail_mode = TailMode::geometric);

/// Minimal majorant of the Dirac sequence at m for constant eta, in closed
/// form: 1 for l <= m, eta0^(l-m) beyond. sup norm 1; the l1 norm of the
/// full sequence is bounded by m + eta0 / (1 - eta0).
struct DiracMajorant {
  Array sigma;
  Real sup_norm = 1.0;
  Real l1_bound = 0.0;
};

DiracMajorant dirac_majorant(const MajorantSpace& space, Index m, Index window);

/// Layered majorant of a nonincreasing nonnegative xi: the telescoping sum
/// sum_k (xi_k - xi_{k+1}) * dirac_majorant(k). Dominates the minimal
/// majorant of xi and carries the certified l1 bound
/// xi_1 * eta0 / (1 - eta0) + sum_k xi_k.
struct SummableMajorant {
  Array sigma;
  Real l1_bound = 0.0;
};

SummableMajorant summable_majorant(const MajorantSpace& space, const Array& xi);

/// Weighted tail supremum H_sigma = max(rho0 / sigma_{l0},
/// sup_{l >= l0+1} zeta_l / sigma_l) over the stored window. Monotone in
/// time along trajectories whose free-atom fraction stays below the ratio
/// threshold; its decay is what pins the mass in the limit.
Real h_sigma(const Array& zeta, const Array& sigma, Index l0, Real rho0);

/// Window certificate for asymptotic mass conservation: checks that
/// lambda(t) = z_1/N stays at or below R' < R on every recorded sample in
/// [t0, t1]. Certification means the hypothesis of the conservation theorem
/// held on the window; the full-mass conclusion applies if it persists.
struct MassCertificate {
  bool certified = false;
  std::string reason;   // empty when certified
  Real lambda_sup = 0.0;
  Real R_prime = 0.0;
  Real t0 = 0.0;
  Real t1 = 0.0;
  Index samples = 0;
};

MassCertificate mass_certificate(const Trajectory& traj,
                                 const EnergyLadder& ladder, Real t0, Real t1,
                                 Real R_prime);

/// Long-time case labels. NEQ: no positive-mass equilibrium, weak-star
/// collapse to zero. EQ2 (f~(1) > 1, R > 1): strong convergence to the
/// full-mass equilibrium. EQ3 (f~(1) > 1, R <= 1) splits on the terminal
/// shifted availability: ~0 gives EQ3a (collapse), < 0 gives EQ3b
/// (full-mass equilibrium). EQ1 (f~(1) = 1) is open.
enum class CaseLabel { NEQ, EQ1, EQ2, EQ3a, EQ3b, undecided };
enum class PredictedLimit { zero_state, equilibrium, open, undecided };

std::string case_label_name(CaseLabel label);
std::string predicted_limit_name(PredictedLimit limit);

struct RegimeBudget {
  Index truncation = 128;
  Real t_end = 200.0;
  Real record_every = 2.0;
  RK45Options method{};
  Real tail_window_frac = 0.25; // trailing fraction used for trend + lambda
  Real eq1_tol = 1e-6;          // |f~(1) - 1| evidence threshold
};

struct RegimeReport {
  CaseLabel label = CaseLabel::undecided;
  PredictedLimit predicted_limit = PredictedLimit::undecided;
  EqClassification classification;
  Real R = 0.0;
  Real rho0 = 0.0;
  Real mu_bar = 0.0;            // NaN unless an equilibrium limit is predicted
  Real N_bar = 0.0;
  Real A_tilde_terminal = 0.0;  // NaN without a simulation
  Real A_tilde_trend = 0.0;     // change of A~ across the tail window
  Real a_tilde_tol = 0.0;       // threshold separating EQ3a from EQ3b
  Real lambda_sup_window = 0.0;
  Real R_prime = 0.0;           // NaN when no certificate was attempted
  bool mass_certified = false;
  Real terminal_max_flux = 0.0;
  bool truncation_affected = false;
  bool simulated = false;
  std::string notes;
};

/// Combines the static phase classification with a budgeted simulation from
/// monodisperse data and, where the case table predicts a full-mass limit,
/// a window mass certificate. EQ1 and undecided cases never claim a limit.
RegimeReport regime_classify(const EnergyLadder& ladder,
                             const KineticCoefficients& kin, Real rho0,
                             const RegimeBudget& budget = {});

} // namespace bdkin

#endif // BDKIN_LONGTIME_HPP_
