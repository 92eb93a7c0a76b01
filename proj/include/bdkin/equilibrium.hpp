#ifndef BDKIN_EQUILIBRIUM_HPP_
#define BDKIN_EQUILIBRIUM_HPP_

#include <optional>
#include <string>

#include "bdkin/ladder.hpp"
#include "bdkin/series.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

/// Static phase classification from the generating series at mu = 1.
/// A minimizer of A~ at fixed mass exists iff f~(1) > 1, or f~(1) = 1 with
/// g~(1) finite. Equality with 1 can never be certified numerically, so a
/// value within tol of 1 yields verdict inconclusive / branch undecided.
struct EqClassification {
  enum class Verdict { EQ, NEQ, inconclusive };
  enum class Branch {
    f_at_1_gt_1,
    f_eq_1_g_finite,   // never emitted numerically, kept for completeness
    f_lt_1,
    f_eq_1_g_infinite, // never emitted numerically
    undecided
  };
  Verdict verdict = Verdict::inconclusive;
  Branch branch = Branch::undecided;
  SeriesValue f_at_1;
  SeriesValue g_at_1;
  Real tol = 0.0;

  std::string verdict_name() const;
  std::string branch_name() const;
};

EqClassification classify(const EnergyLadder& ladder, Real tol = 1e-9,
                          const SeriesOptions& opts = {});

/// Equilibrium family z_l = N qtilde_l mu^l at the root f~(mu_bar) = 1,
/// scaled to the requested mass. States are generated lazily: z(l) works
/// for any l, truncated(m) materializes a finite window.
class EquilibriumSolution {
 public:
  EquilibriumSolution(EnergyLadder ladder, Real mu_bar, Real rho_bar,
                      Real g_at_mu);

  Real mu_bar() const { return mu_bar_; }
  Real N_bar() const { return N_bar_; }
  Real rho_bar() const { return rho_bar_; }
  Real g_at_mu() const { return g_mu_; }
  /// Optimal shifted free energy A~(z_bar) = rho_bar * ln mu_bar.
  Real a_tilde() const;
  Real z(Index l) const;
  Array truncated(Index m) const;
  const EnergyLadder& ladder() const { return ladder_; }

 private:
  EnergyLadder ladder_;
  Real mu_bar_;
  Real rho_bar_;
  Real g_mu_;
  Real N_bar_;
};

/// Solves f~(mu_bar) = 1 by bisection on certified comparisons followed by
/// secant refinement to |f~(mu_bar) - 1| <= root_tol. Requires
/// classify(ladder) = EQ; throws std::domain_error otherwise.
EquilibriumSolution solve_equilibrium(const EnergyLadder& ladder, Real rho_bar,
                                      Real root_tol = 1e-12,
                                      const SeriesOptions& opts = {});

/// Minimum of A~ over states of mass rho_bar: attained with value
/// rho_bar * ln(mu_bar) in the EQ phase, an unattained infimum of 0 in the
/// NEQ phase. Throws std::domain_error when classification is inconclusive.
struct OptimumValue {
  bool attained = false;
  Real value = 0.0;
  std::optional<EquilibriumSolution> solution;
};

OptimumValue optimum_value(const EnergyLadder& ladder, Real rho_bar);

/// One element of the minimizing sequence in the NEQ phase: weights
/// q^(m)_l = max(qtilde_l, pi_m) with pi_m = sup_{l>m} qtilde_l, scaled to
/// mass rho_bar at the root mu_m of sum_l q^(m)_l mu^l = 1. The root is
/// tracked in s = 1 - mu so values arbitrarily close to 1 stay accurate;
/// value_m = rho_bar * ln(mu_m) is computed from s via log1p.
class MinimizingElement {
 public:
  MinimizingElement(EnergyLadder ladder, Index m, Real rho_bar, Real s,
                    Real pi_m, Real g_value);

  Index m() const { return m_; }
  Real mu() const { return 1.0 - s_; }
  Real one_minus_mu() const { return s_; }
  Real pi() const { return pi_m_; }
  Real value() const; // rho_bar * ln(mu_m), accurate via log1p(-s)
  Real N() const { return N_; }
  Real weight(Index l) const; // q^(m)_l
  Real z(Index l) const;
  Array weights_truncated(Index m_out) const;
  Array truncated(Index m_out) const;

 private:
  EnergyLadder ladder_;
  Index m_;
  Real rho_bar_;
  Real s_; // 1 - mu_m
  Real pi_m_;
  Real N_;
};

MinimizingElement minimizing_sequence(const EnergyLadder& ladder, Real rho_bar,
                                      Index m);

/// Equilibria of the classic model: z_l = Q_l mu^l for 0 <= mu <= z_s with
/// mass rho(mu) = sum_l l Q_l mu^l; mu = z_s gives the saturation density.
/// mu > z_s throws std::domain_error (supersaturated).
class StandardEquilibrium {
 public:
  StandardEquilibrium(StandardModelParams sm, Real mu, Real rho);
  Real mu() const { return mu_; }
  Real rho() const { return rho_; }
  Real z(Index l) const;
  Array truncated(Index m) const;

 private:
  StandardModelParams sm_;
  Real mu_;
  Real rho_;
};

StandardEquilibrium standard_equilibrium(const StandardModelParams& sm, Real mu,
                                         const SeriesOptions& opts = {});

} // namespace bdkin

#endif // BDKIN_EQUILIBRIUM_HPP_
