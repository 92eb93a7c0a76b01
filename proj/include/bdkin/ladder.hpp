#ifndef BDKIN_LADDER_HPP_
#define BDKIN_LADDER_HPP_

#include <string>
#include <vector>

#include "bdkin/types.hpp"

namespace bdkin {

enum class LadderKind { example1, example2, geometric, table };

/// Surface-energy ladder a_l with a_1 = 0, defining the cluster weights
/// q_l = exp(-a_l) and the rescaled weights qtilde_l = q_l * R^l where
/// R = lim q_l / q_{l+1}. All queries work on a_l directly; q_l is never
/// materialized, so steep ladders cannot overflow.
///
/// Built-in families:
///   example1(delta, gamma):  a_l = -delta*l + gamma*l^(2/3) for l >= 2
///   example2(beta):          a_l = beta*l for l >= 2
///   geometric(beta):         a_l = beta*(l-1); beta < 0 gives the
///                            inverted ladder with R < 1
///   table(a, R):             explicit prefix, extended beyond the table by
///                            a_{l+1} = a_l + ln R
class EnergyLadder {
 public:
  static EnergyLadder example1(Real delta, Real gamma);
  static EnergyLadder example2(Real beta);
  static EnergyLadder geometric(Real beta);
  static EnergyLadder table(std::vector<Real> a, Real R);

  LadderKind kind() const { return kind_; }
  std::string kind_name() const;

  /// Surface energy a_l, defined for all l >= 1.
  Real a(Index l) const;

  Real log_R() const { return log_R_; }
  Real R() const;

  /// ln q_l = -a_l.
  Real log_q(Index l) const { return -a(l); }

  /// ln qtilde_l = -a_l + l * ln R.
  Real log_q_tilde(Index l) const;

  /// Detachment-to-attachment weight ratio q_l / q_{l+1} = exp(a_{l+1} - a_l).
  Real q_ratio(Index l) const;

  /// ln(qtilde_{l+1} / qtilde_l) = ln R - (a_{l+1} - a_l).
  Real log_qtilde_ratio(Index l) const;

  /// Certified sup_{l>=L} ln(qtilde_{l+1}/qtilde_l). Used to build geometric
  /// tail bounds for the generating series.
  Real log_qtilde_ratio_sup(Index L) const;

  /// Certified inf_{l>=L} ln(qtilde_{l+1}/qtilde_l). Used to certify
  /// divergence (nondecreasing terms) at mu = 1.
  Real log_qtilde_ratio_inf(Index L) const;

  /// Certified upper bound on sum_{l>L} qtilde_l, possibly +inf.
  Real qtilde_tail_sum_bound(Index L) const;

  /// Certified upper bound on sum_{l>L} l * qtilde_l, possibly +inf.
  Real qtilde_weighted_tail_sum_bound(Index L) const;

  /// sup_{l>L} qtilde_l, exact for the built-in families.
  Real qtilde_tail_sup(Index L) const;

  /// Parameters, exposed for reports.
  Real param_delta() const { return p1_; }
  Real param_gamma() const { return p2_; }
  Real param_beta() const { return p1_; }
  const std::vector<Real>& table_values() const { return table_; }

 private:
  EnergyLadder(LadderKind kind, Real p1, Real p2, std::vector<Real> table,
               Real log_R);

  LadderKind kind_;
  Real p1_ = 0.0; // delta (example1) or beta (example2/geometric)
  Real p2_ = 0.0; // gamma (example1)
  std::vector<Real> table_;
  Real log_R_ = 0.0;
};

/// Rate prefactors Gamma_l for the modified system. The sublinearity
/// requirement Gamma_l / l -> 0 restricts the power family to alpha < 1.
class KineticCoefficients {
 public:
  static KineticCoefficients constant(Real value = 1.0);
  static KineticCoefficients power(Real alpha);

  Real gamma(Index l) const;
  bool is_power() const { return power_; }
  Real alpha() const { return alpha_; }
  Real value() const { return value_; }

 private:
  bool power_ = false;
  Real alpha_ = 0.0;
  Real value_ = 1.0;
};

/// Classic model coefficients: c_l = l^alpha and
/// d_l = c_l * (z_s + q / l^gamma), with partition values
/// Q_1 = 1, Q_{l+1} = prod_{n<=l} c_n / d_{n+1} kept in log form.
struct StandardModelParams {
  Real alpha = 1.0 / 3.0;
  Real gamma = 1.0 / 3.0;
  Real z_s = 1.0;
  Real q = 1.0;

  void validate() const;
  Real c(Index l) const;
  Real d(Index l) const;
  /// ln Q_l, computed as a cumulative sum of ln c_n - ln d_{n+1}.
  Real log_Q(Index l) const;
};

} // namespace bdkin

#endif // BDKIN_LADDER_HPP_
