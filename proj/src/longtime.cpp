#include "bdkin/longtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bdkin/state.hpp"

namespace bdkin {

namespace {
constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();
}

MajorantSpace MajorantSpace::constant(Real eta, Index l0) {
  MajorantSpace s;
  s.l0 = l0;
  s.eta = Array::Constant(1, eta);
  s.validate();
  return s;
}

Real MajorantSpace::eta_at(Index l) const {
  if (l < 1) throw std::invalid_argument("eta index must be >= 1");
  const Index i = std::min<Index>(l - 1, eta.size() - 1);
  return eta[i];
}

Real MajorantSpace::eta0() const {
  Real sup = 0.0;
  for (Index i = l0 - 1; i < eta.size(); ++i) sup = std::max(sup, eta[i]);
  sup = std::max(sup, eta[eta.size() - 1]); // constant beyond the window
  return sup;
}

void MajorantSpace::validate() const {
  if (l0 < 1) throw std::invalid_argument("l0 must be >= 1");
  if (eta.size() < 1) throw std::invalid_argument("eta must be nonempty");
  for (Index i = 0; i < eta.size(); ++i)
    if (!(eta[i] > 0.0 && eta[i] < 1.0))
      throw std::invalid_argument("eta entries must lie in (0,1)");
  if (!(eta0() < 1.0)) throw std::invalid_argument("sup eta must be < 1");
}

Array hat_operator(const MajorantSpace& space, const Array& xi,
                   TailMode tail_mode) {
  space.validate();
  const Index L = xi.size();
  const Index l0 = space.l0;
  if (L < l0 + 2)
    throw std::invalid_argument("window must extend at least two past l0");
  for (Index i = 0; i < L; ++i)
    if (!std::isfinite(xi[i]))
      throw std::invalid_argument("xi must be finite");

  const Real eta0 = space.eta0();
  Array sigma = Array::Zero(L);
  const Real scale = std::max(1.0, xi.abs().maxCoeff());
  const Real tol = 1e-15 * scale;

  // base_l: the constraint sigma_l >= xi_l applies only for l >= l0, and
  // sigma is nonnegative regardless.
  auto base = [&](Index l) -> Real {
    return l >= l0 ? std::max(xi[l - 1], 0.0) : 0.0;
  };
  // One Gauss-Seidel pass of the monotone update; sweeping down then up
  // propagates information in both directions per iteration. Each update
  // only ever raises an entry, so the iterates increase toward the least
  // fixed point.
  auto update_at = [&](Index l) -> Real {
    Real cand = base(l);
    if (l == L) {
      const Real etaL = space.eta_at(L);
      if (tail_mode == TailMode::geometric) {
        // Tail sigma_{L+k} = sigma_L eta0^k closes the constraint at L as
        // sigma_L (1 + etaL - eta0) >= etaL sigma_{L-1}.
        if (L > l0) cand = std::max(cand, etaL * sigma[L - 2] / (1.0 + etaL - eta0));
      } else {
        if (L > l0) cand = std::max(cand, etaL * sigma[L - 2] / (1.0 + etaL));
      }
      return cand;
    }
    cand = std::max(cand, sigma[l]); // sigma_{l+1}, zero-based l
    if (l > l0) {
      const Real etal = space.eta_at(l);
      cand = std::max(cand, (sigma[l] + etal * sigma[l - 2]) / (1.0 + etal));
    }
    return cand;
  };

  const int max_iter = 200000;
  Real delta = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    delta = 0.0;
    for (Index l = L; l >= l0; --l) {
      const Real v = update_at(l);
      delta = std::max(delta, v - sigma[l - 1]);
      sigma[l - 1] = v;
    }
    for (Index l = l0; l <= L; ++l) {
      const Real v = update_at(l);
      delta = std::max(delta, v - sigma[l - 1]);
      sigma[l - 1] = v;
    }
    if (delta <= tol) break;
  }
  if (delta > tol) {
    std::ostringstream msg;
    msg << "minimal-majorant iteration did not converge, residual " << delta;
    throw std::runtime_error(msg.str());
  }
  for (Index l = 1; l < l0; ++l) sigma[l - 1] = sigma[l0 - 1];
  return sigma;
}

DiracMajorant dirac_majorant(const MajorantSpace& space, Index m, Index window) {
  space.validate();
  if (m < space.l0) throw std::invalid_argument("m must be >= l0");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const Real eta0 = space.eta0();
  DiracMajorant out;
  out.sigma = Array::Ones(window);
  for (Index l = m + 1; l <= window; ++l)
    out.sigma[l - 1] = std::pow(eta0, static_cast<Real>(l - m));
  out.sup_norm = 1.0;
  out.l1_bound = static_cast<Real>(m) + eta0 / (1.0 - eta0);
  return out;
}

SummableMajorant summable_majorant(const MajorantSpace& space, const Array& xi) {
  space.validate();
  const Index L = xi.size();
  if (L < 1) throw std::invalid_argument("xi must be nonempty");
  for (Index i = 0; i < L; ++i) {
    if (!(xi[i] >= 0.0)) throw std::invalid_argument("xi must be nonnegative");
    if (i > 0 && xi[i] > xi[i - 1] * (1.0 + 1e-15) + 1e-300)
      throw std::invalid_argument("xi must be nonincreasing");
  }
  const Real eta0 = space.eta0();
  SummableMajorant out;
  out.sigma = Array::Zero(L);
  // sigma_l = xi_l + sum_{k<l} (xi_k - xi_{k+1}) eta0^(l-k); the convolution
  // satisfies s_{l+1} = eta0 (s_l + xi_l - xi_{l+1}) and costs one pass.
  Real s = 0.0;
  for (Index l = 1; l <= L; ++l) {
    out.sigma[l - 1] = xi[l - 1] + s;
    const Real next = l < L ? xi[l] : 0.0;
    s = eta0 * (s + xi[l - 1] - next);
  }
  Real tail_sum = kahan_sum(xi);
  out.l1_bound = xi[0] * eta0 / (1.0 - eta0) + tail_sum;
  return out;
}

Real h_sigma(const Array& zeta, const Array& sigma, Index l0, Real rho0) {
  if (l0 < 1) throw std::invalid_argument("l0 must be >= 1");
  const Index L = std::min(zeta.size(), sigma.size());
  if (L < l0) throw std::invalid_argument("window shorter than l0");
  for (Index i = 0; i < L; ++i)
    if (!(sigma[i] > 0.0))
      throw std::invalid_argument("sigma must be strictly positive");
  Real h = rho0 / sigma[l0 - 1];
  for (Index l = l0 + 1; l <= L; ++l) h = std::max(h, zeta[l - 1] / sigma[l - 1]);
  return h;
}

MassCertificate mass_certificate(const Trajectory& traj,
                                 const EnergyLadder& ladder, Real t0, Real t1,
                                 Real R_prime) {
  if (!(R_prime >= 0.0) || !(R_prime < ladder.R()))
    throw std::invalid_argument("need 0 <= R' < R");
  if (!(t0 <= t1)) throw std::invalid_argument("window must have t0 <= t1");
  MassCertificate cert;
  cert.R_prime = R_prime;
  cert.t0 = t0;
  cert.t1 = t1;
  cert.lambda_sup = -std::numeric_limits<Real>::infinity();
  for (const Snapshot& s : traj.snapshots) {
    if (s.t < t0 || s.t > t1) continue;
    ++cert.samples;
    if (!std::isfinite(s.lambda)) {
      cert.certified = false;
      cert.reason = "lambda undefined (no droplets) at t=" + std::to_string(s.t);
      return cert;
    }
    cert.lambda_sup = std::max(cert.lambda_sup, s.lambda);
  }
  if (cert.samples == 0)
    throw std::invalid_argument("window contains no recorded samples");
  if (cert.lambda_sup <= R_prime) {
    cert.certified = true;
  } else {
    std::ostringstream msg;
    msg << "lambda exceeds R': sup " << cert.lambda_sup << " > " << R_prime;
    cert.reason = msg.str();
  }
  return cert;
}

std::string case_label_name(CaseLabel label) {
  switch (label) {
    case CaseLabel::NEQ: return "NEQ";
    case CaseLabel::EQ1: return "EQ1";
    case CaseLabel::EQ2: return "EQ2";
    case CaseLabel::EQ3a: return "EQ3a";
    case CaseLabel::EQ3b: return "EQ3b";
    case CaseLabel::undecided: return "undecided";
  }
  return "?";
}

std::string predicted_limit_name(PredictedLimit limit) {
  switch (limit) {
    case PredictedLimit::zero_state: return "zero_state";
    case PredictedLimit::equilibrium: return "equilibrium";
    case PredictedLimit::open: return "open";
    case PredictedLimit::undecided: return "undecided";
  }
  return "?";
}

namespace {

void append_note(std::string& notes, const std::string& line) {
  if (!notes.empty()) notes += "; ";
  notes += line;
}

/// Runs the budgeted monodisperse simulation and fills the evidence fields.
/// Returns the trajectory for further inspection (certificate windows).
Trajectory run_budgeted(RegimeReport& rep, const EnergyLadder& ladder,
                        const KineticCoefficients& kin, Real rho0,
                        const RegimeBudget& budget) {
  IntegratorConfig cfg;
  cfg.method = budget.method;
  cfg.t_end = budget.t_end;
  cfg.record_every = budget.record_every;
  Trajectory traj = simulate(monodisperse(rho0, budget.truncation), ladder, kin, cfg);
  rep.simulated = true;
  rep.truncation_affected = traj.monitors.truncation_affected;
  if (traj.status != RunStatus::ok)
    append_note(rep.notes, "simulation ended with " + run_status_name(traj.status) +
                               ": " + traj.error);
  if (!traj.snapshots.empty()) {
    const Snapshot& last = traj.snapshots.back();
    rep.A_tilde_terminal = last.A_tilde;
    rep.terminal_max_flux = last.max_abs_flux;
    const Real t_tail = traj.t_reached * (1.0 - budget.tail_window_frac);
    Real sup = -std::numeric_limits<Real>::infinity();
    Real a_first = kNaN;
    Index tail_samples = 0;
    for (const Snapshot& s : traj.snapshots) {
      if (s.t < t_tail) continue;
      ++tail_samples;
      if (std::isfinite(s.lambda)) sup = std::max(sup, s.lambda);
      if (!std::isfinite(a_first)) a_first = s.A_tilde;
    }
    rep.lambda_sup_window = sup;
    // A trend needs at least two tail samples; otherwise it stays NaN and
    // the EQ3 split reports undecided instead of a spuriously flat curve.
    rep.A_tilde_trend = tail_samples >= 2 ? last.A_tilde - a_first : kNaN;
  }
  return traj;
}

void attempt_certificate(RegimeReport& rep, const Trajectory& traj,
                         const EnergyLadder& ladder, Real R_prime,
                         const RegimeBudget& budget) {
  rep.R_prime = R_prime;
  const Real t_tail = traj.t_reached * (1.0 - budget.tail_window_frac);
  try {
    MassCertificate cert =
        mass_certificate(traj, ladder, t_tail, traj.t_reached, R_prime);
    rep.mass_certified = cert.certified;
    if (!cert.certified) append_note(rep.notes, "certificate: " + cert.reason);
  } catch (const std::exception& e) {
    append_note(rep.notes, std::string("certificate failed: ") + e.what());
  }
}

} // namespace

RegimeReport regime_classify(const EnergyLadder& ladder,
                             const KineticCoefficients& kin, Real rho0,
                             const RegimeBudget& budget) {
  if (!(rho0 > 0.0)) throw std::invalid_argument("rho0 must be positive");
  if (budget.truncation < 2)
    throw std::invalid_argument("truncation must be >= 2");
  RegimeReport rep;
  rep.rho0 = rho0;
  rep.R = ladder.R();
  rep.mu_bar = kNaN;
  rep.N_bar = kNaN;
  rep.A_tilde_terminal = kNaN;
  rep.A_tilde_trend = kNaN;
  rep.a_tilde_tol = kNaN;
  rep.lambda_sup_window = kNaN;
  rep.R_prime = kNaN;
  rep.terminal_max_flux = kNaN;
  rep.classification = classify(ladder);
  const EqClassification& cls = rep.classification;

  if (cls.verdict == EqClassification::Verdict::NEQ) {
    rep.label = CaseLabel::NEQ;
    rep.predicted_limit = PredictedLimit::zero_state;
    run_budgeted(rep, ladder, kin, rho0, budget);
    return rep;
  }

  if (cls.verdict == EqClassification::Verdict::inconclusive) {
    // The interval for f~(1) straddles 1; when it is tight around 1 this is
    // the open borderline case, otherwise nothing can be said.
    const SeriesValue& f1 = cls.f_at_1;
    if (f1.status == SeriesValue::Status::converged &&
        f1.lower() <= 1.0 + budget.eq1_tol &&
        f1.upper() >= 1.0 - budget.eq1_tol &&
        f1.upper() - f1.lower() <= 2.0 * budget.eq1_tol + 1e-3) {
      rep.label = CaseLabel::EQ1;
      rep.predicted_limit = PredictedLimit::open;
      append_note(rep.notes, "f~(1) indistinguishable from 1; limit open");
    } else {
      append_note(rep.notes, "phase classification inconclusive");
    }
    return rep;
  }

  // EQ with f~(1) > 1 certified (the = 1 branch is never certified, so an
  // EQ verdict here always means the strict inequality).
  try {
    EquilibriumSolution eq = solve_equilibrium(ladder, rho0);
    rep.mu_bar = eq.mu_bar();
    rep.N_bar = eq.N_bar();
  } catch (const std::exception& e) {
    append_note(rep.notes, std::string("equilibrium solve failed: ") + e.what());
  }

  if (rep.R > 1.0) {
    rep.label = CaseLabel::EQ2;
    rep.predicted_limit = PredictedLimit::equilibrium;
    Trajectory traj = run_budgeted(rep, ladder, kin, rho0, budget);
    attempt_certificate(rep, traj, ladder, 0.5 * (1.0 + rep.R), budget);
    return rep;
  }

  // R <= 1: the terminal shifted availability separates collapse from the
  // full-mass equilibrium.
  Trajectory traj = run_budgeted(rep, ladder, kin, rho0, budget);
  const Real tol = std::max(1e-3 * rho0 * std::abs(ladder.log_R()), 1e-9);
  rep.a_tilde_tol = tol;
  const Real a_term = rep.A_tilde_terminal;
  const bool flat = std::isfinite(rep.A_tilde_trend) &&
                    std::abs(rep.A_tilde_trend) <= 0.1 * tol;
  if (!std::isfinite(a_term)) {
    append_note(rep.notes, "terminal shifted availability unavailable");
    return rep;
  }
  if (!flat) {
    append_note(rep.notes, "availability trend has not flattened; raise t_end");
    return rep;
  }
  if (a_term < -tol) {
    rep.label = CaseLabel::EQ3b;
    rep.predicted_limit = PredictedLimit::equilibrium;
    if (std::isfinite(rep.mu_bar)) {
      const Real lambda_bar = std::exp(ladder.log_q_tilde(1)) * rep.mu_bar;
      if (lambda_bar < rep.R)
        attempt_certificate(rep, traj, ladder, 0.5 * (lambda_bar + rep.R), budget);
      else
        append_note(rep.notes, "q~_1 mu_bar >= R, no certificate window");
    }
  } else if (std::abs(a_term) <= tol) {
    rep.label = CaseLabel::EQ3a;
    rep.predicted_limit = PredictedLimit::zero_state;
  } else {
    append_note(rep.notes,
                "terminal shifted availability positive but flat; truncation "
                "may be binding");
  }
  return rep;
}

} // namespace bdkin
