#ifndef BDKIN_INTEGRATE_HPP_
#define BDKIN_INTEGRATE_HPP_

#include <string>
#include <variant>
#include <vector>

#include "bdkin/kinetics.hpp"
#include "bdkin/ladder.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

struct RK45Options {
  Real rel_tol = 1e-8;
  Real abs_tol = 1e-12;
  Real dt_min = 1e-12;
  Real dt_max = 10.0;
  Real dt_init = 0.0; // 0 = choose automatically
};

struct RK4Options {
  Real dt = 1e-3;
};

struct MonitorOptions {
  bool check_mass = true;
  bool check_availability = true;
  Real mass_tol = 1e-8; // relative drift allowance
  // Per-step allowance for availability increases:
  //   eps_step = avail_slack_abs + avail_slack_rel * |A_prev|.
  // Negative values mean "derive from the integrator tolerances"
  // (100 * abs_tol and 10 * rel_tol for rk45; 1e-10 and 1e-8 for rk4).
  Real avail_slack_abs = -1.0;
  Real avail_slack_rel = -1.0;
  // Entries in [-clamp_tol, 0) are clamped to zero once dt reaches dt_min;
  // negative means "use the integrator's abs_tol" (1e-12 for rk4).
  Real clamp_tol = -1.0;
  int clamp_budget = 100;
  Real boundary_mass_frac = 0.01; // z_m / rho0 threshold for the flag
};

struct IntegratorConfig {
  std::variant<RK45Options, RK4Options> method = RK45Options{};
  Real t_end = 1.0;
  Real record_every = 0.0; // <= 0: snapshots only at 0 and t_end
  MonitorOptions monitors;
};

enum class RunStatus { ok, stiffness_error, positivity_error, numeric_error };

std::string run_status_name(RunStatus s);

/// State snapshot at a recorded time, with the observables used by the
/// CSV writer. lambda = z_1 / N is NaN when N = 0.
struct Snapshot {
  Real t = 0.0;
  Array z;
  Real rho = 0.0;
  Real N = 0.0;
  Real A = 0.0;
  Real A_tilde = 0.0;
  Real lambda = 0.0;
  Array J; // J_1..J_{m-1}; empty for tail-sum runs
  Real max_abs_flux = 0.0;
  Real z_boundary = 0.0;
};

/// Scalar record appended at every accepted step; these resolve the
/// dynamics well enough for quadrature checks on the energy identity.
struct StepRecord {
  Real t = 0.0;
  Real A = 0.0;
  Real A_tilde = 0.0;
  Real rho = 0.0;
  Real dissipation_lb = 0.0;
};

struct MonitorLog {
  long mass_violations = 0;
  Real max_mass_drift_rel = 0.0;
  long availability_violations = 0;
  Real max_avail_increase = 0.0;
  long clamp_events = 0;
  long positivity_retries = 0;
  bool truncation_affected = false;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> steps;
  MonitorLog monitors;
  RunStatus status = RunStatus::ok;
  std::string error;
  Real rho0 = 0.0;
  Real t_reached = 0.0;
  long total_steps = 0;
  bool zeta_coordinates = false;
};

/// Integrates the truncated modified system from z0. Trajectories always
/// carry the initial state and the terminal state; monitor violations are
/// counted, they do not abort the run. Stiffness (dt under dt_min on the
/// error test), an exhausted clamping budget, and NaN/Inf states end the
/// run early with the partial trajectory and a status code.
Trajectory simulate(const Array& z0, const EnergyLadder& ladder,
                    const KineticCoefficients& kin, const IntegratorConfig& cfg);

/// Same integrator on the classic model. The A column carries the Lyapunov
/// functional of that model; A_tilde and the dissipation record are NaN.
Trajectory simulate_standard(const Array& z0, const StandardModelParams& sm,
                             const IntegratorConfig& cfg);

/// Integrates the tail-sum form: state entries are zeta_l, availability
/// monitors are off, snapshots keep zeta in the z field.
Trajectory simulate_zeta(const Array& zeta0, const EnergyLadder& ladder,
                         const KineticCoefficients& kin,
                         const IntegratorConfig& cfg);

/// Post-hoc invariants of a finished run. The dissipation check compares
/// the drop of A against the trapezoid quadrature of the dissipation lower
/// bound over the per-step records:
///   A(t0) - A(t1) >= (1 - 0.02) * integral - 1e-8 * (1 + |drop|).
struct InvariantReport {
  RunStatus status = RunStatus::ok;
  Real max_mass_drift_rel = 0.0;
  long availability_violations = 0;
  Real max_avail_increase = 0.0;
  Real terminal_max_abs_flux = 0.0;
  Real availability_drop = 0.0;
  Real dissipation_integral = 0.0;
  bool dissipation_check_ok = false;
  long clamp_events = 0;
  bool truncation_affected = false;
};

InvariantReport step_invariant_report(const Trajectory& traj);

} // namespace bdkin

#endif // BDKIN_INTEGRATE_HPP_
