#include "bdkin/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

#include "bdkin/energy.hpp"
#include "bdkin/state.hpp"

namespace bdkin {

std::string run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::stiffness_error: return "stiffness_error";
    case RunStatus::positivity_error: return "positivity_error";
    case RunStatus::numeric_error: return "numeric_error";
  }
  return "?";
}

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

// Dormand-Prince 5(4) coefficients.
constexpr Real c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr Real a21 = 1.0 / 5;
constexpr Real a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr Real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr Real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
               a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr Real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
               a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr Real b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
               b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr Real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
               e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using Rhs = std::function<void(Real, const Array&, Array&)>;

/// Observable hooks the driver calls on the current state. The energy
/// value feeds the monotonicity monitor and the per-step records.
struct Observables {
  std::function<Real(const Array&)> energy;          // A or Lyapunov
  std::function<Real(const Array&)> energy_shifted;  // A~ (may return NaN)
  std::function<Real(const Array&)> dissipation;     // lower bound (may be NaN)
  std::function<Real(const Array&)> conserved;       // quantity mass monitor tracks
  std::function<void(const Array&, Snapshot&)> fill_snapshot;
};

struct ResolvedMonitors {
  bool check_mass = true;
  bool check_availability = true;
  Real mass_tol = 1e-8;
  Real avail_slack_abs = 0.0;
  Real avail_slack_rel = 0.0;
  Real clamp_tol = 0.0;
  int clamp_budget = 100;
  Real boundary_mass_frac = 0.01;
};

ResolvedMonitors resolve_monitors(const IntegratorConfig& cfg) {
  ResolvedMonitors r;
  const MonitorOptions& m = cfg.monitors;
  r.check_mass = m.check_mass;
  r.check_availability = m.check_availability;
  r.mass_tol = m.mass_tol;
  r.clamp_budget = m.clamp_budget;
  r.boundary_mass_frac = m.boundary_mass_frac;
  if (std::holds_alternative<RK45Options>(cfg.method)) {
    const auto& o = std::get<RK45Options>(cfg.method);
    r.avail_slack_abs = m.avail_slack_abs >= 0 ? m.avail_slack_abs : 100.0 * o.abs_tol;
    r.avail_slack_rel = m.avail_slack_rel >= 0 ? m.avail_slack_rel : 10.0 * o.rel_tol;
    r.clamp_tol = m.clamp_tol >= 0 ? m.clamp_tol : o.abs_tol;
  } else {
    r.avail_slack_abs = m.avail_slack_abs >= 0 ? m.avail_slack_abs : 1e-10;
    r.avail_slack_rel = m.avail_slack_rel >= 0 ? m.avail_slack_rel : 1e-8;
    r.clamp_tol = m.clamp_tol >= 0 ? m.clamp_tol : 1e-12;
  }
  return r;
}

/// Initial step size from the standard two-probe heuristic.
Real initial_step(const Rhs& rhs, Real t0, const Array& y0, const RK45Options& o,
                  Real t_end) {
  const Index n = y0.size();
  Array f0(n), f1(n), y1(n);
  rhs(t0, y0, f0);
  auto scaled_norm = [&](const Array& v, const Array& ref) {
    Real s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Real sc = o.abs_tol + o.rel_tol * std::abs(ref[i]);
      const Real q = v[i] / sc;
      s += q * q;
    }
    return std::sqrt(s / static_cast<Real>(n));
  };
  const Real d0 = scaled_norm(y0, y0);
  const Real d1 = scaled_norm(f0, y0);
  Real h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, t_end - t0);
  y1 = y0 + h0 * f0;
  rhs(t0 + h0, y1, f1);
  const Real d2 = scaled_norm(Array(f1 - f0), y0) / h0;
  Real h1;
  const Real dmax = std::max(d1, d2);
  if (dmax <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / dmax, 0.2);
  return std::clamp(std::min(100.0 * h0, h1), o.dt_min, o.dt_max);
}

struct Driver {
  Rhs rhs;
  Observables obs;
  IntegratorConfig cfg;
  ResolvedMonitors mon;
  Trajectory traj;
  Index boundary_index = -1; // entry watched for the truncation flag

  void record_snapshot(Real t, const Array& y) {
    Snapshot s;
    s.t = t;
    s.z = y;
    obs.fill_snapshot(y, s);
    traj.snapshots.push_back(std::move(s));
  }

  void record_step(Real t, const Array& y, Real energy) {
    StepRecord r;
    r.t = t;
    r.A = energy;
    r.A_tilde = obs.energy_shifted(y);
    r.rho = obs.conserved(y);
    r.dissipation_lb = obs.dissipation(y);
    traj.steps.push_back(r);
  }

  /// Monitor checks on an accepted state; prev_energy is updated.
  void monitor(Real t, const Array& y, Real& prev_energy) {
    const Real rho = obs.conserved(y);
    if (mon.check_mass && traj.rho0 > 0.0) {
      const Real drift = std::abs(rho - traj.rho0) / traj.rho0;
      traj.monitors.max_mass_drift_rel =
          std::max(traj.monitors.max_mass_drift_rel, drift);
      if (drift > mon.mass_tol) ++traj.monitors.mass_violations;
    }
    const Real energy = obs.energy(y);
    if (mon.check_availability && std::isfinite(prev_energy) &&
        std::isfinite(energy)) {
      const Real eps_step =
          mon.avail_slack_abs + mon.avail_slack_rel * std::abs(prev_energy);
      if (energy > prev_energy + eps_step) {
        ++traj.monitors.availability_violations;
        traj.monitors.max_avail_increase =
            std::max(traj.monitors.max_avail_increase, energy - prev_energy);
      }
    }
    if (boundary_index >= 0 && traj.rho0 > 0.0 &&
        y[boundary_index] > mon.boundary_mass_frac * traj.rho0)
      traj.monitors.truncation_affected = true;
    record_step(t, y, energy);
    prev_energy = energy;
  }

  bool finite(const Array& y) const {
    for (Index i = 0; i < y.size(); ++i)
      if (!std::isfinite(y[i])) return false;
    return true;
  }

  /// Clamp slightly negative entries to zero; returns false when an entry
  /// is below -clamp_tol or the event budget is exhausted.
  bool clamp_negatives(Array& y) {
    bool clamped = false;
    for (Index i = 0; i < y.size(); ++i) {
      if (y[i] < 0.0) {
        if (y[i] < -mon.clamp_tol) return false;
        y[i] = 0.0;
        clamped = true;
      }
    }
    if (clamped) {
      ++traj.monitors.clamp_events;
      if (traj.monitors.clamp_events > mon.clamp_budget) return false;
    }
    return true;
  }

  void run(const Array& y0) {
    traj.rho0 = obs.conserved(y0);
    Array y = y0;
    Real t = 0.0;
    Real prev_energy = obs.energy(y);
    record_snapshot(t, y);
    record_step(t, y, prev_energy);

    const Real t_end = cfg.t_end;
    if (t_end <= 0.0) {
      traj.t_reached = 0.0;
      return;
    }
    if (std::holds_alternative<RK45Options>(cfg.method))
      run_rk45(y, t, prev_energy, t_end);
    else
      run_rk4(y, t, prev_energy, t_end);
  }

  Real next_record_time(Real t, Real t_end) const {
    if (cfg.record_every <= 0.0) return t_end;
    Real k = std::floor(t / cfg.record_every + 1e-9) + 1.0;
    Real tr = k * cfg.record_every;
    if (tr <= t) tr = (k + 1.0) * cfg.record_every;
    return std::min(tr, t_end);
  }

  void run_rk45(Array& y, Real& t, Real& prev_energy, Real t_end) {
    const auto& o = std::get<RK45Options>(cfg.method);
    const Index n = y.size();
    Array k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    Real dt = o.dt_init > 0.0 ? o.dt_init : initial_step(rhs, t, y, o, t_end);
    bool k1_valid = false; // k1 holds f(t, y) for the current (t, y)
    Real t_record = next_record_time(t, t_end);

    while (t < t_end * (1.0 - 1e-14)) {
      dt = std::clamp(dt, o.dt_min, o.dt_max);
      bool hit_record = false;
      if (t + dt >= t_record - 1e-14 * std::max(1.0, t_record)) {
        dt = t_record - t;
        hit_record = true;
      }

      if (!k1_valid) {
        rhs(t, y, k1);
        k1_valid = true;
      }
      ytmp = y + dt * (a21 * k1);
      rhs(t + c2 * dt, ytmp, k2);
      ytmp = y + dt * (a31 * k1 + a32 * k2);
      rhs(t + c3 * dt, ytmp, k3);
      ytmp = y + dt * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * dt, ytmp, k4);
      ytmp = y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * dt, ytmp, k5);
      ytmp = y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + dt, ytmp, k6);
      ynew = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + dt, ynew, k7);
      err = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      if (!finite(ynew)) {
        traj.status = RunStatus::numeric_error;
        traj.error = "non-finite state at t=" + std::to_string(t + dt);
        record_snapshot(t, y); // diagnostic snapshot of the last good state
        traj.t_reached = t;
        return;
      }

      Real err_norm = 0.0;
      for (Index i = 0; i < n; ++i) {
        const Real sc =
            o.abs_tol + o.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const Real q = err[i] / sc;
        err_norm += q * q;
      }
      err_norm = std::sqrt(err_norm / static_cast<Real>(n));

      if (err_norm > 1.0) {
        if (dt <= o.dt_min * (1.0 + 1e-12)) {
          traj.status = RunStatus::stiffness_error;
          traj.error = "error control forced dt below dt_min at t=" +
                       std::to_string(t);
          record_snapshot(t, y);
          traj.t_reached = t;
          return;
        }
        dt *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        continue; // y unchanged, k1 stays valid
      }

      bool modified = false;
      if ((ynew < 0.0).any()) {
        if (dt > o.dt_min * (1.0 + 1e-12)) {
          dt = std::max(0.5 * dt, o.dt_min);
          ++traj.monitors.positivity_retries;
          continue;
        }
        if (!clamp_negatives(ynew)) {
          traj.status = RunStatus::positivity_error;
          traj.error = "negative entry beyond clamp tolerance or budget at t=" +
                       std::to_string(t + dt);
          record_snapshot(t, y);
          traj.t_reached = t;
          return;
        }
        modified = true;
      }

      t += dt;
      if (hit_record) t = t_record;
      y.swap(ynew);
      ++traj.total_steps;
      monitor(t, y, prev_energy);
      if (modified) {
        k1_valid = false; // clamping invalidated the FSAL stage
      } else {
        k1 = k7;
      }
      if (hit_record) {
        record_snapshot(t, y);
        t_record = next_record_time(t, t_end);
      }
      dt *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2)));
    }
    traj.t_reached = t;
    if (traj.snapshots.empty() || traj.snapshots.back().t < t)
      record_snapshot(t, y);
  }

  void run_rk4(Array& y, Real& t, Real& prev_energy, Real t_end) {
    const auto& o = std::get<RK4Options>(cfg.method);
    if (!(o.dt > 0.0)) throw std::invalid_argument("rk4 needs dt > 0");
    const Index n = y.size();
    Array k1(n), k2(n), k3(n), k4(n), ytmp(n), ynew(n);
    Real t_record = next_record_time(t, t_end);

    while (t < t_end * (1.0 - 1e-14)) {
      Real dt = std::min(o.dt, t_end - t);
      bool hit_record = false;
      if (t + dt >= t_record - 1e-14 * std::max(1.0, t_record)) {
        dt = t_record - t;
        hit_record = true;
      }
      rhs(t, y, k1);
      ytmp = y + 0.5 * dt * k1;
      rhs(t + 0.5 * dt, ytmp, k2);
      ytmp = y + 0.5 * dt * k2;
      rhs(t + 0.5 * dt, ytmp, k3);
      ytmp = y + dt * k3;
      rhs(t + dt, ytmp, k4);
      ynew = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

      if (!finite(ynew)) {
        traj.status = RunStatus::numeric_error;
        traj.error = "non-finite state at t=" + std::to_string(t + dt);
        record_snapshot(t, y);
        traj.t_reached = t;
        return;
      }
      if ((ynew < 0.0).any() && !clamp_negatives(ynew)) {
        traj.status = RunStatus::positivity_error;
        traj.error = "negative entry beyond clamp tolerance or budget at t=" +
                     std::to_string(t + dt);
        record_snapshot(t, y);
        traj.t_reached = t;
        return;
      }
      t += dt;
      if (hit_record) t = t_record;
      y.swap(ynew);
      ++traj.total_steps;
      monitor(t, y, prev_energy);
      if (hit_record) {
        record_snapshot(t, y);
        t_record = next_record_time(t, t_end);
      }
    }
    traj.t_reached = t;
    if (traj.snapshots.empty() || traj.snapshots.back().t < t)
      record_snapshot(t, y);
  }
};

} // namespace

Trajectory simulate(const Array& z0, const EnergyLadder& ladder,
                    const KineticCoefficients& kin, const IntegratorConfig& cfg) {
  require_valid_state(z0);
  Driver d;
  d.cfg = cfg;
  d.mon = resolve_monitors(cfg);
  d.boundary_index = z0.size() - 1;
  d.rhs = [&ladder, &kin](Real, const Array& y, Array& dy) {
    dy = rhs_truncated(y, ladder, kin);
  };
  d.obs.energy = [&ladder](const Array& y) { return availability(y, ladder); };
  d.obs.energy_shifted = [&ladder](const Array& y) {
    return availability_shifted(y, ladder);
  };
  d.obs.dissipation = [&ladder, &kin](const Array& y) {
    return dissipation_lower_bound(y, ladder, kin);
  };
  d.obs.conserved = [](const Array& y) { return mass(y); };
  d.obs.fill_snapshot = [&ladder, &kin](const Array& y, Snapshot& s) {
    s.rho = mass(y);
    s.N = droplet_count(y);
    s.A = availability(y, ladder);
    s.A_tilde = availability_shifted(y, ladder);
    s.lambda = s.N > 0.0 ? y[0] / s.N : kNaN;
    s.J = flux_modified(y, ladder, kin);
    s.max_abs_flux = s.J.size() ? s.J.abs().maxCoeff() : 0.0;
    s.z_boundary = y[y.size() - 1];
  };
  d.run(z0);
  return std::move(d.traj);
}

Trajectory simulate_standard(const Array& z0, const StandardModelParams& sm,
                             const IntegratorConfig& cfg) {
  require_valid_state(z0);
  sm.validate();
  Driver d;
  d.cfg = cfg;
  d.mon = resolve_monitors(cfg);
  d.boundary_index = z0.size() - 1;
  d.rhs = [&sm](Real, const Array& y, Array& dy) { dy = rhs_standard(y, sm); };
  d.obs.energy = [&sm](const Array& y) { return standard_lyapunov(y, sm); };
  d.obs.energy_shifted = [](const Array&) { return kNaN; };
  d.obs.dissipation = [](const Array&) { return kNaN; };
  d.obs.conserved = [](const Array& y) { return mass(y); };
  d.obs.fill_snapshot = [&sm](const Array& y, Snapshot& s) {
    s.rho = mass(y);
    s.N = droplet_count(y);
    s.A = standard_lyapunov(y, sm);
    s.A_tilde = kNaN;
    s.lambda = s.N > 0.0 ? y[0] / s.N : kNaN;
    s.J = flux_standard(y, sm);
    s.max_abs_flux = s.J.size() ? s.J.abs().maxCoeff() : 0.0;
    s.z_boundary = y[y.size() - 1];
  };
  d.run(z0);
  return std::move(d.traj);
}

Trajectory simulate_zeta(const Array& zeta0, const EnergyLadder& ladder,
                         const KineticCoefficients& kin,
                         const IntegratorConfig& cfg) {
  if (zeta0.size() < 2)
    throw std::invalid_argument("zeta needs at least two entries");
  Driver d;
  d.cfg = cfg;
  d.mon = resolve_monitors(cfg);
  d.mon.check_availability = false;
  d.boundary_index = -1;
  d.rhs = [&ladder, &kin](Real, const Array& y, Array& dy) {
    dy = rhs_zeta(y, ladder, kin);
  };
  d.obs.energy = [](const Array&) { return kNaN; };
  d.obs.energy_shifted = [](const Array&) { return kNaN; };
  d.obs.dissipation = [](const Array&) { return kNaN; };
  // In tail-sum coordinates the plain sum of entries equals the mass.
  d.obs.conserved = [](const Array& y) { return kahan_sum(y); };
  d.obs.fill_snapshot = [](const Array& y, Snapshot& s) {
    s.rho = kahan_sum(y);
    s.N = y[0];
    s.A = kNaN;
    s.A_tilde = kNaN;
    s.lambda = s.N > 0.0 ? (y[0] - y[1]) / s.N : kNaN;
    s.max_abs_flux = kNaN;
    s.z_boundary = y[y.size() - 1];
  };
  d.traj.zeta_coordinates = true;
  d.run(zeta0);
  return std::move(d.traj);
}

InvariantReport step_invariant_report(const Trajectory& traj) {
  InvariantReport rep;
  rep.status = traj.status;
  rep.max_mass_drift_rel = traj.monitors.max_mass_drift_rel;
  rep.availability_violations = traj.monitors.availability_violations;
  rep.max_avail_increase = traj.monitors.max_avail_increase;
  rep.clamp_events = traj.monitors.clamp_events;
  rep.truncation_affected = traj.monitors.truncation_affected;
  if (!traj.snapshots.empty())
    rep.terminal_max_abs_flux = traj.snapshots.back().max_abs_flux;

  if (traj.steps.size() >= 2) {
    const Real A0 = traj.steps.front().A;
    const Real A1 = traj.steps.back().A;
    rep.availability_drop = A0 - A1;
    Real quad = 0.0;
    bool have_dlb = true;
    for (std::size_t i = 1; i < traj.steps.size(); ++i) {
      const StepRecord& p = traj.steps[i - 1];
      const StepRecord& q = traj.steps[i];
      if (!std::isfinite(p.dissipation_lb) || !std::isfinite(q.dissipation_lb)) {
        have_dlb = false;
        break;
      }
      quad += 0.5 * (p.dissipation_lb + q.dissipation_lb) * (q.t - p.t);
    }
    if (have_dlb) {
      rep.dissipation_integral = quad;
      rep.dissipation_check_ok =
          rep.availability_drop >=
          0.98 * quad - 1e-8 * (1.0 + std::abs(rep.availability_drop));
    }
  }
  return rep;
}

} // namespace bdkin
