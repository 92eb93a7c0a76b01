#include "bdkin/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bdkin {

using nlohmann::json;

std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,rho,N,A,A_tilde,lambda,maxJ,z_boundary\n";
  for (const Snapshot& s : traj.snapshots) {
    out += format_real(s.t);
    out += ',';
    out += format_real(s.rho);
    out += ',';
    out += format_real(s.N);
    out += ',';
    out += format_real(s.A);
    out += ',';
    out += format_real(s.A_tilde);
    out += ',';
    out += format_real(s.lambda);
    out += ',';
    out += format_real(s.max_abs_flux);
    out += ',';
    out += format_real(s.z_boundary);
    out += '\n';
  }
  return out;
}

std::string snapshots_jsonl(const Trajectory& traj) {
  std::string out;
  for (const Snapshot& s : traj.snapshots) {
    json line;
    line["t"] = s.t;
    line["z"] = state_to_json(s.z);
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string state_csv(const Array& z) {
  return sequence_csv(z, "z_l");
}

std::string sequence_csv(const Array& v, const std::string& value_name) {
  std::string out = "l," + value_name + "\n";
  for (Index i = 0; i < v.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_real(v[i]);
    out += '\n';
  }
  return out;
}

std::string lambda_window_csv(const Trajectory& traj, Real t0, Real t1) {
  std::string out = "t,lambda\n";
  for (const Snapshot& s : traj.snapshots) {
    if (s.t < t0 || s.t > t1) continue;
    out += format_real(s.t);
    out += ',';
    out += format_real(s.lambda);
    out += '\n';
  }
  return out;
}

json state_to_json(const Array& z) {
  json arr = json::array();
  for (Index i = 0; i < z.size(); ++i) arr.push_back(z[i]);
  return arr;
}

Array state_from_json(const json& j) {
  if (!j.is_array()) throw std::runtime_error("state must be a JSON array");
  Array z(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& v : j) {
    if (!v.is_number()) throw std::runtime_error("state entries must be numbers");
    z[i++] = v.get<Real>();
  }
  return z;
}

json series_value_to_json(const SeriesValue& v) {
  json j;
  switch (v.status) {
    case SeriesValue::Status::converged: j["status"] = "converged"; break;
    case SeriesValue::Status::diverged: j["status"] = "diverged"; break;
    case SeriesValue::Status::inconclusive: j["status"] = "inconclusive"; break;
  }
  j["value"] = v.value;
  j["error_bound"] = v.error_bound;
  j["partial_sum"] = v.partial_sum;
  j["terms_used"] = v.terms_used;
  return j;
}

json classification_to_json(const EqClassification& c) {
  json j;
  j["verdict"] = c.verdict_name();
  j["branch"] = c.branch_name();
  j["tol"] = c.tol;
  j["f_at_1"] = series_value_to_json(c.f_at_1);
  j["g_at_1"] = series_value_to_json(c.g_at_1);
  return j;
}

json equilibrium_to_json(const EquilibriumSolution& eq) {
  json j;
  j["mu_bar"] = eq.mu_bar();
  j["N_bar"] = eq.N_bar();
  j["rho_bar"] = eq.rho_bar();
  j["g_at_mu"] = eq.g_at_mu();
  j["A_tilde"] = eq.a_tilde();
  return j;
}

json monitor_log_to_json(const MonitorLog& m) {
  json j;
  j["mass_violations"] = m.mass_violations;
  j["max_mass_drift_rel"] = m.max_mass_drift_rel;
  j["availability_violations"] = m.availability_violations;
  j["max_avail_increase"] = m.max_avail_increase;
  j["clamp_events"] = m.clamp_events;
  j["positivity_retries"] = m.positivity_retries;
  j["truncation_affected"] = m.truncation_affected;
  return j;
}

json invariant_report_to_json(const InvariantReport& r) {
  json j;
  j["status"] = run_status_name(r.status);
  j["max_mass_drift_rel"] = r.max_mass_drift_rel;
  j["availability_violations"] = r.availability_violations;
  j["max_avail_increase"] = r.max_avail_increase;
  j["terminal_max_abs_flux"] = r.terminal_max_abs_flux;
  j["availability_drop"] = r.availability_drop;
  j["dissipation_integral"] = r.dissipation_integral;
  j["dissipation_check_ok"] = r.dissipation_check_ok;
  j["clamp_events"] = r.clamp_events;
  j["truncation_affected"] = r.truncation_affected;
  return j;
}

json availability_report_to_json(const AvailabilityReport& r) {
  json j;
  j["A"] = r.A;
  j["A_tilde"] = r.A_tilde;
  j["production"] = r.production;
  j["dissipation_lb"] = r.dissipation_lb;
  j["boundary_flag"] = r.boundary_flag;
  return j;
}

json assumption_report_to_json(const AssumptionReport& r) {
  json j;
  j["declared_R"] = r.declared_R;
  j["ratio_at_horizon"] = r.ratio_at_horizon;
  j["ratio_extrapolated"] = r.ratio_extrapolated;
  j["ratio_rel_deviation"] = r.ratio_rel_deviation;
  j["ratio_ok"] = r.ratio_ok;
  j["gamma_over_l_first"] = r.gamma_over_l_first;
  j["gamma_over_l_last"] = r.gamma_over_l_last;
  j["gamma_decays"] = r.gamma_decays;
  j["pass"] = r.pass;
  return j;
}

json mass_certificate_to_json(const MassCertificate& c) {
  json j;
  j["certified"] = c.certified;
  j["reason"] = c.reason;
  j["lambda_sup"] = c.lambda_sup;
  j["R_prime"] = c.R_prime;
  j["t0"] = c.t0;
  j["t1"] = c.t1;
  j["samples"] = c.samples;
  return j;
}

json regime_report_to_json(const RegimeReport& r) {
  json j;
  j["label"] = case_label_name(r.label);
  j["predicted_limit"] = predicted_limit_name(r.predicted_limit);
  j["classification"] = classification_to_json(r.classification);
  j["R"] = r.R;
  j["rho0"] = r.rho0;
  j["mu_bar"] = r.mu_bar;
  j["N_bar"] = r.N_bar;
  j["A_tilde_terminal"] = r.A_tilde_terminal;
  j["A_tilde_trend"] = r.A_tilde_trend;
  j["a_tilde_tol"] = r.a_tilde_tol;
  j["lambda_sup_window"] = r.lambda_sup_window;
  j["R_prime"] = r.R_prime;
  j["mass_certified"] = r.mass_certified;
  j["terminal_max_flux"] = r.terminal_max_flux;
  j["truncation_affected"] = r.truncation_affected;
  j["simulated"] = r.simulated;
  j["notes"] = r.notes;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace bdkin
