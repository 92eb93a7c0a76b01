#include "bdkin/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "bdkin/equilibrium.hpp"
#include "bdkin/state.hpp"

namespace bdkin {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("config: " + what);
}

Real get_real(const json& j, const char* key, Real fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(std::string(key) + " must be a number");
  return j.at(key).get<Real>();
}

Index get_index(const json& j, const char* key, Index fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    fail(std::string(key) + " must be an integer");
  return j.at(key).get<Index>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(std::string(key) + " must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const char* key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

EnergyLadder parse_ladder(const json& j) {
  if (!j.is_object()) fail("ladder must be an object");
  const std::string kind = get_string(j, "kind", "");
  if (kind == "example1")
    return EnergyLadder::example1(get_real(j, "delta", 2.0),
                                  get_real(j, "gamma", 2.0));
  if (kind == "example2") return EnergyLadder::example2(get_real(j, "beta", 1.0));
  if (kind == "geometric")
    return EnergyLadder::geometric(get_real(j, "beta", 1.0));
  if (kind == "table") {
    if (!j.contains("a") || !j.at("a").is_array())
      fail("table ladder needs an array field a");
    std::vector<Real> a = j.at("a").get<std::vector<Real>>();
    if (!j.contains("R")) fail("table ladder needs a field R");
    return EnergyLadder::table(std::move(a), get_real(j, "R", 1.0));
  }
  fail("unknown ladder kind '" + kind + "'");
}

KineticCoefficients parse_kinetics(const json& j) {
  if (!j.is_object()) fail("kinetics must be an object");
  const std::string kind = get_string(j, "kind", "constant");
  if (kind == "constant")
    return KineticCoefficients::constant(get_real(j, "value", 1.0));
  if (kind == "power")
    return KineticCoefficients::power(get_real(j, "alpha", 0.0));
  fail("unknown kinetics kind '" + kind + "'");
}

StandardModelParams parse_standard(const json& j) {
  StandardModelParams sm;
  if (j.is_object()) {
    sm.alpha = get_real(j, "alpha", sm.alpha);
    sm.gamma = get_real(j, "gamma", sm.gamma);
    sm.z_s = get_real(j, "z_s", sm.z_s);
    sm.q = get_real(j, "q", sm.q);
  }
  sm.validate();
  return sm;
}

InitialSpec parse_initial(const json& j) {
  InitialSpec init;
  if (j.is_null()) return init;
  if (!j.is_object()) fail("initial must be an object");
  const std::string kind = get_string(j, "kind", "monodisperse");
  if (kind == "monodisperse") {
    init.kind = InitialSpec::Kind::monodisperse;
    init.rho0 = get_real(j, "rho0", 1.0);
    if (!(init.rho0 > 0.0)) fail("rho0 must be positive");
  } else if (kind == "explicit") {
    init.kind = InitialSpec::Kind::explicit_values;
    if (!j.contains("values") || !j.at("values").is_array())
      fail("explicit initial needs an array field values");
    const auto vals = j.at("values").get<std::vector<Real>>();
    init.values = Eigen::Map<const Eigen::ArrayXd>(vals.data(),
                                                   static_cast<Index>(vals.size()));
  } else if (kind == "equilibrium") {
    init.kind = InitialSpec::Kind::equilibrium;
    init.rho0 = get_real(j, "rho_bar", get_real(j, "rho0", 1.0));
    if (!(init.rho0 > 0.0)) fail("rho_bar must be positive");
  } else {
    fail("unknown initial kind '" + kind + "'");
  }
  return init;
}

IntegratorConfig parse_integrator(const json& j) {
  IntegratorConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) fail("integrator must be an object");
  const std::string method = get_string(j, "method", "rk45");
  if (method == "rk45") {
    RK45Options o;
    o.rel_tol = get_real(j, "rel_tol", o.rel_tol);
    o.abs_tol = get_real(j, "abs_tol", o.abs_tol);
    o.dt_min = get_real(j, "dt_min", o.dt_min);
    o.dt_max = get_real(j, "dt_max", o.dt_max);
    o.dt_init = get_real(j, "dt_init", o.dt_init);
    cfg.method = o;
  } else if (method == "rk4") {
    RK4Options o;
    o.dt = get_real(j, "dt", o.dt);
    if (!(o.dt > 0.0)) fail("rk4 dt must be positive");
    cfg.method = o;
  } else {
    fail("unknown integrator method '" + method + "'");
  }
  cfg.t_end = get_real(j, "t_end", cfg.t_end);
  if (!(cfg.t_end >= 0.0)) fail("t_end must be nonnegative");
  cfg.record_every = get_real(j, "record_every", cfg.record_every);
  if (j.contains("monitors")) {
    const json& m = j.at("monitors");
    if (!m.is_object()) fail("monitors must be an object");
    MonitorOptions& mo = cfg.monitors;
    mo.check_mass = get_bool(m, "check_mass", mo.check_mass);
    mo.check_availability = get_bool(m, "check_availability", mo.check_availability);
    mo.mass_tol = get_real(m, "mass_tol", mo.mass_tol);
    mo.avail_slack_abs = get_real(m, "avail_slack_abs", mo.avail_slack_abs);
    mo.avail_slack_rel = get_real(m, "avail_slack_rel", mo.avail_slack_rel);
    mo.clamp_tol = get_real(m, "clamp_tol", mo.clamp_tol);
    mo.clamp_budget = static_cast<int>(get_index(m, "clamp_budget", mo.clamp_budget));
    mo.boundary_mass_frac =
        get_real(m, "boundary_mass_frac", mo.boundary_mass_frac);
  }
  return cfg;
}

AnalysisSpec parse_analysis(const json& j) {
  AnalysisSpec a;
  if (j.is_null()) return a;
  if (!j.is_object()) fail("analysis must be an object");
  a.R_prime = get_real(j, "R_prime", a.R_prime);
  a.eta0 = get_real(j, "eta0", a.eta0);
  a.l0 = get_index(j, "l0", a.l0);
  if (j.contains("minimizing_m")) {
    if (!j.at("minimizing_m").is_array())
      fail("minimizing_m must be an array of integers");
    a.minimizing_m = j.at("minimizing_m").get<std::vector<Index>>();
    for (Index m : a.minimizing_m)
      if (m < 1) fail("minimizing_m entries must be >= 1");
  }
  if (j.contains("regime")) {
    const json& r = j.at("regime");
    if (!r.is_object()) fail("regime must be an object");
    a.regime.truncation = get_index(r, "truncation", a.regime.truncation);
    a.regime.t_end = get_real(r, "t_end", a.regime.t_end);
    a.regime.record_every = get_real(r, "record_every", a.regime.record_every);
    a.regime.tail_window_frac =
        get_real(r, "tail_window_frac", a.regime.tail_window_frac);
    a.regime.eq1_tol = get_real(r, "eq1_tol", a.regime.eq1_tol);
    a.regime.method.rel_tol = get_real(r, "rel_tol", a.regime.method.rel_tol);
    a.regime.method.abs_tol = get_real(r, "abs_tol", a.regime.method.abs_tol);
  }
  return a;
}

} // namespace

ScenarioConfig parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("top level must be an object");

  ScenarioConfig cfg;
  cfg.name = get_string(j, "name", "");
  const std::string model = get_string(j, "model", "modified");
  if (model == "modified") {
    cfg.standard_model = false;
    if (!j.contains("ladder")) fail("modified model needs a ladder block");
    cfg.ladder = parse_ladder(j.at("ladder"));
    cfg.kinetics = j.contains("kinetics") ? parse_kinetics(j.at("kinetics"))
                                          : KineticCoefficients::constant();
  } else if (model == "standard") {
    cfg.standard_model = true;
    cfg.standard = parse_standard(j.value("standard", json::object()));
  } else {
    fail("unknown model '" + model + "'");
  }

  cfg.truncation = get_index(j, "truncation", 0);
  if (cfg.truncation < 2) fail("truncation must be >= 2");

  cfg.initial = parse_initial(j.value("initial", json()));
  if (cfg.initial.kind == InitialSpec::Kind::explicit_values &&
      cfg.initial.values.size() != cfg.truncation)
    fail("explicit initial values must have exactly truncation entries");
  if (cfg.initial.kind == InitialSpec::Kind::equilibrium && cfg.standard_model)
    fail("equilibrium initial data requires the modified model");

  cfg.integrator = parse_integrator(j.value("integrator", json()));
  cfg.analysis = parse_analysis(j.value("analysis", json()));
  if (j.contains("output")) {
    const json& o = j.at("output");
    if (!o.is_object()) fail("output must be an object");
    cfg.write_snapshots = get_bool(o, "snapshots", cfg.write_snapshots);
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str());
}

Array initial_state(const ScenarioConfig& cfg) {
  switch (cfg.initial.kind) {
    case InitialSpec::Kind::monodisperse:
      return monodisperse(cfg.initial.rho0, cfg.truncation);
    case InitialSpec::Kind::explicit_values: {
      require_valid_state(cfg.initial.values);
      return cfg.initial.values;
    }
    case InitialSpec::Kind::equilibrium: {
      EquilibriumSolution eq = solve_equilibrium(*cfg.ladder, cfg.initial.rho0);
      return eq.truncated(cfg.truncation);
    }
  }
  throw std::logic_error("unreachable");
}

} // namespace bdkin
