#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "bdkin/config.hpp"
#include "bdkin/io.hpp"
#include "bdkin/state.hpp"

namespace {

using bdkin::Array;
using bdkin::Real;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;
constexpr int kExitInconclusive = 3;

const std::map<std::string, const char*>& embedded_scenarios() {
  static const std::map<std::string, const char*> table = {
      {"eq2_geometric", R"({
  "name": "eq2_geometric",
  "model": "modified",
  "ladder": {"kind": "geometric", "beta": 0.6931471805599453},
  "kinetics": {"kind": "constant", "value": 1.0},
  "truncation": 200,
  "initial": {"kind": "monodisperse", "rho0": 1.0},
  "integrator": {
    "method": "rk45",
    "rel_tol": 1e-8,
    "abs_tol": 1e-12,
    "t_end": 1000.0,
    "record_every": 10.0
  },
  "analysis": {
    "R_prime": 1.0,
    "eta0": 0.5,
    "l0": 2,
    "regime": {"truncation": 128, "t_end": 300.0, "record_every": 3.0}
  }
}
)"},
      {"example1_neq", R"({
  "name": "example1_neq",
  "model": "modified",
  "ladder": {"kind": "example1", "delta": 2.0, "gamma": 2.0},
  "kinetics": {"kind": "power", "alpha": 0.0},
  "truncation": 256,
  "initial": {"kind": "monodisperse", "rho0": 1.0},
  "integrator": {
    "method": "rk45",
    "rel_tol": 1e-8,
    "abs_tol": 1e-12,
    "t_end": 1000.0,
    "record_every": 10.0
  },
  "analysis": {
    "minimizing_m": [5, 10, 20, 40, 80],
    "regime": {"truncation": 128, "t_end": 200.0, "record_every": 2.0}
  }
}
)"},
      {"example2_eq", R"({
  "name": "example2_eq",
  "model": "modified",
  "ladder": {"kind": "example2", "beta": 0.6931471805599453},
  "kinetics": {"kind": "constant", "value": 1.0},
  "truncation": 128,
  "initial": {"kind": "monodisperse", "rho0": 1.0},
  "integrator": {"method": "rk45", "t_end": 100.0, "record_every": 1.0},
  "analysis": {"regime": {"truncation": 96, "t_end": 150.0, "record_every": 2.0}}
}
)"},
      {"eq3_inverted_geometric", R"({
  "name": "eq3_inverted_geometric",
  "model": "modified",
  "ladder": {"kind": "geometric", "beta": -0.6931471805599453},
  "kinetics": {"kind": "constant", "value": 1.0},
  "truncation": 160,
  "initial": {"kind": "monodisperse", "rho0": 1.0},
  "integrator": {"method": "rk45", "t_end": 400.0, "record_every": 4.0},
  "analysis": {"regime": {"truncation": 160, "t_end": 400.0, "record_every": 4.0}}
}
)"},
      {"standard_model", R"({
  "name": "standard_model",
  "model": "standard",
  "standard": {"alpha": 0.3333333333333333, "gamma": 0.3333333333333333, "z_s": 1.0, "q": 1.0},
  "truncation": 64,
  "initial": {"kind": "monodisperse", "rho0": 0.5},
  "integrator": {"method": "rk45", "t_end": 10.0, "record_every": 1.0}
}
)"},
  };
  return table;
}

struct CommonArgs {
  std::string config;
  std::string out_dir = ".";
  long seed = 0; // reserved for randomized scenarios; no effect in this build
  bool out_given = false;
};

/// Resolves a config argument: an existing file path wins, otherwise the
/// name of an embedded scenario (with or without a .json suffix).
std::string resolve_config_text(const std::string& arg, std::string& stem) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) {
    stem = fs::path(arg).stem().string();
    std::FILE* f = std::fopen(arg.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open '" + arg + "'");
    std::string text;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    std::fclose(f);
    return text;
  }
  std::string name = arg;
  const auto dot = name.rfind(".json");
  if (dot != std::string::npos && dot == name.size() - 5) name.resize(dot);
  const auto& table = embedded_scenarios();
  auto it = table.find(name);
  if (it == table.end())
    throw std::runtime_error("no such file or built-in scenario: '" + arg + "'");
  stem = name;
  return it->second;
}

bdkin::ScenarioConfig load_config(const CommonArgs& args, std::string& stem) {
  if (args.config.empty())
    throw std::runtime_error("a config path or built-in scenario name is required");
  const std::string text = resolve_config_text(args.config, stem);
  bdkin::ScenarioConfig cfg = bdkin::parse_scenario_json(text);
  if (!cfg.name.empty()) stem = cfg.name;
  return cfg;
}

Real scenario_mass(const bdkin::ScenarioConfig& cfg) {
  if (cfg.initial.kind == bdkin::InitialSpec::Kind::explicit_values)
    return bdkin::mass(cfg.initial.values);
  return cfg.initial.rho0;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string out_path(const CommonArgs& args, const std::string& file) {
  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  return (fs::path(args.out_dir) / file).string();
}

int cmd_simulate(const CommonArgs& args) {
  std::string stem;
  bdkin::ScenarioConfig cfg = load_config(args, stem);
  const Array z0 = bdkin::initial_state(cfg);
  bdkin::Trajectory traj =
      cfg.standard_model
          ? bdkin::simulate_standard(z0, cfg.standard, cfg.integrator)
          : bdkin::simulate(z0, *cfg.ladder, cfg.kinetics, cfg.integrator);
  const bdkin::InvariantReport inv = bdkin::step_invariant_report(traj);

  json report;
  report["scenario"] = stem;
  report["status"] = bdkin::run_status_name(traj.status);
  report["error"] = traj.error;
  report["t_reached"] = traj.t_reached;
  report["total_steps"] = traj.total_steps;
  report["rho0"] = traj.rho0;
  report["invariants"] = bdkin::invariant_report_to_json(inv);
  report["monitors"] = bdkin::monitor_log_to_json(traj.monitors);
  if (!traj.snapshots.empty()) {
    const bdkin::Snapshot& s = traj.snapshots.back();
    json terminal;
    terminal["t"] = s.t;
    terminal["rho"] = s.rho;
    terminal["N"] = s.N;
    terminal["A"] = s.A;
    terminal["A_tilde"] = s.A_tilde;
    terminal["lambda"] = s.lambda;
    terminal["max_abs_flux"] = s.max_abs_flux;
    terminal["z_boundary"] = s.z_boundary;
    report["terminal"] = terminal;
  }

  bdkin::write_text_file(out_path(args, stem + "_trajectory.csv"),
                         bdkin::trajectory_csv(traj));
  bdkin::write_text_file(out_path(args, stem + "_report.json"),
                         report.dump(2) + "\n");
  if (cfg.write_snapshots)
    bdkin::write_text_file(out_path(args, stem + "_snapshots.jsonl"),
                           bdkin::snapshots_jsonl(traj));
  emit(report);

  if (traj.status != bdkin::RunStatus::ok) {
    std::cerr << "error: run ended with " << bdkin::run_status_name(traj.status)
              << ": " << traj.error << "\n";
    return kExitError;
  }
  const bool violated = traj.monitors.mass_violations > 0 ||
                        traj.monitors.availability_violations > 0 ||
                        traj.monitors.truncation_affected;
  return violated ? kExitViolation : kExitOk;
}

int cmd_equilibrium(const CommonArgs& args) {
  std::string stem;
  bdkin::ScenarioConfig cfg = load_config(args, stem);
  if (cfg.standard_model)
    throw std::runtime_error("equilibrium analysis requires the modified model");
  const Real rho_bar = scenario_mass(cfg);
  const bdkin::EqClassification cls = bdkin::classify(*cfg.ladder);

  json j;
  j["scenario"] = stem;
  j["verdict"] = cls.verdict_name();
  j["branch"] = cls.branch_name();
  j["rho_bar"] = rho_bar;
  j["f_at_1"] = bdkin::series_value_to_json(cls.f_at_1);
  j["g_at_1"] = bdkin::series_value_to_json(cls.g_at_1);

  int code = kExitOk;
  if (cls.verdict == bdkin::EqClassification::Verdict::EQ) {
    const bdkin::EquilibriumSolution eq = bdkin::solve_equilibrium(*cfg.ladder, rho_bar);
    j["mu_bar"] = eq.mu_bar();
    j["N_bar"] = eq.N_bar();
    j["g_at_mu"] = eq.g_at_mu();
    j["A_tilde"] = eq.a_tilde();
  } else if (cls.verdict == bdkin::EqClassification::Verdict::NEQ) {
    json table = json::array();
    for (bdkin::Index m : cfg.analysis.minimizing_m) {
      const bdkin::MinimizingElement el = bdkin::minimizing_sequence(*cfg.ladder, rho_bar, m);
      json row;
      row["m"] = el.m();
      row["mu"] = el.mu();
      row["one_minus_mu"] = el.one_minus_mu();
      row["value"] = el.value();
      row["N"] = el.N();
      row["pi"] = el.pi();
      table.push_back(row);
    }
    j["minimizing_sequence"] = table;
  } else {
    code = kExitInconclusive;
  }
  emit(j);
  return code;
}

int cmd_classify(const CommonArgs& args) {
  std::string stem;
  bdkin::ScenarioConfig cfg = load_config(args, stem);
  if (cfg.standard_model)
    throw std::runtime_error("regime classification requires the modified model");
  const bdkin::RegimeReport rep = bdkin::regime_classify(
      *cfg.ladder, cfg.kinetics, scenario_mass(cfg), cfg.analysis.regime);
  json j = bdkin::regime_report_to_json(rep);
  j["scenario"] = stem;
  emit(j);

  if (args.out_given) {
    const bdkin::MajorantSpace space =
        bdkin::MajorantSpace::constant(cfg.analysis.eta0, cfg.analysis.l0);
    const bdkin::DiracMajorant dm = bdkin::dirac_majorant(
        space, std::max<bdkin::Index>(cfg.analysis.l0, 8), cfg.truncation);
    bdkin::write_text_file(out_path(args, stem + "_sigma.csv"),
                           bdkin::sequence_csv(dm.sigma, "sigma_l"));
    bdkin::write_text_file(out_path(args, stem + "_regime.json"),
                           j.dump(2) + "\n");
  }

  const bool decided = rep.label == bdkin::CaseLabel::NEQ ||
                       rep.label == bdkin::CaseLabel::EQ2 ||
                       rep.label == bdkin::CaseLabel::EQ3a ||
                       rep.label == bdkin::CaseLabel::EQ3b;
  return decided ? kExitOk : kExitInconclusive;
}

int cmd_validate(const CommonArgs& args, long horizon, Real ratio_tol) {
  std::string stem;
  bdkin::ScenarioConfig cfg = load_config(args, stem);
  if (cfg.standard_model)
    throw std::runtime_error("assumption validation requires the modified model");
  const bdkin::AssumptionReport rep =
      bdkin::validate_assumptions(*cfg.ladder, cfg.kinetics, horizon, ratio_tol);
  json j = bdkin::assumption_report_to_json(rep);
  j["scenario"] = stem;
  emit(j);
  return rep.pass ? kExitOk : kExitViolation;
}

int cmd_scenarios(const std::string& name) {
  if (name.empty()) {
    for (const auto& [key, text] : embedded_scenarios()) {
      (void)text;
      std::cout << key << "\n";
    }
    return kExitOk;
  }
  const auto& table = embedded_scenarios();
  auto it = table.find(name);
  if (it == table.end()) {
    std::cerr << "error: no built-in scenario named '" << name << "'\n";
    return kExitError;
  }
  std::cout << it->second;
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("scenario", args.config,
                  "scenario JSON path or built-in scenario name");
  cmd->add_option("--config", args.config,
                  "scenario JSON path or built-in scenario name");
  cmd->add_option("--out", args.out_dir, "output directory for artifacts")
      ->each([&args](const std::string&) { args.out_given = true; });
  cmd->add_option("--seed", args.seed,
                  "seed for randomized scenarios (reserved; deterministic "
                  "scenarios ignore it)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Becker-Doring cluster dynamics: simulation and analysis"};
  app.require_subcommand(1);

  CommonArgs args;
  long horizon = 1000;
  Real ratio_tol = 1e-2;
  std::string scenario_name;

  CLI::App* sim = app.add_subcommand("simulate", "integrate a scenario and write CSV/JSON artifacts");
  add_common(sim, args);
  CLI::App* eq = app.add_subcommand("equilibrium", "phase classification and equilibrium or minimizing sequence");
  add_common(eq, args);
  CLI::App* cls = app.add_subcommand("classify", "long-time regime classification");
  add_common(cls, args);
  CLI::App* val = app.add_subcommand("validate", "check the structural model assumptions");
  add_common(val, args);
  val->add_option("--horizon", horizon, "largest cluster size sampled")
      ->check(CLI::PositiveNumber);
  val->add_option("--ratio-tol", ratio_tol, "relative deviation allowed for the ratio limit");
  CLI::App* scn = app.add_subcommand("scenarios", "list built-in scenarios or print one");
  scn->add_option("name", scenario_name, "scenario to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (eq->parsed()) return cmd_equilibrium(args);
    if (cls->parsed()) return cmd_classify(args);
    if (val->parsed()) return cmd_validate(args, horizon, ratio_tol);
    if (scn->parsed()) return cmd_scenarios(scenario_name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
