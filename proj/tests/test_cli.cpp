#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

#include "schema_check.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output; // stdout and stderr, interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(BDKIN_BIN) + " " + args + " 2>&1";
  std::FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

fs::path work_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("bdkin_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json load_schema(const char* name) {
  return json::parse(read_file(fs::path(BDKIN_SCHEMA_DIR) / name));
}

void check_schema(const json& schema, const json& value) {
  for (const std::string& err : schema_check::validate(schema, value))
    FAIL_CHECK(err);
}

const std::vector<std::string> kBuiltins = {
    "eq2_geometric", "eq3_inverted_geometric", "example1_neq", "example2_eq",
    "standard_model"};

} // namespace

TEST_CASE("scenario dumps match the checked-in files") {
  RunResult list = run_cli("scenarios");
  CHECK(list.exit_code == 0);
  std::string expected_listing;
  for (const std::string& name : kBuiltins) expected_listing += name + "\n";
  CHECK(list.output == expected_listing);

  for (const std::string& name : kBuiltins) {
    RunResult dump = run_cli("scenarios " + name);
    CHECK(dump.exit_code == 0);
    CHECK(dump.output ==
          read_file(fs::path(BDKIN_SCENARIO_DIR) / (name + ".json")));
  }

  RunResult missing = run_cli("scenarios nope");
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("no built-in scenario") != std::string::npos);
}

TEST_CASE("validate checks the declared structure") {
  const json schema = load_schema("assumption_report.schema.json");

  RunResult ok = run_cli("validate example1_neq");
  CHECK(ok.exit_code == 0);
  json j = json::parse(ok.output);
  check_schema(schema, j);
  CHECK(j.at("scenario") == "example1_neq");
  CHECK(j.at("pass") == true);
  CHECK(j.at("ratio_ok") == true);
  CHECK(j.at("gamma_decays") == true);

  CHECK(run_cli("validate --horizon 400 eq2_geometric").exit_code == 0);

  // A table ladder whose declared ratio limit does not match its rungs.
  const fs::path dir = work_dir("validate");
  json bad;
  bad["name"] = "misdeclared";
  bad["model"] = "modified";
  bad["truncation"] = 8;
  json a = json::array();
  a.push_back(0.0);
  for (int l = 2; l <= 40; ++l) a.push_back(0.5 * l);
  bad["ladder"] = {{"kind", "table"}, {"a", a}, {"R", 2.0}};
  write_file(dir / "misdeclared.json", bad.dump());

  RunResult fail =
      run_cli("validate --horizon 16 " + (dir / "misdeclared.json").string());
  CHECK(fail.exit_code == 2);
  json jf = json::parse(fail.output);
  check_schema(schema, jf);
  CHECK(jf.at("pass") == false);
  CHECK(jf.at("ratio_ok") == false);
  CHECK(jf.at("declared_R") == 2.0);
}

TEST_CASE("simulate writes deterministic artifacts named by the scenario") {
  const fs::path dir = work_dir("simulate");
  write_file(dir / "cfg_a.json", R"({
    "name": "smoke",
    "model": "modified",
    "ladder": {"kind": "geometric", "beta": 0.6931471805599453},
    "truncation": 32,
    "integrator": {"method": "rk45", "t_end": 5.0, "record_every": 1.0},
    "output": {"snapshots": true}
  })");

  RunResult first = run_cli("simulate " + (dir / "cfg_a.json").string() +
                            " --out " + (dir / "a").string());
  CHECK(first.exit_code == 0);
  json j = json::parse(first.output);
  check_schema(load_schema("simulate_report.schema.json"), j);
  CHECK(j.at("scenario") == "smoke");
  CHECK(j.at("status") == "ok");
  CHECK(j.at("rho0") == 1.0);
  CHECK(j.at("terminal").at("t") == 5.0);
  CHECK(j.at("monitors").at("truncation_affected") == false);

  // Artifacts are named by the scenario name, not the config file stem.
  const std::string traj_a = read_file(dir / "a" / "smoke_trajectory.csv");
  CHECK(traj_a.rfind("t,rho,N,A,A_tilde,lambda,maxJ,z_boundary\n", 0) == 0);
  const std::string snaps = read_file(dir / "a" / "smoke_snapshots.jsonl");
  CHECK(std::count(snaps.begin(), snaps.end(), '\n') == 6);
  const json report_file = json::parse(read_file(dir / "a" / "smoke_report.json"));
  CHECK(report_file == j);

  // Same scenario through --config into a fresh directory: identical bytes.
  RunResult second = run_cli("simulate --config " + (dir / "cfg_a.json").string() +
                             " --out " + (dir / "b").string());
  CHECK(second.exit_code == 0);
  CHECK(second.output == first.output);
  CHECK(read_file(dir / "b" / "smoke_trajectory.csv") == traj_a);
  CHECK(read_file(dir / "b" / "smoke_snapshots.jsonl") == snaps);
}

TEST_CASE("simulate reports boundary-starved truncations with exit 2") {
  const fs::path dir = work_dir("starved");
  write_file(dir / "starved.json", R"({
    "name": "starved",
    "model": "modified",
    "ladder": {"kind": "example1", "delta": 2.0, "gamma": 2.0},
    "kinetics": {"kind": "constant", "value": 20.0},
    "truncation": 8,
    "integrator": {"method": "rk45", "t_end": 500.0, "record_every": 50.0}
  })");

  RunResult r = run_cli("simulate " + (dir / "starved.json").string() +
                        " --out " + dir.string());
  CHECK(r.exit_code == 2);
  json j = json::parse(r.output);
  check_schema(load_schema("simulate_report.schema.json"), j);
  CHECK(j.at("status") == "ok");
  CHECK(j.at("monitors").at("truncation_affected") == true);
  CHECK(j.at("invariants").at("truncation_affected") == true);
}

TEST_CASE("equilibrium resolves both phases and flags the borderline") {
  const json schema = load_schema("equilibrium_result.schema.json");

  RunResult eq = run_cli("equilibrium eq2_geometric");
  CHECK(eq.exit_code == 0);
  json je = json::parse(eq.output);
  check_schema(schema, je);
  CHECK(je.at("verdict") == "EQ");
  CHECK(je.at("branch") == "f_at_1_gt_1");
  CHECK(je.at("mu_bar").get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(je.at("N_bar").get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(je.at("A_tilde").get<double>() ==
        doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-8));

  RunResult neq = run_cli("equilibrium example1_neq");
  CHECK(neq.exit_code == 0);
  json jn = json::parse(neq.output);
  check_schema(schema, jn);
  CHECK(jn.at("verdict") == "NEQ");
  CHECK(jn.at("branch") == "f_lt_1");
  REQUIRE(jn.at("minimizing_sequence").size() == 5);
  const json& row0 = jn.at("minimizing_sequence").at(0);
  CHECK(row0.at("m") == 5);
  CHECK(row0.at("value").get<double>() ==
        doctest::Approx(-0.00168166546749811873664).epsilon(1e-4));

  const fs::path dir = work_dir("borderline");
  write_file(dir / "borderline.json", R"({
    "name": "borderline",
    "model": "modified",
    "ladder": {"kind": "example1", "delta": 0.0720397143462391008378,
               "gamma": 2.0},
    "truncation": 16
  })");
  RunResult border =
      run_cli("equilibrium " + (dir / "borderline.json").string());
  CHECK(border.exit_code == 3);
  json jb = json::parse(border.output);
  check_schema(schema, jb);
  CHECK(jb.at("verdict") == "inconclusive");
}

TEST_CASE("classify labels the long-time regime") {
  const json schema = load_schema("regime_report.schema.json");
  const fs::path dir = work_dir("classify");

  write_file(dir / "relax.json", R"({
    "name": "relax",
    "model": "modified",
    "ladder": {"kind": "geometric", "beta": 0.6931471805599453},
    "truncation": 48,
    "analysis": {"regime": {"truncation": 48, "t_end": 100.0,
                            "record_every": 2.0}}
  })");
  RunResult eq2 = run_cli("classify " + (dir / "relax.json").string() +
                          " --out " + dir.string());
  CHECK(eq2.exit_code == 0);
  json j2 = json::parse(eq2.output);
  check_schema(schema, j2);
  CHECK(j2.at("label") == "EQ2");
  CHECK(j2.at("predicted_limit") == "equilibrium");
  CHECK(j2.at("simulated") == true);
  CHECK(j2.at("mass_certified") == true);
  CHECK(j2.at("R_prime") == 1.5);
  CHECK(j2.at("truncation_affected") == false);
  // --out writes the report plus the exported tail majorant.
  CHECK(json::parse(read_file(dir / "relax_regime.json")) == j2);
  const std::string sigma = read_file(dir / "relax_sigma.csv");
  CHECK(sigma.rfind("l,sigma_l\n", 0) == 0);

  write_file(dir / "deplete.json", R"({
    "name": "deplete",
    "model": "modified",
    "ladder": {"kind": "example1", "delta": 2.0, "gamma": 2.0},
    "truncation": 16,
    "analysis": {"regime": {"truncation": 48, "t_end": 100.0,
                            "record_every": 2.0}}
  })");
  RunResult neq = run_cli("classify " + (dir / "deplete.json").string());
  CHECK(neq.exit_code == 0);
  json jn = json::parse(neq.output);
  check_schema(schema, jn);
  CHECK(jn.at("label") == "NEQ");
  CHECK(jn.at("predicted_limit") == "zero_state");
  CHECK(jn.at("mu_bar").is_null());

  write_file(dir / "borderline.json", R"({
    "name": "borderline",
    "model": "modified",
    "ladder": {"kind": "example1", "delta": 0.0720397143462391008378,
               "gamma": 2.0},
    "truncation": 16
  })");
  RunResult open = run_cli("classify " + (dir / "borderline.json").string());
  CHECK(open.exit_code == 3);
  json jo = json::parse(open.output);
  check_schema(schema, jo);
  CHECK(jo.at("label") == "EQ1");
  CHECK(jo.at("predicted_limit") == "open");
  CHECK(jo.at("simulated") == false);
  CHECK(jo.at("A_tilde_terminal").is_null());
}

TEST_CASE("bad inputs exit 1 with a diagnostic") {
  RunResult missing = run_cli("simulate /nonexistent/x.json");
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("no such file or built-in scenario") !=
        std::string::npos);

  const fs::path dir = work_dir("badinput");
  write_file(dir / "short.json",
             R"({"model":"modified","ladder":{"kind":"geometric"},"truncation":1})");
  RunResult bad = run_cli("simulate " + (dir / "short.json").string());
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("truncation must be >= 2") != std::string::npos);

  for (const char* sub : {"equilibrium", "classify", "validate"}) {
    RunResult wrong = run_cli(std::string(sub) + " standard_model");
    CHECK(wrong.exit_code == 1);
    CHECK(wrong.output.find("requires the modified model") != std::string::npos);
  }

  CHECK(run_cli("simulate").exit_code == 1);
  CHECK(run_cli("").exit_code != 0);
}
