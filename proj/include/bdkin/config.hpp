#ifndef BDKIN_CONFIG_HPP_
#define BDKIN_CONFIG_HPP_

#include <optional>
#include <string>
#include <vector>

#include "bdkin/integrate.hpp"
#include "bdkin/ladder.hpp"
#include "bdkin/longtime.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

/// Initial data: all mass in free atoms, an explicit state vector, or the
/// equilibrium state of the configured ladder at a given mass.
struct InitialSpec {
  enum class Kind { monodisperse, explicit_values, equilibrium };
  Kind kind = Kind::monodisperse;
  Real rho0 = 1.0; // monodisperse mass or equilibrium mass
  Array values;    // explicit kind only
};

struct AnalysisSpec {
  Real R_prime = -1.0; // certificate threshold; < 0 lets the regime rules pick
  Real eta0 = 0.5;     // majorant cone parameter for exports
  Index l0 = 1;
  std::vector<Index> minimizing_m = {5, 10, 20, 40, 80};
  RegimeBudget regime;
};

/// A full scenario: model block, initial data, integrator, analysis knobs.
/// Parsed from JSON; unknown model/ladder/kinetics kinds and structurally
/// invalid values throw std::runtime_error with a field diagnostic.
struct ScenarioConfig {
  std::string name;
  bool standard_model = false;
  std::optional<EnergyLadder> ladder; // engaged for the modified model
  KineticCoefficients kinetics;
  StandardModelParams standard; // used when standard_model is true
  Index truncation = 2;
  InitialSpec initial;
  IntegratorConfig integrator;
  AnalysisSpec analysis;
  bool write_snapshots = false;
};

ScenarioConfig parse_scenario_json(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

/// Materializes the configured initial state at the configured truncation.
Array initial_state(const ScenarioConfig& cfg);

} // namespace bdkin

#endif // BDKIN_CONFIG_HPP_
