#ifndef BDKIN_IO_HPP_
#define BDKIN_IO_HPP_

#include <string>

#include "json.hpp"

#include "bdkin/energy.hpp"
#include "bdkin/equilibrium.hpp"
#include "bdkin/integrate.hpp"
#include "bdkin/kinetics.hpp"
#include "bdkin/longtime.hpp"
#include "bdkin/series.hpp"
#include "bdkin/types.hpp"

namespace bdkin {

/// Shortest exact decimal form (%.17g). All CSV numbers use this so files
/// are byte-identical across runs.
std::string format_real(Real v);

/// Time series with header t,rho,N,A,A_tilde,lambda,maxJ,z_boundary.
std::string trajectory_csv(const Trajectory& traj);

/// Full states, one JSON object {"t": ..., "z": [...]} per line.
std::string snapshots_jsonl(const Trajectory& traj);

/// State as CSV rows l,z_l.
std::string state_csv(const Array& z);

/// Generic indexed sequence as CSV rows l,<value_name>.
std::string sequence_csv(const Array& v, const std::string& value_name);

/// Free-atom fraction samples on a window, rows t,lambda.
std::string lambda_window_csv(const Trajectory& traj, Real t0, Real t1);

nlohmann::json state_to_json(const Array& z);
Array state_from_json(const nlohmann::json& j);

nlohmann::json series_value_to_json(const SeriesValue& v);
nlohmann::json classification_to_json(const EqClassification& c);
nlohmann::json equilibrium_to_json(const EquilibriumSolution& eq);
nlohmann::json monitor_log_to_json(const MonitorLog& m);
nlohmann::json invariant_report_to_json(const InvariantReport& r);
nlohmann::json availability_report_to_json(const AvailabilityReport& r);
nlohmann::json assumption_report_to_json(const AssumptionReport& r);
nlohmann::json mass_certificate_to_json(const MassCertificate& c);
nlohmann::json regime_report_to_json(const RegimeReport& r);

void write_text_file(const std::string& path, const std::string& content);

} // namespace bdkin

#endif // BDKIN_IO_HPP_
