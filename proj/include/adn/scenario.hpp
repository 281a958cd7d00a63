#pragma once

// Scenario ingestion: a config document ([mpc] [ancillary] [solver] [admm]
// [microgrid] [microgrid.<bus>]) plus a timeline table. The microgrid set is
// [microgrid] buses (source ids) together with every [microgrid.<bus>]
// section; [microgrid] holds defaults, [microgrid.<bus>] overrides. Sections
// without keys are dropped by the reader, so list plain microgrids in buses.
//
// Timeline table: whitespace separated, '#' comments, one header line naming
// the columns, one row per interval. Required columns:
//   interval  tariff  load  pv  mg_load
// tariff is EUR/kWh, load multiplies every nominal bus load, pv is the
// fraction of rated PV output and mg_load the fraction of the microgrid peak
// load. Optional columns pv.<bus> and mg_load.<bus> override per microgrid.

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "adn/admm.hpp"
#include "adn/assembly.hpp"
#include "adn/config.hpp"
#include "adn/grid.hpp"
#include "adn/microgrid.hpp"
#include "adn/solver/solve.hpp"
#include "adn/voltage_support.hpp"

namespace adn {

struct MicrogridConfig {
  int source_bus = 0;
  double pv_peak_kw = 400.0;
  double s_inv_kva = 250.0;
  double capacity_kwh = 600.0;
  double p_bat_kw = 100.0;
  double eta_h = 0.225;
  double beta_b = 0.1519;
  double beta_c = 0.506;
  double cos_omega = 0.8;
  int segments = 16;
  double e_init_frac = 0.5;    // initial energy, fraction of capacity
  double load_peak_kw = 300.0;
  double ac_fraction = 0.5;    // share of the local load on the AC side

  void validate() const;
};

struct ScenarioTimeline {
  int intervals = 0;
  double dt_minutes = 15.0;
  std::vector<double> tariff;                 // EUR/kWh
  std::vector<double> load;                   // nominal-load multiplier
  std::vector<std::vector<double>> pv;        // [mg][k], fraction of rated output
  std::vector<std::vector<double>> mg_load;   // [mg][k], fraction of peak load
  AsParameters as;
  double peak_exchange_estimate = 0.0;        // pu

  double dt_hours() const { return dt_minutes / 60.0; }
  std::size_t length() const { return tariff.size(); }
  /// Repeats the final row until every series covers intervals + horizon.
  void pad(int horizon);
  /// Throws InvalidParameters or HorizonMismatch.
  void validate(int horizon) const;
};

/// `mg_sources` orders the microgrid columns. Throws ParseError.
ScenarioTimeline read_timeline(std::istream& in, const std::vector<int>& mg_sources);

struct Scenario {
  ScenarioTimeline timeline;
  std::vector<MicrogridConfig> microgrids;  // ascending source bus; timeline columns follow this order
  int horizon = 4;
  double v_min = 0.95, v_max = 1.05;
  double slack_v = 1.0;
  double beta_loss = 0.075;
  double load_scale = 1.0;  // multiplies the network's nominal loads
  bool voltage_support = true;
  std::string graph = "complete";
  solver::MiqpOptions solver;
  AdmmConfig admm;  // graph left empty; built per network

  std::vector<int> microgrid_sources() const;
  /// The network with exactly this scenario's microgrids attached.
  RadialNetwork attach(const RadialNetwork& net) const;
  CommGraph comm_graph() const;
  /// Adds microgrids at `sources` (already present ones are skipped), each a
  /// copy of the first microgrid's ratings and profiles. Throws
  /// InvalidParameters when the scenario has no microgrid to copy.
  Scenario with_extra_microgrids(const std::vector<int>& sources) const;
  /// Position in `microgrids` of the config for a (dense) microgrid bus.
  std::size_t microgrid_index(const RadialNetwork& net, BusId bus) const;
};

/// Reads the config and the timeline it names ([mpc] timeline, relative to
/// the config's directory). Peak exchange and base power come from `net`.
Scenario load_scenario(const std::filesystem::path& config, const PerUnitBase& base);
Scenario scenario_from_config(const Config& cfg, std::istream& timeline, const PerUnitBase& base);

/// Microgrid spec for forecasts starting at interval t.
MicrogridSpec microgrid_spec(const MicrogridConfig& mg, std::size_t index, const ScenarioTimeline& tl,
                             const PerUnitBase& base, BusId bus, int t, int horizon, double e_now);

/// Stage problem data for intervals t .. t+horizon-1. `e_now` is per
/// microgrid in network order; `lin` must hold `horizon` points.
StageInput make_stage(const RadialNetwork& net, const Scenario& sc, int t, const std::vector<double>& e_now,
                      std::vector<LinearizationPoint> lin);

/// Linearization points from AC load flows of the forecast injections
/// (microgrid injection = PV - load, inverter idle).
std::vector<LinearizationPoint> forecast_linearization(const RadialNetwork& net, const Scenario& sc, int t);

/// Initial microgrid energies in network order, pu h.
std::vector<double> initial_energies(const RadialNetwork& net, const Scenario& sc);

}  // namespace adn
