#pragma once

// Receding-horizon driver: solve the N_p-interval problem (centrally or by
// consensus ADMM), apply the first interval, propagate battery energies,
// validate with an AC load flow and roll forward.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "adn/admm.hpp"
#include "adn/assembly.hpp"
#include "adn/scenario.hpp"

namespace adn {

enum class Mode { Centralized, Distributed };

/// Reactive excess (pu) below which an exchange still counts as zone 1: the
/// tariff block admits zeta and the interior-point solver ~1e-9 beyond the
/// boundary.
inline constexpr double kZoneTolerance = 1e-6;

struct StageSolution {
  CentralizedProblem cp;        // layout the solution vector refers to
  std::vector<double> x;        // centralized layout (composite for distributed)
  double objective = 0.0;       // sum of stage costs, EUR
  double seconds = 0.0;
  int admm_iterations = 0;
  bool admm_converged = true;
  std::vector<AdmmIterationRecord> trace;
};

StageSolution solve_stage_centralized(const RadialNetwork& net, const StageInput& in,
                                      const solver::MiqpOptions& opts);
StageSolution solve_stage_distributed(const RadialNetwork& net, const StageInput& in, const AdmmConfig& cfg);

/// Writes the agents' own variables into the centralized layout: network
/// quantities from the ADN agent, device quantities from each microgrid.
std::vector<double> composite_solution(const CentralizedProblem& cp, const std::vector<AgentModel>& models,
                                       const std::vector<AgentState>& agents);

/// Linearization points for the next stage: the solution shifted by one
/// interval, the last interval repeated.
std::vector<LinearizationPoint> shifted_linearization(const RadialNetwork& net, const StageInput& in,
                                                      const CentralizedProblem& cp, std::span<const double> x);

struct MpcOptions {
  Mode mode = Mode::Centralized;
  int start = 0;
  int count = -1;  // intervals to run, -1 for all remaining
};

struct IntervalRecord {
  int k = 0;
  double tariff = 0.0;
  double p_ex = 0.0, q_ex = 0.0;          // optimizer exchange, pu
  double p_ex_nr = 0.0, q_ex_nr = 0.0;    // load-flow exchange, pu
  ZoneResult zone;                        // zone_oracle on the optimizer exchange, kZoneTolerance
  double c_tn = 0.0;                      // optimizer penalty variable, EUR
  double would_be_penalty = 0.0;          // zone_oracle cost, EUR
  double load_p = 0.0, load_q = 0.0;      // total network demand before curtailment, pu
  double q_inv_total = 0.0;
  std::vector<double> e_before, p_bat, e_after, e_planned, q_inv, net_generation;  // per microgrid
  std::vector<double> v_nr, v_opt;        // per bus magnitudes
  double max_voltage_deviation = 0.0;     // max |v_opt - v_nr| / v_nr
  int nr_iterations = 0;
  CostBreakdown cost;
  int admm_iterations = 0;
  bool admm_converged = true;
  double stage_seconds = 0.0;
};

struct RunReport {
  Mode mode = Mode::Centralized;
  bool voltage_support = true;
  std::vector<IntervalRecord> intervals;
  CostBreakdown totals;
  double would_be_penalty = 0.0;
  double wall_seconds = 0.0;
  bool completed = true;
  std::string failure;  // set when a stage was infeasible or the load flow diverged
  std::vector<AdmmIterationRecord> last_trace;

  int zone2_count() const;
  double min_voltage() const;
  double max_voltage() const;
  double max_voltage_deviation() const;
};

/// `net` must carry the scenario's microgrids (Scenario::attach).
RunReport run_mpc(const RadialNetwork& net, const Scenario& sc, const MpcOptions& opts);

/// Stage at interval t with the scenario's initial energies and a forecast
/// linearization.
StageInput representative_stage(const RadialNetwork& net, const Scenario& sc, int t);

struct Comparison {
  double centralized_objective = 0.0;
  std::vector<double> centralized_binaries;
  SharedVector y_cent;
  AdmmResult admm;
  std::vector<double> error_a_trace;  // per ADMM iteration
  double error_a = 0.0;
  double error_b = 0.0;
  CostBreakdown centralized_cost, distributed_cost;
};

/// Centralized and distributed solves of one stage. With `fix_binaries` the
/// ADN agent's binaries are pinned to the centralized optimum.
Comparison compare_modes(const RadialNetwork& net, const StageInput& in, const AdmmConfig& cfg,
                         bool fix_binaries = false);

struct SweepRow {
  double rho = 0.0, epsilon = 0.0;
  int iterations = 0;
  bool converged = false;
  double adn_seconds = 0.0;  // mean per-iteration solve time
  double mg_seconds = 0.0;   // mean over microgrids
  double error_a = 0.0, error_b = 0.0;
};

std::vector<SweepRow> sweep_rho(const RadialNetwork& net, const StageInput& in, const AdmmConfig& base,
                                const std::vector<double>& rhos, const std::vector<double>& epsilons);

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows);
void write_report(std::ostream& out, const RunReport& r);
void write_trace(std::ostream& out, const std::vector<AdmmIterationRecord>& trace);

/// One flat table per figure: exchange.tsv, zones.tsv, inverter_q.tsv,
/// bess.tsv, voltage.tsv, costs.tsv, residual.tsv. Throws IoError.
void emit_plots(const RunReport& r, const AsParameters& as, const std::filesystem::path& dir);

}  // namespace adn
