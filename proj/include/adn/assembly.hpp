#pragma once

// Multi-interval scheduling problem: linearized branch flow over the ADN,
// the voltage-support blocks at the substation and the microgrid models.
// Cost terms are expressed in euros per stage.

#include <optional>
#include <span>
#include <vector>

#include "adn/grid.hpp"
#include "adn/microgrid.hpp"
#include "adn/power_flow.hpp"
#include "adn/solver/problem.hpp"
#include "adn/voltage_support.hpp"

namespace adn {

/// Everything one N_p-interval optimization needs.
struct StageInput {
  int horizon = 4;
  double dt_hours = 0.25;
  double v_min = 0.95, v_max = 1.05;
  double slack_v = 1.0;
  double beta_loss = 0.075;                       // EUR/kWh
  std::vector<double> tariff;                     // EUR/kWh per interval
  std::vector<std::vector<double>> p_load, q_load;  // [k][bus], pu; microgrid buses ignored
  std::vector<LinearizationPoint> lin;            // per interval
  std::vector<MicrogridSpec> mgs;                 // in microgrid-bus order, forecasts over the horizon
  bool voltage_support = true;
  AsParameters as;

  /// kWh represented by 1 pu held for one interval.
  double energy_weight(const RadialNetwork& net) const;
  void validate(const RadialNetwork& net) const;
};

struct AdnIntervalVars {
  std::vector<solver::Index> p_flow, q_flow, i_sq;  // per line
  std::vector<solver::Index> v_sq;                  // per bus
  std::vector<long> p_curt;                         // per bus, -1 where absent
  std::vector<solver::Index> mg_p_inj, mg_q_inj;    // per microgrid
  solver::Index p_ex = 0, q_ex = 0;
  std::optional<AsVariables> as;
};

struct AdnVariables {
  std::vector<AdnIntervalVars> k;
};

/// Whose view of the microgrid injections the ADN rows use.
enum class AdnRole {
  Centralized,  // injections supplied by the microgrid models, tariff on P^ex only
  Agent,        // the ADN keeps its own copies and pays for P^ex - sum P^inj
};

/// Adds the ADN rows of every interval. For AdnRole::Centralized `mg_inj`
/// lists the microgrid variables to tie into the balance rows.
AdnVariables add_adn_constraints(solver::MiqpProblem& prob, const RadialNetwork& net,
                                 const StageInput& in, AdnRole role,
                                 std::span<const MgVariables> mg_inj = {});

struct CentralizedProblem {
  solver::MiqpProblem problem;
  AdnVariables adn;
  std::vector<MgVariables> mgs;
};

CentralizedProblem assemble_centralized(const RadialNetwork& net, const StageInput& in);

struct CostBreakdown {
  double energy = 0.0;       // tariff times exchange
  double penalty = 0.0;      // voltage-support C^tn
  double loss = 0.0;
  double curtailment = 0.0;  // non-microgrid and microgrid
  double bess = 0.0;

  double total() const { return energy + penalty + loss + curtailment + bess; }
  CostBreakdown& operator+=(const CostBreakdown& o);
};

/// Cost of one interval of a centralized solution, by category.
CostBreakdown interval_costs(const RadialNetwork& net, const StageInput& in,
                             const CentralizedProblem& cp, std::span<const double> x, int k);

/// Injections (generation minus load) per bus for interval k of a solution,
/// suitable for the AC load flow.
std::vector<std::complex<double>> bus_injections(const RadialNetwork& net, const StageInput& in,
                                                 const AdnVariables& adn,
                                                 std::span<const double> x, int k);

/// Branch-flow state of interval k as seen by the optimizer.
DistFlowState extract_state(const RadialNetwork& net, const AdnVariables& adn,
                            std::span<const double> x, int k,
                            std::span<const std::complex<double>> injections);

}  // namespace adn
