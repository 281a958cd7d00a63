#pragma once

// Fully distributed consensus ADMM between the ADN agent (node 0) and one
// agent per microgrid. Every agent keeps a full copy of the shared vector
// (P^inj, Q^inj at every microgrid bus over the horizon), updates its own
// multipliers from its neighbours' copies and solves a proximal subproblem.
// Rounds are synchronous: all agents read the copies broadcast in round t.

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "adn/assembly.hpp"
#include "adn/solver/solve.hpp"

namespace adn {

struct CommGraph {
  std::vector<std::vector<int>> neighbors;  // sorted, no self loops

  std::size_t size() const { return neighbors.size(); }
  static CommGraph complete(int nodes);
  static CommGraph star(int nodes);  // every microgrid talks to the ADN only
  static CommGraph ring(int nodes);  // ring over all nodes plus the ADN spokes
  /// Throws InvalidParameters unless connected and every node is adjacent to 0.
  void validate() const;
};

/// Layout of the shared vector: index = (m * 2 + c) * horizon + k with
/// m the microgrid, c = 0 for P^inj and 1 for Q^inj, k the interval.
struct SharedLayout {
  int microgrids = 0;
  int horizon = 0;

  std::size_t size() const { return static_cast<std::size_t>(2 * microgrids * horizon); }
  std::size_t index(int m, int c, int k) const {
    return static_cast<std::size_t>((m * 2 + c) * horizon + k);
  }
};

using SharedVector = std::vector<double>;

struct AgentState {
  int id = 0;
  SharedVector y, y_hat, lambda;
  std::map<int, SharedVector> neighbor_y;
  std::vector<double> z;  // full local solution of the last subproblem
  double cost = 0.0;      // cost-only part of the last subproblem, EUR
  double solve_seconds = 0.0;

  static AgentState initial(int id, const SharedVector& y0);
};

/// lambda += rho * sum_m (y - y_m) over the stored neighbour copies.
/// Throws MissingNeighborMessage if a neighbour of `graph` has no copy.
void dual_update(AgentState& a, const CommGraph& graph, double rho);

/// A local problem without consensus terms plus the position of each shared
/// component among its variables. The objective is the agent's cost.
struct AgentModel {
  solver::MiqpProblem problem;
  std::vector<solver::Index> y_vars;  // in SharedLayout order
  std::optional<AdnVariables> adn;    // set for the ADN agent
  std::optional<MgVariables> mg;      // own variables of a microgrid agent
};

AgentModel adn_agent_model(const RadialNetwork& net, const StageInput& in);
AgentModel mg_agent_model(const RadialNetwork& net, const StageInput& in, int mg);

/// Adds y'lambda + rho sum_m ||y - (y_hat + y_m)/2||^2 to a copy of the model.
solver::MiqpProblem augment(const AgentModel& model, const AgentState& a, double rho);

solver::MiqpProblem build_adn_subproblem(const AgentState& a, const RadialNetwork& net,
                                         const StageInput& in, double rho);
solver::MiqpProblem build_mg_subproblem(const AgentState& a, const RadialNetwork& net,
                                        const StageInput& in, int mg, double rho);

struct AdmmConfig {
  double rho = 160.0;
  // Optional switch: rho becomes rho_after once the residual drops below rho_switch.
  double rho_switch = 0.0;
  double rho_after = 0.0;
  double epsilon = 1e-4;
  int max_iters = 1000;
  int min_iters = 1;  // rounds always performed before the stopping test
  CommGraph graph;
  bool parallel = true;
  solver::MiqpOptions miqp;
  SharedVector y0;  // empty means zeros

  double rho_at(double residual) const;
};

struct AdmmIterationRecord {
  int iteration = 0;
  double residual = 0.0;        // max_j ||y_j - avg(neighbours)||^2
  std::vector<double> agent_residual;
  std::vector<double> agent_cost;
  double cost_sum = 0.0;
  double rho = 0.0;
};

struct AdmmResult {
  std::vector<AgentState> agents;
  int iterations = 0;
  bool converged = false;
  std::vector<AdmmIterationRecord> trace;
  double wall_seconds = 0.0;
  std::vector<double> mean_solve_seconds;  // per agent, over all rounds
};

/// Consensus residual of every agent for the current copies.
std::vector<double> consensus_residuals(const std::vector<AgentState>& agents,
                                        const CommGraph& graph);

/// Runs synchronous rounds until every agent's residual is below epsilon or
/// max_iters is reached (then the iterate with the smallest residual is
/// returned with converged = false). Throws SubproblemInfeasible.
AdmmResult run_admm(std::vector<AgentModel> models, const AdmmConfig& cfg);

/// Sequential reference: the same rounds with agents solved one after another.
AdmmResult run_admm_serial(std::vector<AgentModel> models, const AdmmConfig& cfg);

/// Models of every agent of a stage, ADN first. When `fixed_binaries` is
/// given, the ADN's binaries are pinned to those values (in problem order).
std::vector<AgentModel> stage_agents(const RadialNetwork& net, const StageInput& in,
                                     const std::vector<double>* fixed_binaries = nullptr);

/// Shared vector of a centralized solution.
SharedVector shared_from_centralized(const CentralizedProblem& cp, std::span<const double> x,
                                     const SharedLayout& layout);

double error_a(double centralized_obj, double agent_cost_sum);
double error_b(const SharedVector& y_cent, const std::vector<SharedVector>& agent_ys);

}  // namespace adn
