#include "adn/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "adn/error.hpp"

namespace adn {

using solver::Index;
using solver::kInf;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double squared_distance_to_average(const SharedVector& y, const std::vector<const SharedVector*>& others) {
  if (others.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(others.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double avg = 0.0;
    for (const SharedVector* o : others) avg += (*o)[i];
    const double d = y[i] - avg * inv;
    sum += d * d;
  }
  return sum;
}

}  // namespace

CommGraph CommGraph::complete(int nodes) {
  CommGraph g;
  g.neighbors.resize(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      if (i != j) g.neighbors[i].push_back(j);
    }
  }
  return g;
}

CommGraph CommGraph::star(int nodes) {
  CommGraph g;
  g.neighbors.resize(static_cast<std::size_t>(nodes));
  for (int i = 1; i < nodes; ++i) {
    g.neighbors[0].push_back(i);
    g.neighbors[i].push_back(0);
  }
  return g;
}

CommGraph CommGraph::ring(int nodes) {
  CommGraph g = star(nodes);
  for (int i = 1; i < nodes; ++i) {
    const int next = i + 1 < nodes ? i + 1 : 1;
    if (next == i) continue;
    g.neighbors[i].push_back(next);
    g.neighbors[next].push_back(i);
  }
  for (auto& n : g.neighbors) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return g;
}

void CommGraph::validate() const {
  const int n = static_cast<int>(neighbors.size());
  if (n < 1) throw Error(ErrorCode::InvalidParameters, "communication graph has no nodes");
  for (int i = 0; i < n; ++i) {
    for (int j : neighbors[i]) {
      if (j < 0 || j >= n || j == i) {
        throw Error(ErrorCode::InvalidParameters, "bad neighbour " + std::to_string(j) + " of node " + std::to_string(i));
      }
      if (!std::binary_search(neighbors[j].begin(), neighbors[j].end(), i)) {
        throw Error(ErrorCode::InvalidParameters, "communication graph is not symmetric");
      }
    }
    if (i > 0 && !std::binary_search(neighbors[0].begin(), neighbors[0].end(), i)) {
      throw Error(ErrorCode::InvalidParameters, "microgrid agent " + std::to_string(i) + " cannot reach the ADN agent");
    }
  }
  if (n > 1 && neighbors[0].empty()) {
    throw Error(ErrorCode::InvalidParameters, "communication graph is not connected");
  }
}

AgentState AgentState::initial(int id, const SharedVector& y0) {
  AgentState a;
  a.id = id;
  a.y = y0;
  a.y_hat = y0;
  a.lambda.assign(y0.size(), 0.0);
  return a;
}

void dual_update(AgentState& a, const CommGraph& graph, double rho) {
  for (int m : graph.neighbors.at(static_cast<std::size_t>(a.id))) {
    auto it = a.neighbor_y.find(m);
    if (it == a.neighbor_y.end()) {
      throw Error(ErrorCode::MissingNeighborMessage,
                  "agent " + std::to_string(a.id) + " has no copy from neighbour " + std::to_string(m));
    }
    if (it->second.size() != a.y.size()) {
      throw Error(ErrorCode::DimensionMismatch, "neighbour copy has the wrong length");
    }
    for (std::size_t i = 0; i < a.y.size(); ++i) a.lambda[i] += rho * (a.y[i] - it->second[i]);
  }
}

AgentModel adn_agent_model(const RadialNetwork& net, const StageInput& in) {
  AgentModel model;
  model.adn = add_adn_constraints(model.problem, net, in, AdnRole::Agent);
  const AdnVariables& v = *model.adn;
  const SharedLayout layout{static_cast<int>(net.microgrid_buses().size()), in.horizon};
  model.y_vars.resize(layout.size());
  for (int m = 0; m < layout.microgrids; ++m) {
    for (int k = 0; k < in.horizon; ++k) {
      model.y_vars[layout.index(m, 0, k)] = v.k[k].mg_p_inj[m];
      model.y_vars[layout.index(m, 1, k)] = v.k[k].mg_q_inj[m];
    }
  }
  return model;
}

AgentModel mg_agent_model(const RadialNetwork& net, const StageInput& in, int mg) {
  in.validate(net);
  const SharedLayout layout{static_cast<int>(net.microgrid_buses().size()), in.horizon};
  if (mg < 0 || mg >= layout.microgrids) {
    throw Error(ErrorCode::DimensionMismatch, "no microgrid " + std::to_string(mg));
  }
  AgentModel model;
  MgCostWeights w;
  w.energy_weight = in.energy_weight(net);
  w.tariff.assign(in.tariff.begin(), in.tariff.begin() + in.horizon);
  model.mg = build_mg_constraints(model.problem, in.mgs[mg], in.horizon, w);
  const MgVariables& own = *model.mg;
  model.y_vars.resize(layout.size());
  // Copies of the other microgrids' injections appear only in the consensus terms.
  for (int m = 0; m < layout.microgrids; ++m) {
    for (int k = 0; k < in.horizon; ++k) {
      for (int c = 0; c < 2; ++c) {
        Index var;
        if (m == mg) {
          var = c == 0 ? own.p_inj[k] : own.q_inj[k];
        } else {
          var = model.problem.add_variable(-kInf, kInf, 0.0,
                                           "copy_" + std::to_string(m) + "_" + std::to_string(c) + "[" +
                                               std::to_string(k) + "]");
        }
        model.y_vars[layout.index(m, c, k)] = var;
      }
    }
  }
  return model;
}

solver::MiqpProblem augment(const AgentModel& model, const AgentState& a, double rho) {
  solver::MiqpProblem p = model.problem;
  const std::size_t n = a.neighbor_y.size();
  if (n == 0) return p;
  for (std::size_t i = 0; i < model.y_vars.size(); ++i) {
    const Index var = model.y_vars[i];
    double target_sum = 0.0, target_sq = 0.0;
    for (const auto& [m, ym] : a.neighbor_y) {
      const double t = 0.5 * (a.y_hat[i] + ym[i]);
      target_sum += t;
      target_sq += t * t;
    }
    // rho * ||y - t||^2 per neighbour: with the rho-sized dual step a half
    // weight leaves the disagreement mode at eigenvalue -1 and never settles.
    p.add_quadratic(var, var, 2.0 * rho * static_cast<double>(n));
    p.cost[var] += a.lambda[i] - 2.0 * rho * target_sum;
    p.objective_constant += rho * target_sq;
  }
  return p;
}

namespace {

void store_neighbor_copies(AgentState& a, const CommGraph& g, const std::vector<SharedVector>& broadcast) {
  a.neighbor_y.clear();
  for (int m : g.neighbors.at(static_cast<std::size_t>(a.id))) a.neighbor_y[m] = broadcast.at(m);
}

}  // namespace

solver::MiqpProblem build_adn_subproblem(const AgentState& a, const RadialNetwork& net,
                                         const StageInput& in, double rho) {
  return augment(adn_agent_model(net, in), a, rho);
}

solver::MiqpProblem build_mg_subproblem(const AgentState& a, const RadialNetwork& net,
                                        const StageInput& in, int mg, double rho) {
  return augment(mg_agent_model(net, in, mg), a, rho);
}

double AdmmConfig::rho_at(double residual) const {
  if (rho_switch > 0.0 && rho_after > 0.0 && residual < rho_switch) return rho_after;
  return rho;
}

std::vector<double> consensus_residuals(const std::vector<AgentState>& agents, const CommGraph& graph) {
  std::vector<double> r(agents.size(), 0.0);
  for (std::size_t j = 0; j < agents.size(); ++j) {
    std::vector<const SharedVector*> others;
    for (int m : graph.neighbors.at(j)) others.push_back(&agents.at(m).y);
    r[j] = squared_distance_to_average(agents[j].y, others);
  }
  return r;
}

namespace {

AdmmResult run_rounds(std::vector<AgentModel> models, const AdmmConfig& cfg, bool parallel) {
  const auto t_start = std::chrono::steady_clock::now();
  if (!(cfg.rho > 0.0) || !(cfg.epsilon > 0.0) || cfg.max_iters < 1) {
    throw Error(ErrorCode::InvalidParameters, "ADMM needs rho > 0, epsilon > 0 and max_iters >= 1");
  }
  cfg.graph.validate();
  const std::size_t n_agents = models.size();
  if (cfg.graph.size() != n_agents) {
    throw Error(ErrorCode::DimensionMismatch, "graph size differs from the agent count");
  }
  const std::size_t n_sh = models.front().y_vars.size();
  for (const AgentModel& m : models) {
    if (m.y_vars.size() != n_sh) throw Error(ErrorCode::DimensionMismatch, "agents disagree on the shared layout");
  }
  SharedVector y0 = cfg.y0.empty() ? SharedVector(n_sh, 0.0) : cfg.y0;
  if (y0.size() != n_sh) throw Error(ErrorCode::DimensionMismatch, "y0 has the wrong length");

  std::vector<AgentState> agents;
  for (std::size_t j = 0; j < n_agents; ++j) agents.push_back(AgentState::initial(static_cast<int>(j), y0));

  solver::MiqpOptions sub_opts = cfg.miqp;
  sub_opts.parallel = false;  // agents already run concurrently

  AdmmResult res;
  std::vector<double> solve_total(n_agents, 0.0);
  std::vector<std::exception_ptr> errors(n_agents);
  std::vector<AgentState> best;
  double best_residual = std::numeric_limits<double>::infinity();
  double last_residual = std::numeric_limits<double>::infinity();
  bool switched = false;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    double rho = cfg.rho;
    if (switched || cfg.rho_at(last_residual) != cfg.rho) {
      switched = true;
      rho = cfg.rho_after;
    }
    // Broadcast of round t-1 is the snapshot every agent reads this round.
    std::vector<SharedVector> broadcast;
    broadcast.reserve(n_agents);
    for (const AgentState& a : agents) broadcast.push_back(a.y);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::size_t j = 0; j < n_agents; ++j) {
      try {
        AgentState& a = agents[j];
        store_neighbor_copies(a, cfg.graph, broadcast);
        dual_update(a, cfg.graph, rho);
        a.y_hat = a.y;
        const auto t0 = std::chrono::steady_clock::now();
        const solver::MiqpProblem sub = augment(models[j], a, rho);
        const solver::Solution sol = solver::solve_miqp(sub, sub_opts);
        a.solve_seconds = seconds_since(t0);
        solve_total[j] += a.solve_seconds;
        const bool usable =
            sol.status == solver::Status::Optimal ||
            (sol.status == solver::Status::IterLimit && !sol.x.empty() && sub.max_violation(sol.x) < 1e-6);
        if (!usable) {
          throw Error(ErrorCode::SubproblemInfeasible,
                      "agent " + std::to_string(j) + " at iteration " + std::to_string(t) + ": " +
                          solver::to_string(sol.status));
        }
        a.z = sol.x;
        for (std::size_t i = 0; i < n_sh; ++i) a.y[i] = sol.x[models[j].y_vars[i]];
        a.cost = models[j].problem.objective(sol.x);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    AdmmIterationRecord rec;
    rec.iteration = t;
    rec.rho = rho;
    rec.agent_residual = consensus_residuals(agents, cfg.graph);
    rec.residual = *std::max_element(rec.agent_residual.begin(), rec.agent_residual.end());
    for (const AgentState& a : agents) {
      rec.agent_cost.push_back(a.cost);
      rec.cost_sum += a.cost;
    }
    res.trace.push_back(rec);
    res.iterations = t;
    last_residual = rec.residual;
    if (rec.residual < best_residual) {
      best_residual = rec.residual;
      best = agents;
    }
    if (t >= cfg.min_iters && rec.residual < cfg.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.agents = res.converged ? std::move(agents) : std::move(best);
  for (double s : solve_total) res.mean_solve_seconds.push_back(s / res.iterations);
  res.wall_seconds = seconds_since(t_start);
  return res;
}

}  // namespace

AdmmResult run_admm(std::vector<AgentModel> models, const AdmmConfig& cfg) {
  return run_rounds(std::move(models), cfg, cfg.parallel);
}

AdmmResult run_admm_serial(std::vector<AgentModel> models, const AdmmConfig& cfg) {
  return run_rounds(std::move(models), cfg, false);
}

std::vector<AgentModel> stage_agents(const RadialNetwork& net, const StageInput& in,
                                     const std::vector<double>* fixed_binaries) {
  std::vector<AgentModel> agents;
  agents.push_back(adn_agent_model(net, in));
  if (fixed_binaries) {
    solver::MiqpProblem& p = agents.front().problem;
    const auto bins = p.binaries();
    if (bins.size() != fixed_binaries->size()) {
      throw Error(ErrorCode::DimensionMismatch, "fixed binaries do not match the ADN agent");
    }
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double v = std::round((*fixed_binaries)[i]);
      p.lower[bins[i]] = v;
      p.upper[bins[i]] = v;
    }
  }
  for (std::size_t m = 0; m < net.microgrid_buses().size(); ++m) {
    agents.push_back(mg_agent_model(net, in, static_cast<int>(m)));
  }
  return agents;
}

SharedVector shared_from_centralized(const CentralizedProblem& cp, std::span<const double> x,
                                     const SharedLayout& layout) {
  SharedVector y(layout.size());
  for (int m = 0; m < layout.microgrids; ++m) {
    for (int k = 0; k < layout.horizon; ++k) {
      y[layout.index(m, 0, k)] = x[cp.mgs.at(m).p_inj.at(k)];
      y[layout.index(m, 1, k)] = x[cp.mgs.at(m).q_inj.at(k)];
    }
  }
  return y;
}

double error_a(double centralized_obj, double agent_cost_sum) {
  if (centralized_obj == 0.0) {
    throw Error(ErrorCode::ZeroDenominator, "centralized objective is zero");
  }
  return std::abs(centralized_obj - agent_cost_sum) / std::abs(centralized_obj);
}

double error_b(const SharedVector& y_cent, const std::vector<SharedVector>& agent_ys) {
  double sum = 0.0;
  std::size_t kept = 0;
  for (std::size_t j = 0; j < y_cent.size(); ++j) {
    if (std::abs(y_cent[j]) < 1e-6) continue;
    ++kept;
    for (const SharedVector& y : agent_ys) {
      if (y.size() != y_cent.size()) throw Error(ErrorCode::DimensionMismatch, "copy length differs");
      sum += std::abs(y_cent[j] - y[j]) / std::abs(y_cent[j]);
    }
  }
  if (kept == 0 || agent_ys.empty()) {
    throw Error(ErrorCode::AllComponentsSkipped, "no shared component is large enough to compare");
  }
  return sum / static_cast<double>(kept * agent_ys.size());
}

}  // namespace adn
