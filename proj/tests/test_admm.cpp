#include <doctest.h>

#include <cmath>

#include "adn/admm.hpp"
#include "adn/error.hpp"
#include "adn/mpc.hpp"
#include "fixtures.hpp"

using namespace adn;

namespace {

// One shared scalar, cost (y - target)^2, y in [lo, hi].
AgentModel scalar_agent(double target, double lo = -10.0, double hi = 10.0) {
  AgentModel m;
  const auto y = m.problem.add_variable(lo, hi, -2.0 * target, "y");
  m.problem.add_quadratic(y, y, 2.0);
  m.problem.objective_constant = target * target;
  m.y_vars = {y};
  return m;
}

AdmmConfig toy_config(int n, double rho) {
  AdmmConfig c;
  c.rho = rho;
  c.epsilon = 1e-12;
  c.max_iters = 500;
  c.graph = CommGraph::complete(n);
  return c;
}

struct Stage {
  RadialNetwork net;
  StageInput in;
};

Stage fixture_stage(int horizon, int t) {
  const RadialNetwork raw = fixtures::feeder();
  Scenario sc = load_scenario("data/daily.ini", raw.base());
  sc.horizon = horizon;
  sc.timeline.pad(horizon);
  RadialNetwork net = sc.attach(raw);
  StageInput in = representative_stage(net, sc, t);
  return {std::move(net), std::move(in)};
}

}  // namespace

TEST_CASE("dual update") {
  const CommGraph g = CommGraph::complete(3);
  AgentState a = AgentState::initial(0, {1.0, 0.0});
  a.neighbor_y[1] = {0.0, 0.0};
  a.neighbor_y[2] = {1.0, 0.0};
  dual_update(a, g, 2.0);
  CHECK(a.lambda[0] == doctest::Approx(2.0));
  CHECK(a.lambda[1] == 0.0);

  // Disagreements on either side cancel.
  AgentState b = AgentState::initial(0, {1.0});
  b.neighbor_y[1] = {2.0};
  b.neighbor_y[2] = {0.0};
  dual_update(b, g, 5.0);
  CHECK(b.lambda[0] == 0.0);

  AgentState c = AgentState::initial(0, {1.0});
  c.neighbor_y[1] = {2.0};
  try {
    dual_update(c, g, 1.0);
    FAIL("expected MissingNeighborMessage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingNeighborMessage);
  }
}

TEST_CASE("consensus term gradient") {
  AgentModel m = scalar_agent(0.0);
  AgentState a = AgentState::initial(0, {0.7});
  a.lambda = {0.3};
  a.neighbor_y[1] = {1.5};
  a.neighbor_y[2] = {-0.2};
  const double rho = 4.0;
  const solver::MiqpProblem aug = augment(m, a, rho);
  // At y = y_hat the consensus gradient is rho sum_m (y_hat - y_m).
  const double h = 1e-6, y = 0.7;
  const std::vector<double> up{y + h}, dn{y - h};
  const double g_aug = (aug.objective(up) - aug.objective(dn)) / (2.0 * h);
  const double g_own = (m.problem.objective(up) - m.problem.objective(dn)) / (2.0 * h);
  const double expected = 0.3 + rho * ((0.7 - 1.5) + (0.7 + 0.2));
  CHECK(g_aug - g_own == doctest::Approx(expected).epsilon(1e-6));
  // Consensus term vanishes when all copies agree.
  AgentState b = AgentState::initial(0, {0.7});
  b.neighbor_y[1] = {0.7};
  const std::vector<double> at{0.7};
  CHECK(augment(m, b, rho).objective(at) == doctest::Approx(m.problem.objective(at)));
}

TEST_CASE("two agents agree on the average") {
  std::vector<AgentModel> models{scalar_agent(1.0), scalar_agent(3.0)};
  for (double rho : {0.5, 2.0, 20.0}) {
    AdmmConfig c = toy_config(2, rho);
    c.min_iters = 400;
    const AdmmResult r = run_admm(models, c);
    CHECK(r.converged);
    for (const AgentState& a : r.agents) CHECK(a.y[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.trace.back().cost_sum == doctest::Approx(2.0).epsilon(1e-6));
    for (const AgentState& a : r.agents) CHECK(std::abs(a.lambda[0]) == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("agreement can precede optimality") {
  // Stopping looks at disagreement only. A large rho makes the copies agree
  // within a few rounds and then walk together towards the optimum in steps
  // of order 1/rho.
  std::vector<AgentModel> models{scalar_agent(1.0), scalar_agent(3.0)};
  const AdmmResult r = run_admm(models, toy_config(2, 20.0));
  CHECK(r.converged);
  CHECK(r.iterations < 20);
  CHECK(std::abs(r.agents[0].y[0] - 2.0) > 0.1);
}

TEST_CASE("bounds of one agent bind the consensus") {
  std::vector<AgentModel> models{scalar_agent(1.0, 0.0, 1.5), scalar_agent(3.0), scalar_agent(2.0)};
  AdmmConfig c = toy_config(3, 1.0);
  c.graph = CommGraph::star(3);
  const AdmmResult r = run_admm(models, c);
  CHECK(r.converged);
  for (const AgentState& a : r.agents) CHECK(a.y[0] == doctest::Approx(1.5).epsilon(1e-5));
}

TEST_CASE("large rho pins the first round to the start") {
  std::vector<AgentModel> models{scalar_agent(1.0), scalar_agent(3.0)};
  AdmmConfig c = toy_config(2, 1e6);
  c.max_iters = 1;
  c.y0 = {0.5};
  const AdmmResult r = run_admm(models, c);
  for (const AgentState& a : r.agents) CHECK(std::abs(a.y[0] - 0.5) < 1e-5);
}

TEST_CASE("iteration cap returns the best iterate") {
  std::vector<AgentModel> models{scalar_agent(1.0), scalar_agent(3.0)};
  AdmmConfig c = toy_config(2, 0.01);
  c.max_iters = 3;
  const AdmmResult r = run_admm(models, c);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  const auto res = consensus_residuals(r.agents, c.graph);
  double best = 1e300;
  for (const auto& t : r.trace) best = std::min(best, t.residual);
  CHECK(*std::max_element(res.begin(), res.end()) == doctest::Approx(best));
}

TEST_CASE("configuration errors") {
  std::vector<AgentModel> models{scalar_agent(1.0), scalar_agent(3.0)};
  AdmmConfig c = toy_config(2, 0.0);
  CHECK_THROWS_AS(run_admm(models, c), Error);
  c = toy_config(3, 1.0);
  CHECK_THROWS_AS(run_admm(models, c), Error);
  c = toy_config(2, 1.0);
  c.y0 = {1.0, 2.0};
  CHECK_THROWS_AS(run_admm(models, c), Error);
  // An empty feasible set surfaces as SubproblemInfeasible.
  AgentModel bad = scalar_agent(0.0);
  bad.problem.add_row({{0, 1.0}}, 20.0, 30.0);
  std::vector<AgentModel> with_bad{scalar_agent(1.0), bad};
  try {
    run_admm(with_bad, toy_config(2, 1.0));
    FAIL("expected SubproblemInfeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SubproblemInfeasible);
  }
}

TEST_CASE("communication graphs") {
  const CommGraph k = CommGraph::complete(4);
  CHECK(k.neighbors[2] == std::vector<int>{0, 1, 3});
  const CommGraph s = CommGraph::star(4);
  CHECK(s.neighbors[0] == std::vector<int>{1, 2, 3});
  CHECK(s.neighbors[3] == std::vector<int>{0});
  const CommGraph r = CommGraph::ring(5);
  CHECK(r.neighbors[2] == std::vector<int>{0, 1, 3});
  for (const auto& g : {k, s, r}) CHECK_NOTHROW(g.validate());

  CommGraph no_adn{{{1}, {0, 2}, {1}}};
  CHECK_THROWS_AS(no_adn.validate(), Error);
  CommGraph self{{{0, 1}, {0}}};
  CHECK_THROWS_AS(self.validate(), Error);
  CommGraph asym{{{1, 2}, {0}, {}}};
  CHECK_THROWS_AS(asym.validate(), Error);
}

TEST_CASE("accuracy measures") {
  CHECK(error_a(100.0, 100.22) == doctest::Approx(0.0022));
  CHECK(error_a(-50.0, -49.0) == doctest::Approx(0.02));
  try {
    error_a(0.0, 1.0);
    FAIL("expected ZeroDenominator");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroDenominator);
  }
  // The near-zero component is skipped.
  CHECK(error_b({1.0, 0.0, 2.0}, {{1.1, 5.0, 2.0}}) == doctest::Approx(0.05));
  CHECK(error_b({1.0, 2.0}, {{1.0, 2.0}, {1.5, 2.0}}) == doctest::Approx(0.125));
  try {
    error_b({0.0, 1e-8}, {{1.0, 1.0}});
    FAIL("expected AllComponentsSkipped");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllComponentsSkipped);
  }
}

TEST_CASE("agent models share one layout") {
  const auto st = fixture_stage(2, 76);
  const auto models = stage_agents(st.net, st.in);
  REQUIRE(models.size() == 6);
  const SharedLayout layout{5, 2};
  CHECK(layout.index(1, 1, 0) == 6);
  for (const AgentModel& m : models) CHECK(m.y_vars.size() == layout.size());
  CHECK(models[0].adn.has_value());
  CHECK(models[0].problem.binaries().size() == 6);
  for (std::size_t j = 1; j < models.size(); ++j) {
    CHECK(models[j].mg.has_value());
    CHECK(models[j].problem.binaries().empty());
    // A microgrid agent owns its own injections only; the rest are free copies.
    for (int m = 0; m < 5; ++m) {
      const auto v = models[j].y_vars[layout.index(m, 0, 0)];
      if (m == static_cast<int>(j) - 1) {
        CHECK(v == models[j].mg->p_inj[0]);
      } else {
        CHECK(std::isinf(models[j].problem.upper[v]));
      }
    }
  }
}

TEST_CASE("parallel rounds reproduce the serial reference") {
  const auto st = fixture_stage(2, 76);
  AdmmConfig c;
  c.graph = CommGraph::complete(6);
  c.max_iters = 6;
  c.epsilon = 1e-12;
  const auto models = stage_agents(st.net, st.in);
  const AdmmResult p = run_admm(models, c);
  const AdmmResult s = run_admm_serial(models, c);
  REQUIRE(p.trace.size() == s.trace.size());
  for (std::size_t t = 0; t < p.trace.size(); ++t) CHECK(p.trace[t].residual == s.trace[t].residual);
  for (std::size_t j = 0; j < p.agents.size(); ++j) CHECK(p.agents[j].y == s.agents[j].y);
}

TEST_CASE("stage consensus approaches the centralized cost") {
  const auto st = fixture_stage(2, 76);
  AdmmConfig c;
  c.graph = CommGraph::complete(6);
  c.max_iters = 600;
  c.epsilon = 1e-4;
  const Comparison early = compare_modes(st.net, st.in, c, true);
  CHECK(early.admm.converged);
  CHECK(early.admm.trace.back().residual < early.admm.trace.front().residual);
  // Agents agree to within the stopping tolerance.
  for (const AgentState& a : early.admm.agents) {
    for (std::size_t i = 0; i < a.y.size(); ++i) {
      CHECK(std::abs(a.y[i] - early.admm.agents[0].y[i]) < 2.0 * std::sqrt(c.epsilon));
    }
  }
  c.min_iters = 500;
  const Comparison late = compare_modes(st.net, st.in, c, true);
  CHECK(late.error_a < early.error_a);
  CHECK(late.error_a < 0.01);
}

TEST_CASE("starting at the centralized copy with its multipliers unknown") {
  // Agreement from the first round alone does not stop the run early: one
  // round is enough to break the start whenever agents prefer other values.
  const auto st = fixture_stage(2, 76);
  AdmmConfig c;
  c.graph = CommGraph::complete(6);
  c.max_iters = 2;
  c.epsilon = 1e-12;
  const CentralizedProblem cp = assemble_centralized(st.net, st.in);
  const StageSolution s = solve_stage_centralized(st.net, st.in, {});
  c.y0 = shared_from_centralized(s.cp, s.x, {5, 2});
  const AdmmResult r = run_admm(stage_agents(st.net, st.in), c);
  CHECK(r.trace.front().residual > 0.0);
  CHECK(cp.problem.num_vars() == s.x.size());
}
