#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "adn/error.hpp"
#include "adn/microgrid.hpp"
#include "adn/solver/solve.hpp"

using namespace adn;

namespace {

MicrogridSpec spec_with(int horizon, double pv, double load) {
  MicrogridSpec s;
  s.bus = 1;
  s.bess = BessSpec::from_rating(0.6, 0.1, 0.225, 0.1519);
  s.e_init = 0.3;
  const double tan_om = 0.75;
  for (int k = 0; k < horizon; ++k) {
    s.pv.push_back(pv);
    s.load_p.push_back(load);
    s.load_q.push_back(load * tan_om);
    s.load_ac_p.push_back(0.5 * load);
  }
  return s;
}

// Adjacent rows j and j+1 meet at a vertex of the polygon.
std::pair<double, double> vertex(const HalfPlane& a, const HalfPlane& b) {
  const double det = a.a * b.b - a.b * b.a;
  return {(-a.c * b.b + b.c * a.b) / det, (-a.a * b.c + b.a * a.c) / det};
}

}  // namespace

TEST_CASE("polygon coefficients") {
  const auto rows = pwl_circle({1.0, 16});
  REQUIRE(rows.size() == 16);
  CHECK(rows[0].a == doctest::Approx(0.07612).epsilon(1e-4));
  CHECK(rows[0].b == doctest::Approx(0.38268).epsilon(1e-4));
  CHECK(rows[0].c == doctest::Approx(-0.38268).epsilon(1e-4));
  for (int l : {4, 8, 16, 32}) {
    for (const HalfPlane& h : pwl_circle({0.25, l})) CHECK(h.c < 0.0);
  }
  CHECK_THROWS_AS(pwl_circle({1.0, 5}), Error);
  CHECK_THROWS_AS(pwl_circle({0.0, 16}), Error);
}

TEST_CASE("polygon geometry") {
  for (int l : {4, 8, 16, 24}) {
    const double s = 0.25;
    const auto rows = pwl_circle({s, l});
    for (int j = 0; j < l; ++j) {
      const auto [p, q] = vertex(rows[j], rows[(j + 1) % l]);
      // Vertices on the rating circle: an inner approximation.
      CHECK(std::hypot(p, q) == doctest::Approx(s).epsilon(1e-9));
      // Edge distance from the origin.
      const double d = -rows[j].c / std::hypot(rows[j].a, rows[j].b);
      CHECK(d == doctest::Approx(s * std::cos(std::numbers::pi / l)).epsilon(1e-9));
    }
  }
}

TEST_CASE("polygon feasibility implies the circle") {
  const InverterSpec inv{0.25, 16};
  const auto rows = pwl_circle(inv);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  int inside = 0;
  for (int i = 0; i < 20000; ++i) {
    const double p = u(rng), q = u(rng);
    bool ok = true;
    for (const auto& h : rows) ok = ok && h.a * p + h.b * q + h.c <= 0.0;
    if (!ok) continue;
    ++inside;
    CHECK(p * p + q * q <= inv.s_inv * inv.s_inv * (1.0 + 1e-12));
  }
  CHECK(inside > 0);
}

TEST_CASE("battery step") {
  const BessSpec b = BessSpec::from_rating(600.0, 100.0, 0.225, 0.1519);
  CHECK(b.e_min == doctest::Approx(120.0));
  CHECK(b.e_max == doctest::Approx(540.0));
  CHECK(bess_step(300.0, 100.0, b) == doctest::Approx(277.5));
  CHECK(bess_step(300.0, 0.0, b) == 300.0);
  const double over = bess_step(550.0, -100.0, b);
  CHECK(over == doctest::Approx(572.5));
  CHECK(over > b.e_max);
  CHECK_THROWS_AS(bess_step(300.0, 100.5, b), Error);
}

TEST_CASE("spec validation") {
  MicrogridSpec s = spec_with(2, 0.1, 0.1);
  CHECK_NOTHROW(s.validate());
  s.e_init = 0.58;
  CHECK_THROWS_AS(s.validate(), Error);
  s = spec_with(2, 0.1, 0.1);
  s.cos_omega = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = spec_with(2, 0.1, 0.1);
  s.load_q.pop_back();
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(spec_with(1, 0, 0).tan_omega() == doctest::Approx(0.75));

  solver::MiqpProblem p;
  CHECK_THROWS_AS(build_mg_constraints(p, spec_with(2, 0.1, 0.1), 3), Error);
}

TEST_CASE("dead microgrid injects nothing") {
  solver::MiqpProblem p;
  MicrogridSpec s = spec_with(1, 0.0, 0.0);
  const MgVariables v = build_mg_constraints(p, s, 1);
  p.lower[v.p_bat[0]] = p.upper[v.p_bat[0]] = 0.0;
  for (double sign : {1.0, -1.0}) {
    for (auto var : {v.p_inj[0], v.q_inj[0]}) {
      solver::MiqpProblem q = p;
      std::fill(q.cost.begin(), q.cost.end(), 0.0);
      q.cost[var] = sign;
      const solver::Solution sol = solver::solve_convex(q);
      REQUIRE(sol.optimal());
      CHECK(sol.x[v.p_inj[0]] == doctest::Approx(0.0).epsilon(1e-7));
      if (var == v.p_inj[0]) CHECK(std::abs(sol.objective_value) < 1e-7);
    }
  }
}

TEST_CASE("balance rows") {
  // 400 kW PV, 150 kW load on a 1 MVA base.
  solver::MiqpProblem p;
  MicrogridSpec s = spec_with(1, 0.4, 0.15);
  s.inverter.s_inv = 0.5;
  const MgVariables v = build_mg_constraints(p, s, 1);
  p.lower[v.p_bat[0]] = p.upper[v.p_bat[0]] = 0.0;
  p.lower[v.p_curt[0]] = p.upper[v.p_curt[0]] = 0.0;
  p.lower[v.q_inv[0]] = p.upper[v.q_inv[0]] = 0.0;
  const solver::Solution sol = solver::solve_convex(p);
  REQUIRE(sol.optimal());
  CHECK(sol.x[v.p_inj[0]] == doctest::Approx(0.25).epsilon(1e-7));
  CHECK(sol.x[v.q_inj[0]] == doctest::Approx(-0.15 * 0.75).epsilon(1e-7));

  // Full curtailment: Q^inj = Q^inv + 0.75 P^load - Q^load.
  solver::MiqpProblem c;
  const MgVariables w = build_mg_constraints(c, s, 1);
  c.lower[w.p_curt[0]] = c.upper[w.p_curt[0]] = 0.15;
  c.lower[w.q_inv[0]] = c.upper[w.q_inv[0]] = 0.05;
  c.lower[w.p_bat[0]] = c.upper[w.p_bat[0]] = 0.0;
  const solver::Solution sc = solver::solve_convex(c);
  REQUIRE(sc.optimal());
  CHECK(sc.x[w.q_inj[0]] == doctest::Approx(0.05 + 0.75 * 0.15 - 0.15 * 0.75).epsilon(1e-7));
  CHECK(sc.x[w.p_inj[0]] == doctest::Approx(0.4).epsilon(1e-7));
}

TEST_CASE("curtailment is bounded by the load") {
  solver::MiqpProblem p;
  const MicrogridSpec s = spec_with(3, 0.0, 0.08);
  const MgVariables v = build_mg_constraints(p, s, 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(p.lower[v.p_curt[k]] == 0.0);
    CHECK(p.upper[v.p_curt[k]] == doctest::Approx(0.08));
  }
}

TEST_CASE("energy telescopes over the horizon") {
  const int n = 6;
  MicrogridSpec s = spec_with(n, 0.05, 0.1);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    solver::MiqpProblem p;
    const MgVariables v = build_mg_constraints(p, s, n);
    for (int k = 0; k < n; ++k) p.cost[v.p_bat[k]] = u(rng);
    const solver::Solution sol = solver::solve_convex(p);
    REQUIRE(sol.optimal());
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += sol.x[v.p_bat[k]];
      CHECK(sol.x[v.e_next[k]] >= s.bess.e_min - 1e-7);
      CHECK(sol.x[v.e_next[k]] <= s.bess.e_max + 1e-7);
      CHECK(sol.x[v.p_curt[k]] >= -1e-9);
      CHECK(sol.x[v.p_curt[k]] <= s.load_p[k] + 1e-9);
    }
    CHECK(sol.x[v.e_next[n - 1]] == doctest::Approx(s.e_init - s.bess.eta * sum).epsilon(1e-7));
  }
}

TEST_CASE("cost weights") {
  solver::MiqpProblem p;
  MicrogridSpec s = spec_with(2, 0.1, 0.1);
  MgCostWeights w;
  w.energy_weight = 250.0;
  w.tariff = {0.2, 0.3};
  const MgVariables v = build_mg_constraints(p, s, 2, w);
  CHECK(p.cost[v.p_inj[1]] == doctest::Approx(0.3 * 250.0));
  CHECK(p.cost[v.p_bat[0]] == doctest::Approx(0.1519 * 250.0));
  CHECK(p.cost[v.p_curt[0]] == doctest::Approx(0.506 * 250.0));

  solver::MiqpProblem q;
  w.include_local = false;
  const MgVariables u = build_mg_constraints(q, s, 2, w);
  CHECK(q.cost[u.p_bat[0]] == 0.0);
  w.tariff = {0.2};
  CHECK_THROWS_AS(build_mg_constraints(q, s, 2, w), Error);
}
