#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "adn/error.hpp"
#include "adn/power_flow.hpp"

using namespace adn;
using cd = std::complex<double>;

namespace {

RadialNetwork two_bus(double r, double x) {
  NetworkDescription d;
  d.base = {1.0e3, 1.0e6};  // z_base = 1 ohm, so ohms are pu
  d.root = 0;
  d.buses = {{0, 0, 0, 0}, {1, 0, 0, 0}};
  d.lines = {{0, 1, r, x, 1000.0}};
  return build_network(d);
}

// Receiving-end voltage of a single line by fixed-point iteration on
// V2 = V1 - z conj(S / V2).
cd fixed_point_two_bus(cd z, cd load, double v1) {
  cd v2 = v1;
  for (int i = 0; i < 200; ++i) v2 = v1 - z * std::conj(load / v2);
  return v2;
}

std::vector<cd> fixture_injections(const RadialNetwork& net, double scale) {
  std::vector<cd> s(net.bus_count());
  for (BusId b = 1; b < net.bus_count(); ++b) s[b] = -scale * cd(net.bus(b).p_load, net.bus(b).q_load);
  return s;
}

}  // namespace

TEST_CASE("flat state of an unloaded network has zero residuals") {
  const RadialNetwork net = two_bus(0.1, 0.1);
  const DistFlowState s = DistFlowState::flat(net);
  CHECK(distflow_residuals(net, s).max_abs() == 0.0);
}

TEST_CASE("residual bookkeeping under an i_sq perturbation") {
  const RadialNetwork net = two_bus(0.1, 0.2);
  DistFlowState s = DistFlowState::flat(net);
  s.i_sq[0] += 0.1;
  const DistFlowResiduals r = distflow_residuals(net, s);
  CHECK(r.current[0] == doctest::Approx(-0.1));
  CHECK(r.voltage[0] == doctest::Approx(-0.1 * (0.01 + 0.04)));
}

TEST_CASE("residuals reject mismatched dimensions") {
  const RadialNetwork net = two_bus(0.1, 0.1);
  DistFlowState s = DistFlowState::flat(net);
  s.i_sq.push_back(0.0);
  CHECK_THROWS_AS(distflow_residuals(net, s), Error);
}

TEST_CASE("two-bus load flow against a fixed-point oracle") {
  const RadialNetwork net = two_bus(0.01, 0.01);
  const cd load(0.1, 0.05);
  const std::vector<cd> s{0.0, -load};
  const LoadFlowResult lf = newton_raphson_loadflow(net, s, 1.0);
  const cd oracle = fixed_point_two_bus({0.01, 0.01}, load, 1.0);
  CHECK(std::abs(lf.voltage[1] - oracle) < 1e-10);
  CHECK(std::abs(lf.voltage[1]) == doctest::Approx(0.99849).epsilon(1e-3));
  // Slack supplies load plus I^2 z.
  const cd i = std::conj(load / lf.voltage[1]);
  const cd expected = load + std::norm(i) * cd(0.01, 0.01);
  CHECK(std::abs(lf.slack_injection - expected) < 1e-8);

  const DistFlowState st = state_from_loadflow(net, lf, s);
  CHECK(distflow_residuals(net, st).max_abs() < 1e-8);
}

TEST_CASE("no-load flow converges at once to the slack voltage") {
  const RadialNetwork net = load_network("data/ieee33.net");
  const std::vector<cd> s(net.bus_count());
  const LoadFlowResult lf = newton_raphson_loadflow(net, s, 1.02);
  CHECK(lf.iterations <= 1);
  for (double v : lf.magnitudes()) CHECK(v == doctest::Approx(1.02).epsilon(1e-12));
}

TEST_CASE("33-bus load flow agrees with DistFlow") {
  const RadialNetwork net = load_network("data/ieee33.net");
  const auto s = fixture_injections(net, 1.0);
  const LoadFlowResult lf = newton_raphson_loadflow(net, s, 1.0);
  const DistFlowState st = state_from_loadflow(net, lf, s);
  CHECK(distflow_residuals(net, st).max_abs() < 1e-8);
  for (double v : st.i_sq) CHECK(v >= 0.0);

  // Mismatch falls over the last iterations.
  const auto& h = lf.mismatch_history;
  REQUIRE(h.size() >= 3);
  CHECK(h[h.size() - 1] < h[h.size() - 2]);
  CHECK(h[h.size() - 2] < h[h.size() - 3]);
  CHECK(h.back() < 1e-8);

  // Original feeder at full nominal load sags to about 0.913 pu; the scaled
  // scenario load stays inside +-5%.
  double vmin = 2.0;
  for (double v : lf.magnitudes()) vmin = std::min(vmin, v);
  CHECK(vmin == doctest::Approx(0.9131).epsilon(2e-3));
  const LoadFlowResult scaled = newton_raphson_loadflow(net, fixture_injections(net, 0.4), 1.0);
  for (double v : scaled.magnitudes()) CHECK((v >= 0.95 && v <= 1.05));
}

TEST_CASE("load flow reports divergence") {
  const RadialNetwork net = two_bus(0.5, 0.5);
  const std::vector<cd> s{0.0, cd(-5.0, -5.0)};
  CHECK_THROWS_AS(newton_raphson_loadflow(net, s, 1.0), Error);
}

TEST_CASE("current linearization") {
  const CurrentAffine a = linearize_current(0.5, 0.2, 1.0);
  CHECK(a.dp == doctest::Approx(1.0));
  CHECK(a.dq == doctest::Approx(0.4));
  CHECK(a.dv == doctest::Approx(-0.29));
  CHECK(a.evaluate(0.5, 0.2, 1.0) == doctest::Approx(0.29));

  const CurrentAffine z = linearize_current(0.0, 0.0, 1.0);
  CHECK(z.dp == 0.0);
  CHECK(z.dq == 0.0);
  CHECK(z.dv == 0.0);
  CHECK(z.evaluate(0.7, -0.3, 0.9) == 0.0);

  CHECK_THROWS_AS(linearize_current(0.1, 0.1, 0.2), Error);
}

TEST_CASE("linearization is anchored at the expansion point") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pq(-2.0, 2.0), v(0.8, 1.2);
  for (int i = 0; i < 100; ++i) {
    const double p = pq(rng), q = pq(rng), vs = v(rng);
    const double exact = (p * p + q * q) / vs;
    CHECK(std::abs(linearize_current(p, q, vs).evaluate(p, q, vs) - exact) <= 1e-12 * std::max(1.0, exact));
    // First order: error shrinks quadratically with the step.
    const double h = 1e-4;
    const double lin = linearize_current(p, q, vs).evaluate(p + h, q - h, vs + h);
    const double ex = ((p + h) * (p + h) + (q - h) * (q - h)) / (vs + h);
    CHECK(std::abs(lin - ex) < 1e-6);
  }
}

TEST_CASE("linearization point from a state") {
  const RadialNetwork net = load_network("data/ieee33.net");
  const auto s = fixture_injections(net, 0.5);
  const DistFlowState st = state_from_loadflow(net, newton_raphson_loadflow(net, s, 1.0), s);
  const LinearizationPoint lp = LinearizationPoint::from_state(net, st);
  for (std::size_t l = 0; l < net.line_count(); ++l) {
    CHECK(lp.i_sq_star[l] ==
          doctest::Approx((lp.p_star[l] * lp.p_star[l] + lp.q_star[l] * lp.q_star[l]) / lp.v_sq_star[l]));
    // The load-flow state is on the exact current surface.
    CHECK(lp.i_sq_star[l] == doctest::Approx(st.i_sq[l]).epsilon(1e-9));
  }
  const auto forms = linearize_current(lp);
  CHECK(forms.size() == net.line_count());
}

TEST_CASE("operating limits") {
  const RadialNetwork net = load_network("data/ieee33.net");
  const OperatingLimits lim = OperatingLimits::from_network(net, 0.95, 1.05);
  CHECK(lim.p_max[0] == doctest::Approx(1.2 / std::sqrt(2.0)));
  CHECK(lim.q_max[0] == lim.p_max[0]);

  DistFlowState s = DistFlowState::flat(net);
  CHECK(check_limits(s, lim).empty());

  s.p_flow[3] = 1.2;
  ViolationReport r = check_limits(s, lim);
  REQUIRE(r.items.size() == 1);
  CHECK(r.items[0].kind == Violation::Kind::ActiveFlow);
  CHECK(r.items[0].index == 3);

  s = DistFlowState::flat(net);
  s.v_sq[7] = 0.95 * 0.95;
  CHECK(check_limits(s, lim).empty());
  s.v_sq[7] = std::nextafter(0.95 * 0.95, 0.0);
  r = check_limits(s, lim);
  REQUIRE(r.items.size() == 1);
  CHECK(r.items[0].kind == Violation::Kind::Voltage);
  CHECK(r.items[0].index == 7);

  std::ostringstream out;
  write_violations(out, r);
  CHECK(out.str().find("7") != std::string::npos);
}
