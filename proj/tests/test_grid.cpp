#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "adn/error.hpp"
#include "adn/grid.hpp"

using namespace adn;

namespace {

RadialNetwork from_text(const std::string& text) {
  std::istringstream in(text);
  return load_network(in);
}

// z_base = 12.66^2 / 1 = 160.2756 ohm, so 16.02756 ohm is 0.1 pu.
const char* kTwoBus = R"(
[base]
v_base_kv = 12.66
s_base_kva = 1000
root = 0
[buses]
0 0 0 0
1 100 50 0.5
[lines]
0 1 16.02756 16.02756 1200
)";

ErrorCode error_of(const std::string& text) {
  try {
    from_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("two-bus document") {
  const RadialNetwork net = from_text(kTwoBus);
  REQUIRE(net.bus_count() == 2);
  REQUIRE(net.line_count() == 1);
  CHECK(net.ancestor(1) == 0);
  CHECK(net.children(0) == std::vector<BusId>{1});
  CHECK(net.line_to(1).r == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(net.line_to(1).x == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(net.line_to(1).s_max == doctest::Approx(1.2));
  CHECK(net.bus(1).p_load == doctest::Approx(0.1));
  CHECK(net.bus(1).q_load == doctest::Approx(0.05));
  CHECK(net.microgrid_buses().empty());
}

TEST_CASE("33-bus fixture") {
  const RadialNetwork net = load_network("data/ieee33.net");
  CHECK(net.bus_count() == 33);
  CHECK(net.line_count() == 32);
  std::set<int> mg;
  for (BusId b : net.microgrid_buses()) mg.insert(net.bus(b).source_id);
  CHECK(mg == std::set<int>{5, 9, 19, 21, 24});
  CHECK(net.bus(net.root()).source_id == 1);

  double p = 0.0, q = 0.0;
  for (const Bus& b : net.buses()) {
    p += b.p_load;
    q += b.q_load;
  }
  CHECK(p == doctest::Approx(3.715));
  CHECK(q == doctest::Approx(2.300));
}

TEST_CASE("tree invariants hold on the fixture") {
  const RadialNetwork net = load_network("data/ieee33.net");
  for (BusId b = 1; b < net.bus_count(); ++b) {
    const BusId a = net.ancestor(b);
    const auto& ch = net.children(a);
    CHECK(std::find(ch.begin(), ch.end(), b) != ch.end());
    CHECK(net.line_to(b).to_bus == b);
    // DFS numbering: ancestors come first.
    CHECK(a < b);
  }
  std::size_t child_total = 0;
  for (BusId b = 0; b < net.bus_count(); ++b) {
    for (BusId c : net.children(b)) CHECK(net.ancestor(c) == b);
    child_total += net.children(b).size();
  }
  CHECK(child_total == net.bus_count() - 1);
}

TEST_CASE("source ids survive renumbering") {
  const RadialNetwork net = load_network("data/ieee33.net");
  for (BusId b = 0; b < net.bus_count(); ++b) CHECK(net.bus_by_source(net.bus(b).source_id) == b);
}

TEST_CASE("replacing the microgrid set") {
  const RadialNetwork net = load_network("data/ieee33.net");
  const RadialNetwork other = net.with_microgrids({13, 30});
  REQUIRE(other.microgrid_buses().size() == 2);
  for (BusId b : other.microgrid_buses()) CHECK(other.bus(b).has_microgrid);
  CHECK_THROWS_AS(net.with_microgrids({99}), Error);
}

TEST_CASE("malformed documents") {
  CHECK(error_of(R"(
[base]
root = 1
[buses]
1 0 0 0
2 0 0 0
[lines]
1 2 1 1 100
2 1 1 1 100
)") == ErrorCode::CycleDetected);

  CHECK(error_of(R"(
[base]
root = 1
[buses]
1 0 0 0
2 0 0 0
3 0 0 0
[lines]
1 2 1 1 100
)") == ErrorCode::DisconnectedBus);

  CHECK(error_of(R"(
[base]
root = 7
[buses]
1 0 0 0
2 0 0 0
[lines]
1 2 1 1 100
)") == ErrorCode::MissingRoot);

  CHECK(error_of(R"(
[base]
v_base_kv = 0
root = 1
[buses]
1 0 0 0
2 0 0 0
[lines]
1 2 1 1 100
)") == ErrorCode::NonpositiveBase);

  CHECK(error_of(R"(
[base]
root = 1
[buses]
1 0 0 0
2 0 0 0
[lines]
1 2 1 1 100
1 2 1 1 100
)") == ErrorCode::DuplicateLine);

  CHECK(error_of("[buses]\n1 zero 0 0\n") == ErrorCode::ParseError);
}

TEST_CASE("per-unit conversions") {
  const PerUnitBase base{12.66e3, 1.0e6};
  CHECK(to_per_unit(1.2e6, base, QuantityKind::Power) == doctest::Approx(1.2));
  CHECK(to_per_unit(12.66e3, base, QuantityKind::Voltage) == doctest::Approx(1.0));
  CHECK_THROWS_AS(to_per_unit(1.0, PerUnitBase{0.0, 1.0}, QuantityKind::Power), Error);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 1e3);
  for (int i = 0; i < 100; ++i) {
    const double raw = u(rng);
    for (QuantityKind k : {QuantityKind::Power, QuantityKind::Voltage, QuantityKind::Impedance}) {
      const double back = from_per_unit(to_per_unit(raw, base, k), base, k);
      CHECK(std::abs(back - raw) <= 1e-12 * raw);
    }
  }
}
