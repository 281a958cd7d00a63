#pragma once

// Shared scenario builders for the tests.

#include <sstream>
#include <string>

#include "adn/config.hpp"
#include "adn/grid.hpp"
#include "adn/scenario.hpp"

namespace fixtures {

inline adn::Config config_from(const std::string& text) {
  std::istringstream in(text);
  return adn::Config::parse(in);
}

inline std::string flat_timeline(int intervals, double tariff, double load, double pv, double mg_load) {
  std::ostringstream out;
  out << "interval\ttariff\tload\tpv\tmg_load\n";
  for (int k = 0; k < intervals; ++k) out << k << '\t' << tariff << '\t' << load << '\t' << pv << '\t' << mg_load << '\n';
  return out.str();
}

/// Five microgrids on the 33-bus feeder; `extra` is appended to the config.
inline adn::Scenario scenario(const adn::RadialNetwork& net, const std::string& timeline, int horizon,
                              const std::string& extra = {}) {
  const std::string text = "[mpc]\nhorizon = " + std::to_string(horizon) +
                           "\nload_scale = 0.2\n"
                           "[ancillary]\npeak_exchange_kw = 800\nexchange_bound_kw = 2000\n"
                           "[microgrid]\nbuses = 5 9 19 21 24\nload_peak_kw = 100\n" +
                           extra;
  std::istringstream tl(timeline);
  return adn::scenario_from_config(config_from(text), tl, net.base());
}

/// Everything zero and the batteries full, so no schedule beats doing nothing.
inline adn::Scenario zero_scenario(const adn::RadialNetwork& net, int intervals, int horizon) {
  return scenario(net, flat_timeline(intervals, 0.0, 0.0, 0.0, 0.0), horizon, "e_init_frac = 0.9\n");
}

inline adn::RadialNetwork feeder() { return adn::load_network("data/ieee33.net"); }

}  // namespace fixtures
