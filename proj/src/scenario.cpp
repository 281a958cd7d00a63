#include "adn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "adn/error.hpp"
#include "adn/power_flow.hpp"

namespace adn {

void MicrogridConfig::validate() const {
  if (!(pv_peak_kw >= 0.0) || !(s_inv_kva > 0.0) || !(capacity_kwh > 0.0) || !(p_bat_kw > 0.0) ||
      !(eta_h > 0.0) || !(load_peak_kw >= 0.0)) {
    throw Error(ErrorCode::InvalidParameters, "microgrid " + std::to_string(source_bus) + ": ratings must be positive");
  }
  if (!(ac_fraction >= 0.0 && ac_fraction <= 1.0) || !(e_init_frac >= 0.2 && e_init_frac <= 0.9)) {
    throw Error(ErrorCode::InvalidParameters,
                "microgrid " + std::to_string(source_bus) + ": ac_fraction in [0,1], e_init in [0.2,0.9]");
  }
}

void ScenarioTimeline::pad(int horizon) {
  const std::size_t need = static_cast<std::size_t>(intervals + horizon);
  auto extend = [need](std::vector<double>& v) {
    if (v.empty()) return;
    while (v.size() < need) v.push_back(v.back());
  };
  extend(tariff);
  extend(load);
  for (auto& s : pv) extend(s);
  for (auto& s : mg_load) extend(s);
}

void ScenarioTimeline::validate(int horizon) const {
  if (!(dt_minutes > 0.0) || intervals < 1) {
    throw Error(ErrorCode::InvalidParameters, "timeline needs dt > 0 and at least one interval");
  }
  const std::size_t need = static_cast<std::size_t>(intervals + horizon);
  auto check = [need](const std::vector<double>& v, const char* what) {
    if (v.size() < need) {
      throw Error(ErrorCode::HorizonMismatch, std::string(what) + " covers " + std::to_string(v.size()) +
                                                  " intervals, " + std::to_string(need) + " needed");
    }
  };
  check(tariff, "tariff");
  check(load, "load");
  for (const auto& s : pv) check(s, "pv");
  for (const auto& s : mg_load) check(s, "mg_load");
}

ScenarioTimeline read_timeline(std::istream& in, const std::vector<int>& mg_sources) {
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> cols;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (header.empty()) {
      header = tok;
      continue;
    }
    if (tok.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "timeline line " + std::to_string(lineno) + ": expected " +
                                             std::to_string(header.size()) + " fields");
    }
    for (std::size_t c = 0; c < tok.size(); ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok[c], &used);
        if (used != tok[c].size()) throw std::invalid_argument(tok[c]);
        cols[header[c]].push_back(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError,
                    "timeline line " + std::to_string(lineno) + ": '" + tok[c] + "' is not a number");
      }
    }
  }
  for (const char* req : {"interval", "tariff", "load", "pv", "mg_load"}) {
    if (std::find(header.begin(), header.end(), req) == header.end()) {
      throw Error(ErrorCode::ParseError, std::string("timeline lacks column '") + req + "'");
    }
  }
  ScenarioTimeline tl;
  tl.tariff = cols["tariff"];
  tl.load = cols["load"];
  tl.intervals = static_cast<int>(tl.tariff.size());
  const auto& k = cols["interval"];
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] != static_cast<double>(i)) {
      throw Error(ErrorCode::ParseError, "timeline intervals must count 0, 1, 2, ...");
    }
  }
  for (int s : mg_sources) {
    const std::string pv_col = "pv." + std::to_string(s), load_col = "mg_load." + std::to_string(s);
    tl.pv.push_back(cols.count(pv_col) ? cols[pv_col] : cols["pv"]);
    tl.mg_load.push_back(cols.count(load_col) ? cols[load_col] : cols["mg_load"]);
  }
  return tl;
}

namespace {

MicrogridConfig read_microgrid(const Config& cfg, const std::string& section, MicrogridConfig m) {
  m.pv_peak_kw = cfg.get_double(section, "pv_peak_kw", m.pv_peak_kw);
  m.s_inv_kva = cfg.get_double(section, "s_inv_kva", m.s_inv_kva);
  m.capacity_kwh = cfg.get_double(section, "capacity_kwh", m.capacity_kwh);
  m.p_bat_kw = cfg.get_double(section, "p_bat_kw", m.p_bat_kw);
  m.eta_h = cfg.get_double(section, "eta_h", m.eta_h);
  m.beta_b = cfg.get_double(section, "beta_b", m.beta_b);
  m.beta_c = cfg.get_double(section, "beta_c", m.beta_c);
  m.cos_omega = cfg.get_double(section, "cos_omega", m.cos_omega);
  m.segments = cfg.get_int(section, "segments", m.segments);
  m.e_init_frac = cfg.get_double(section, "e_init_frac", m.e_init_frac);
  m.load_peak_kw = cfg.get_double(section, "load_peak_kw", m.load_peak_kw);
  m.ac_fraction = cfg.get_double(section, "ac_fraction", m.ac_fraction);
  return m;
}

solver::MiqpOptions read_solver(const Config& cfg) {
  solver::MiqpOptions o;
  const std::string backend = cfg.get_string("solver", "backend", "branch-and-bound");
  if (backend == "branch-and-bound") {
    o.backend = solver::MiqpBackend::BranchAndBound;
  } else if (backend == "enumerate") {
    o.backend = solver::MiqpBackend::Enumerate;
  } else {
    throw Error(ErrorCode::ParseError, "solver.backend must be branch-and-bound or enumerate");
  }
  o.integrality_tolerance = cfg.get_double("solver", "integrality_tolerance", o.integrality_tolerance);
  o.absolute_gap = cfg.get_double("solver", "absolute_gap", o.absolute_gap);
  o.relative_gap = cfg.get_double("solver", "relative_gap", o.relative_gap);
  o.parallel = cfg.get_bool("solver", "parallel", o.parallel);
  o.decompose = cfg.get_bool("solver", "decompose", o.decompose);
  o.convex.tolerance = cfg.get_double("solver", "tolerance", o.convex.tolerance);
  o.convex.max_iterations = cfg.get_int("solver", "max_iterations", o.convex.max_iterations);
  return o;
}

}  // namespace

Scenario scenario_from_config(const Config& cfg, std::istream& timeline, const PerUnitBase& base) {
  Scenario sc;
  const double s_base_kw = base.s_base / 1e3;
  sc.horizon = cfg.get_int("mpc", "horizon", sc.horizon);
  sc.v_min = cfg.get_double("mpc", "v_min", sc.v_min);
  sc.v_max = cfg.get_double("mpc", "v_max", sc.v_max);
  sc.slack_v = cfg.get_double("mpc", "slack_v", sc.slack_v);
  sc.beta_loss = cfg.get_double("mpc", "beta_loss", sc.beta_loss);
  sc.load_scale = cfg.get_double("mpc", "load_scale", sc.load_scale);
  if (sc.horizon < 1 || !(sc.v_min > 0.0 && sc.v_min < sc.v_max)) {
    throw Error(ErrorCode::InvalidParameters, "mpc: horizon >= 1 and 0 < v_min < v_max required");
  }

  const MicrogridConfig defaults = read_microgrid(cfg, "microgrid", MicrogridConfig{});
  std::set<int> ids;
  for (double b : cfg.get_list("microgrid", "buses", {})) ids.insert(static_cast<int>(b));
  for (const std::string& id : cfg.sections_with_prefix("microgrid.")) {
    try {
      ids.insert(std::stoi(id));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "microgrid section '" + id + "' is not a bus id");
    }
  }
  for (int id : ids) {
    MicrogridConfig m = read_microgrid(cfg, "microgrid." + std::to_string(id), defaults);
    m.source_bus = id;
    m.validate();
    sc.microgrids.push_back(m);
  }
  std::sort(sc.microgrids.begin(), sc.microgrids.end(),
            [](const MicrogridConfig& a, const MicrogridConfig& b) { return a.source_bus < b.source_bus; });

  sc.timeline = read_timeline(timeline, sc.microgrid_sources());
  sc.timeline.dt_minutes = cfg.get_double("mpc", "dt_minutes", sc.timeline.dt_minutes);
  const int intervals = cfg.get_int("mpc", "intervals", sc.timeline.intervals);
  if (intervals < 1 || intervals > sc.timeline.intervals) {
    throw Error(ErrorCode::HorizonMismatch, "mpc.intervals exceeds the timeline");
  }
  sc.timeline.intervals = intervals;
  sc.timeline.pad(sc.horizon);
  sc.timeline.validate(sc.horizon);

  sc.voltage_support = cfg.get_bool("ancillary", "enabled", true);
  const double peak_kw = cfg.get_double("ancillary", "peak_exchange_kw", 1000.0);
  const double bound_kw = cfg.get_double("ancillary", "exchange_bound_kw", 2.0 * peak_kw);
  sc.timeline.peak_exchange_estimate = peak_kw / s_base_kw;
  AsParameters as = AsParameters::from_peak_exchange(peak_kw / s_base_kw, bound_kw / s_base_kw);
  as.q_min = cfg.get_double("ancillary", "q_min_ratio", 0.33) * as.p_min;
  as.tan_phi = cfg.get_double("ancillary", "tan_phi", as.tan_phi);
  as.c_p = cfg.get_double("ancillary", "c_p", as.c_p);
  as.zeta = cfg.get_double("ancillary", "zeta", as.zeta);
  as.m_p = cfg.get_double("ancillary", "m_p", as.m_p);
  as.v_tr_pct = cfg.get_double("ancillary", "v_tr_pct", as.v_tr_pct);
  as.s_tr = cfg.get_double("ancillary", "s_tr_kva", as.s_tr * s_base_kw) / s_base_kw;
  as.validate();
  sc.timeline.as = as;

  sc.solver = read_solver(cfg);
  sc.admm.miqp = sc.solver;
  sc.admm.rho = cfg.get_double("admm", "rho", sc.admm.rho);
  sc.admm.rho_switch = cfg.get_double("admm", "rho_switch", sc.admm.rho_switch);
  sc.admm.rho_after = cfg.get_double("admm", "rho_after", sc.admm.rho_after);
  sc.admm.epsilon = cfg.get_double("admm", "epsilon", sc.admm.epsilon);
  sc.admm.max_iters = cfg.get_int("admm", "max_iters", sc.admm.max_iters);
  sc.admm.min_iters = cfg.get_int("admm", "min_iters", sc.admm.min_iters);
  sc.admm.parallel = cfg.get_bool("admm", "parallel", sc.admm.parallel);
  sc.graph = cfg.get_string("admm", "graph", sc.graph);
  if (sc.graph != "complete" && sc.graph != "star" && sc.graph != "ring") {
    throw Error(ErrorCode::ParseError, "admm.graph must be complete, star or ring");
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& config, const PerUnitBase& base) {
  const Config cfg = Config::load(config);
  const auto name = cfg.get("mpc", "timeline");
  if (!name) throw Error(ErrorCode::ParseError, "mpc.timeline is required");
  const std::filesystem::path tl_path = config.parent_path() / *name;
  std::ifstream f(tl_path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + tl_path.string());
  return scenario_from_config(cfg, f, base);
}

std::vector<int> Scenario::microgrid_sources() const {
  std::vector<int> out;
  for (const auto& m : microgrids) out.push_back(m.source_bus);
  return out;
}

RadialNetwork Scenario::attach(const RadialNetwork& net) const {
  return net.with_microgrids(microgrid_sources());
}

std::size_t Scenario::microgrid_index(const RadialNetwork& net, BusId bus) const {
  const int source = net.bus(bus).source_id;
  for (std::size_t i = 0; i < microgrids.size(); ++i) {
    if (microgrids[i].source_bus == source) return i;
  }
  throw Error(ErrorCode::DimensionMismatch, "bus " + std::to_string(source) + " has no microgrid config");
}

Scenario Scenario::with_extra_microgrids(const std::vector<int>& sources) const {
  if (microgrids.empty()) throw Error(ErrorCode::InvalidParameters, "no microgrid to copy");
  Scenario out = *this;
  for (int src : sources) {
    const auto present = std::find_if(out.microgrids.begin(), out.microgrids.end(),
                                      [&](const MicrogridConfig& m) { return m.source_bus == src; });
    if (present != out.microgrids.end()) continue;
    const auto pos = std::find_if(out.microgrids.begin(), out.microgrids.end(),
                                  [&](const MicrogridConfig& m) { return m.source_bus > src; });
    const auto at = pos - out.microgrids.begin();
    MicrogridConfig mg = microgrids.front();
    mg.source_bus = src;
    out.microgrids.insert(pos, mg);
    out.timeline.pv.insert(out.timeline.pv.begin() + at, timeline.pv.front());
    out.timeline.mg_load.insert(out.timeline.mg_load.begin() + at, timeline.mg_load.front());
  }
  return out;
}

CommGraph Scenario::comm_graph() const {
  const int n = static_cast<int>(microgrids.size()) + 1;
  if (graph == "star") return CommGraph::star(n);
  if (graph == "ring") return CommGraph::ring(n);
  return CommGraph::complete(n);
}

MicrogridSpec microgrid_spec(const MicrogridConfig& mg, std::size_t index, const ScenarioTimeline& tl,
                             const PerUnitBase& base, BusId bus, int t, int horizon, double e_now) {
  const double s_kw = base.s_base / 1e3;
  MicrogridSpec s;
  s.bus = bus;
  s.bess = BessSpec::from_rating(mg.capacity_kwh / s_kw, mg.p_bat_kw / s_kw, mg.eta_h, mg.beta_b);
  s.inverter.s_inv = mg.s_inv_kva / s_kw;
  s.inverter.segments = mg.segments;
  s.cos_omega = mg.cos_omega;
  s.beta_c = mg.beta_c;
  s.e_init = e_now;
  const double tan_om = s.tan_omega();
  for (int k = t; k < t + horizon; ++k) {
    const double load = tl.mg_load.at(index).at(k) * mg.load_peak_kw / s_kw;
    s.pv.push_back(tl.pv.at(index).at(k) * mg.pv_peak_kw / s_kw);
    s.load_p.push_back(load);
    // Only the AC share of the local load draws reactive power.
    s.load_q.push_back(load * mg.ac_fraction * tan_om);
    s.load_ac_p.push_back(load * mg.ac_fraction);
  }
  return s;
}

StageInput make_stage(const RadialNetwork& net, const Scenario& sc, int t, const std::vector<double>& e_now,
                      std::vector<LinearizationPoint> lin) {
  const auto& mg_buses = net.microgrid_buses();
  if (mg_buses.size() != sc.microgrids.size() || e_now.size() != mg_buses.size()) {
    throw Error(ErrorCode::DimensionMismatch, "network, scenario and energies disagree on the microgrids");
  }
  StageInput in;
  in.horizon = sc.horizon;
  in.dt_hours = sc.timeline.dt_hours();
  in.v_min = sc.v_min;
  in.v_max = sc.v_max;
  in.slack_v = sc.slack_v;
  in.beta_loss = sc.beta_loss;
  in.voltage_support = sc.voltage_support;
  in.as = sc.timeline.as;
  in.lin = std::move(lin);
  for (int k = t; k < t + sc.horizon; ++k) {
    in.tariff.push_back(sc.timeline.tariff.at(k));
    const double mult = sc.timeline.load.at(k) * sc.load_scale;
    std::vector<double> p(net.bus_count(), 0.0), q(net.bus_count(), 0.0);
    for (BusId b = 0; b < net.bus_count(); ++b) {
      if (net.bus(b).has_microgrid) continue;
      p[b] = net.bus(b).p_load * mult;
      q[b] = net.bus(b).q_load * mult;
    }
    in.p_load.push_back(std::move(p));
    in.q_load.push_back(std::move(q));
  }
  for (std::size_t m = 0; m < mg_buses.size(); ++m) {
    const std::size_t i = sc.microgrid_index(net, mg_buses[m]);
    in.mgs.push_back(microgrid_spec(sc.microgrids[i], i, sc.timeline, net.base(), mg_buses[m], t, sc.horizon,
                                    e_now[m]));
  }
  in.validate(net);
  return in;
}

std::vector<LinearizationPoint> forecast_linearization(const RadialNetwork& net, const Scenario& sc, int t) {
  const StageInput probe = make_stage(net, sc, t, initial_energies(net, sc),
                                      std::vector<LinearizationPoint>(sc.horizon, LinearizationPoint{
                                          std::vector<double>(net.line_count(), 0.0),
                                          std::vector<double>(net.line_count(), 0.0),
                                          std::vector<double>(net.line_count(), 1.0),
                                          std::vector<double>(net.line_count(), 0.0)}));
  std::vector<LinearizationPoint> out;
  const auto& mg_buses = net.microgrid_buses();
  for (int k = 0; k < sc.horizon; ++k) {
    std::vector<std::complex<double>> s(net.bus_count());
    for (BusId b = 1; b < net.bus_count(); ++b) s[b] = {-probe.p_load[k][b], -probe.q_load[k][b]};
    for (std::size_t m = 0; m < mg_buses.size(); ++m) {
      const MicrogridSpec& mg = probe.mgs[m];
      s[mg_buses[m]] = {mg.pv[k] - mg.load_p[k], -mg.load_q[k]};
    }
    LoadFlowResult lf;
    try {
      lf = newton_raphson_loadflow(net, s, sc.slack_v);
    } catch (const Error& e) {
      throw Error(ErrorCode::NrDivergence, "forecast load flow at interval " + std::to_string(t + k) + ": " + e.what());
    }
    out.push_back(LinearizationPoint::from_state(net, state_from_loadflow(net, lf, s)));
  }
  return out;
}

std::vector<double> initial_energies(const RadialNetwork& net, const Scenario& sc) {
  const double s_kw = net.base().s_base / 1e3;
  std::vector<double> e;
  for (BusId b : net.microgrid_buses()) {
    const MicrogridConfig& m = sc.microgrids[sc.microgrid_index(net, b)];
    e.push_back(m.e_init_frac * m.capacity_kwh / s_kw);
  }
  return e;
}

}  // namespace adn
