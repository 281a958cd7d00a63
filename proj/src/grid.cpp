#include "adn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "adn/error.hpp"

namespace adn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DisconnectedBus: return "DisconnectedBus";
    case ErrorCode::DuplicateLine: return "DuplicateLine";
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::NonpositiveBase: return "NonpositiveBase";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVoltage: return "ZeroVoltage";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::InvalidBigM: return "InvalidBigM";
    case ErrorCode::NonpositiveZeta: return "NonpositiveZeta";
    case ErrorCode::NoFeasibleAssignment: return "NoFeasibleAssignment";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::PowerOutOfRange: return "PowerOutOfRange";
    case ErrorCode::HorizonMismatch: return "HorizonMismatch";
    case ErrorCode::TooManyBinaries: return "TooManyBinaries";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MissingNeighborMessage: return "MissingNeighborMessage";
    case ErrorCode::SubproblemInfeasible: return "SubproblemInfeasible";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::AllComponentsSkipped: return "AllComponentsSkipped";
    case ErrorCode::InfeasibleStage: return "InfeasibleStage";
    case ErrorCode::NrDivergence: return "NrDivergence";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void check_base(const PerUnitBase& base) {
  if (!(base.v_base > 0.0) || !(base.s_base > 0.0)) {
    throw Error(ErrorCode::NonpositiveBase, "per-unit bases must be strictly positive");
  }
}

double base_for(const PerUnitBase& base, QuantityKind kind) {
  check_base(base);
  switch (kind) {
    case QuantityKind::Power: return base.s_base;
    case QuantityKind::Voltage: return base.v_base;
    case QuantityKind::Impedance: return base.z_base();
  }
  return 1.0;
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  std::string s = pos == std::string::npos ? line : line.substr(0, pos);
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double to_per_unit(double raw, const PerUnitBase& base, QuantityKind kind) {
  return raw / base_for(base, kind);
}

double from_per_unit(double pu, const PerUnitBase& base, QuantityKind kind) {
  return pu * base_for(base, kind);
}

RadialNetwork::RadialNetwork(PerUnitBase base, std::vector<Bus> buses, std::vector<Line> lines,
                             std::vector<BusId> ancestor,
                             std::vector<std::vector<BusId>> children)
    : base_(base),
      buses_(std::move(buses)),
      lines_(std::move(lines)),
      ancestor_(std::move(ancestor)),
      children_(std::move(children)) {
  for (const auto& b : buses_) {
    if (b.has_microgrid) mg_buses_.push_back(b.id);
    by_source_[b.source_id] = b.id;
  }
}

BusId RadialNetwork::bus_by_source(int source_id) const {
  auto it = by_source_.find(source_id);
  if (it == by_source_.end()) {
    throw Error(ErrorCode::ParseError, "unknown bus id " + std::to_string(source_id));
  }
  return it->second;
}

RadialNetwork RadialNetwork::with_microgrids(const std::vector<int>& source_ids) const {
  auto buses = buses_;
  for (auto& b : buses) b.has_microgrid = false;
  for (int s : source_ids) buses.at(bus_by_source(s)).has_microgrid = true;
  return RadialNetwork(base_, std::move(buses), lines_, ancestor_, children_);
}

NetworkDescription parse_network(std::istream& in) {
  NetworkDescription desc;
  std::string section;
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = strip_comment(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    std::istringstream ss(line);
    if (section == "base") {
      auto eq = line.find('=');
      if (eq == std::string::npos) fail("expected key = value");
      std::string key = strip_comment(line.substr(0, eq));
      double value = 0.0;
      try {
        value = std::stod(line.substr(eq + 1));
      } catch (const std::exception&) {
        fail("bad number for " + key);
      }
      if (key == "v_base_kv") desc.base.v_base = value * 1e3;
      else if (key == "s_base_kva") desc.base.s_base = value * 1e3;
      else if (key == "root") desc.root = static_cast<int>(value);
      else fail("unknown key " + key);
    } else if (section == "buses") {
      NetworkDescription::BusRecord rec{};
      if (!(ss >> rec.id >> rec.p_kw >> rec.q_kvar)) fail("bus record needs id p_kw q_kvar");
      if (!(ss >> rec.curtailment_penalty)) rec.curtailment_penalty = 0.0;
      desc.buses.push_back(rec);
    } else if (section == "lines") {
      NetworkDescription::LineRecord rec{};
      if (!(ss >> rec.from >> rec.to >> rec.r_ohm >> rec.x_ohm >> rec.s_max_kva)) {
        fail("line record needs from to r x s_max");
      }
      desc.lines.push_back(rec);
    } else if (section == "microgrids") {
      int id = 0;
      if (!(ss >> id)) fail("microgrid record needs a bus id");
      desc.microgrids.push_back(id);
    } else {
      fail("record outside a known section");
    }
  }
  return desc;
}

RadialNetwork build_network(const NetworkDescription& desc) {
  check_base(desc.base);
  std::map<int, std::size_t> src;  // source id -> record index
  for (std::size_t i = 0; i < desc.buses.size(); ++i) {
    if (!src.emplace(desc.buses[i].id, i).second) {
      throw Error(ErrorCode::ParseError, "bus " + std::to_string(desc.buses[i].id) + " declared twice");
    }
    if (desc.buses[i].curtailment_penalty < 0.0) {
      throw Error(ErrorCode::ParseError, "negative curtailment penalty");
    }
  }
  if (desc.root < 0 || !src.count(desc.root)) {
    throw Error(ErrorCode::MissingRoot, "root bus missing or undeclared");
  }

  const std::size_t n = desc.buses.size();
  std::set<std::pair<int, int>> seen;
  // adjacency: (neighbour record index, line record index)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t li = 0; li < desc.lines.size(); ++li) {
    const auto& l = desc.lines[li];
    if (!src.count(l.from) || !src.count(l.to)) {
      throw Error(ErrorCode::ParseError, "line references undeclared bus");
    }
    if (l.from == l.to) throw Error(ErrorCode::CycleDetected, "self loop at bus " + std::to_string(l.from));
    if (!seen.emplace(l.from, l.to).second) {
      throw Error(ErrorCode::DuplicateLine,
                  "line " + std::to_string(l.from) + "->" + std::to_string(l.to) + " listed twice");
    }
    if (l.r_ohm < 0.0 || l.x_ohm < 0.0 || !(l.s_max_kva > 0.0)) {
      throw Error(ErrorCode::ParseError, "line parameters must satisfy r,x >= 0 and s_max > 0");
    }
    adj[src[l.from]].emplace_back(src[l.to], li);
    adj[src[l.to]].emplace_back(src[l.from], li);
  }

  // Iterative DFS from the root; children visited in ascending source id.
  for (auto& a : adj) {
    std::sort(a.begin(), a.end(), [&](const auto& p, const auto& q) {
      return desc.buses[p.first].id < desc.buses[q.first].id;
    });
  }
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dense(n, none);     // record -> dense id
  std::vector<std::size_t> order;              // dense -> record
  std::vector<std::size_t> parent_rec(n, none);
  std::vector<std::size_t> via_line(n, none);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{src[desc.root], none}};
  while (!stack.empty()) {
    auto [rec, from_line] = stack.back();
    stack.pop_back();
    if (dense[rec] != none) {
      throw Error(ErrorCode::CycleDetected, "bus " + std::to_string(desc.buses[rec].id) + " reached twice");
    }
    dense[rec] = order.size();
    order.push_back(rec);
    via_line[rec] = from_line;
    for (auto it = adj[rec].rbegin(); it != adj[rec].rend(); ++it) {
      if (it->second == from_line) continue;
      if (dense[it->first] != none) {
        throw Error(ErrorCode::CycleDetected,
                    "bus " + std::to_string(desc.buses[it->first].id) + " closes a loop");
      }
      parent_rec[it->first] = rec;
      stack.emplace_back(it->first, it->second);
    }
  }
  if (order.size() != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (dense[i] == none) {
        throw Error(ErrorCode::DisconnectedBus,
                    "bus " + std::to_string(desc.buses[i].id) + " not reachable from the root");
      }
    }
  }
  if (desc.lines.size() != n - 1) {
    throw Error(ErrorCode::CycleDetected, "line count must equal bus count minus one");
  }

  const auto& base = desc.base;
  std::set<int> mg(desc.microgrids.begin(), desc.microgrids.end());
  for (int m : mg) {
    if (!src.count(m)) throw Error(ErrorCode::ParseError, "microgrid at undeclared bus");
    if (m == desc.root) throw Error(ErrorCode::ParseError, "microgrid cannot sit at the root");
  }

  std::vector<Bus> buses(n);
  std::vector<Line> lines(n - 1);
  std::vector<BusId> ancestor(n, 0);
  std::vector<std::vector<BusId>> children(n);
  for (std::size_t d = 0; d < n; ++d) {
    const auto& rec = desc.buses[order[d]];
    Bus& b = buses[d];
    b.id = d;
    b.source_id = rec.id;
    b.has_microgrid = mg.count(rec.id) > 0;
    b.p_load = to_per_unit(rec.p_kw * 1e3, base, QuantityKind::Power);
    b.q_load = to_per_unit(rec.q_kvar * 1e3, base, QuantityKind::Power);
    b.curtailment_penalty = rec.curtailment_penalty;
    if (d == 0) continue;
    BusId anc = dense[parent_rec[order[d]]];
    ancestor[d] = anc;
    children[anc].push_back(d);
    const auto& lr = desc.lines[via_line[order[d]]];
    Line& l = lines[d - 1];
    l.id = d - 1;
    l.to_bus = d;
    l.r = to_per_unit(lr.r_ohm, base, QuantityKind::Impedance);
    l.x = to_per_unit(lr.x_ohm, base, QuantityKind::Impedance);
    l.s_max = to_per_unit(lr.s_max_kva * 1e3, base, QuantityKind::Power);
  }
  for (auto& c : children) std::sort(c.begin(), c.end());
  return RadialNetwork(base, std::move(buses), std::move(lines), std::move(ancestor),
                       std::move(children));
}

RadialNetwork load_network(std::istream& in) { return build_network(parse_network(in)); }

RadialNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return load_network(in);
}

}  // namespace adn
