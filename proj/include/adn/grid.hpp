#pragma once

// Radial distribution network: buses, lines and the rooted-tree topology.
//
// Network documents are plain text with four sections:
//
//   [base]        key = value pairs: v_base_kv, s_base_kva, root
//   [buses]       id  p_load_kw  q_load_kvar  curtailment_penalty_eur_per_kwh
//   [lines]       from  to  r_ohm  x_ohm  s_max_kva
//   [microgrids]  one bus id per line
//
// '#' starts a comment. Source ids may be arbitrary non-negative integers;
// after loading, buses are renumbered densely in DFS order from the root so
// that bus 0 is the substation and every line is indexed by its receiving bus.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace adn {

using BusId = std::size_t;

struct PerUnitBase {
  double v_base = 12.66e3;  // volts
  double s_base = 1.0e6;    // volt-amperes

  double z_base() const { return v_base * v_base / s_base; }
};

enum class QuantityKind { Power, Voltage, Impedance };

double to_per_unit(double raw, const PerUnitBase& base, QuantityKind kind);
double from_per_unit(double pu, const PerUnitBase& base, QuantityKind kind);

struct Bus {
  BusId id = 0;
  int source_id = 0;
  bool has_microgrid = false;
  double p_load = 0.0;  // nominal (peak) load, pu
  double q_load = 0.0;
  double curtailment_penalty = 0.0;  // EUR/kWh
};

/// Line `to_bus` connects ancestor(to_bus) -> to_bus; lines are stored so that
/// lines[i].to_bus == i + 1.
struct Line {
  std::size_t id = 0;
  BusId to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double s_max = 0.0;
};

class RadialNetwork {
 public:
  RadialNetwork(PerUnitBase base, std::vector<Bus> buses, std::vector<Line> lines,
                std::vector<BusId> ancestor, std::vector<std::vector<BusId>> children);

  std::size_t bus_count() const { return buses_.size(); }
  std::size_t line_count() const { return lines_.size(); }
  BusId root() const { return 0; }

  const Bus& bus(BusId b) const { return buses_.at(b); }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  /// Line feeding bus b (b must not be the root).
  const Line& line_to(BusId b) const { return lines_.at(b - 1); }
  static std::size_t line_index(BusId b) { return b - 1; }

  BusId ancestor(BusId b) const { return ancestor_.at(b); }
  const std::vector<BusId>& children(BusId b) const { return children_.at(b); }

  /// Dense ids of microgrid buses in ascending order.
  const std::vector<BusId>& microgrid_buses() const { return mg_buses_; }
  BusId bus_by_source(int source_id) const;

  const PerUnitBase& base() const { return base_; }

  /// Same network with a different microgrid bus set (source ids).
  RadialNetwork with_microgrids(const std::vector<int>& source_ids) const;

 private:
  PerUnitBase base_;
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<BusId> ancestor_;
  std::vector<std::vector<BusId>> children_;
  std::vector<BusId> mg_buses_;
  std::map<int, BusId> by_source_;
};

/// Raw, source-id keyed description as read from a network document.
struct NetworkDescription {
  PerUnitBase base;
  int root = -1;
  struct BusRecord {
    int id;
    double p_kw, q_kvar, curtailment_penalty;
  };
  struct LineRecord {
    int from, to;
    double r_ohm, x_ohm, s_max_kva;
  };
  std::vector<BusRecord> buses;
  std::vector<LineRecord> lines;
  std::vector<int> microgrids;
};

NetworkDescription parse_network(std::istream& in);
RadialNetwork build_network(const NetworkDescription& desc);
RadialNetwork load_network(std::istream& in);
RadialNetwork load_network(const std::filesystem::path& path);

}  // namespace adn
