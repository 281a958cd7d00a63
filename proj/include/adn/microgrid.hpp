#pragma once

// Microgrid model: battery dynamics, inverter capability polygon, load
// curtailment and the AC/DC power balance at the point of connection. All
// powers are per-unit, energies in per-unit hours.

#include <vector>

#include "adn/grid.hpp"
#include "adn/solver/problem.hpp"

namespace adn {

struct BessSpec {
  double capacity = 0.6;
  double e_min = 0.12;
  double e_max = 0.54;
  double p_min = -0.1;  // charging limit (negative)
  double p_max = 0.1;   // discharging limit
  double eta = 0.225;   // efficiency times sampling time, hours
  double beta_b = 0.1519;  // EUR/kWh

  /// Energy window 0.2..0.9 of capacity, symmetric power rating.
  static BessSpec from_rating(double capacity, double p_rating, double eta, double beta_b);
  void validate() const;
};

struct InverterSpec {
  double s_inv = 0.25;
  int segments = 16;
  void validate() const;
};

/// a*P + b*Q + c <= 0
struct HalfPlane {
  double a, b, c;
};

/// Polygon with vertices on the circle of radius s_inv.
std::vector<HalfPlane> pwl_circle(const InverterSpec& spec);

/// E_{k+1} = E_k - eta * P_bat. Bounds on the result are the caller's
/// constraint, not clamped here. Throws PowerOutOfRange.
double bess_step(double e, double p_bat, const BessSpec& spec);

struct MicrogridSpec {
  BusId bus = 0;
  BessSpec bess;
  InverterSpec inverter;
  double cos_omega = 0.8;
  double beta_c = 0.506;  // EUR/kWh
  double e_init = 0.3;
  // Forecasts over the horizon, one entry per interval.
  std::vector<double> pv, load_p, load_q, load_ac_p;

  std::size_t horizon() const { return pv.size(); }
  double tan_omega() const;
  void validate() const;
};

/// Variables of one microgrid over the horizon (indices into a problem).
struct MgVariables {
  std::vector<solver::Index> p_bat, p_curt, e_next, q_inv, p_inj, q_inj;
};

/// Cost weights attached to the microgrid variables (objective coefficient
/// per pu of the variable; energy_weight converts pu over one interval to kWh).
struct MgCostWeights {
  double energy_weight = 250.0;   // s_base[kW] * dt[h]
  std::vector<double> tariff;     // EUR/kWh per interval, applied to P^inj; empty for none
  bool include_local = true;      // beta_c P^curt + beta_b P^bat
};

/// Adds BESS, inverter, curtailment and balance rows for `horizon` intervals.
/// Throws HorizonMismatch when forecasts are shorter than the horizon.
MgVariables build_mg_constraints(solver::MiqpProblem& prob, const MicrogridSpec& spec,
                                 int horizon, const MgCostWeights& weights = {});

}  // namespace adn
