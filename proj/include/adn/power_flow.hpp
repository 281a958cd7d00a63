#pragma once

#include <complex>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "adn/grid.hpp"

namespace adn {

/// Branch-flow state of one interval. Line quantities are indexed by line id
/// (receiving bus - 1); p_flow is the power arriving at the receiving bus.
/// p_inj at the root is the exchange with the upstream grid (import > 0).
struct DistFlowState {
  std::vector<double> p_flow, q_flow;  // per line
  std::vector<double> p_inj, q_inj;    // per bus
  std::vector<double> v_sq;            // per bus
  std::vector<double> i_sq;            // per line

  static DistFlowState flat(const RadialNetwork& net, double v_sq = 1.0);
};

/// Residual vector laid out as [active balance per bus | reactive balance per
/// bus | voltage drop per line | current definition per line].
struct DistFlowResiduals {
  std::vector<double> active, reactive, voltage, current;
  double max_abs() const;
};

DistFlowResiduals distflow_residuals(const RadialNetwork& net, const DistFlowState& s);

struct LinearizationPoint {
  std::vector<double> p_star, q_star, v_sq_star, i_sq_star;  // per line

  static LinearizationPoint from_state(const RadialNetwork& net, const DistFlowState& s);
};

/// i_sq ~= constant + dp * P + dq * Q + dv * V^sq for one line.
struct CurrentAffine {
  double dp = 0.0, dq = 0.0, dv = 0.0, constant = 0.0;

  double evaluate(double p, double q, double v_sq) const {
    return constant + dp * p + dq * q + dv * v_sq;
  }
};

inline constexpr double kVoltageFloorSq = 0.25;

CurrentAffine linearize_current(double p_star, double q_star, double v_sq_star,
                                double floor_sq = kVoltageFloorSq);
std::vector<CurrentAffine> linearize_current(const LinearizationPoint& lp,
                                             double floor_sq = kVoltageFloorSq);

struct OperatingLimits {
  std::vector<double> p_max, q_max;  // per line, s_max / sqrt(2)
  double v_min_sq = 0.95 * 0.95;
  double v_max_sq = 1.05 * 1.05;

  static OperatingLimits from_network(const RadialNetwork& net, double v_min, double v_max);
};

struct Violation {
  enum class Kind { ActiveFlow, ReactiveFlow, Voltage } kind;
  std::size_t index;  // line id or bus id
  double value;
  double limit;
};

struct ViolationReport {
  std::vector<Violation> items;
  bool empty() const { return items.empty(); }
};

ViolationReport check_limits(const DistFlowState& s, const OperatingLimits& lim);
void write_violations(std::ostream& out, const ViolationReport& report);

struct LoadFlowResult {
  std::vector<std::complex<double>> voltage;  // per bus
  std::complex<double> slack_injection;       // power drawn from the upstream grid
  int iterations = 0;
  std::vector<double> mismatch_history;       // infinity norm per iteration

  std::vector<double> magnitudes() const;
};

struct LoadFlowOptions {
  double tolerance = 1e-8;
  int max_iterations = 50;
};

/// Full AC load flow from a flat start. `injections` holds generation minus
/// load for every bus; the root entry is ignored.
LoadFlowResult newton_raphson_loadflow(const RadialNetwork& net,
                                       std::span<const std::complex<double>> injections,
                                       double slack_v, const LoadFlowOptions& opts = {});

/// Branch-flow quantities implied by an AC solution.
DistFlowState state_from_loadflow(const RadialNetwork& net, const LoadFlowResult& lf,
                                  std::span<const std::complex<double>> injections);

}  // namespace adn
