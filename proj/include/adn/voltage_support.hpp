#pragma once

// Passive voltage-support tariff at the substation: the (P, Q) exchange is
// free inside zone 1 and penalized by c_p per unit of reactive excess in
// zone 2. The mixed-integer block below encodes the tariff with three
// binaries per interval; zone_oracle is the piecewise reference.

#include <array>
#include <span>
#include <vector>

#include "adn/solver/problem.hpp"

namespace adn {

struct AsParameters {
  double p_min = 0.5;
  double q_min = 0.165;
  double tan_phi = 0.32868;  // tan(acos 0.95)
  double c_p = 5.0;          // penalty per pu of reactive excess, in the cost unit of C^tn
  double m_p = 100.0;
  double zeta = 1e-8;
  double v_tr_pct = 10.0;
  double s_tr = 10.0;           // pu
  double exchange_bound = 2.0;  // largest |P^ex|, |Q^ex| the block must admit, pu

  /// Table-style parameters: P^min = 0.5 x peak exchange, Q^min = 0.33 P^min,
  /// m_p = 20 x peak apparent exchange.
  static AsParameters from_peak_exchange(double peak_exchange, double exchange_bound);

  /// Throws InvalidBigM, NonpositiveZeta or InvalidParameters.
  void validate() const;
  /// Relative deviation of P^min from Q^min * cot(phi).
  double cot_identity_deviation() const;
};

struct ExchangePoint {
  double p_ex = 0.0;
  double q_ex = 0.0;
};

struct ZoneResult {
  int zone = 1;
  double cost = 0.0;
  double q_lim = 0.0;
};

/// Export (p_ex <= 0) is always zone 1. Points on the boundary are zone 1, as
/// are points whose reactive excess does not exceed `q_tolerance`.
ZoneResult zone_oracle(const ExchangePoint& pt, const AsParameters& p, double q_tolerance = 0.0);

/// Variable indices of one interval's block inside some problem.
struct AsVariables {
  solver::Index p_ex, q_ex;
  solver::Index c_tn, q_lim, p_mu;
  solver::Index delta_p, delta_phi, delta;
};

/// Rows of one interval over the local layout
///   [P^ex, Q^ex, C^tn, Q^lim, P^mu, delta^p, delta^phi, delta].
struct AsConstraintBlock {
  static constexpr solver::Index kPex = 0, kQex = 1, kCtn = 2, kQlim = 3, kPmu = 4;
  static constexpr solver::Index kDeltaP = 5, kDeltaPhi = 6, kDelta = 7;
  static constexpr std::size_t kVars = 8;

  int interval = 0;
  solver::MiqpProblem local;  // exchange variables are free here

  std::size_t row_count() const { return local.num_rows(); }
  std::size_t binary_count() const { return local.binaries().size(); }

  /// Copies the block into `target`, tying it to existing exchange variables.
  /// C^tn receives objective coefficient `cost_weight`.
  AsVariables embed(solver::MiqpProblem& target, solver::Index p_ex, solver::Index q_ex,
                    double cost_weight) const;
};

AsConstraintBlock build_as_block(int k, const AsParameters& p);

/// Minimal C^tn over all binary assignments with (P^ex, Q^ex) fixed, or a
/// negative value when no assignment is feasible.
double min_block_cost(const AsConstraintBlock& block, const ExchangePoint& pt);

/// Largest |min_block_cost - zone_oracle cost| over the grid. Throws
/// NoFeasibleAssignment when some point admits no assignment.
double verify_reformulation(const AsParameters& p, std::span<const ExchangePoint> grid,
                            bool parallel = true);

std::vector<ExchangePoint> exchange_grid(double p_lo, double p_hi, double q_lo, double q_hi,
                                         int np, int nq);

}  // namespace adn
