#include "adn/voltage_support.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adn/error.hpp"
#include "adn/solver/solve.hpp"

namespace adn {

using solver::Index;
using solver::kInf;
using solver::Term;

AsParameters AsParameters::from_peak_exchange(double peak_exchange, double exchange_bound) {
  AsParameters p;
  p.p_min = 0.5 * peak_exchange;
  p.q_min = 0.33 * p.p_min;
  p.exchange_bound = exchange_bound;
  p.m_p = 20.0 * std::max(peak_exchange, exchange_bound);
  return p;
}

void AsParameters::validate() const {
  if (!(zeta > 0.0)) throw Error(ErrorCode::NonpositiveZeta, "zeta must be positive");
  if (!(p_min > 0.0) || !(q_min > 0.0) || !(tan_phi > 0.0) || !(c_p > 0.0)) {
    throw Error(ErrorCode::InvalidParameters, "p_min, q_min, tan_phi and c_p must be positive");
  }
  if (std::abs(q_min) > v_tr_pct / 100.0 * s_tr) {
    throw Error(ErrorCode::InvalidParameters, "q_min exceeds the transformer short-circuit bound");
  }
  // M must dominate |P^ex|, |Q^ex|, c_p |Q^ex| and the P^mu / Q^lim ranges.
  const double need = std::max({exchange_bound * std::max(1.0, c_p) + q_min,
                                exchange_bound * (1.0 + tan_phi) + q_min, p_min + zeta});
  if (!(m_p > need)) {
    throw Error(ErrorCode::InvalidBigM,
                "m_p = " + std::to_string(m_p) + " does not dominate " + std::to_string(need));
  }
}

double AsParameters::cot_identity_deviation() const {
  return std::abs(p_min - q_min / tan_phi) / p_min;
}

ZoneResult zone_oracle(const ExchangePoint& pt, const AsParameters& p, double q_tolerance) {
  ZoneResult r;
  if (pt.p_ex <= 0.0) return r;
  r.q_lim = pt.p_ex < p.p_min ? p.q_min : pt.p_ex * p.tan_phi;
  const double excess = std::abs(pt.q_ex) - r.q_lim;
  if (excess > q_tolerance) {
    r.zone = 2;
    r.cost = p.c_p * excess;
  }
  return r;
}

AsConstraintBlock build_as_block(int k, const AsParameters& p) {
  p.validate();
  AsConstraintBlock b;
  b.interval = k;
  auto& q = b.local;
  const std::string s = "[" + std::to_string(k) + "]";
  q.add_variable(-kInf, kInf, 0.0, "p_ex" + s);
  q.add_variable(-kInf, kInf, 0.0, "q_ex" + s);
  q.add_variable(0.0, kInf, 1.0, "c_tn" + s);
  q.add_variable(-kInf, kInf, 0.0, "q_lim" + s);
  q.add_variable(-kInf, kInf, 0.0, "p_mu" + s);
  q.add_binary(0.0, "delta_p" + s);
  q.add_binary(0.0, "delta_phi" + s);
  q.add_binary(0.0, "delta" + s);

  using B = AsConstraintBlock;
  const double M = p.m_p, cp = p.c_p;
  // Penalty is nonnegative and vanishes on export or inside zone 1.
  q.add_row({{B::kCtn, 1.0}}, 0.0, kInf, "ctn_nonneg" + s);
  q.add_row({{B::kCtn, 1.0}, {B::kDeltaP, M}}, -kInf, M, "ctn_export" + s);
  q.add_row({{B::kCtn, 1.0}, {B::kDeltaPhi, M}}, -kInf, M, "ctn_zone1" + s);
  // |Q| <= C/c_p + Q^lim + (M/c_p)(delta^p + delta^phi)
  q.add_row({{B::kQex, 1.0}, {B::kCtn, -1.0 / cp}, {B::kQlim, -1.0}, {B::kDeltaP, -M / cp},
             {B::kDeltaPhi, -M / cp}},
            -kInf, 0.0, "q_penalty_hi" + s);
  q.add_row({{B::kQex, 1.0}, {B::kCtn, 1.0 / cp}, {B::kQlim, 1.0}, {B::kDeltaP, M / cp},
             {B::kDeltaPhi, M / cp}},
            0.0, kInf, "q_penalty_lo" + s);
  // |Q| <= Q^lim + M(1 - delta^phi): the literal form with M delta^phi - Q^lim
  // leaves no feasible point for delta^phi = 0 once Q^lim > 0.
  q.add_row({{B::kQex, 1.0}, {B::kQlim, -1.0}, {B::kDeltaPhi, M}}, -kInf, M, "q_zone_hi" + s);
  q.add_row({{B::kQex, 1.0}, {B::kQlim, 1.0}, {B::kDeltaPhi, -M}}, -M, kInf, "q_zone_lo" + s);
  // |Q| <= Q^lim + M(1 - delta^phi) + M delta^p
  q.add_row({{B::kQex, 1.0}, {B::kQlim, -1.0}, {B::kDeltaPhi, M}, {B::kDeltaP, -M}}, -kInf, M,
            "q_lim_hi" + s);
  q.add_row({{B::kQex, 1.0}, {B::kQlim, 1.0}, {B::kDeltaPhi, -M}, {B::kDeltaP, M}}, -M, kInf,
            "q_lim_lo" + s);
  // P^mu follows P^ex above P^min and sits in [-zeta, zeta]/tan(phi) below.
  q.add_row({{B::kPmu, p.tan_phi}, {B::kDelta, M}}, -kInf, M + p.zeta, "p_mu_hi" + s);
  q.add_row({{B::kPmu, p.tan_phi}, {B::kDelta, -M}}, -M - p.zeta, kInf, "p_mu_lo" + s);
  q.add_row({{B::kPex, 1.0}, {B::kPmu, -1.0}, {B::kDelta, p.zeta - p.p_min}}, -kInf, p.zeta,
            "p_mu_track_hi" + s);
  q.add_row({{B::kPex, 1.0}, {B::kPmu, -1.0}, {B::kDelta, M}}, 0.0, kInf, "p_mu_track_lo" + s);
  q.add_row({{B::kPmu, 1.0}, {B::kDelta, p.p_min}}, p.p_min, kInf, "p_mu_floor" + s);
  // Q^lim = delta q_min + P^mu tan(phi)
  q.add_row({{B::kQlim, 1.0}, {B::kDelta, -p.q_min}, {B::kPmu, -p.tan_phi}}, 0.0, 0.0,
            "q_lim_def" + s);
  // Sign of P^ex selects delta^p.
  q.add_row({{B::kPex, 1.0}, {B::kDeltaP, M}}, 0.0, kInf, "p_sign_lo" + s);
  q.add_row({{B::kPex, 1.0}, {B::kDeltaP, M}}, -kInf, M, "p_sign_hi" + s);
  return b;
}

AsVariables AsConstraintBlock::embed(solver::MiqpProblem& target, Index p_ex, Index q_ex,
                                     double cost_weight) const {
  std::array<Index, kVars> map{};
  map[kPex] = p_ex;
  map[kQex] = q_ex;
  for (Index j = kCtn; j < kVars; ++j) {
    map[j] = target.add_variable(local.lower[j], local.upper[j], local.cost[j] * cost_weight,
                                 local.var_names[j]);
    target.is_binary[map[j]] = local.is_binary[j];
  }
  std::vector<Term> terms;
  for (Index r = 0; r < local.num_rows(); ++r) {
    terms.clear();
    auto vars = local.row_vars(r);
    auto coefs = local.row_coefs(r);
    for (std::size_t k = 0; k < vars.size(); ++k) terms.push_back({map[vars[k]], coefs[k]});
    target.add_row(terms, local.row_lower[r], local.row_upper[r], local.row_names[r]);
  }
  return AsVariables{p_ex, q_ex, map[kCtn], map[kQlim], map[kPmu],
                     map[kDeltaP], map[kDeltaPhi], map[kDelta]};
}

double min_block_cost(const AsConstraintBlock& block, const ExchangePoint& pt) {
  using B = AsConstraintBlock;
  std::vector<double> lo = block.local.lower, hi = block.local.upper;
  lo[B::kPex] = hi[B::kPex] = pt.p_ex;
  lo[B::kQex] = hi[B::kQex] = pt.q_ex;
  double best = -1.0;
  for (int a = 0; a < 8; ++a) {
    lo[B::kDeltaP] = hi[B::kDeltaP] = a & 1;
    lo[B::kDeltaPhi] = hi[B::kDeltaPhi] = (a >> 1) & 1;
    lo[B::kDelta] = hi[B::kDelta] = (a >> 2) & 1;
    const solver::Solution s = solver::solve_convex(block.local, lo, hi);
    if (!s.optimal()) continue;
    const double c = s.x[B::kCtn];
    if (best < 0.0 || c < best) best = c;
  }
  return best;
}

double verify_reformulation(const AsParameters& p, std::span<const ExchangePoint> grid,
                            bool parallel) {
  const AsConstraintBlock block = build_as_block(0, p);
  const long n = static_cast<long>(grid.size());
  std::vector<double> dev(n, 0.0);
  std::vector<char> infeasible(n, 0);
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (long i = 0; i < n; ++i) {
    const double c = min_block_cost(block, grid[i]);
    if (c < 0.0) infeasible[i] = 1;
    else dev[i] = std::abs(c - zone_oracle(grid[i], p).cost);
  }
  double worst = 0.0;
  for (long i = 0; i < n; ++i) {
    if (infeasible[i]) {
      throw Error(ErrorCode::NoFeasibleAssignment,
                  "no binary assignment admits (" + std::to_string(grid[i].p_ex) + ", " +
                      std::to_string(grid[i].q_ex) + ")");
    }
    worst = std::max(worst, dev[i]);
  }
  return worst;
}

std::vector<ExchangePoint> exchange_grid(double p_lo, double p_hi, double q_lo, double q_hi,
                                         int np, int nq) {
  std::vector<ExchangePoint> g;
  g.reserve(static_cast<std::size_t>(np) * nq);
  for (int i = 0; i < np; ++i) {
    const double pe = np > 1 ? p_lo + (p_hi - p_lo) * i / (np - 1) : p_lo;
    for (int j = 0; j < nq; ++j) {
      const double qe = nq > 1 ? q_lo + (q_hi - q_lo) * j / (nq - 1) : q_lo;
      g.push_back({pe, qe});
    }
  }
  return g;
}

}  // namespace adn
