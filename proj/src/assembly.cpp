#include "adn/assembly.hpp"

#include <cmath>
#include <string>

#include "adn/error.hpp"

namespace adn {

using solver::Index;
using solver::kInf;
using solver::Term;

double StageInput::energy_weight(const RadialNetwork& net) const {
  return net.base().s_base / 1e3 * dt_hours;
}

void StageInput::validate(const RadialNetwork& net) const {
  const auto h = static_cast<std::size_t>(horizon);
  if (horizon < 1 || tariff.size() < h || p_load.size() < h || q_load.size() < h || lin.size() < h) {
    throw Error(ErrorCode::HorizonMismatch, "stage data shorter than the horizon");
  }
  for (std::size_t k = 0; k < h; ++k) {
    if (p_load[k].size() != net.bus_count() || q_load[k].size() != net.bus_count() ||
        lin[k].p_star.size() != net.line_count()) {
      throw Error(ErrorCode::DimensionMismatch, "stage data does not match the network");
    }
  }
  const auto& mg_buses = net.microgrid_buses();
  if (mgs.size() != mg_buses.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one microgrid spec per microgrid bus required");
  }
  for (std::size_t i = 0; i < mgs.size(); ++i) {
    if (mgs[i].bus != mg_buses[i]) {
      throw Error(ErrorCode::DimensionMismatch, "microgrid specs must follow microgrid-bus order");
    }
  }
  if (voltage_support) as.validate();
}

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& o) {
  energy += o.energy;
  penalty += o.penalty;
  loss += o.loss;
  curtailment += o.curtailment;
  bess += o.bess;
  return *this;
}

AdnVariables add_adn_constraints(solver::MiqpProblem& prob, const RadialNetwork& net,
                                 const StageInput& in, AdnRole role,
                                 std::span<const MgVariables> mg_inj) {
  in.validate(net);
  const std::size_t nb = net.bus_count(), nl = net.line_count();
  const auto& mg_buses = net.microgrid_buses();
  if (role == AdnRole::Centralized && mg_inj.size() != mg_buses.size()) {
    throw Error(ErrorCode::DimensionMismatch, "centralized assembly needs every microgrid's variables");
  }
  const double ew = in.energy_weight(net);
  const double s_base_kw = net.base().s_base / 1e3;
  const auto lim = OperatingLimits::from_network(net, in.v_min, in.v_max);
  double exchange_bound = 0.0;
  for (BusId c : net.children(net.root())) exchange_bound += net.line_to(c).s_max;
  if (in.voltage_support) exchange_bound = std::min(exchange_bound, in.as.exchange_bound);

  std::vector<long> mg_index(nb, -1);
  for (std::size_t m = 0; m < mg_buses.size(); ++m) mg_index[mg_buses[m]] = static_cast<long>(m);

  AdnVariables out;
  std::vector<Term> terms;
  for (int k = 0; k < in.horizon; ++k) {
    const std::string s = "[" + std::to_string(k) + "]";
    AdnIntervalVars v;
    const auto affine = linearize_current(in.lin[k]);
    for (std::size_t l = 0; l < nl; ++l) {
      const Line& ln = net.lines()[l];
      const std::string ls = std::to_string(ln.to_bus) + s;
      v.p_flow.push_back(prob.add_variable(-lim.p_max[l], lim.p_max[l], 0.0, "p_" + ls));
      v.q_flow.push_back(prob.add_variable(-lim.q_max[l], lim.q_max[l], 0.0, "q_" + ls));
      v.i_sq.push_back(prob.add_variable(-kInf, kInf, in.beta_loss * ew * ln.r, "i_" + ls));
    }
    for (std::size_t b = 0; b < nb; ++b) {
      const double lo = b == net.root() ? in.slack_v * in.slack_v : lim.v_min_sq;
      const double hi = b == net.root() ? in.slack_v * in.slack_v : lim.v_max_sq;
      v.v_sq.push_back(prob.add_variable(lo, hi, 0.0, "v_" + std::to_string(b) + s));
    }
    v.p_ex = prob.add_variable(-exchange_bound, exchange_bound, in.tariff[k] * ew, "p_ex" + s);
    v.q_ex = prob.add_variable(-exchange_bound, exchange_bound, 0.0, "q_ex" + s);
    v.p_curt.assign(nb, -1);
    for (std::size_t m = 0; m < mg_buses.size(); ++m) {
      if (role == AdnRole::Centralized) {
        v.mg_p_inj.push_back(mg_inj[m].p_inj[k]);
        v.mg_q_inj.push_back(mg_inj[m].q_inj[k]);
      } else {
        const std::string ms = std::to_string(mg_buses[m]) + s;
        v.mg_p_inj.push_back(prob.add_variable(-kInf, kInf, -in.tariff[k] * ew, "y_p_" + ms));
        v.mg_q_inj.push_back(prob.add_variable(-kInf, kInf, 0.0, "y_q_" + ms));
      }
    }

    for (BusId b = 0; b < nb; ++b) {
      if (b == net.root() || mg_index[b] >= 0) continue;
      const double pl = in.p_load[k][b];
      if (pl > 0.0) {
        v.p_curt[b] = static_cast<long>(prob.add_variable(
            0.0, pl, net.bus(b).curtailment_penalty * ew, "curt_" + std::to_string(b) + s));
      }
    }

    // Power balance at every bus: P_i - sum_children (P_j + r_j I_j) + P^inj_i = 0.
    for (int reactive = 0; reactive < 2; ++reactive) {
      for (BusId b = 0; b < nb; ++b) {
        terms.clear();
        double rhs = 0.0;
        if (b != net.root()) {
          const std::size_t l = RadialNetwork::line_index(b);
          terms.push_back({reactive ? v.q_flow[l] : v.p_flow[l], 1.0});
        }
        for (BusId c : net.children(b)) {
          const std::size_t l = RadialNetwork::line_index(c);
          const Line& ln = net.line_to(c);
          terms.push_back({reactive ? v.q_flow[l] : v.p_flow[l], -1.0});
          terms.push_back({v.i_sq[l], reactive ? -ln.x : -ln.r});
        }
        if (b == net.root()) {
          terms.push_back({reactive ? v.q_ex : v.p_ex, 1.0});
        } else if (mg_index[b] >= 0) {
          const auto m = static_cast<std::size_t>(mg_index[b]);
          terms.push_back({reactive ? v.mg_q_inj[m] : v.mg_p_inj[m], 1.0});
        } else {
          // Non-microgrid bus: P^inj = P^curt - P^load, and curtailment sheds
          // reactive load in proportion.
          const double pl = in.p_load[k][b], ql = in.q_load[k][b];
          rhs = reactive ? ql : pl;
          if (v.p_curt[b] >= 0) {
            terms.push_back({static_cast<Index>(v.p_curt[b]), reactive ? ql / pl : 1.0});
          }
        }
        prob.add_row(terms, rhs, rhs,
                     std::string(reactive ? "q_bal_" : "p_bal_") + std::to_string(b) + s);
      }
    }
    // Voltage drop and linearized current per line.
    for (std::size_t l = 0; l < nl; ++l) {
      const Line& ln = net.lines()[l];
      const BusId i = ln.to_bus, a = net.ancestor(i);
      const std::string ls = std::to_string(i) + s;
      prob.add_row({{v.v_sq[a], 1.0},
                    {v.v_sq[i], -1.0},
                    {v.p_flow[l], -2.0 * ln.r},
                    {v.q_flow[l], -2.0 * ln.x},
                    {v.i_sq[l], -(ln.r * ln.r + ln.x * ln.x)}},
                   0.0, 0.0, "vdrop_" + ls);
      const CurrentAffine& f = affine[l];
      prob.add_row({{v.i_sq[l], 1.0}, {v.p_flow[l], -f.dp}, {v.q_flow[l], -f.dq}, {v.v_sq[i], -f.dv}},
                   f.constant, f.constant, "current_" + ls);
    }
    if (in.voltage_support) {
      const AsConstraintBlock block = build_as_block(k, in.as);
      v.as = block.embed(prob, v.p_ex, v.q_ex, s_base_kw);
    }
    out.k.push_back(std::move(v));
  }
  return out;
}

CentralizedProblem assemble_centralized(const RadialNetwork& net, const StageInput& in) {
  CentralizedProblem cp;
  const double ew = in.energy_weight(net);
  for (const MicrogridSpec& mg : in.mgs) {
    MgCostWeights w;
    w.energy_weight = ew;
    cp.mgs.push_back(build_mg_constraints(cp.problem, mg, in.horizon, w));
  }
  cp.adn = add_adn_constraints(cp.problem, net, in, AdnRole::Centralized, cp.mgs);
  return cp;
}

CostBreakdown interval_costs(const RadialNetwork& net, const StageInput& in,
                             const CentralizedProblem& cp, std::span<const double> x, int k) {
  const double ew = in.energy_weight(net);
  const AdnIntervalVars& v = cp.adn.k.at(k);
  CostBreakdown c;
  c.energy = in.tariff[k] * ew * x[v.p_ex];
  if (v.as) c.penalty = net.base().s_base / 1e3 * x[v.as->c_tn];
  for (std::size_t l = 0; l < net.line_count(); ++l) {
    c.loss += in.beta_loss * ew * net.lines()[l].r * x[v.i_sq[l]];
  }
  for (BusId b = 0; b < net.bus_count(); ++b) {
    if (v.p_curt[b] >= 0) c.curtailment += net.bus(b).curtailment_penalty * ew * x[v.p_curt[b]];
  }
  for (std::size_t m = 0; m < cp.mgs.size(); ++m) {
    c.curtailment += in.mgs[m].beta_c * ew * x[cp.mgs[m].p_curt[k]];
    c.bess += in.mgs[m].bess.beta_b * ew * x[cp.mgs[m].p_bat[k]];
  }
  return c;
}

std::vector<std::complex<double>> bus_injections(const RadialNetwork& net, const StageInput& in,
                                                 const AdnVariables& adn,
                                                 std::span<const double> x, int k) {
  const AdnIntervalVars& v = adn.k.at(k);
  std::vector<std::complex<double>> s(net.bus_count());
  const auto& mg_buses = net.microgrid_buses();
  for (BusId b = 0; b < net.bus_count(); ++b) {
    if (b == net.root()) continue;
    const double pl = in.p_load[k][b], ql = in.q_load[k][b];
    const double curt = v.p_curt[b] >= 0 ? x[v.p_curt[b]] : 0.0;
    s[b] = {curt - pl, pl > 0.0 ? curt * ql / pl - ql : -ql};
  }
  for (std::size_t m = 0; m < mg_buses.size(); ++m) {
    s[mg_buses[m]] = {x[v.mg_p_inj[m]], x[v.mg_q_inj[m]]};
  }
  return s;
}

DistFlowState extract_state(const RadialNetwork& net, const AdnVariables& adn,
                            std::span<const double> x, int k,
                            std::span<const std::complex<double>> injections) {
  const AdnIntervalVars& v = adn.k.at(k);
  DistFlowState s = DistFlowState::flat(net);
  for (std::size_t l = 0; l < net.line_count(); ++l) {
    s.p_flow[l] = x[v.p_flow[l]];
    s.q_flow[l] = x[v.q_flow[l]];
    s.i_sq[l] = x[v.i_sq[l]];
  }
  for (BusId b = 0; b < net.bus_count(); ++b) {
    s.v_sq[b] = x[v.v_sq[b]];
    s.p_inj[b] = injections[b].real();
    s.q_inj[b] = injections[b].imag();
  }
  s.p_inj[net.root()] = x[v.p_ex];
  s.q_inj[net.root()] = x[v.q_ex];
  return s;
}

}  // namespace adn
