#include "adn/microgrid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "adn/error.hpp"

namespace adn {

using solver::Index;
using solver::kInf;

BessSpec BessSpec::from_rating(double capacity, double p_rating, double eta, double beta_b) {
  BessSpec s;
  s.capacity = capacity;
  s.e_min = 0.2 * capacity;
  s.e_max = 0.9 * capacity;
  s.p_min = -p_rating;
  s.p_max = p_rating;
  s.eta = eta;
  s.beta_b = beta_b;
  return s;
}

void BessSpec::validate() const {
  if (!(0.0 < e_min && e_min < e_max && e_max <= capacity)) {
    throw Error(ErrorCode::InvalidParameters, "BESS energy window must satisfy 0 < e_min < e_max <= capacity");
  }
  if (!(p_min < 0.0 && 0.0 < p_max)) {
    throw Error(ErrorCode::InvalidParameters, "BESS power limits must straddle zero");
  }
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidParameters, "BESS eta must be positive");
}

void InverterSpec::validate() const {
  if (!(s_inv > 0.0)) throw Error(ErrorCode::InvalidParameters, "inverter rating must be positive");
  if (segments < 4 || segments % 2 != 0) {
    throw Error(ErrorCode::InvalidParameters, "inverter polygon needs an even segment count >= 4");
  }
}

std::vector<HalfPlane> pwl_circle(const InverterSpec& spec) {
  spec.validate();
  const int l = spec.segments;
  const double pi = std::numbers::pi;
  const double s = std::sin(pi / l);
  std::vector<HalfPlane> rows;
  rows.reserve(l);
  for (int j = 1; j <= l; ++j) {
    const double ang = pi * (2 * j - 1) / l;
    rows.push_back({2.0 * s * std::sin(ang), 2.0 * s * std::cos(ang), -spec.s_inv * std::sin(2.0 * pi / l)});
  }
  return rows;
}

double bess_step(double e, double p_bat, const BessSpec& spec) {
  if (p_bat < spec.p_min || p_bat > spec.p_max) {
    throw Error(ErrorCode::PowerOutOfRange,
                "battery power " + std::to_string(p_bat) + " outside [" + std::to_string(spec.p_min) +
                    ", " + std::to_string(spec.p_max) + "]");
  }
  return e - spec.eta * p_bat;
}

double MicrogridSpec::tan_omega() const {
  return std::sqrt(1.0 - cos_omega * cos_omega) / cos_omega;
}

void MicrogridSpec::validate() const {
  bess.validate();
  inverter.validate();
  if (!(cos_omega > 0.0 && cos_omega <= 1.0)) {
    throw Error(ErrorCode::InvalidParameters, "load power factor must lie in (0, 1]");
  }
  if (e_init < bess.e_min - 1e-12 || e_init > bess.e_max + 1e-12) {
    throw Error(ErrorCode::InvalidParameters, "initial energy outside the BESS window");
  }
  const std::size_t n = pv.size();
  if (load_p.size() != n || load_q.size() != n || load_ac_p.size() != n) {
    throw Error(ErrorCode::HorizonMismatch, "microgrid forecasts differ in length");
  }
}

MgVariables build_mg_constraints(solver::MiqpProblem& prob, const MicrogridSpec& spec, int horizon,
                                 const MgCostWeights& w) {
  spec.validate();
  if (horizon < 1 || spec.horizon() < static_cast<std::size_t>(horizon)) {
    throw Error(ErrorCode::HorizonMismatch,
                "forecasts cover " + std::to_string(spec.horizon()) + " intervals, horizon is " +
                    std::to_string(horizon));
  }
  if (!w.tariff.empty() && w.tariff.size() < static_cast<std::size_t>(horizon)) {
    throw Error(ErrorCode::HorizonMismatch, "tariff shorter than the horizon");
  }
  const auto poly = pwl_circle(spec.inverter);
  const double tan_om = spec.tan_omega();
  const BessSpec& b = spec.bess;
  const std::string tag = "mg" + std::to_string(spec.bus);
  MgVariables v;
  for (int k = 0; k < horizon; ++k) {
    const std::string s = tag + "[" + std::to_string(k) + "]";
    const double local = w.include_local ? w.energy_weight : 0.0;
    const double tariff = w.tariff.empty() ? 0.0 : w.tariff[k] * w.energy_weight;
    v.p_bat.push_back(prob.add_variable(b.p_min, b.p_max, local * b.beta_b, "p_bat_" + s));
    v.p_curt.push_back(prob.add_variable(0.0, std::max(0.0, spec.load_p[k]), local * spec.beta_c, "p_curt_" + s));
    v.e_next.push_back(prob.add_variable(b.e_min, b.e_max, 0.0, "e_" + s));
    v.q_inv.push_back(prob.add_variable(-spec.inverter.s_inv, spec.inverter.s_inv, 0.0, "q_inv_" + s));
    v.p_inj.push_back(prob.add_variable(-kInf, kInf, tariff, "p_inj_" + s));
    v.q_inj.push_back(prob.add_variable(-kInf, kInf, 0.0, "q_inj_" + s));

    // E_{k+1} = E_k - eta P_bat, with E_1 known.
    if (k == 0) {
      prob.add_row({{v.e_next[k], 1.0}, {v.p_bat[k], b.eta}}, spec.e_init, spec.e_init, "energy_" + s);
    } else {
      prob.add_row({{v.e_next[k], 1.0}, {v.e_next[k - 1], -1.0}, {v.p_bat[k], b.eta}}, 0.0, 0.0,
                   "energy_" + s);
    }
    // P^inj = P^bat + P^pv + P^curt - P^load
    prob.add_row({{v.p_inj[k], 1.0}, {v.p_bat[k], -1.0}, {v.p_curt[k], -1.0}},
                 spec.pv[k] - spec.load_p[k], spec.pv[k] - spec.load_p[k], "p_balance_" + s);
    // Q^inj = Q^inv + P^curt tan(Omega) - Q^load
    prob.add_row({{v.q_inj[k], 1.0}, {v.q_inv[k], -1.0}, {v.p_curt[k], -tan_om}}, -spec.load_q[k],
                 -spec.load_q[k], "q_balance_" + s);
    // Inverter polygon on P^inv = P^inj + P^load,ac - P^curt.
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const HalfPlane& h = poly[j];
      prob.add_row({{v.p_inj[k], h.a}, {v.p_curt[k], -h.a}, {v.q_inv[k], h.b}}, -kInf,
                   -h.c - h.a * spec.load_ac_p[k], "inverter_" + std::to_string(j) + "_" + s);
    }
  }
  return v;
}

}  // namespace adn
