#include "adn/power_flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>

#include "adn/error.hpp"

namespace adn {

namespace {

void require_dims(const RadialNetwork& net, const DistFlowState& s) {
  const auto nb = net.bus_count();
  const auto nl = net.line_count();
  if (s.p_flow.size() != nl || s.q_flow.size() != nl || s.i_sq.size() != nl ||
      s.p_inj.size() != nb || s.q_inj.size() != nb || s.v_sq.size() != nb) {
    throw Error(ErrorCode::DimensionMismatch, "state does not match network dimensions");
  }
}

double max_abs_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

DistFlowState DistFlowState::flat(const RadialNetwork& net, double v_sq) {
  DistFlowState s;
  s.p_flow.assign(net.line_count(), 0.0);
  s.q_flow.assign(net.line_count(), 0.0);
  s.i_sq.assign(net.line_count(), 0.0);
  s.p_inj.assign(net.bus_count(), 0.0);
  s.q_inj.assign(net.bus_count(), 0.0);
  s.v_sq.assign(net.bus_count(), v_sq);
  return s;
}

double DistFlowResiduals::max_abs() const {
  return std::max({max_abs_of(active), max_abs_of(reactive), max_abs_of(voltage),
                   max_abs_of(current)});
}

DistFlowResiduals distflow_residuals(const RadialNetwork& net, const DistFlowState& s) {
  require_dims(net, s);
  DistFlowResiduals res;
  const auto nb = net.bus_count();
  res.active.resize(nb);
  res.reactive.resize(nb);
  for (BusId i = 0; i < nb; ++i) {
    double p_in = i == net.root() ? 0.0 : s.p_flow[RadialNetwork::line_index(i)];
    double q_in = i == net.root() ? 0.0 : s.q_flow[RadialNetwork::line_index(i)];
    double p_out = 0.0, q_out = 0.0;
    for (BusId j : net.children(i)) {
      const auto lj = RadialNetwork::line_index(j);
      const Line& line = net.lines()[lj];
      p_out += s.p_flow[lj] + s.i_sq[lj] * line.r;
      q_out += s.q_flow[lj] + s.i_sq[lj] * line.x;
    }
    res.active[i] = p_in - (p_out - s.p_inj[i]);
    res.reactive[i] = q_in - (q_out - s.q_inj[i]);
  }
  for (const Line& line : net.lines()) {
    const BusId i = line.to_bus;
    const BusId a = net.ancestor(i);
    const double z2 = line.r * line.r + line.x * line.x;
    const double p = s.p_flow[line.id], q = s.q_flow[line.id];
    res.voltage.push_back(s.v_sq[a] -
                          (s.v_sq[i] + 2.0 * (line.r * p + line.x * q) + s.i_sq[line.id] * z2));
    res.current.push_back((p * p + q * q) / s.v_sq[i] - s.i_sq[line.id]);
  }
  return res;
}

LinearizationPoint LinearizationPoint::from_state(const RadialNetwork& net, const DistFlowState& s) {
  require_dims(net, s);
  LinearizationPoint lp;
  for (const Line& line : net.lines()) {
    const double p = s.p_flow[line.id], q = s.q_flow[line.id];
    const double v = std::max(s.v_sq[line.to_bus], kVoltageFloorSq);
    lp.p_star.push_back(p);
    lp.q_star.push_back(q);
    lp.v_sq_star.push_back(v);
    lp.i_sq_star.push_back((p * p + q * q) / v);
  }
  return lp;
}

CurrentAffine linearize_current(double p, double q, double v, double floor_sq) {
  if (!(v > floor_sq)) {
    throw Error(ErrorCode::ZeroVoltage, "linearization voltage below floor");
  }
  const double s2 = p * p + q * q;
  CurrentAffine a;
  a.dp = 2.0 * p / v;
  a.dq = 2.0 * q / v;
  a.dv = -s2 / (v * v);
  // Anchored so that evaluate(p, q, v) reproduces s2 / v.
  a.constant = s2 / v - a.dp * p - a.dq * q - a.dv * v;
  return a;
}

std::vector<CurrentAffine> linearize_current(const LinearizationPoint& lp, double floor_sq) {
  std::vector<CurrentAffine> out;
  out.reserve(lp.p_star.size());
  for (std::size_t i = 0; i < lp.p_star.size(); ++i) {
    out.push_back(linearize_current(lp.p_star[i], lp.q_star[i], lp.v_sq_star[i], floor_sq));
  }
  return out;
}

OperatingLimits OperatingLimits::from_network(const RadialNetwork& net, double v_min,
                                              double v_max) {
  OperatingLimits lim;
  for (const Line& l : net.lines()) {
    lim.p_max.push_back(l.s_max / std::sqrt(2.0));
    lim.q_max.push_back(l.s_max / std::sqrt(2.0));
  }
  lim.v_min_sq = v_min * v_min;
  lim.v_max_sq = v_max * v_max;
  return lim;
}

ViolationReport check_limits(const DistFlowState& s, const OperatingLimits& lim) {
  if (s.p_flow.size() != lim.p_max.size() || s.q_flow.size() != lim.q_max.size()) {
    throw Error(ErrorCode::DimensionMismatch, "limits do not match state");
  }
  ViolationReport rep;
  for (std::size_t l = 0; l < s.p_flow.size(); ++l) {
    if (std::abs(s.p_flow[l]) > lim.p_max[l]) {
      rep.items.push_back({Violation::Kind::ActiveFlow, l, s.p_flow[l], lim.p_max[l]});
    }
    if (std::abs(s.q_flow[l]) > lim.q_max[l]) {
      rep.items.push_back({Violation::Kind::ReactiveFlow, l, s.q_flow[l], lim.q_max[l]});
    }
  }
  for (std::size_t b = 0; b < s.v_sq.size(); ++b) {
    if (s.v_sq[b] < lim.v_min_sq) {
      rep.items.push_back({Violation::Kind::Voltage, b, s.v_sq[b], lim.v_min_sq});
    } else if (s.v_sq[b] > lim.v_max_sq) {
      rep.items.push_back({Violation::Kind::Voltage, b, s.v_sq[b], lim.v_max_sq});
    }
  }
  return rep;
}

void write_violations(std::ostream& out, const ViolationReport& report) {
  out << "kind\tindex\tvalue\tlimit\n";
  out << std::setprecision(12);
  for (const auto& v : report.items) {
    const char* kind = v.kind == Violation::Kind::ActiveFlow     ? "p_flow"
                       : v.kind == Violation::Kind::ReactiveFlow ? "q_flow"
                                                                 : "v_sq";
    out << kind << '\t' << v.index << '\t' << v.value << '\t' << v.limit << '\n';
  }
}

std::vector<double> LoadFlowResult::magnitudes() const {
  std::vector<double> m;
  m.reserve(voltage.size());
  for (auto v : voltage) m.push_back(std::abs(v));
  return m;
}

LoadFlowResult newton_raphson_loadflow(const RadialNetwork& net,
                                       std::span<const std::complex<double>> injections,
                                       double slack_v, const LoadFlowOptions& opts) {
  using cd = std::complex<double>;
  const std::size_t nb = net.bus_count();
  if (injections.size() != nb) {
    throw Error(ErrorCode::DimensionMismatch, "one injection per bus expected");
  }
  if (!(slack_v > 0.0)) throw Error(ErrorCode::InvalidParameters, "slack voltage must be positive");

  Eigen::MatrixXcd ybus = Eigen::MatrixXcd::Zero(nb, nb);
  for (const Line& l : net.lines()) {
    const cd y = 1.0 / cd(l.r, l.x);
    const BusId a = net.ancestor(l.to_bus), b = l.to_bus;
    ybus(a, a) += y;
    ybus(b, b) += y;
    ybus(a, b) -= y;
    ybus(b, a) -= y;
  }
  const Eigen::MatrixXd g = ybus.real();
  const Eigen::MatrixXd bm = ybus.imag();

  // Unknowns: angles then magnitudes of buses 1..nb-1 (all PQ).
  const std::size_t npq = nb - 1;
  std::vector<double> vm(nb, slack_v), va(nb, 0.0);
  LoadFlowResult res;

  auto power_at = [&](std::size_t i, double& p, double& q) {
    p = 0.0;
    q = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      if (g(i, k) == 0.0 && bm(i, k) == 0.0) continue;
      const double th = va[i] - va[k];
      const double c = std::cos(th), s = std::sin(th);
      p += vm[i] * vm[k] * (g(i, k) * c + bm(i, k) * s);
      q += vm[i] * vm[k] * (g(i, k) * s - bm(i, k) * c);
    }
  };

  Eigen::VectorXd mis(2 * npq);
  std::vector<double> pc(nb), qc(nb);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    for (std::size_t i = 0; i < nb; ++i) power_at(i, pc[i], qc[i]);
    for (std::size_t i = 1; i < nb; ++i) {
      mis(i - 1) = injections[i].real() - pc[i];
      mis(npq + i - 1) = injections[i].imag() - qc[i];
    }
    const double norm = npq ? mis.lpNorm<Eigen::Infinity>() : 0.0;
    res.mismatch_history.push_back(norm);
    res.iterations = it;
    if (!std::isfinite(norm)) break;
    if (norm < opts.tolerance) {
      for (std::size_t i = 0; i < nb; ++i) res.voltage.push_back(std::polar(vm[i], va[i]));
      res.slack_injection = cd(pc[0], qc[0]);
      return res;
    }

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * npq, 2 * npq);
    for (std::size_t i = 1; i < nb; ++i) {
      const std::size_t r = i - 1;
      for (std::size_t k = 1; k < nb; ++k) {
        const std::size_t c = k - 1;
        if (i == k) {
          jac(r, c) = -qc[i] - bm(i, i) * vm[i] * vm[i];
          jac(r, npq + c) = pc[i] / vm[i] + g(i, i) * vm[i];
          jac(npq + r, c) = pc[i] - g(i, i) * vm[i] * vm[i];
          jac(npq + r, npq + c) = qc[i] / vm[i] - bm(i, i) * vm[i];
        } else {
          if (g(i, k) == 0.0 && bm(i, k) == 0.0) continue;
          const double th = va[i] - va[k];
          const double cs = std::cos(th), sn = std::sin(th);
          jac(r, c) = vm[i] * vm[k] * (g(i, k) * sn - bm(i, k) * cs);
          jac(r, npq + c) = vm[i] * (g(i, k) * cs + bm(i, k) * sn);
          jac(npq + r, c) = -vm[i] * vm[k] * (g(i, k) * cs + bm(i, k) * sn);
          jac(npq + r, npq + c) = vm[i] * (g(i, k) * sn - bm(i, k) * cs);
        }
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularJacobian, "load-flow Jacobian is singular");
    const Eigen::VectorXd dx = lu.solve(mis);
    for (std::size_t i = 1; i < nb; ++i) {
      va[i] += dx(i - 1);
      vm[i] += dx(npq + i - 1);
    }
  }
  throw Error(ErrorCode::NoConvergence,
              "Newton-Raphson did not converge in " + std::to_string(opts.max_iterations) + " iterations");
}

DistFlowState state_from_loadflow(const RadialNetwork& net, const LoadFlowResult& lf,
                                  std::span<const std::complex<double>> injections) {
  using cd = std::complex<double>;
  DistFlowState s = DistFlowState::flat(net);
  for (BusId b = 0; b < net.bus_count(); ++b) {
    s.v_sq[b] = std::norm(lf.voltage[b]);
    s.p_inj[b] = injections[b].real();
    s.q_inj[b] = injections[b].imag();
  }
  s.p_inj[net.root()] = lf.slack_injection.real();
  s.q_inj[net.root()] = lf.slack_injection.imag();
  for (const Line& l : net.lines()) {
    const cd vb = lf.voltage[l.to_bus];
    const cd va = lf.voltage[net.ancestor(l.to_bus)];
    const cd cur = (va - vb) / cd(l.r, l.x);
    const cd s_recv = vb * std::conj(cur);
    s.p_flow[l.id] = s_recv.real();
    s.q_flow[l.id] = s_recv.imag();
    s.i_sq[l.id] = std::norm(cur);
  }
  return s;
}

}  // namespace adn
