#include "adn/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "adn/error.hpp"

namespace adn {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool acceptable(const solver::MiqpProblem& p, const solver::Solution& s) {
  if (s.status == solver::Status::Optimal) return true;
  return s.status == solver::Status::IterLimit && !s.x.empty() && p.max_violation(s.x) < 1e-6;
}

void copy_interval(const AdnIntervalVars& from, const AdnIntervalVars& to, std::span<const double> src,
                   std::vector<double>& dst) {
  auto copy = [&](const std::vector<solver::Index>& a, const std::vector<solver::Index>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) dst[b[i]] = src[a[i]];
  };
  copy(from.p_flow, to.p_flow);
  copy(from.q_flow, to.q_flow);
  copy(from.i_sq, to.i_sq);
  copy(from.v_sq, to.v_sq);
  for (std::size_t b = 0; b < from.p_curt.size(); ++b) {
    if (from.p_curt[b] >= 0) dst[to.p_curt[b]] = src[from.p_curt[b]];
  }
  dst[to.p_ex] = src[from.p_ex];
  dst[to.q_ex] = src[from.q_ex];
  if (from.as && to.as) {
    const AsVariables &a = *from.as, &b = *to.as;
    dst[b.c_tn] = src[a.c_tn];
    dst[b.q_lim] = src[a.q_lim];
    dst[b.p_mu] = src[a.p_mu];
    dst[b.delta_p] = src[a.delta_p];
    dst[b.delta_phi] = src[a.delta_phi];
    dst[b.delta] = src[a.delta];
  }
}

void copy_mg(const MgVariables& from, const MgVariables& to, std::span<const double> src, std::vector<double>& dst) {
  auto copy = [&](const std::vector<solver::Index>& a, const std::vector<solver::Index>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) dst[b[i]] = src[a[i]];
  };
  copy(from.p_bat, to.p_bat);
  copy(from.p_curt, to.p_curt);
  copy(from.e_next, to.e_next);
  copy(from.q_inv, to.q_inv);
  copy(from.p_inj, to.p_inj);
  copy(from.q_inj, to.q_inj);
}

// Battery power moved into the range that keeps the applied energy inside
// [e_min, e_max]; the optimizer meets these bounds only to solver tolerance.
double feasible_battery_power(double e, double p, const BessSpec& b) {
  const double lo = std::max(b.p_min, (e - b.e_max) / b.eta);
  const double hi = std::min(b.p_max, (e - b.e_min) / b.eta);
  p = std::clamp(p, lo, hi);
  for (int i = 0; i < 64; ++i) {
    const double e_next = bess_step(e, p, b);
    if (e_next < b.e_min) {
      p = std::nextafter(p, -std::numeric_limits<double>::infinity());
    } else if (e_next > b.e_max) {
      p = std::nextafter(p, std::numeric_limits<double>::infinity());
    } else {
      break;
    }
  }
  return p;
}

}  // namespace

StageSolution solve_stage_centralized(const RadialNetwork& net, const StageInput& in,
                                      const solver::MiqpOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  StageSolution s;
  s.cp = assemble_centralized(net, in);
  const solver::Solution sol = solver::solve_miqp(s.cp.problem, opts);
  if (!acceptable(s.cp.problem, sol)) {
    throw Error(ErrorCode::InfeasibleStage, std::string("centralized stage: ") + solver::to_string(sol.status));
  }
  s.x = sol.x;
  s.objective = s.cp.problem.objective(s.x);
  s.seconds = seconds_since(t0);
  return s;
}

std::vector<double> composite_solution(const CentralizedProblem& cp, const std::vector<AgentModel>& models,
                                       const std::vector<AgentState>& agents) {
  std::vector<double> x(cp.problem.num_vars(), 0.0);
  const AdnVariables& adn = models.at(0).adn.value();
  for (std::size_t k = 0; k < cp.adn.k.size(); ++k) copy_interval(adn.k[k], cp.adn.k[k], agents.at(0).z, x);
  for (std::size_t m = 0; m < cp.mgs.size(); ++m) {
    copy_mg(models.at(m + 1).mg.value(), cp.mgs[m], agents.at(m + 1).z, x);
  }
  return x;
}

StageSolution solve_stage_distributed(const RadialNetwork& net, const StageInput& in, const AdmmConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  StageSolution s;
  s.cp = assemble_centralized(net, in);
  std::vector<AgentModel> models = stage_agents(net, in);
  AdmmResult r;
  try {
    r = run_admm(models, cfg);
  } catch (const Error& e) {
    throw Error(ErrorCode::InfeasibleStage, std::string("distributed stage: ") + e.what());
  }
  s.x = composite_solution(s.cp, models, r.agents);
  s.objective = s.cp.problem.objective(s.x);
  s.admm_iterations = r.iterations;
  s.admm_converged = r.converged;
  s.trace = std::move(r.trace);
  s.seconds = seconds_since(t0);
  return s;
}

std::vector<LinearizationPoint> shifted_linearization(const RadialNetwork& net, const StageInput& in,
                                                      const CentralizedProblem& cp, std::span<const double> x) {
  std::vector<LinearizationPoint> out;
  for (int k = 0; k < in.horizon; ++k) {
    const int src = std::min(k + 1, in.horizon - 1);
    const auto inj = bus_injections(net, in, cp.adn, x, src);
    out.push_back(LinearizationPoint::from_state(net, extract_state(net, cp.adn, x, src, inj)));
  }
  return out;
}

int RunReport::zone2_count() const {
  return static_cast<int>(std::count_if(intervals.begin(), intervals.end(),
                                        [](const IntervalRecord& r) { return r.zone.zone == 2; }));
}

double RunReport::min_voltage() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& r : intervals) {
    for (std::size_t b = 1; b < r.v_nr.size(); ++b) v = std::min(v, r.v_nr[b]);
  }
  return v;
}

double RunReport::max_voltage() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& r : intervals) {
    for (std::size_t b = 1; b < r.v_nr.size(); ++b) v = std::max(v, r.v_nr[b]);
  }
  return v;
}

double RunReport::max_voltage_deviation() const {
  double d = 0.0;
  for (const auto& r : intervals) d = std::max(d, r.max_voltage_deviation);
  return d;
}

RunReport run_mpc(const RadialNetwork& net, const Scenario& sc, const MpcOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.mode = opts.mode;
  rep.voltage_support = sc.voltage_support;
  const int last = opts.count < 0 ? sc.timeline.intervals : std::min(sc.timeline.intervals, opts.start + opts.count);
  const double s_kw = net.base().s_base / 1e3;
  const auto& mg_buses = net.microgrid_buses();

  AdmmConfig admm = sc.admm;
  admm.graph = sc.comm_graph();

  std::vector<double> e = initial_energies(net, sc);
  std::vector<LinearizationPoint> lin;
  try {
    lin = forecast_linearization(net, sc, opts.start);
  } catch (const Error& err) {
    rep.completed = false;
    rep.failure = err.what();
    return rep;
  }

  for (int t = opts.start; t < last; ++t) {
    IntervalRecord rec;
    rec.k = t;
    StageInput in;
    StageSolution st;
    try {
      in = make_stage(net, sc, t, e, std::move(lin));
      st = opts.mode == Mode::Centralized ? solve_stage_centralized(net, in, sc.solver)
                                          : solve_stage_distributed(net, in, admm);
    } catch (const Error& err) {
      rep.completed = false;
      rep.failure = "interval " + std::to_string(t) + ": " + err.what();
      break;
    }
    const std::vector<double>& x = st.x;
    const AdnIntervalVars& v = st.cp.adn.k[0];
    rec.tariff = in.tariff[0];
    rec.p_ex = x[v.p_ex];
    rec.q_ex = x[v.q_ex];
    rec.zone = zone_oracle({rec.p_ex, rec.q_ex}, sc.timeline.as, kZoneTolerance);
    rec.would_be_penalty = rec.zone.cost * s_kw;
    rec.c_tn = v.as ? x[v.as->c_tn] * s_kw : 0.0;
    for (BusId b = 1; b < net.bus_count(); ++b) {
      rec.load_p += in.p_load[0][b];
      rec.load_q += in.q_load[0][b];
    }
    rec.cost = interval_costs(net, in, st.cp, x, 0);
    rec.admm_iterations = st.admm_iterations;
    rec.admm_converged = st.admm_converged;
    rec.stage_seconds = st.seconds;

    for (std::size_t m = 0; m < mg_buses.size(); ++m) {
      const MicrogridSpec& spec = in.mgs[m];
      const MgVariables& mv = st.cp.mgs[m];
      const double p = feasible_battery_power(e[m], x[mv.p_bat[0]], spec.bess);
      rec.e_before.push_back(e[m]);
      rec.p_bat.push_back(p);
      e[m] = bess_step(e[m], p, spec.bess);
      rec.e_after.push_back(e[m]);
      rec.e_planned.push_back(x[mv.e_next[0]]);
      rec.q_inv.push_back(x[mv.q_inv[0]]);
      rec.q_inv_total += x[mv.q_inv[0]];
      rec.net_generation.push_back(spec.pv[0] - spec.load_p[0]);
      rec.load_p += spec.load_p[0];
      rec.load_q += spec.load_q[0];
    }

    const auto inj = bus_injections(net, in, st.cp.adn, x, 0);
    try {
      const LoadFlowResult lf = newton_raphson_loadflow(net, inj, sc.slack_v);
      rec.v_nr = lf.magnitudes();
      rec.nr_iterations = lf.iterations;
      rec.p_ex_nr = lf.slack_injection.real();
      rec.q_ex_nr = lf.slack_injection.imag();
    } catch (const Error& err) {
      rep.completed = false;
      rep.failure = "interval " + std::to_string(t) + ": " + std::string(to_string(ErrorCode::NrDivergence)) +
                    ": " + err.what();
      rep.intervals.push_back(std::move(rec));
      break;
    }
    for (BusId b = 0; b < net.bus_count(); ++b) {
      const double vo = std::sqrt(std::max(0.0, x[v.v_sq[b]]));
      rec.v_opt.push_back(vo);
      rec.max_voltage_deviation = std::max(rec.max_voltage_deviation, std::abs(vo - rec.v_nr[b]) / rec.v_nr[b]);
    }

    rep.totals += rec.cost;
    rep.would_be_penalty += rec.would_be_penalty;
    if (!st.trace.empty()) rep.last_trace = st.trace;
    lin = shifted_linearization(net, in, st.cp, x);
    rep.intervals.push_back(std::move(rec));
  }
  rep.wall_seconds = seconds_since(t_start);
  return rep;
}

StageInput representative_stage(const RadialNetwork& net, const Scenario& sc, int t) {
  return make_stage(net, sc, t, initial_energies(net, sc), forecast_linearization(net, sc, t));
}

Comparison compare_modes(const RadialNetwork& net, const StageInput& in, const AdmmConfig& cfg, bool fix_binaries) {
  Comparison c;
  const StageSolution cent = solve_stage_centralized(net, in, cfg.miqp);
  c.centralized_objective = cent.objective;
  for (solver::Index b : cent.cp.problem.binaries()) c.centralized_binaries.push_back(std::round(cent.x[b]));
  const SharedLayout layout{static_cast<int>(net.microgrid_buses().size()), in.horizon};
  c.y_cent = shared_from_centralized(cent.cp, cent.x, layout);
  for (int k = 0; k < in.horizon; ++k) c.centralized_cost += interval_costs(net, in, cent.cp, cent.x, k);

  std::vector<AgentModel> models = stage_agents(net, in, fix_binaries ? &c.centralized_binaries : nullptr);
  c.admm = run_admm(models, cfg);
  for (const auto& rec : c.admm.trace) c.error_a_trace.push_back(error_a(c.centralized_objective, rec.cost_sum));
  double cost_sum = 0.0;
  std::vector<SharedVector> ys;
  for (const AgentState& a : c.admm.agents) {
    cost_sum += a.cost;
    ys.push_back(a.y);
  }
  c.error_a = error_a(c.centralized_objective, cost_sum);
  c.error_b = error_b(c.y_cent, ys);
  const std::vector<double> xd = composite_solution(cent.cp, models, c.admm.agents);
  for (int k = 0; k < in.horizon; ++k) c.distributed_cost += interval_costs(net, in, cent.cp, xd, k);
  return c;
}

std::vector<SweepRow> sweep_rho(const RadialNetwork& net, const StageInput& in, const AdmmConfig& base,
                                const std::vector<double>& rhos, const std::vector<double>& epsilons) {
  std::vector<SweepRow> rows;
  for (double eps : epsilons) {
    for (double rho : rhos) {
      AdmmConfig cfg = base;
      cfg.rho = rho;
      cfg.epsilon = eps;
      const Comparison c = compare_modes(net, in, cfg);
      SweepRow r;
      r.rho = rho;
      r.epsilon = eps;
      r.iterations = c.admm.iterations;
      r.converged = c.admm.converged;
      r.adn_seconds = c.admm.mean_solve_seconds.front();
      for (std::size_t j = 1; j < c.admm.mean_solve_seconds.size(); ++j) r.mg_seconds += c.admm.mean_solve_seconds[j];
      if (c.admm.mean_solve_seconds.size() > 1) r.mg_seconds /= static_cast<double>(c.admm.mean_solve_seconds.size() - 1);
      r.error_a = c.error_a;
      r.error_b = c.error_b;
      rows.push_back(r);
    }
  }
  return rows;
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "rho\tepsilon\titerations\tconverged\tadn_seconds\tmg_seconds\terror_a\terror_b\n";
  out << std::setprecision(6);
  for (const auto& r : rows) {
    out << r.rho << '\t' << r.epsilon << '\t' << r.iterations << '\t' << r.converged << '\t' << r.adn_seconds << '\t'
        << r.mg_seconds << '\t' << r.error_a << '\t' << r.error_b << '\n';
  }
}

void write_report(std::ostream& out, const RunReport& r) {
  out << std::setprecision(8);
  out << "k\ttariff\tp_ex\tq_ex\tzone\tc_tn\twould_be_penalty\tenergy\tloss\tcurtailment\tbess\ttotal\tv_min\tv_max"
         "\tmax_dev\tq_inv\tadmm_iters\tseconds\n";
  for (const auto& i : r.intervals) {
    double vmin = 1e9, vmax = -1e9;
    for (std::size_t b = 1; b < i.v_nr.size(); ++b) {
      vmin = std::min(vmin, i.v_nr[b]);
      vmax = std::max(vmax, i.v_nr[b]);
    }
    out << i.k << '\t' << i.tariff << '\t' << i.p_ex << '\t' << i.q_ex << '\t' << i.zone.zone << '\t' << i.c_tn
        << '\t' << i.would_be_penalty << '\t' << i.cost.energy << '\t' << i.cost.loss << '\t' << i.cost.curtailment
        << '\t' << i.cost.bess << '\t' << i.cost.total() << '\t' << vmin << '\t' << vmax << '\t'
        << i.max_voltage_deviation << '\t' << i.q_inv_total << '\t' << i.admm_iterations << '\t' << i.stage_seconds << '\n';
  }
}

void write_trace(std::ostream& out, const std::vector<AdmmIterationRecord>& trace) {
  out << "iteration\tagent\tresidual\tcost\n" << std::setprecision(10);
  for (const auto& rec : trace) {
    for (std::size_t a = 0; a < rec.agent_residual.size(); ++a) {
      out << rec.iteration << '\t' << a << '\t' << rec.agent_residual[a] << '\t' << rec.agent_cost[a] << '\n';
    }
  }
}

void emit_plots(const RunReport& r, const AsParameters& as, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
    f << std::setprecision(8);
    return f;
  };
  {
    auto f = open("exchange.tsv");
    f << "k\ttariff\tp_ex\tq_ex\tp_ex_nr\tq_ex_nr\tload_p\tload_q\n";
    for (const auto& i : r.intervals) {
      f << i.k << '\t' << i.tariff << '\t' << i.p_ex << '\t' << i.q_ex << '\t' << i.p_ex_nr << '\t' << i.q_ex_nr << '\t'
        << i.load_p << '\t' << i.load_q << '\n';
    }
  }
  {
    auto f = open("zones.tsv");
    f << "k\tp_ex\tq_ex\tq_lim\tzone\tcost\n";
    for (const auto& i : r.intervals) {
      const ZoneResult z = zone_oracle({i.p_ex, i.q_ex}, as, kZoneTolerance);
      f << i.k << '\t' << i.p_ex << '\t' << i.q_ex << '\t' << z.q_lim << '\t' << z.zone << '\t' << z.cost << '\n';
    }
  }
  {
    auto f = open("inverter_q.tsv");
    f << "k\tq_inv_total\tload_q\n";
    for (const auto& i : r.intervals) f << i.k << '\t' << i.q_inv_total << '\t' << i.load_q << '\n';
  }
  {
    auto f = open("bess.tsv");
    f << "k\tmg\te_before\tp_bat\te_after\tnet_generation\n";
    for (const auto& i : r.intervals) {
      for (std::size_t m = 0; m < i.p_bat.size(); ++m) {
        f << i.k << '\t' << m << '\t' << i.e_before[m] << '\t' << i.p_bat[m] << '\t' << i.e_after[m] << '\t'
          << i.net_generation[m] << '\n';
      }
    }
  }
  {
    auto f = open("voltage.tsv");
    f << "k\tv_min\tv_max\tv_opt_min\tv_opt_max\tmax_dev\n";
    for (const auto& i : r.intervals) {
      double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
      if (!i.v_nr.empty()) {
        a = *std::min_element(i.v_nr.begin(), i.v_nr.end());
        b = *std::max_element(i.v_nr.begin(), i.v_nr.end());
      }
      if (!i.v_opt.empty()) {
        c = *std::min_element(i.v_opt.begin(), i.v_opt.end());
        d = *std::max_element(i.v_opt.begin(), i.v_opt.end());
      }
      f << i.k << '\t' << a << '\t' << b << '\t' << c << '\t' << d << '\t' << i.max_voltage_deviation << '\n';
    }
  }
  {
    auto f = open("costs.tsv");
    f << "k\tenergy\tpenalty\tloss\tcurtailment\tbess\ttotal\twould_be_penalty\n";
    for (const auto& i : r.intervals) {
      f << i.k << '\t' << i.cost.energy << '\t' << i.cost.penalty << '\t' << i.cost.loss << '\t' << i.cost.curtailment
        << '\t' << i.cost.bess << '\t' << i.cost.total() << '\t' << i.would_be_penalty << '\n';
    }
  }
  {
    auto f = open("residual.tsv");
    write_trace(f, r.last_trace);
  }
}

}  // namespace adn
