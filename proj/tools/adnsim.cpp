// Command-line front end: receding-horizon runs, reformulation check,
// penalty sweeps and centralized/distributed comparisons.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "adn/error.hpp"
#include "adn/mpc.hpp"
#include "adn/scenario.hpp"
#include "adn/solver/problem.hpp"
#include "adn/voltage_support.hpp"

namespace {

struct Common {
  std::string network = "data/ieee33.net";
  std::string scenario = "data/daily.ini";
  bool no_support = false;
  int np = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--network", c.network, "network document")->check(CLI::ExistingFile);
  app->add_option("--scenario", c.scenario, "scenario config")->check(CLI::ExistingFile);
  app->add_flag("--no-voltage-support", c.no_support, "drop the voltage-support tariff");
  app->add_option("--np", c.np, "prediction horizon (overrides the scenario)")->check(CLI::PositiveNumber);
}

struct Loaded {
  adn::RadialNetwork net;
  adn::Scenario sc;
};

Loaded load(const Common& c) {
  const adn::RadialNetwork raw = adn::load_network(c.network);
  adn::Scenario sc = adn::load_scenario(c.scenario, raw.base());
  if (c.np > 0) {
    sc.horizon = c.np;
    sc.timeline.pad(sc.horizon);
  }
  if (c.no_support) sc.voltage_support = false;
  return {sc.attach(raw), std::move(sc)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution network scheduling with voltage-support ancillary services"};
  app.require_subcommand(1);

  Common run_c;
  std::string mode = "central", out_dir, dump_lp;
  int start = 0, count = -1;
  auto* run = app.add_subcommand("run", "receding-horizon run over the scenario");
  add_common(run, run_c);
  run->add_option("--mode", mode, "central or distributed")->check(CLI::IsMember({"central", "distributed"}));
  run->add_option("--out", out_dir, "directory for the report and plot tables");
  run->add_option("--start", start, "first interval");
  run->add_option("--count", count, "number of intervals (-1 for all)");
  run->add_option("--dump-lp", dump_lp, "write the first stage problem in LP format and exit");

  int np = 100, nq = 100;
  double peak_kw = 900.0;
  bool serial = false;
  auto* verify = app.add_subcommand("verify-as", "compare the mixed-integer tariff block with the zone oracle");
  verify->add_option("--np", np, "grid points along P")->check(CLI::PositiveNumber);
  verify->add_option("--nq", nq, "grid points along Q")->check(CLI::PositiveNumber);
  verify->add_option("--peak-kw", peak_kw, "declared peak exchange, kW (base 1000 kVA)");
  verify->add_flag("--serial", serial, "single-threaded reference");

  Common sweep_c;
  std::vector<double> rhos{60, 100, 160, 200, 500}, eps{1e-2, 1e-4};
  int interval = 76;
  auto* sweep = app.add_subcommand("sweep", "iterations and errors over penalty and tolerance");
  add_common(sweep, sweep_c);
  sweep->add_option("--rhos", rhos, "penalty values")->delimiter(',');
  sweep->add_option("--eps", eps, "tolerances")->delimiter(',');
  sweep->add_option("--interval", interval, "stage start interval");

  Common cmp_c;
  bool fix = false;
  std::string trace_path;
  auto* compare = app.add_subcommand("compare", "centralized versus distributed solve of one stage");
  add_common(compare, cmp_c);
  compare->add_option("--interval", interval, "stage start interval");
  compare->add_flag("--fix-binaries", fix, "pin the ADN binaries to the centralized optimum");
  compare->add_option("--trace", trace_path, "write the residual trace here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto [net, sc] = load(run_c);
      if (!dump_lp.empty()) {
        const adn::StageInput in = adn::representative_stage(net, sc, start);
        adn::solver::write_lp(std::filesystem::path(dump_lp), adn::assemble_centralized(net, in).problem);
        return 0;
      }
      adn::MpcOptions opts;
      opts.mode = mode == "central" ? adn::Mode::Centralized : adn::Mode::Distributed;
      opts.start = start;
      opts.count = count;
      const adn::RunReport rep = adn::run_mpc(net, sc, opts);
      adn::write_report(std::cout, rep);
      if (!out_dir.empty()) {
        adn::emit_plots(rep, sc.timeline.as, out_dir);
        std::ofstream f(std::filesystem::path(out_dir) / "report.tsv");
        adn::write_report(f, rep);
      }
      const bool volt_ok = rep.min_voltage() >= sc.v_min - 1e-9 && rep.max_voltage() <= sc.v_max + 1e-9;
      const bool dev_ok = rep.max_voltage_deviation() < 0.02;
      const bool zone_ok = !sc.voltage_support || rep.zone2_count() == 0;
      std::cerr << "intervals " << rep.intervals.size() << "  total " << rep.totals.total() << " EUR"
                << "  zone2 " << rep.zone2_count() << "  would-be penalty " << rep.would_be_penalty << " EUR"
                << "  |V| [" << rep.min_voltage() << ", " << rep.max_voltage() << "]"
                << "  max dev " << rep.max_voltage_deviation() << "  " << rep.wall_seconds << " s\n";
      if (!rep.completed) std::cerr << "stopped: " << rep.failure << '\n';
      return rep.completed && volt_ok && dev_ok && zone_ok ? 0 : 1;
    }
    if (*verify) {
      const adn::AsParameters p = adn::AsParameters::from_peak_exchange(peak_kw / 1000.0, 3.0);
      const auto grid = adn::exchange_grid(-2.0, 3.0, -2.0, 2.0, np, nq);
      const double dev = adn::verify_reformulation(p, grid, !serial);
      std::cout << "points\t" << grid.size() << "\nmax_deviation\t" << dev << '\n';
      return dev < 1e-6 ? 0 : 1;
    }
    if (*sweep) {
      auto [net, sc] = load(sweep_c);
      adn::AdmmConfig cfg = sc.admm;
      cfg.graph = sc.comm_graph();
      const adn::StageInput in = adn::representative_stage(net, sc, interval);
      adn::write_sweep(std::cout, adn::sweep_rho(net, in, cfg, rhos, eps));
      return 0;
    }
    if (*compare) {
      auto [net, sc] = load(cmp_c);
      adn::AdmmConfig cfg = sc.admm;
      cfg.graph = sc.comm_graph();
      const adn::StageInput in = adn::representative_stage(net, sc, interval);
      const adn::Comparison c = adn::compare_modes(net, in, cfg, fix);
      std::cout << "centralized_objective\t" << c.centralized_objective << "\niterations\t" << c.admm.iterations
                << "\nconverged\t" << c.admm.converged << "\nerror_a\t" << c.error_a << "\nerror_b\t" << c.error_b
                << "\nwall_seconds\t" << c.admm.wall_seconds << '\n';
      if (!trace_path.empty()) {
        std::ofstream f(trace_path);
        adn::write_trace(f, c.admm.trace);
      }
      return c.admm.converged ? 0 : 1;
    }
  } catch (const adn::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  return 0;
}
