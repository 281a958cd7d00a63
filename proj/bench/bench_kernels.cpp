// Wall time of the OpenMP kernels against their serial references. Each pair
// must produce identical results; the table reports both timings.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include <omp.h>

#include "adn/admm.hpp"
#include "adn/mpc.hpp"
#include "adn/scenario.hpp"
#include "adn/solver/solve.hpp"
#include "adn/voltage_support.hpp"

namespace {

double time_of(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

adn::solver::MiqpProblem random_miqp(int n, int bins, int rows, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  adn::solver::MiqpProblem p;
  for (int i = 0; i < n; ++i) {
    if (i < bins) {
      p.add_binary(u(rng));
    } else {
      p.add_variable(-5.0, 5.0, u(rng));
    }
    p.add_quadratic(i, i, 0.5 + std::abs(u(rng)));
  }
  for (int r = 0; r < rows; ++r) {
    std::vector<adn::solver::Term> t;
    for (int i = 0; i < n; ++i) t.push_back({static_cast<adn::solver::Index>(i), u(rng)});
    p.add_row(t, -adn::solver::kInf, 1.0 + std::abs(u(rng)));
  }
  return p;
}

void row(const char* name, double serial, double parallel, double diff) {
  std::printf("%-28s %10.4f %10.4f %8.2fx  max|diff| %.2e\n", name, serial, parallel, serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");

  {
    const adn::AsParameters p = adn::AsParameters::from_peak_exchange(0.9, 3.0);
    const auto grid = adn::exchange_grid(-2.0, 3.0, -2.0, 2.0, 60, 60);
    double a = 0, b = 0;
    const double ts = time_of([&] { a = adn::verify_reformulation(p, grid, false); });
    const double tp = time_of([&] { b = adn::verify_reformulation(p, grid, true); });
    row("verify_reformulation 60x60", ts, tp, std::abs(a - b));
  }
  {
    const auto prob = random_miqp(14, 10, 8, 7);
    adn::solver::MiqpOptions o;
    o.backend = adn::solver::MiqpBackend::Enumerate;
    adn::solver::Solution a, b;
    o.parallel = false;
    const double ts = time_of([&] { a = adn::solver::solve_miqp(prob, o); });
    o.parallel = true;
    const double tp = time_of([&] { b = adn::solver::solve_miqp(prob, o); });
    row("enumerate 2^10", ts, tp, std::abs(a.objective_value - b.objective_value));
  }
  const char* network = argc > 1 ? argv[1] : "data/ieee33.net";
  const char* scenario = argc > 2 ? argv[2] : "data/daily.ini";
  try {
    const adn::RadialNetwork raw = adn::load_network(network);
    adn::Scenario sc = adn::load_scenario(scenario, raw.base());
    sc.horizon = 2;
    const adn::RadialNetwork net = sc.attach(raw);
    const adn::StageInput in = adn::representative_stage(net, sc, 76);
    adn::AdmmConfig cfg = sc.admm;
    cfg.graph = sc.comm_graph();
    cfg.max_iters = 30;
    cfg.epsilon = 1e-12;
    adn::AdmmResult a, b;
    const double ts = time_of([&] { a = adn::run_admm_serial(adn::stage_agents(net, in), cfg); });
    const double tp = time_of([&] { b = adn::run_admm(adn::stage_agents(net, in), cfg); });
    double diff = 0.0;
    for (std::size_t j = 0; j < a.agents.size(); ++j) {
      for (std::size_t i = 0; i < a.agents[j].y.size(); ++i) {
        diff = std::max(diff, std::abs(a.agents[j].y[i] - b.agents[j].y[i]));
      }
    }
    row("admm 30 rounds, 6 agents", ts, tp, diff);
  } catch (const std::exception& e) {
    std::printf("admm benchmark skipped: %s\n", e.what());
  }
  return 0;
}
