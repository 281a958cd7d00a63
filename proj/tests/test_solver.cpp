#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "adn/error.hpp"
#include "adn/solver/solve.hpp"

using namespace adn::solver;

namespace {

// Every constraint as a one-sided half-space  a'x <= b  or an equality.
struct Halfspace {
  Eigen::VectorXd a;
  double b;
  bool equality;
};

std::vector<Halfspace> halfspaces(const MiqpProblem& p) {
  const int n = static_cast<int>(p.num_vars());
  std::vector<Halfspace> out;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    if (std::isfinite(p.upper[j])) out.push_back({e, p.upper[j], false});
    if (std::isfinite(p.lower[j])) out.push_back({-e, -p.lower[j], false});
  }
  for (Index r = 0; r < p.num_rows(); ++r) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    auto v = p.row_vars(r);
    auto c = p.row_coefs(r);
    for (std::size_t k = 0; k < v.size(); ++k) a[v[k]] += c[k];
    if (p.row_lower[r] == p.row_upper[r]) {
      out.push_back({a, p.row_lower[r], true});
    } else {
      if (std::isfinite(p.row_upper[r])) out.push_back({a, p.row_upper[r], false});
      if (std::isfinite(p.row_lower[r])) out.push_back({-a, -p.row_lower[r], false});
    }
  }
  return out;
}

Eigen::MatrixXd dense_p(const MiqpProblem& p) {
  const int n = static_cast<int>(p.num_vars());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < p.quad_v.size(); ++k) {
    P(p.quad_i[k], p.quad_j[k]) += p.quad_v[k];
    if (p.quad_i[k] != p.quad_j[k]) P(p.quad_j[k], p.quad_i[k]) += p.quad_v[k];
  }
  return P;
}

/// Minimum over all active sets of the equality-constrained stationary points
/// that are primal feasible. Exact for strictly convex QPs and, restricted to
/// active sets of size n, for bounded LPs.
double active_set_oracle(const MiqpProblem& p, bool lp) {
  const int n = static_cast<int>(p.num_vars());
  const auto hs = halfspaces(p);
  const Eigen::MatrixXd P = dense_p(p);
  Eigen::VectorXd c(n);
  for (int j = 0; j < n; ++j) c[j] = p.cost[j];
  std::vector<int> eq, ineq;
  for (int k = 0; k < static_cast<int>(hs.size()); ++k) (hs[k].equality ? eq : ineq).push_back(k);
  double best = INFINITY;
  const int ni = static_cast<int>(ineq.size());
  for (long mask = 0; mask < (1L << ni); ++mask) {
    std::vector<int> act = eq;
    for (int k = 0; k < ni; ++k) {
      if (mask >> k & 1) act.push_back(ineq[k]);
    }
    const int na = static_cast<int>(act.size());
    if (lp && na != n) continue;
    if (na > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + na, n + na);
    Eigen::VectorXd rhs(n + na);
    K.topLeftCorner(n, n) = P;
    rhs.head(n) = -c;
    for (int k = 0; k < na; ++k) {
      K.block(0, n + k, n, 1) = hs[act[k]].a;
      K.block(n + k, 0, 1, n) = hs[act[k]].a.transpose();
      rhs[n + k] = hs[act[k]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + na) continue;
    const Eigen::VectorXd x = lu.solve(rhs).head(n);
    bool feasible = true;
    for (const auto& h : hs) {
      const double v = h.a.dot(x) - h.b;
      if (v > 1e-9 || (h.equality && v < -1e-9)) feasible = false;
    }
    if (!feasible) continue;
    std::vector<double> xv(x.data(), x.data() + n);
    best = std::min(best, p.objective(xv));
  }
  return best;
}

MiqpProblem random_qp(std::mt19937& rng, int n, int m, bool quadratic) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MiqpProblem p;
  for (int j = 0; j < n; ++j) p.add_variable(-2.0 - std::abs(u(rng)), 2.0 + std::abs(u(rng)), u(rng));
  for (int r = 0; r < m; ++r) {
    std::vector<Term> t;
    for (int j = 0; j < n; ++j) t.push_back({static_cast<Index>(j), u(rng)});
    const double lo = r % 3 == 0 ? -kInf : -1.0 - std::abs(u(rng));
    const double hi = r % 3 == 1 ? kInf : 1.0 + std::abs(u(rng));
    p.add_row(t, lo, hi);
  }
  if (quadratic) {
    Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
    const Eigen::MatrixXd P = B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) p.add_quadratic(i, j, P(i, j));
    }
  }
  return p;
}

}  // namespace

TEST_CASE("interior point matches active-set enumeration on random strictly convex QPs") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3, m = 1 + trial % 4;
    MiqpProblem p = random_qp(rng, n, m, true);
    const Solution s = solve_convex(p);
    const double ref = active_set_oracle(p, false);
    REQUIRE(std::isfinite(ref));
    REQUIRE(s.optimal());
    CHECK(s.primal_residual <= 1e-7);
    CHECK(s.objective_value == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("interior point matches vertex enumeration on random bounded LPs") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3, m = 1 + trial % 4;
    MiqpProblem p = random_qp(rng, n, m, false);
    const Solution s = solve_convex(p);
    const double ref = active_set_oracle(p, true);
    REQUIRE(std::isfinite(ref));
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("equality rows and fixed variables") {
  MiqpProblem p;
  auto x = p.add_variable(0, 10, 1.0);
  auto y = p.add_variable(0, 10, 2.0);
  auto z = p.add_variable(3, 3, 5.0);
  p.add_row({{x, 1.0}, {y, 1.0}, {z, 1.0}}, 7.0, 7.0);
  const Solution s = solve_convex(p);
  REQUIRE(s.optimal());
  CHECK(s.x[x] == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(s.x[y] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(s.objective_value == doctest::Approx(19.0).epsilon(1e-7));
}

TEST_CASE("free variables and quadratic with no rows") {
  MiqpProblem p;
  auto x = p.add_variable(-kInf, kInf, -4.0);
  p.add_quadratic(x, x, 2.0);
  const Solution s = solve_convex(p);
  REQUIRE(s.optimal());
  CHECK(s.x[x] == doctest::Approx(2.0));
}

TEST_CASE("free variables tied by rows") {
  // min (x-1)^2 + (y-2)^2  s.t. x + y = 1, both free.
  MiqpProblem p;
  auto x = p.add_variable(-kInf, kInf, -2.0);
  auto y = p.add_variable(-kInf, kInf, -4.0);
  p.add_quadratic(x, x, 2.0);
  p.add_quadratic(y, y, 2.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, 1.0, 1.0);
  const Solution s = solve_convex(p);
  REQUIRE(s.optimal());
  CHECK(s.x[x] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(s.x[y] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("infeasibility is reported, not thrown") {
  MiqpProblem p;
  auto x = p.add_variable(0, 1);
  auto y = p.add_variable(0, 1);
  p.add_row({{x, 1.0}, {y, 1.0}}, 3.0, kInf);
  CHECK(solve_convex(p).status == Status::Infeasible);

  MiqpProblem q;
  auto a = q.add_variable(0, 5);
  auto b = q.add_variable(0, 5);
  auto c = q.add_variable(0, 5);
  q.add_row({{a, 1.0}, {b, -1.0}}, 0.0, 0.0);
  q.add_row({{b, 1.0}, {c, -1.0}}, 0.0, 0.0);
  q.add_row({{a, 1.0}, {c, 1.0}}, 1.0, 1.0);
  q.add_row({{a, 1.0}, {b, 1.0}}, 3.0, 3.0);
  CHECK(solve_convex(q).status == Status::Infeasible);
}

TEST_CASE("unbounded LP") {
  MiqpProblem p;
  auto x = p.add_variable(0, kInf, -1.0);
  auto y = p.add_variable(0, kInf, 0.0);
  p.add_row({{x, 1.0}, {y, -1.0}}, -kInf, 1.0);
  CHECK(solve_convex(p).status == Status::Unbounded);
}

namespace {

double brute_force(const MiqpProblem& p) {
  const auto bins = p.binaries();
  double best = INFINITY;
  for (unsigned a = 0; a < (1u << bins.size()); ++a) {
    std::vector<double> lo = p.lower, hi = p.upper;
    for (std::size_t k = 0; k < bins.size(); ++k) lo[bins[k]] = hi[bins[k]] = (a >> k) & 1u;
    MiqpProblem q = p;
    q.lower = lo;
    q.upper = hi;
    for (auto i : bins) q.is_binary[i] = false;
    const Solution s = solve_convex(q);
    if (s.optimal()) best = std::min(best, s.objective_value);
  }
  return best;
}

MiqpProblem random_miqp(std::mt19937& rng, int nc, int nb, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MiqpProblem p;
  for (int j = 0; j < nc; ++j) p.add_variable(-3.0, 3.0, u(rng));
  for (int j = 0; j < nb; ++j) p.add_binary(u(rng));
  for (int r = 0; r < m; ++r) {
    std::vector<Term> t;
    for (int j = 0; j < nc + nb; ++j) t.push_back({static_cast<Index>(j), 2.0 * u(rng)});
    p.add_row(t, -1.0 - std::abs(u(rng)), 1.0 + std::abs(u(rng)));
  }
  for (int j = 0; j < nc; ++j) p.add_quadratic(j, j, 0.5 + std::abs(u(rng)));
  return p;
}

}  // namespace

TEST_CASE("branch and bound and enumeration agree with brute force") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    MiqpProblem p = random_miqp(rng, 3, 2 + trial % 4, 2 + trial % 3);
    const double ref = brute_force(p);
    MiqpOptions bb;
    const Solution a = solve_miqp(p, bb);
    MiqpOptions en;
    en.backend = MiqpBackend::Enumerate;
    const Solution b = solve_miqp(p, en);
    en.parallel = false;
    const Solution c = solve_miqp(p, en);
    if (!std::isfinite(ref)) {
      CHECK(a.status == Status::Infeasible);
      CHECK(b.status == Status::Infeasible);
      continue;
    }
    REQUIRE(a.optimal());
    REQUIRE(b.optimal());
    CHECK(a.objective_value == doctest::Approx(ref).epsilon(1e-6));
    CHECK(b.objective_value == doctest::Approx(ref).epsilon(1e-6));
    CHECK(c.objective_value == doctest::Approx(b.objective_value).epsilon(1e-9));
    for (auto i : p.binaries()) {
      CHECK((a.x[i] == 0.0 || a.x[i] == 1.0));
    }
  }
}

TEST_CASE("enumeration refuses more binaries than the cap") {
  MiqpProblem p;
  for (int j = 0; j < 5; ++j) p.add_binary(1.0);
  MiqpOptions o;
  o.backend = MiqpBackend::Enumerate;
  o.enumeration_cap = 4;
  o.decompose = false;
  CHECK_THROWS_AS(solve_miqp(p, o), adn::Error);
}

TEST_CASE("independent blocks are found and solved separately") {
  MiqpProblem p;
  auto a = p.add_variable(0, 4, -1.0);
  auto b = p.add_binary(0.5);
  auto c = p.add_variable(0, 4, -2.0);
  auto d = p.add_binary(0.25);
  p.add_row({{a, 1.0}, {b, -3.0}}, -kInf, 1.0);
  p.add_row({{c, 1.0}, {d, -2.0}}, -kInf, 0.5);
  const auto blocks = independent_blocks(p);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].vars == std::vector<Index>{a, b});
  CHECK(blocks[1].vars == std::vector<Index>{c, d});
  MiqpOptions o;
  const Solution joint = solve_miqp(p, o);
  o.decompose = false;
  const Solution whole = solve_miqp(p, o);
  REQUIRE(joint.optimal());
  CHECK(joint.objective_value == doctest::Approx(whole.objective_value).epsilon(1e-8));
  CHECK(joint.objective_value == doctest::Approx(-4.0 + 0.5 - 5.0 + 0.25).epsilon(1e-7));
}

TEST_CASE("LP text output lists rows, bounds and binaries") {
  MiqpProblem p;
  auto x = p.add_variable(0, 1.5, 1.0, "x");
  auto b = p.add_binary(2.0, "b");
  p.add_row({{x, 1.0}, {b, 1.0}}, 1.0, kInf, "cover");
  std::ostringstream out;
  write_lp(out, p);
  const std::string s = out.str();
  CHECK(s.find("Minimize") != std::string::npos);
  CHECK(s.find(">= 1") != std::string::npos);
  CHECK(s.find("Binaries") != std::string::npos);
  CHECK(s.find("1.5") != std::string::npos);
}

TEST_CASE("pinned big-M pair leaves a sliver that still solves") {
  // 0 <= x and 3x <= 1e-7 + M(1 - d): with d pinned to 1 the free range of x
  // is 3.3e-8 wide.
  const double M = 60.0;
  MiqpProblem p;
  const Index x = p.add_variable(0.0, kInf, -1.0);
  const Index y = p.add_variable(-5.0, 5.0);
  const Index d = p.add_binary();
  p.add_row({{x, 3.0}, {d, M}}, -kInf, M + 1e-7);
  p.add_row({{y, 1.0}, {x, -1.0}}, -2.0, 2.0);
  p.add_quadratic(y, y, 2.0);
  p.cost[y] = -3.0;
  std::vector<double> lo = p.lower, hi = p.upper;
  lo[d] = hi[d] = 1.0;
  const Solution s = solve_convex(p, lo, hi);
  REQUIRE(s.optimal());
  CHECK(s.x[x] >= 0.0);
  CHECK(s.x[x] <= 1e-7 / 3.0 + 1e-12);
  CHECK(s.x[y] == doctest::Approx(1.5).epsilon(1e-7));
  // The same through the mixed-integer front end with d free.
  const Solution b = solve_miqp(p);
  REQUIRE(b.optimal());
  CHECK(b.x[d] == doctest::Approx(0.0).epsilon(1e-9));
}
