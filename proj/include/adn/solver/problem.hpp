#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adn::solver {

using Index = std::size_t;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  Index var;
  double coef;
};

/// min 0.5 x'Px + c'x + constant  s.t.  lo <= Ax <= hi,  lb <= x <= ub,
/// x_i in {0,1} for i in binaries. Rows with lo == hi are equalities.
struct MiqpProblem {
  // variables
  std::vector<double> lower, upper, cost;
  std::vector<bool> is_binary;
  std::vector<std::string> var_names;
  // rows, CSR
  std::vector<std::size_t> row_start{0};
  std::vector<Index> row_var;
  std::vector<double> row_coef;
  std::vector<double> row_lower, row_upper;
  std::vector<std::string> row_names;
  // objective quadratic, upper triangle (i <= j) of P
  std::vector<Index> quad_i, quad_j;
  std::vector<double> quad_v;
  double objective_constant = 0.0;

  std::size_t num_vars() const { return cost.size(); }
  std::size_t num_rows() const { return row_lower.size(); }

  Index add_variable(double lb, double ub, double c = 0.0, std::string name = {});
  Index add_binary(double c = 0.0, std::string name = {});
  Index add_row(std::span<const Term> terms, double lo, double hi, std::string name = {});
  Index add_row(std::initializer_list<Term> terms, double lo, double hi, std::string name = {}) {
    return add_row(std::span<const Term>(terms.begin(), terms.size()), lo, hi, std::move(name));
  }
  /// Adds v to P(i,j) and P(j,i) (once when i == j).
  void add_quadratic(Index i, Index j, double v);

  std::vector<Index> binaries() const;
  std::span<const Index> row_vars(Index r) const {
    return {row_var.data() + row_start[r], row_start[r + 1] - row_start[r]};
  }
  std::span<const double> row_coefs(Index r) const {
    return {row_coef.data() + row_start[r], row_start[r + 1] - row_start[r]};
  }

  double objective(std::span<const double> x) const;
  double linear_objective(std::span<const double> x) const;
  double row_activity(Index r, std::span<const double> x) const;
  /// Largest violation of a row or bound (not of integrality).
  double max_violation(std::span<const double> x) const;
  bool quadratic_is_diagonal() const;
};

enum class Status { Optimal, Infeasible, Unbounded, IterLimit };
const char* to_string(Status s);

struct Solution {
  std::vector<double> x;
  double objective_value = 0.0;
  Status status = Status::IterLimit;
  double primal_residual = 0.0;  // max absolute row/bound violation
  double dual_residual = 0.0;    // relative stationarity residual
  double gap = 0.0;              // relative complementarity
  int iterations = 0;
  int nodes = 0;  // convex solves used by a mixed-integer backend

  bool optimal() const { return status == Status::Optimal; }
};

/// CPLEX-LP style text dump for cross-checking with external solvers.
void write_lp(std::ostream& out, const MiqpProblem& p);
void write_lp(const std::filesystem::path& path, const MiqpProblem& p);

}  // namespace adn::solver
