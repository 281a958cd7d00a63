#include "adn/solver/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "adn/error.hpp"

namespace adn::solver {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterLimit: return "IterLimit";
  }
  return "?";
}

Index MiqpProblem::add_variable(double lb, double ub, double c, std::string name) {
  lower.push_back(lb);
  upper.push_back(ub);
  cost.push_back(c);
  is_binary.push_back(false);
  var_names.push_back(std::move(name));
  return cost.size() - 1;
}

Index MiqpProblem::add_binary(double c, std::string name) {
  Index i = add_variable(0.0, 1.0, c, std::move(name));
  is_binary[i] = true;
  return i;
}

Index MiqpProblem::add_row(std::span<const Term> terms, double lo, double hi, std::string name) {
  for (const Term& t : terms) {
    if (t.var >= num_vars()) throw Error(ErrorCode::DimensionMismatch, "row references unknown variable");
    if (t.coef == 0.0) continue;
    row_var.push_back(t.var);
    row_coef.push_back(t.coef);
  }
  row_start.push_back(row_var.size());
  row_lower.push_back(lo);
  row_upper.push_back(hi);
  row_names.push_back(std::move(name));
  return row_lower.size() - 1;
}

void MiqpProblem::add_quadratic(Index i, Index j, double v) {
  if (i >= num_vars() || j >= num_vars()) {
    throw Error(ErrorCode::DimensionMismatch, "quadratic term references unknown variable");
  }
  if (i > j) std::swap(i, j);
  quad_i.push_back(i);
  quad_j.push_back(j);
  quad_v.push_back(v);
}

std::vector<Index> MiqpProblem::binaries() const {
  std::vector<Index> b;
  for (Index i = 0; i < is_binary.size(); ++i) {
    if (is_binary[i]) b.push_back(i);
  }
  return b;
}

double MiqpProblem::linear_objective(std::span<const double> x) const {
  double f = objective_constant;
  for (Index i = 0; i < num_vars(); ++i) f += cost[i] * x[i];
  return f;
}

double MiqpProblem::objective(std::span<const double> x) const {
  double f = linear_objective(x);
  for (std::size_t k = 0; k < quad_v.size(); ++k) {
    const Index i = quad_i[k], j = quad_j[k];
    f += (i == j ? 0.5 : 1.0) * quad_v[k] * x[i] * x[j];
  }
  return f;
}

double MiqpProblem::row_activity(Index r, std::span<const double> x) const {
  double a = 0.0;
  for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) a += row_coef[k] * x[row_var[k]];
  return a;
}

double MiqpProblem::max_violation(std::span<const double> x) const {
  double v = 0.0;
  for (Index i = 0; i < num_vars(); ++i) {
    v = std::max({v, lower[i] - x[i], x[i] - upper[i]});
  }
  for (Index r = 0; r < num_rows(); ++r) {
    const double a = row_activity(r, x);
    v = std::max({v, row_lower[r] - a, a - row_upper[r]});
  }
  return v;
}

bool MiqpProblem::quadratic_is_diagonal() const {
  for (std::size_t k = 0; k < quad_v.size(); ++k) {
    if (quad_i[k] != quad_j[k] && quad_v[k] != 0.0) return false;
  }
  return true;
}

namespace {

std::string lp_name(const MiqpProblem& p, Index i) {
  std::string n = p.var_names[i].empty() ? "x" + std::to_string(i) : p.var_names[i];
  for (char& ch : n) {
    if (ch == '[' || ch == ']' || ch == ',' || ch == ' ' || ch == ':') ch = '_';
  }
  return n + "_" + std::to_string(i);
}

void write_terms(std::ostream& out, const MiqpProblem& p, std::span<const Index> vars,
                 std::span<const double> coefs) {
  for (std::size_t k = 0; k < vars.size(); ++k) {
    out << (coefs[k] < 0 ? " - " : " + ") << std::abs(coefs[k]) << ' ' << lp_name(p, vars[k]);
  }
}

}  // namespace

void write_lp(std::ostream& out, const MiqpProblem& p) {
  out << std::setprecision(17);
  out << "\\ objective constant " << p.objective_constant << "\nMinimize\n obj:";
  bool any = false;
  for (Index i = 0; i < p.num_vars(); ++i) {
    if (p.cost[i] == 0.0) continue;
    out << (p.cost[i] < 0 ? " - " : " + ") << std::abs(p.cost[i]) << ' ' << lp_name(p, i);
    any = true;
  }
  if (!p.quad_v.empty()) {
    out << " + [";
    for (std::size_t k = 0; k < p.quad_v.size(); ++k) {
      const double v = p.quad_i[k] == p.quad_j[k] ? p.quad_v[k] : 2.0 * p.quad_v[k];
      out << (v < 0 ? " - " : " + ") << std::abs(v) << ' ' << lp_name(p, p.quad_i[k]);
      if (p.quad_i[k] == p.quad_j[k]) out << " ^ 2";
      else out << " * " << lp_name(p, p.quad_j[k]);
    }
    out << " ] / 2";
    any = true;
  }
  if (!any) out << " 0 " << (p.num_vars() ? lp_name(p, 0) : std::string("x0"));
  out << "\nSubject To\n";
  for (Index r = 0; r < p.num_rows(); ++r) {
    const double lo = p.row_lower[r], hi = p.row_upper[r];
    auto emit = [&](const char* suffix, const char* sense, double rhs) {
      out << " r" << r << suffix << ':';
      write_terms(out, p, p.row_vars(r), p.row_coefs(r));
      out << ' ' << sense << ' ' << rhs << '\n';
    };
    if (lo == hi) emit("", "=", lo);
    else {
      if (std::isfinite(lo)) emit("_lo", ">=", lo);
      if (std::isfinite(hi)) emit("_hi", "<=", hi);
    }
  }
  out << "Bounds\n";
  for (Index i = 0; i < p.num_vars(); ++i) {
    const double lb = p.lower[i], ub = p.upper[i];
    const std::string n = lp_name(p, i);
    if (!std::isfinite(lb) && !std::isfinite(ub)) out << ' ' << n << " free\n";
    else {
      out << ' ';
      if (std::isfinite(lb)) out << lb;
      else out << "-inf";
      out << " <= " << n << " <= ";
      if (std::isfinite(ub)) out << ub;
      else out << "+inf";
      out << '\n';
    }
  }
  auto bins = p.binaries();
  if (!bins.empty()) {
    out << "Binaries\n";
    for (Index i : bins) out << ' ' << lp_name(p, i) << '\n';
  }
  out << "End\n";
}

void write_lp(const std::filesystem::path& path, const MiqpProblem& p) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_lp(out, p);
}

}  // namespace adn::solver
