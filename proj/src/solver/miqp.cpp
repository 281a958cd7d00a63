#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "adn/error.hpp"
#include "adn/solver/solve.hpp"

namespace adn::solver {
namespace {

/// Assignment integer of the binaries: bit k is binary k in index order.
std::uint64_t assignment_of(std::span<const double> x, std::span<const Index> bins) {
  std::uint64_t a = 0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (x[bins[k]] > 0.5) a |= std::uint64_t{1} << k;
  }
  return a;
}

struct Incumbent {
  Solution sol;
  std::uint64_t assignment = ~std::uint64_t{0};
  bool valid = false;

  bool improved_by(double obj, std::uint64_t a, double abs_gap, double rel_gap) const {
    if (!valid) return true;
    const double tol = abs_gap + rel_gap * std::abs(sol.objective_value);
    if (obj < sol.objective_value - tol) return true;
    return obj <= sol.objective_value + tol && a < assignment;
  }
  void offer(Solution&& s, std::uint64_t a, const MiqpOptions& o) {
    if (!s.optimal()) return;
    if (improved_by(s.objective_value, a, o.absolute_gap, o.relative_gap)) {
      sol = std::move(s);
      assignment = a;
      valid = true;
    }
  }
};

Solution solve_fixed(const MiqpProblem& p, std::span<const Index> bins, std::uint64_t a,
                     const ConvexOptions& opts) {
  std::vector<double> lo = p.lower, hi = p.upper;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    lo[bins[k]] = hi[bins[k]] = static_cast<double>((a >> k) & 1u);
  }
  return solve_convex(p, lo, hi, opts);
}

Solution enumerate_range(const MiqpProblem& p, std::span<const Index> bins,
                         std::uint64_t begin, std::uint64_t end, const MiqpOptions& o,
                         std::uint64_t& best_a, int& solves) {
  Incumbent inc;
  for (std::uint64_t a = begin; a < end; ++a) {
    inc.offer(solve_fixed(p, bins, a, o.convex), a, o);
    ++solves;
  }
  best_a = inc.assignment;
  if (!inc.valid) {
    Solution s;
    s.status = Status::Infeasible;
    return s;
  }
  return std::move(inc.sol);
}

Solution solve_enumerate(const MiqpProblem& p, const MiqpOptions& o, bool parallel) {
  const std::vector<Index> bins = p.binaries();
  if (static_cast<int>(bins.size()) > o.enumeration_cap) {
    throw Error(ErrorCode::TooManyBinaries,
                std::to_string(bins.size()) + " binaries exceed the enumeration cap of " +
                    std::to_string(o.enumeration_cap));
  }
  const std::uint64_t total = std::uint64_t{1} << bins.size();
  int chunks = 1;
#ifdef _OPENMP
  if (parallel) chunks = static_cast<int>(std::min<std::uint64_t>(total, omp_get_max_threads()));
#endif
  std::vector<Solution> part(chunks);
  std::vector<std::uint64_t> part_a(chunks);
  std::vector<int> part_solves(chunks, 0);
#pragma omp parallel for schedule(static) if (parallel && chunks > 1)
  for (int c = 0; c < chunks; ++c) {
    const std::uint64_t b = total * c / chunks, e = total * (c + 1) / chunks;
    part[c] = enumerate_range(p, bins, b, e, o, part_a[c], part_solves[c]);
  }
  Incumbent inc;
  int solves = 0;
  for (int c = 0; c < chunks; ++c) {
    solves += part_solves[c];
    inc.offer(std::move(part[c]), part_a[c], o);
  }
  Solution out;
  if (inc.valid) out = std::move(inc.sol);
  else out.status = Status::Infeasible;
  out.nodes = solves;
  return out;
}

struct Node {
  std::vector<double> lo, hi;
  double bound;
  std::uint64_t seq;
  std::vector<double> x;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

Solution solve_branch_and_bound(const MiqpProblem& p, const MiqpOptions& o) {
  const std::vector<Index> bins = p.binaries();
  int solves = 0;
  Incumbent inc;
  bool unresolved = false;
  // Best integral point whose convex solve stopped short of the tolerance.
  Solution fallback;
  auto keep = [&](const Solution& s) {
    if (s.status != Status::IterLimit || s.x.empty() || s.primal_residual > 1e-6) return;
    if (fallback.x.empty() || s.objective_value < fallback.objective_value) fallback = s;
  };

  auto fractional = [&](const std::vector<double>& x) -> long {
    long pick = -1;
    double best = o.integrality_tolerance;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const double v = x[bins[k]];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best) {
        best = frac;
        pick = static_cast<long>(k);
      }
    }
    return pick;
  };
  auto try_rounding = [&](const std::vector<double>& x) {
    std::uint64_t a = assignment_of(x, bins);
    Solution s = solve_fixed(p, bins, a, o.convex);
    ++solves;
    if (s.status == Status::IterLimit) {
      unresolved = true;
      keep(s);
    }
    inc.offer(std::move(s), a, o);
  };
  auto prunable = [&](double bound) {
    if (!inc.valid) return false;
    const double tol = o.absolute_gap + o.relative_gap * std::abs(inc.sol.objective_value);
    return bound >= inc.sol.objective_value - tol;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::uint64_t seq = 0;
  // Evaluates a node and either records it as integral, discards it or queues it.
  auto evaluate = [&](std::vector<double> lo, std::vector<double> hi) {
    Solution r = solve_convex(p, lo, hi, o.convex);
    ++solves;
    if (r.status == Status::Infeasible) return;
    if (r.status == Status::Unbounded) {
      unresolved = true;
      return;
    }
    double bound = r.objective_value;
    if (r.status == Status::IterLimit) {
      bound = -kInf;
      unresolved = true;
    }
    if (prunable(bound)) return;
    if (fractional(r.x) < 0 && r.status == Status::Optimal) {
      try_rounding(r.x);
      return;
    }
    open.push(Node{std::move(lo), std::move(hi), bound, seq++, std::move(r.x)});
  };

  {
    Solution root = solve_convex(p, o.convex);
    ++solves;
    if (root.status == Status::Infeasible || root.status == Status::Unbounded) {
      root.nodes = solves;
      return root;
    }
    if (root.status == Status::IterLimit) unresolved = true;
    try_rounding(root.x);
    if (!prunable(root.status == Status::Optimal ? root.objective_value : -kInf)) {
      if (fractional(root.x) >= 0 || root.status != Status::Optimal) {
        open.push(Node{p.lower, p.upper, root.status == Status::Optimal ? root.objective_value : -kInf,
                       seq++, std::move(root.x)});
      }
    }
  }

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (prunable(node.bound)) continue;
    long k = fractional(node.x);
    if (k < 0) {
      // Relaxation integral but not trusted; branch on the first free binary.
      for (std::size_t q = 0; q < bins.size(); ++q) {
        if (node.lo[bins[q]] != node.hi[bins[q]]) {
          k = static_cast<long>(q);
          break;
        }
      }
      if (k < 0) continue;
    }
    const Index v = bins[k];
    std::vector<double> lo0 = node.lo, hi0 = node.hi;
    hi0[v] = 0.0;
    lo0[v] = 0.0;
    std::vector<double> lo1 = std::move(node.lo), hi1 = std::move(node.hi);
    lo1[v] = 1.0;
    hi1[v] = 1.0;
    evaluate(std::move(lo0), std::move(hi0));
    evaluate(std::move(lo1), std::move(hi1));
  }

  Solution out;
  if (inc.valid) {
    out = std::move(inc.sol);
  } else if (!fallback.x.empty()) {
    out = std::move(fallback);
  } else {
    out.status = unresolved ? Status::IterLimit : Status::Infeasible;
  }
  out.nodes = solves;
  return out;
}

Solution solve_single(const MiqpProblem& p, const MiqpOptions& o, bool parallel) {
  if (p.binaries().empty()) {
    Solution s = solve_convex(p, o.convex);
    s.nodes = 1;
    return s;
  }
  if (o.backend == MiqpBackend::Enumerate) return solve_enumerate(p, o, parallel);
  return solve_branch_and_bound(p, o);
}

Index find_root(std::vector<Index>& parent, Index i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<Block> independent_blocks(const MiqpProblem& p) {
  const Index n = p.num_vars();
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto unite = [&](Index a, Index b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (Index r = 0; r < p.num_rows(); ++r) {
    auto vars = p.row_vars(r);
    for (std::size_t k = 1; k < vars.size(); ++k) unite(vars[0], vars[k]);
  }
  for (std::size_t k = 0; k < p.quad_v.size(); ++k) unite(p.quad_i[k], p.quad_j[k]);

  std::vector<long> block_of_root(n, -1);
  std::vector<Block> blocks;
  for (Index j = 0; j < n; ++j) {
    const Index r = find_root(parent, j);
    if (block_of_root[r] < 0) {
      block_of_root[r] = static_cast<long>(blocks.size());
      blocks.emplace_back();
    }
    blocks[block_of_root[r]].vars.push_back(j);
  }
  for (Index r = 0; r < p.num_rows(); ++r) {
    auto vars = p.row_vars(r);
    if (vars.empty()) continue;
    blocks[block_of_root[find_root(parent, vars[0])]].rows.push_back(r);
  }
  return blocks;
}

MiqpProblem extract_block(const MiqpProblem& p, const Block& b) {
  MiqpProblem s;
  std::vector<long> map(p.num_vars(), -1);
  for (Index j : b.vars) {
    map[j] = static_cast<long>(s.add_variable(p.lower[j], p.upper[j], p.cost[j], p.var_names[j]));
    s.is_binary[map[j]] = p.is_binary[j];
  }
  std::vector<Term> terms;
  for (Index r : b.rows) {
    terms.clear();
    auto vars = p.row_vars(r);
    auto coefs = p.row_coefs(r);
    for (std::size_t k = 0; k < vars.size(); ++k) {
      terms.push_back(Term{static_cast<Index>(map[vars[k]]), coefs[k]});
    }
    s.add_row(terms, p.row_lower[r], p.row_upper[r], p.row_names[r]);
  }
  for (std::size_t k = 0; k < p.quad_v.size(); ++k) {
    if (map[p.quad_i[k]] >= 0) {
      s.add_quadratic(static_cast<Index>(map[p.quad_i[k]]), static_cast<Index>(map[p.quad_j[k]]),
                      p.quad_v[k]);
    }
  }
  return s;
}

Solution solve_miqp(const MiqpProblem& p, const MiqpOptions& o) {
  for (Index r = 0; r < p.num_rows(); ++r) {
    if (p.row_vars(r).empty() && (p.row_lower[r] > 1e-12 || p.row_upper[r] < -1e-12)) {
      Solution s;
      s.status = Status::Infeasible;
      s.x.assign(p.num_vars(), 0.0);
      return s;
    }
  }
  std::vector<Block> blocks = o.decompose ? independent_blocks(p) : std::vector<Block>{};
  if (blocks.size() <= 1) return solve_single(p, o, o.parallel);

  const long nb = static_cast<long>(blocks.size());
  std::vector<Solution> parts(nb);
  std::vector<int> failed(nb, 0);
#pragma omp parallel for schedule(dynamic) if (o.parallel)
  for (long k = 0; k < nb; ++k) {
    try {
      parts[k] = solve_single(extract_block(p, blocks[k]), o, false);
    } catch (const Error&) {
      failed[k] = 1;
    }
  }
  for (long k = 0; k < nb; ++k) {
    if (failed[k]) {
      // Re-raise outside the parallel region.
      solve_single(extract_block(p, blocks[k]), o, false);
    }
  }

  Solution out;
  out.x.assign(p.num_vars(), 0.0);
  out.status = Status::Optimal;
  for (long k = 0; k < nb; ++k) {
    const Solution& s = parts[k];
    if (s.status != Status::Optimal && out.status == Status::Optimal) out.status = s.status;
    if (s.status == Status::Infeasible) out.status = Status::Infeasible;
    for (std::size_t i = 0; i < blocks[k].vars.size() && i < s.x.size(); ++i) {
      out.x[blocks[k].vars[i]] = s.x[i];
    }
    out.iterations += s.iterations;
    out.nodes += s.nodes;
    out.primal_residual = std::max(out.primal_residual, s.primal_residual);
    out.dual_residual = std::max(out.dual_residual, s.dual_residual);
    out.gap = std::max(out.gap, s.gap);
  }
  out.objective_value = p.objective(out.x);
  return out;
}

}  // namespace adn::solver
