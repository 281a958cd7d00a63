// Primal-dual interior-point method for convex QPs with bounds and two-sided
// rows. Rows are turned into equalities with bounded slacks, so the core only
// sees  min 0.5 w'Qw + c'w  s.t.  Aw = b,  lb <= w <= ub.
#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "adn/error.hpp"
#include "adn/solver/solve.hpp"

namespace adn::solver {
namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

struct CoreProblem {
  SpMat A;  // m x n
  SpMat Q;  // n x n, full symmetric
  Vec c, b, lb, ub;
  long n() const { return c.size(); }
  long m() const { return b.size(); }
};

enum class CoreStatus { Converged, Acceptable, Stalled, Diverged };

struct CoreResult {
  Vec w;
  CoreStatus status = CoreStatus::Stalled;
  int iterations = 0;
  double rp = 0.0, rd = 0.0, gap = 0.0;  // relative measures
};

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

/// Quasi-definite KKT system [H  A'; A  -delta I] with a fixed sparsity
/// pattern; only the diagonal changes between iterations.
class KktSystem {
 public:
  KktSystem(const CoreProblem& p) : p_(p), n_(p.n()), m_(p.m()) {
    std::vector<Trip> t;
    t.reserve(p.Q.nonZeros() + p.A.nonZeros() + n_ + m_);
    for (long j = 0; j < n_ + m_; ++j) t.emplace_back(j, j, 0.0);
    for (long j = 0; j < p.Q.outerSize(); ++j) {
      for (SpMat::InnerIterator it(p.Q, j); it; ++it) {
        if (it.row() < j) t.emplace_back(it.row(), j, it.value());
      }
    }
    for (long j = 0; j < p.A.outerSize(); ++j) {
      for (SpMat::InnerIterator it(p.A, j); it; ++it) t.emplace_back(j, n_ + it.row(), it.value());
    }
    K_.resize(n_ + m_, n_ + m_);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();
    diag_pos_.resize(n_ + m_);
    for (long j = 0; j < n_ + m_; ++j) diag_pos_[j] = K_.outerIndexPtr()[j + 1] - 1;
    qdiag_ = p.Q.diagonal();
    ldlt_.analyzePattern(K_);
  }

  /// sigma: barrier diagonal for the primal block.
  bool factor(const Vec& sigma, double reg_p, double reg_d) {
    sigma_ = sigma;
    double* v = K_.valuePtr();
    for (long j = 0; j < n_; ++j) v[diag_pos_[j]] = qdiag_[j] + sigma[j] + reg_p;
    for (long i = 0; i < m_; ++i) v[diag_pos_[n_ + i]] = -reg_d;
    ldlt_.factorize(K_);
    return ldlt_.info() == Eigen::Success;
  }

  /// Solves the unregularized system with iterative refinement.
  Vec solve(const Vec& rhs) const {
    Vec x = ldlt_.solve(rhs);
    double prev = inf_norm(rhs - apply(x));
    for (int k = 0; k < 4 && prev > 1e-14 * (1.0 + inf_norm(rhs)); ++k) {
      Vec dx = ldlt_.solve(rhs - apply(x));
      Vec trial = x + dx;
      const double res = inf_norm(rhs - apply(trial));
      if (!(res < prev)) break;
      x.swap(trial);
      prev = res;
    }
    return x;
  }

 private:
  Vec apply(const Vec& x) const {
    Vec out(n_ + m_);
    const auto xw = x.head(n_);
    const auto xv = x.tail(m_);
    out.head(n_) = p_.Q * xw + sigma_.cwiseProduct(xw);
    if (m_ > 0) {
      out.head(n_) += p_.A.transpose() * xv;
      out.tail(m_) = p_.A * xw;
    }
    return out;
  }

  const CoreProblem& p_;
  long n_, m_;
  SpMat K_;
  std::vector<long> diag_pos_;
  Vec qdiag_, sigma_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Upper, Eigen::AMDOrdering<int>> ldlt_;
};

double max_step(const Vec& x, const Vec& dx, const std::vector<char>& mask) {
  double a = 1.0;
  for (long j = 0; j < x.size(); ++j) {
    if (mask[j] && dx[j] < 0.0) a = std::min(a, -x[j] / dx[j]);
  }
  return a;
}

CoreResult interior_point(const CoreProblem& p, const ConvexOptions& opts) {
  const long n = p.n(), m = p.m();
  std::vector<char> has_l(n), has_u(n);
  long nc = 0;
  for (long j = 0; j < n; ++j) {
    has_l[j] = std::isfinite(p.lb[j]);
    has_u[j] = std::isfinite(p.ub[j]);
    nc += has_l[j] + has_u[j];
  }
  const bool is_qp = p.Q.nonZeros() > 0;

  Vec w(n), y = Vec::Zero(m), zl = Vec::Zero(n), zu = Vec::Zero(n);
  for (long j = 0; j < n; ++j) {
    const double lb = p.lb[j], ub = p.ub[j];
    if (has_l[j] && has_u[j]) {
      const double width = ub - lb;
      w[j] = width <= 2.0 ? lb + 0.5 * width : std::clamp(0.0, lb + 1.0, ub - 1.0);
    } else if (has_l[j]) {
      w[j] = std::max(0.0, lb + 1.0);
    } else if (has_u[j]) {
      w[j] = std::min(0.0, ub - 1.0);
    } else {
      w[j] = 0.0;
    }
    if (has_l[j]) zl[j] = 1.0;
    if (has_u[j]) zu[j] = 1.0;
  }

  KktSystem kkt(p);
  const double bnorm = inf_norm(p.b), cnorm = inf_norm(p.c);
  CoreResult best;
  best.w = w;
  double best_merit = kInf;
  int best_iter = 0;
  double reg = 1e-9;

  Vec g(n), t(n), sigma(n);
  for (int it = 0;; ++it) {
    for (long j = 0; j < n; ++j) {
      g[j] = has_l[j] ? w[j] - p.lb[j] : 1.0;
      t[j] = has_u[j] ? p.ub[j] - w[j] : 1.0;
    }
    const Vec rp = m > 0 ? Vec(p.A * w - p.b) : Vec();
    Vec rd = p.Q * w + p.c - zl + zu;
    if (m > 0) rd -= p.A.transpose() * y;
    const double compl_sum = g.cwiseProduct(zl).sum() + t.cwiseProduct(zu).sum();
    const double mu = nc > 0 ? compl_sum / nc : 0.0;
    const double pobj = 0.5 * w.dot(p.Q * w) + p.c.dot(w);

    const double rp_rel = inf_norm(rp) / (1.0 + bnorm);
    const double rd_rel = inf_norm(rd) / (1.0 + cnorm);
    const double gap_rel = compl_sum / (1.0 + std::abs(pobj));
    const double merit = std::max({rp_rel, rd_rel, gap_rel});
    if (merit < best_merit) {
      if (merit < 0.9 * best_merit) best_iter = it;
      best_merit = merit;
      best.w = w;
      best.rp = rp_rel;
      best.rd = rd_rel;
      best.gap = gap_rel;
    }
    best.iterations = it;
    if (merit <= opts.tolerance) {
      best.status = CoreStatus::Converged;
      return best;
    }
    const double dual_size = std::max({inf_norm(y), inf_norm(zl), inf_norm(zu)});
    if (inf_norm(w) > 1e10 || dual_size > 1e14 * (1.0 + cnorm)) {
      best.status = best_merit <= opts.acceptable_tolerance ? CoreStatus::Acceptable : CoreStatus::Diverged;
      return best;
    }
    if (it >= opts.max_iterations || it - best_iter > opts.stall_iterations) {
      best.status = best_merit <= opts.acceptable_tolerance ? CoreStatus::Acceptable : CoreStatus::Stalled;
      return best;
    }

    for (long j = 0; j < n; ++j) {
      double s = 0.0;
      if (has_l[j]) s += zl[j] / g[j];
      if (has_u[j]) s += zu[j] / t[j];
      sigma[j] = std::min(s, 1e20);
    }
    bool ok = kkt.factor(sigma, reg, reg);
    while (!ok && reg < 1e-2) {
      reg *= 100.0;
      ok = kkt.factor(sigma, reg, reg);
    }
    if (!ok) {
      best.status = CoreStatus::Stalled;
      return best;
    }

    auto direction = [&](const Vec& r_l, const Vec& r_u, Vec& dw, Vec& dy, Vec& dzl, Vec& dzu) {
      Vec rhs(n + m);
      for (long j = 0; j < n; ++j) {
        double v = -rd[j];
        if (has_l[j]) v += r_l[j] / g[j];
        if (has_u[j]) v -= r_u[j] / t[j];
        rhs[j] = v;
      }
      if (m > 0) rhs.tail(m) = -rp;
      const Vec sol = kkt.solve(rhs);
      dw = sol.head(n);
      dy = -sol.tail(m);
      dzl = Vec::Zero(n);
      dzu = Vec::Zero(n);
      for (long j = 0; j < n; ++j) {
        if (has_l[j]) dzl[j] = (r_l[j] - zl[j] * dw[j]) / g[j];
        if (has_u[j]) dzu[j] = (r_u[j] + zu[j] * dw[j]) / t[j];
      }
    };
    auto steps = [&](const Vec& dw, const Vec& dzl, const Vec& dzu, double& ap, double& ad) {
      ap = std::min(max_step(g, dw, has_l), max_step(t, -dw, has_u));
      ad = std::min(max_step(zl, dzl, has_l), max_step(zu, dzu, has_u));
      if (is_qp) ap = ad = std::min(ap, ad);
    };

    Vec r_l(n), r_u(n);
    for (long j = 0; j < n; ++j) {
      r_l[j] = has_l[j] ? -g[j] * zl[j] : 0.0;
      r_u[j] = has_u[j] ? -t[j] * zu[j] : 0.0;
    }
    Vec dw, dy, dzl, dzu;
    direction(r_l, r_u, dw, dy, dzl, dzu);
    double ap, ad;
    steps(dw, dzl, dzu, ap, ad);

    double sigma_c = 0.0;
    if (nc > 0) {
      double mu_aff = 0.0;
      for (long j = 0; j < n; ++j) {
        if (has_l[j]) mu_aff += (g[j] + ap * dw[j]) * (zl[j] + ad * dzl[j]);
        if (has_u[j]) mu_aff += (t[j] - ap * dw[j]) * (zu[j] + ad * dzu[j]);
      }
      mu_aff /= nc;
      sigma_c = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
      for (long j = 0; j < n; ++j) {
        if (has_l[j]) r_l[j] = sigma_c * mu - g[j] * zl[j] - dw[j] * dzl[j];
        if (has_u[j]) r_u[j] = sigma_c * mu - t[j] * zu[j] + dw[j] * dzu[j];
      }
      direction(r_l, r_u, dw, dy, dzl, dzu);
      steps(dw, dzl, dzu, ap, ad);
    }
    const double eta = std::clamp(1.0 - mu, 0.99, 0.99999);
    ap = std::min(1.0, eta * ap);
    ad = std::min(1.0, eta * ad);
    w += ap * dw;
    y += ad * dy;
    zl += ad * dzl;
    zu += ad * dzu;
  }
}

/// Ruiz equilibration of [Q A'; A 0] followed by cost normalization.
struct Scaling {
  Vec d, e;  // column, row
  double gamma = 1.0;
};

Scaling equilibrate(CoreProblem& p) {
  const long n = p.n(), m = p.m();
  Scaling s{Vec::Ones(n), Vec::Ones(m), 1.0};
  for (int pass = 0; pass < 15; ++pass) {
    Vec cn = Vec::Zero(n), rn = Vec::Zero(m);
    for (long j = 0; j < n; ++j) {
      for (SpMat::InnerIterator it(p.Q, j); it; ++it) cn[j] = std::max(cn[j], std::abs(it.value()));
      for (SpMat::InnerIterator it(p.A, j); it; ++it) {
        cn[j] = std::max(cn[j], std::abs(it.value()));
        rn[it.row()] = std::max(rn[it.row()], std::abs(it.value()));
      }
    }
    double spread = 0.0;
    Vec dc(n), dr(m);
    for (long j = 0; j < n; ++j) {
      dc[j] = cn[j] > 0.0 ? 1.0 / std::sqrt(cn[j]) : 1.0;
      spread = std::max(spread, std::abs(1.0 - cn[j]) * (cn[j] > 0.0));
    }
    for (long i = 0; i < m; ++i) {
      dr[i] = rn[i] > 0.0 ? 1.0 / std::sqrt(rn[i]) : 1.0;
      spread = std::max(spread, std::abs(1.0 - rn[i]) * (rn[i] > 0.0));
    }
    if (spread < 1e-3) break;
    p.A = dr.asDiagonal() * p.A * dc.asDiagonal();
    p.Q = dc.asDiagonal() * p.Q * dc.asDiagonal();
    s.d = s.d.cwiseProduct(dc);
    s.e = s.e.cwiseProduct(dr);
  }
  p.c = s.d.cwiseProduct(p.c);
  p.b = s.e.cwiseProduct(p.b);
  for (long j = 0; j < n; ++j) {
    p.lb[j] /= s.d[j];
    p.ub[j] /= s.d[j];
  }
  double qmean = 0.0;
  if (n > 0 && p.Q.nonZeros() > 0) {
    for (long j = 0; j < n; ++j) {
      double col = 0.0;
      for (SpMat::InnerIterator it(p.Q, j); it; ++it) col = std::max(col, std::abs(it.value()));
      qmean += col;
    }
    qmean /= n;
  }
  const double scale = std::max({inf_norm(p.c), qmean, 1e-8});
  s.gamma = std::clamp(1.0 / scale, 1e-6, 1e6);
  p.c *= s.gamma;
  p.Q *= s.gamma;
  return s;
}

/// min sum(e+ + e-) s.t. Aw + e+ - e- = b, bounds kept.
double phase_one_residual(const CoreProblem& p, const ConvexOptions& opts) {
  const long n = p.n(), m = p.m();
  CoreProblem f;
  f.c = Vec::Zero(n + 2 * m);
  f.c.tail(2 * m).setOnes();
  f.b = p.b;
  f.lb = Vec::Zero(n + 2 * m);
  f.ub = Vec::Constant(n + 2 * m, kInf);
  f.lb.head(n) = p.lb;
  f.ub.head(n) = p.ub;
  std::vector<Trip> t;
  for (long j = 0; j < n; ++j) {
    for (SpMat::InnerIterator it(p.A, j); it; ++it) t.emplace_back(it.row(), j, it.value());
  }
  for (long i = 0; i < m; ++i) {
    t.emplace_back(i, n + i, 1.0);
    t.emplace_back(i, n + m + i, -1.0);
  }
  f.A.resize(m, n + 2 * m);
  f.A.setFromTriplets(t.begin(), t.end());
  f.Q.resize(n + 2 * m, n + 2 * m);
  ConvexOptions o = opts;
  o.max_iterations = std::max(opts.max_iterations, 150);
  const CoreResult r = interior_point(f, o);
  return (f.A.leftCols(n) * r.w.head(n) - f.b).lpNorm<Eigen::Infinity>() /
         (1.0 + inf_norm(f.b));
}

struct Presolved {
  std::vector<char> fixed;
  std::vector<double> value, lo, hi;
  std::vector<char> row_active;
  bool infeasible = false;
  bool unbounded = false;
};

// Ranges this thin leave the barrier no interior to work in (a pinned binary
// turns a big-M pair into one); the midpoint is within tolerance of any point.
bool fixed_width(double lo, double hi) {
  return std::isfinite(lo) && std::isfinite(hi) &&
         hi - lo <= 1e-7 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
}

Presolved presolve(const MiqpProblem& p, std::span<const double> lower,
                   std::span<const double> upper, double feas_tol) {
  const Index n = p.num_vars(), m = p.num_rows();
  Presolved s;
  s.fixed.assign(n, 0);
  s.value.assign(n, 0.0);
  s.lo.assign(lower.begin(), lower.end());
  s.hi.assign(upper.begin(), upper.end());
  s.row_active.assign(m, 1);

  auto settle = [&](Index j) {
    const double lo = s.lo[j], hi = s.hi[j];
    if (lo > hi + feas_tol * (1.0 + std::max(std::abs(lo), std::abs(hi)))) {
      s.infeasible = true;
      return;
    }
    if (fixed_width(lo, hi) || lo > hi) {
      s.fixed[j] = 1;
      s.value[j] = 0.5 * (lo + hi);
      s.lo[j] = s.hi[j] = s.value[j];
    }
  };
  for (Index j = 0; j < n && !s.infeasible; ++j) settle(j);

  bool changed = true;
  while (changed && !s.infeasible) {
    changed = false;
    for (Index r = 0; r < m && !s.infeasible; ++r) {
      if (!s.row_active[r]) continue;
      const double lo = p.row_lower[r], hi = p.row_upper[r];
      if (!std::isfinite(lo) && !std::isfinite(hi)) {
        s.row_active[r] = 0;
        continue;
      }
      auto vars = p.row_vars(r);
      auto coefs = p.row_coefs(r);
      double konst = 0.0;
      std::size_t free_count = 0, last = 0;
      for (std::size_t k = 0; k < vars.size(); ++k) {
        if (s.fixed[vars[k]]) konst += coefs[k] * s.value[vars[k]];
        else {
          ++free_count;
          last = k;
        }
      }
      if (free_count == 0) {
        const double tol = feas_tol * (1.0 + std::abs(konst));
        if (konst < lo - tol || konst > hi + tol) s.infeasible = true;
        s.row_active[r] = 0;
        changed = true;
      } else if (free_count == 1) {
        const Index j = vars[last];
        const double a = coefs[last];
        double nlo = (lo - konst) / a, nhi = (hi - konst) / a;
        if (a < 0.0) std::swap(nlo, nhi);
        s.lo[j] = std::max(s.lo[j], nlo);
        s.hi[j] = std::min(s.hi[j], nhi);
        settle(j);
        s.row_active[r] = 0;
        changed = true;
      }
    }
  }
  return s;
}

}  // namespace

Solution solve_convex(const MiqpProblem& p, const ConvexOptions& opts) {
  return solve_convex(p, p.lower, p.upper, opts);
}

Solution solve_convex(const MiqpProblem& p, std::span<const double> lower,
                      std::span<const double> upper, const ConvexOptions& opts) {
  const Index n = p.num_vars(), m = p.num_rows();
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "bound vectors do not match the variable count");
  }
  Solution sol;
  Presolved ps = presolve(p, lower, upper, opts.infeasibility_tolerance);
  if (ps.infeasible) {
    sol.status = Status::Infeasible;
    sol.x = ps.value;
    return sol;
  }

  // Symmetric objective matrix, used for coupling of fixed and isolated variables.
  std::vector<std::vector<std::pair<Index, double>>> qcols(n);
  std::vector<double> qdiag(n, 0.0);
  for (std::size_t k = 0; k < p.quad_v.size(); ++k) {
    const Index i = p.quad_i[k], j = p.quad_j[k];
    if (i == j) qdiag[i] += p.quad_v[k];
    else {
      qcols[i].emplace_back(j, p.quad_v[k]);
      qcols[j].emplace_back(i, p.quad_v[k]);
    }
  }

  // Variables left with no active row and no coupling to another free
  // variable have a closed-form minimizer.
  std::vector<int> row_uses(n, 0);
  for (Index r = 0; r < m; ++r) {
    if (!ps.row_active[r]) continue;
    for (Index v : p.row_vars(r)) ++row_uses[v];
  }
  for (Index j = 0; j < n; ++j) {
    if (ps.fixed[j] || row_uses[j] > 0) continue;
    double c = p.cost[j];
    bool coupled = false;
    for (auto [k, v] : qcols[j]) {
      if (ps.fixed[k]) c += v * ps.value[k];
      else if (v != 0.0) coupled = true;
    }
    if (coupled) continue;
    double x;
    if (qdiag[j] > 0.0) x = std::clamp(-c / qdiag[j], ps.lo[j], ps.hi[j]);
    else if (c > 0.0) x = ps.lo[j];
    else if (c < 0.0) x = ps.hi[j];
    else x = std::clamp(0.0, ps.lo[j], ps.hi[j]);
    if (!std::isfinite(x)) {
      sol.status = Status::Unbounded;
      sol.x = ps.value;
      return sol;
    }
    ps.fixed[j] = 1;
    ps.value[j] = x;
  }

  std::vector<long> col(n, -1);
  std::vector<Index> free_vars;
  for (Index j = 0; j < n; ++j) {
    if (!ps.fixed[j]) {
      col[j] = static_cast<long>(free_vars.size());
      free_vars.push_back(j);
    }
  }
  std::vector<Index> rows;
  for (Index r = 0; r < m; ++r) {
    if (ps.row_active[r]) rows.push_back(r);
  }
  const long nx = static_cast<long>(free_vars.size());
  long nslack = 0;
  for (Index r : rows) nslack += p.row_lower[r] != p.row_upper[r];

  CoreProblem core;
  const long nw = nx + nslack, mr = static_cast<long>(rows.size());
  core.c = Vec::Zero(nw);
  core.lb = Vec(nw);
  core.ub = Vec(nw);
  core.b = Vec::Zero(mr);
  for (long k = 0; k < nx; ++k) {
    const Index j = free_vars[k];
    double c = p.cost[j];
    for (auto [i, v] : qcols[j]) {
      if (ps.fixed[i]) c += v * ps.value[i];
    }
    core.c[k] = c;
    core.lb[k] = ps.lo[j];
    core.ub[k] = ps.hi[j];
  }
  std::vector<Trip> at;
  long slack = nx;
  for (long i = 0; i < mr; ++i) {
    const Index r = rows[i];
    double konst = 0.0;
    auto vars = p.row_vars(r);
    auto coefs = p.row_coefs(r);
    for (std::size_t k = 0; k < vars.size(); ++k) {
      if (ps.fixed[vars[k]]) konst += coefs[k] * ps.value[vars[k]];
      else at.emplace_back(i, col[vars[k]], coefs[k]);
    }
    if (p.row_lower[r] == p.row_upper[r]) {
      core.b[i] = p.row_lower[r] - konst;
    } else {
      at.emplace_back(i, slack, -1.0);
      core.lb[slack] = p.row_lower[r] - konst;
      core.ub[slack] = p.row_upper[r] - konst;
      ++slack;
    }
  }
  core.A.resize(mr, nw);
  core.A.setFromTriplets(at.begin(), at.end());
  std::vector<Trip> qt;
  for (long k = 0; k < nx; ++k) {
    const Index j = free_vars[k];
    if (qdiag[j] != 0.0) qt.emplace_back(k, k, qdiag[j]);
    for (auto [i, v] : qcols[j]) {
      if (!ps.fixed[i]) qt.emplace_back(k, col[i], v);
    }
  }
  core.Q.resize(nw, nw);
  core.Q.setFromTriplets(qt.begin(), qt.end());

  std::vector<double> x = ps.value;
  CoreStatus cs = CoreStatus::Converged;
  if (nw > 0) {
    CoreProblem scaled = core;
    const Scaling sc = equilibrate(scaled);
    const CoreResult r = interior_point(scaled, opts);
    for (long k = 0; k < nx; ++k) {
      x[free_vars[k]] = std::clamp(sc.d[k] * r.w[k], ps.lo[free_vars[k]], ps.hi[free_vars[k]]);
    }
    cs = r.status;
    sol.iterations = r.iterations;
    sol.dual_residual = r.rd;
    sol.gap = r.gap;
    if (cs == CoreStatus::Stalled || cs == CoreStatus::Diverged) {
      if (mr > 0 && phase_one_residual(scaled, opts) > opts.infeasibility_tolerance) {
        sol.status = Status::Infeasible;
      } else if (cs == CoreStatus::Diverged) {
        sol.status = Status::Unbounded;
      } else {
        sol.status = Status::IterLimit;
      }
    } else {
      sol.status = Status::Optimal;
    }
  } else {
    sol.status = Status::Optimal;
  }

  double viol = 0.0;
  for (Index j = 0; j < n; ++j) viol = std::max({viol, lower[j] - x[j], x[j] - upper[j]});
  for (Index r = 0; r < m; ++r) {
    const double a = p.row_activity(r, x);
    viol = std::max({viol, p.row_lower[r] - a, a - p.row_upper[r]});
  }
  sol.primal_residual = viol;
  sol.objective_value = p.objective(x);
  sol.x = std::move(x);
  return sol;
}

}  // namespace adn::solver
