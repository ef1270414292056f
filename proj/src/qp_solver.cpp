#include "angleaware/qp_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace angleaware {

namespace {

constexpr double kFeasTol = 1e-10;
constexpr int kMaxIter = 100;
constexpr int kMaxFeasSweeps = 200;

// Unified constraint a^T z + c >= 0; row_id >= 0 for general rows, -1 for
// box faces.
struct Con {
  Eigen::VectorXd a;
  double c;
  int row_id;
};

double violation(const Con& k, const Eigen::VectorXd& z) {
  return -(k.a.dot(z) + k.c);
}

void validate(const QpProblem& p) {
  const auto n = p.diag.size();
  if (n < 1) throw std::invalid_argument("qp: empty diagonal");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p.diag[i] > 0.0) || !std::isfinite(p.diag[i]))
      throw std::invalid_argument("qp: diagonal must be strictly positive");
  }
  if (p.lo.size() != n || p.hi.size() != n)
    throw std::invalid_argument("qp: box bound size mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(p.lo[i]) || std::isnan(p.hi[i]) || p.lo[i] > p.hi[i])
      throw std::invalid_argument("qp: invalid box bounds");
  }
  for (const QpRow& r : p.rows) {
    if (r.a.size() != n || !r.a.allFinite() || !std::isfinite(r.c))
      throw std::invalid_argument("qp: invalid constraint row");
  }
}

}  // namespace

QpSolution solve(const QpProblem& p) {
  validate(p);
  const Eigen::Index n = p.diag.size();
  const Eigen::VectorXd dinv = p.diag.cwiseInverse();

  std::vector<Con> cons;
  cons.reserve(p.rows.size() + 2 * static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < p.rows.size(); ++k)
    cons.push_back({p.rows[k].a, p.rows[k].c, static_cast<int>(k)});
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(p.lo[i])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a[i] = 1.0;
      cons.push_back({std::move(a), -p.lo[i], -1});
    }
    if (std::isfinite(p.hi[i])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a[i] = -1.0;
      cons.push_back({std::move(a), p.hi[i], -1});
    }
  }

  QpSolution out;
  out.row_duals.assign(p.rows.size(), 0.0);

  // Phase 1: clamp into the box, then cycle D-metric projections onto the
  // violated rows until feasible. Box-only rows use a projection masked to
  // coordinates whose face would not cancel the step. Rows touching a free
  // coordinate project in the free subspace only: that absorbs any violation
  // exactly, can never be clamped back, and cannot disturb box-only rows, so
  // the coupling between the two row classes is one-way. (A full-coordinate
  // projection of such a row can stall for hundreds of sweeps when the row is
  // nearly parallel, in the D metric, to another row through a shared
  // box coordinate.)
  Eigen::VectorXd z =
      Eigen::VectorXd::Zero(n).cwiseMax(p.lo).cwiseMin(p.hi);
  std::vector<char> is_free(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i)
    is_free[static_cast<std::size_t>(i)] =
        !std::isfinite(p.lo[i]) && !std::isfinite(p.hi[i]);
  std::vector<char> slack_row(p.rows.size(), 0);
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_free[static_cast<std::size_t>(i)] && p.rows[r].a[i] != 0.0)
        slack_row[r] = 1;
    }
  }

  Eigen::VectorXd dir(n);
  const auto project = [&](const QpRow& r, bool free_only) {
    const double v = -(r.a.dot(z) + r.c);
    if (v <= kFeasTol) return false;
    double denom = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ai = r.a[i];
      const bool allow =
          free_only ? is_free[static_cast<std::size_t>(i)] != 0
                    : !((ai > 0.0 && z[i] >= p.hi[i]) ||
                        (ai < 0.0 && z[i] <= p.lo[i]));
      dir[i] = allow ? dinv[i] * ai : 0.0;
      denom += ai * dir[i];
    }
    if (denom <= 0.0) return false;  // fully pinned or zero row
    z += (v / denom) * dir;
    if (!free_only) z = z.cwiseMax(p.lo).cwiseMin(p.hi);
    return true;
  };
  const auto feas_cycle = [&](bool split) {
    for (int sweep = 0; sweep < kMaxFeasSweeps; ++sweep) {
      double worst = 0.0;
      for (const QpRow& r : p.rows)
        worst = std::max(worst, -(r.a.dot(z) + r.c));
      if (worst <= kFeasTol) return;
      bool moved = false;
      for (std::size_t r = 0; r < p.rows.size(); ++r)
        if (!split || !slack_row[r]) moved |= project(p.rows[r], false);
      if (split) {
        for (std::size_t r = 0; r < p.rows.size(); ++r)
          if (slack_row[r]) moved |= project(p.rows[r], true);
      }
      if (!moved) return;  // every violated row is stuck: no progress
    }
  };
  feas_cycle(true);
  feas_cycle(false);  // fallback: full-coordinate projections for stragglers
  {
    double worst = 0.0;
    for (const QpRow& r : p.rows) worst = std::max(worst, -(r.a.dot(z) + r.c));
    if (worst > 1e-8) {
      out.z = z;
      out.status = QpStatus::Infeasible;
      out.kkt_residual = worst;
      return out;
    }
  }

  // Active-set iterations. Working set W holds indices into cons, in
  // insertion order.
  std::vector<int> W;
  Eigen::VectorXd lambda;  // duals of W from the last equality solve
  bool converged = false;

  for (out.iterations = 0; out.iterations < kMaxIter; ++out.iterations) {
    // Equality-constrained subproblem on W:
    //   2 D x = A^T lambda,  A x = -c_W  =>  (A (1/2) D^-1 A^T) lambda = -c_W
    Eigen::VectorXd xstar;
    const int wsz = static_cast<int>(W.size());
    if (wsz == 0) {
      xstar = Eigen::VectorXd::Zero(n);
      lambda.resize(0);
    } else {
      Eigen::MatrixXd A(wsz, n);
      Eigen::VectorXd cw(wsz);
      for (int k = 0; k < wsz; ++k) {
        A.row(k) = cons[static_cast<std::size_t>(W[static_cast<std::size_t>(k)])].a;
        cw[k] = cons[static_cast<std::size_t>(W[static_cast<std::size_t>(k)])].c;
      }
      // Solved as the full KKT system, not the A D^-1 A^T Schur complement:
      // the Schur form squares the working set's conditioning, and with
      // mixed row scales (coverage rows carry O(1e3) coefficients next to
      // unit box faces while D spans 1e-4..1) that loses enough accuracy for
      // the final KKT residual check to reject a correct active set.
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + wsz, n + wsz);
      K.topLeftCorner(n, n) = (2.0 * p.diag).asDiagonal();
      K.topRightCorner(n, wsz) = -A.transpose();
      K.bottomLeftCorner(wsz, n) = A;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + wsz);
      rhs.tail(wsz) = -cw;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
      if (!lu.isInvertible()) {
        // dependent rows: drop the newest and retry
        W.pop_back();
        out.degenerate = true;
        continue;
      }
      Eigen::VectorXd sol = lu.solve(rhs);
      sol += lu.solve(rhs - K * sol);  // one refinement pass
      xstar = sol.head(n);
      lambda = sol.tail(wsz);
    }

    const Eigen::VectorXd step = xstar - z;
    const double step_norm = step.lpNorm<Eigen::Infinity>();
    if (step_norm <= 1e-11 * std::max(1.0, z.lpNorm<Eigen::Infinity>())) {
      // candidate optimum for W: check dual signs
      int drop = -1;
      double most_negative = -1e-9 * std::max(1.0, wsz == 0 ? 0.0
                                              : lambda.lpNorm<Eigen::Infinity>());
      for (int k = 0; k < wsz; ++k) {
        if (lambda[k] < most_negative) {
          most_negative = lambda[k];
          drop = k;
        }
      }
      if (drop < 0) {
        z = xstar;
        converged = true;
        break;
      }
      W.erase(W.begin() + drop);
      continue;
    }

    // Ratio test against constraints outside W.
    double alpha = 1.0;
    int blocking = -1;
    for (std::size_t r = 0; r < cons.size(); ++r) {
      bool in_w = false;
      for (int k : W) in_w |= (k == static_cast<int>(r));
      if (in_w) continue;
      const double s = cons[r].a.dot(step);
      if (s >= 0.0) continue;
      const double slack = cons[r].a.dot(z) + cons[r].c;
      const double t = std::max(0.0, slack) / (-s);
      if (t < alpha) {
        alpha = t;
        blocking = static_cast<int>(r);
      }
    }
    z += alpha * step;
    if (blocking >= 0) W.push_back(blocking);
  }

  // Assemble duals and the KKT residual.
  Eigen::VectorXd grad = 2.0 * p.diag.cwiseProduct(z);
  Eigen::VectorXd atl = Eigen::VectorXd::Zero(n);
  double comp = 0.0;
  double lam_norm = 0.0;
  for (std::size_t k = 0; k < W.size(); ++k) {
    const Con& con = cons[static_cast<std::size_t>(W[k])];
    const double lam = lambda[static_cast<Eigen::Index>(k)];
    atl += lam * con.a;
    comp = std::max(comp, std::abs(lam * (con.a.dot(z) + con.c)));
    lam_norm = std::max(lam_norm, std::abs(lam));
    if (con.row_id >= 0) {
      out.row_duals[static_cast<std::size_t>(con.row_id)] = lam;
      out.active.push_back(con.row_id);
    }
  }
  double feas = 0.0;
  for (const Con& con : cons) feas = std::max(feas, violation(con, z));
  const double stat = (grad - atl).lpNorm<Eigen::Infinity>();
  out.kkt_residual = std::max({stat, feas, comp});
  out.z = z;
  out.objective = z.dot(p.diag.cwiseProduct(z));

  const double scale = std::max({1.0, z.lpNorm<Eigen::Infinity>(), lam_norm});
  if (converged && out.kkt_residual <= 1e-8 * scale) {
    out.status = QpStatus::Optimal;
  } else {
    out.status = QpStatus::IterationLimit;
  }
  return out;
}

}  // namespace angleaware
