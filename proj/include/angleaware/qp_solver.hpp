// Small dense strictly convex QP:
//
//   minimize    z^T diag(d) z
//   subject to  rows[k].a^T z + rows[k].c >= 0
//               lo <= z <= hi   (+-inf entries disable a face)
//
// Solved by a textbook primal active-set method with explicit dense solves.
// Problems here have <= 5 variables and <= 12 constraints, so finite
// termination and bit-reproducibility matter more than throughput.
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace angleaware {

struct QpRow {
  Eigen::VectorXd a;
  double c = 0.0;
};

struct QpProblem {
  Eigen::VectorXd diag;      // strictly positive
  std::vector<QpRow> rows;   // general inequality rows
  Eigen::VectorXd lo, hi;    // box bounds per variable
};

enum class QpStatus {
  Optimal,
  Infeasible,       // no point satisfies rows + box (within tolerance)
  IterationLimit,   // active-set budget exhausted before KKT tolerance
};

struct QpSolution {
  Eigen::VectorXd z;
  std::vector<double> row_duals;  // one per general row, >= 0
  QpStatus status = QpStatus::Optimal;
  double objective = 0.0;
  double kkt_residual = 0.0;  // max of stationarity/feasibility/comp-slack
  int iterations = 0;
  bool degenerate = false;    // a dependent working-set row was dropped
  std::vector<int> active;    // general rows active at the solution
};

QpSolution solve(const QpProblem& p);

}  // namespace angleaware
