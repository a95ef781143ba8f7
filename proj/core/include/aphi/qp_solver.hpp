#pragma once

// Exact solver for the projection QP
//
//   min ||u - u_t||^2   s.t.   A u <= b
//
// with at most a dozen variables and constraints. The identity Hessian makes
// the problem strictly convex, so a feasible instance has a unique minimizer.
//
// The solver is a dual active-set method (Goldfarb-Idnani): it starts from the
// unconstrained minimizer u_t, repeatedly adds the most violated constraint
// (lowest index on ties) and drops constraints whose multiplier would turn
// negative. Because every iterate is dual feasible, an empty feasible set is
// detected exactly, without a phase-1 search.

#include <string>
#include <vector>

#include <Eigen/Core>

namespace aphi {

struct QpProblem {
  Eigen::VectorXd u_t;
  Eigen::MatrixXd A;  // m x n
  Eigen::VectorXd b;  // m
};

enum class QpStatus {
  kOptimal,
  kRelaxed,
  kInfeasible,
  kMaxIterations,
};

std::string to_string(QpStatus status);

struct QpSolution {
  Eigen::VectorXd u;
  QpStatus status = QpStatus::kOptimal;
  std::vector<int> active_set;  // row indices into A
  // Multipliers of the (1/2)||u - u_t||^2 form; length m, zero when inactive.
  Eigen::VectorXd multipliers;
  double slack_norm = 0.0;      // nonzero only for kRelaxed
  int iterations = 0;
};

struct KktResidual {
  double stationarity = 0.0;
  double primal = 0.0;           // max(A u - b), clipped at 0
  double dual = 0.0;             // max(-lambda), clipped at 0
  double complementarity = 0.0;  // max |lambda_i (A u - b)_i|

  double max() const;
};

inline constexpr int kMaxQpIterations = 1000;
inline constexpr double kDefaultSlackWeight = 1e6;

/// Solves the QP. Returns kInfeasible when the constraint set is empty and
/// kMaxIterations if the pivot budget is exhausted; in both cases u holds the
/// last iterate. Throws std::invalid_argument on malformed input.
QpSolution solve(const QpProblem& problem, double tol = 1e-9);

/// Like solve(), but an infeasible instance is re-solved with nonnegative
/// slacks, min ||u - u_t||^2 + w ||s||^2 s.t. A u <= b + s, and flagged
/// kRelaxed.
QpSolution solve_with_relaxation(const QpProblem& problem, double tol = 1e-9,
                                 double slack_weight = kDefaultSlackWeight);

KktResidual kkt_residual(const QpProblem& problem, const QpSolution& solution);

}  // namespace aphi
