#include "aphi/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace aphi {
namespace {

constexpr double kDegenerateRowNorm = 1e-12;
constexpr double kDependentDirection = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_problem(const QpProblem& p, double tol) {
  if (p.u_t.size() < 1) throw std::invalid_argument("qp: n must be >= 1");
  if (p.A.rows() != p.b.size())
    throw std::invalid_argument("qp: A and b row counts differ");
  if (p.A.rows() > 0 && p.A.cols() != p.u_t.size())
    throw std::invalid_argument("qp: A column count differs from n");
  if (!p.u_t.allFinite() || !p.A.allFinite() || !p.b.allFinite())
    throw std::invalid_argument("qp: non-finite input");
  if (!(tol > 0.0)) throw std::invalid_argument("qp: tol must be > 0");
}

// Dual active-set iteration on unit-norm rows. `rows` maps normalized rows
// back to the caller's indices.
QpSolution solve_normalized(const Eigen::VectorXd& u_t,
                            const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const std::vector<int>& rows, int m_total,
                            double tol) {
  const int n = static_cast<int>(u_t.size());
  const int m = static_cast<int>(a.rows());

  QpSolution sol;
  sol.u = u_t;
  sol.multipliers = Eigen::VectorXd::Zero(m_total);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  std::vector<int> active;  // indices into a
  std::vector<char> is_active(m, 0);
  Eigen::VectorXd& x = sol.u;

  auto finish = [&](QpStatus status) {
    sol.status = status;
    std::vector<std::pair<int, int>> order;
    for (int j : active) order.emplace_back(rows[j], j);
    std::sort(order.begin(), order.end());
    for (auto [orig, j] : order) {
      sol.active_set.push_back(orig);
      sol.multipliers[orig] = lambda[j];
    }
    return sol;
  };

  while (true) {
    // Most violated inactive constraint; strict comparison keeps the lowest
    // index on ties.
    int p = -1;
    double worst = tol;
    for (int i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      const double v = a.row(i).dot(x) - b[i];
      if (v > worst) {
        worst = v;
        p = i;
      }
    }
    if (p < 0) return finish(QpStatus::kOptimal);

    const Eigen::VectorXd a_p = a.row(p).transpose();
    double lambda_p = 0.0;

    while (true) {
      if (++sol.iterations > kMaxQpIterations)
        return finish(QpStatus::kMaxIterations);

      const int k_active = static_cast<int>(active.size());
      Eigen::VectorXd r(k_active);
      Eigen::VectorXd z = a_p;
      if (k_active > 0) {
        Eigen::MatrixXd nmat(n, k_active);
        for (int j = 0; j < k_active; ++j) nmat.col(j) = a.row(active[j]).transpose();
        r = (nmat.transpose() * nmat).ldlt().solve(nmat.transpose() * a_p);
        z = a_p - nmat * r;
      }

      // Blocking active constraint (its multiplier hits zero first).
      double t_partial = kInf;
      int block = -1;
      for (int j = 0; j < k_active; ++j) {
        if (r[j] <= 1e-14) continue;
        const double ratio = lambda[active[j]] / r[j];
        if (ratio < t_partial ||
            (block >= 0 && ratio == t_partial && active[j] < active[block])) {
          t_partial = ratio;
          block = j;
        }
      }

      const double z2 = z.squaredNorm();
      const bool primal_step = std::sqrt(z2) > kDependentDirection;
      const double t_full =
          primal_step ? (a_p.dot(x) - b[p]) / z2 : kInf;

      if (!primal_step && block < 0) {
        // a_p is a nonnegative combination of the active normals: no point
        // can satisfy the active set and row p together.
        is_active[p] = 0;
        sol.u = x;
        return finish(QpStatus::kInfeasible);
      }

      const double t = std::min(t_partial, t_full);
      if (primal_step) x -= t * z;
      for (int j = 0; j < k_active; ++j) lambda[active[j]] -= t * r[j];
      lambda_p += t;

      if (primal_step && t_full <= t_partial) {
        lambda[p] = lambda_p;
        active.push_back(p);
        is_active[p] = 1;
        break;
      }
      // Drop the blocking constraint and retry with the same p.
      lambda[active[block]] = 0.0;
      is_active[active[block]] = 0;
      active.erase(active.begin() + block);
    }
  }
}

}  // namespace

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kRelaxed: return "relaxed";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

double KktResidual::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

QpSolution solve(const QpProblem& problem, double tol) {
  check_problem(problem, tol);
  const int m = static_cast<int>(problem.A.rows());
  const int n = static_cast<int>(problem.u_t.size());

  // Normalize rows; drop vanishing ones.
  std::vector<int> rows;
  std::vector<double> norms;
  for (int i = 0; i < m; ++i) {
    const double nrm = problem.A.row(i).norm();
    if (nrm < kDegenerateRowNorm) {
      if (problem.b[i] < -tol) {
        QpSolution bad;
        bad.u = problem.u_t;
        bad.multipliers = Eigen::VectorXd::Zero(m);
        bad.status = QpStatus::kInfeasible;
        return bad;
      }
      continue;
    }
    rows.push_back(i);
    norms.push_back(nrm);
  }

  const int k = static_cast<int>(rows.size());
  Eigen::MatrixXd a(k, n);
  Eigen::VectorXd b(k);
  for (int j = 0; j < k; ++j) {
    a.row(j) = problem.A.row(rows[j]) / norms[j];
    b[j] = problem.b[rows[j]] / norms[j];
  }

  QpSolution sol = solve_normalized(problem.u_t, a, b, rows, m, tol);
  for (int j = 0; j < k; ++j) sol.multipliers[rows[j]] /= norms[j];
  return sol;
}

QpSolution solve_with_relaxation(const QpProblem& problem, double tol,
                                 double slack_weight) {
  QpSolution sol = solve(problem, tol);
  if (sol.status != QpStatus::kInfeasible) return sol;
  if (!(slack_weight > 0.0))
    throw std::invalid_argument("qp: slack weight must be > 0");

  // Scaled slack s' = sqrt(w) s keeps the Hessian the identity.
  const int n = static_cast<int>(problem.u_t.size());
  const int m = static_cast<int>(problem.A.rows());
  const double inv_sqrt_w = 1.0 / std::sqrt(slack_weight);

  QpProblem relaxed;
  relaxed.u_t = Eigen::VectorXd::Zero(n + m);
  relaxed.u_t.head(n) = problem.u_t;
  relaxed.A = Eigen::MatrixXd::Zero(2 * m, n + m);
  relaxed.b = Eigen::VectorXd::Zero(2 * m);
  relaxed.A.topLeftCorner(m, n) = problem.A;
  relaxed.A.topRightCorner(m, m) = -inv_sqrt_w * Eigen::MatrixXd::Identity(m, m);
  relaxed.A.bottomRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  relaxed.b.head(m) = problem.b;

  const QpSolution inner = solve(relaxed, tol);
  QpSolution out;
  out.u = inner.u.head(n);
  out.status = inner.status == QpStatus::kOptimal ? QpStatus::kRelaxed
                                                  : inner.status;
  out.slack_norm = inner.u.tail(m).norm() * inv_sqrt_w;
  out.multipliers = inner.multipliers.head(m);
  out.iterations = sol.iterations + inner.iterations;
  for (int i : inner.active_set)
    if (i < m) out.active_set.push_back(i);
  return out;
}

KktResidual kkt_residual(const QpProblem& problem, const QpSolution& solution) {
  KktResidual r;
  const Eigen::VectorXd& u = solution.u;
  Eigen::VectorXd grad = u - problem.u_t;
  if (problem.A.rows() > 0) {
    grad += problem.A.transpose() * solution.multipliers;
    const Eigen::VectorXd slack = problem.A * u - problem.b;
    r.primal = std::max(0.0, slack.maxCoeff());
    r.dual = std::max(0.0, (-solution.multipliers).maxCoeff());
    r.complementarity =
        solution.multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff();
  }
  r.stationarity = grad.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace aphi
