#pragma once

#include <Eigen/Dense>

namespace tolerant {

// Small dense linear program in the form
//   min  objective . x
//   s.t. a_eq x  = b_eq
//        a_ub x <= b_ub
//        x >= 0.
struct LpProblem {
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::VectorXd objective;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Two-phase revised simplex with Bland's rule and full refactorization of the
// basis at every iteration; intended for problems with tens of rows and up to
// a few thousand columns.
LpSolution solve_lp(const LpProblem& problem, double tol = 1e-10,
                    int max_iterations = 200000);

}  // namespace tolerant
