#include "tolerant/simplex.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace tolerant {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Standardized {
  MatrixXd a;    // rows x cols, b >= 0
  VectorXd b;
  VectorXd c;
  Index structural_cols;  // original variables + slacks
};

Standardized standardize(const LpProblem& p) {
  const Index n = p.objective.size();
  const Index me = p.a_eq.rows();
  const Index mu = p.a_ub.rows();
  if ((me > 0 && p.a_eq.cols() != n) || (mu > 0 && p.a_ub.cols() != n))
    throw std::invalid_argument("solve_lp: constraint matrix width mismatch");
  if (p.b_eq.size() != me || p.b_ub.size() != mu)
    throw std::invalid_argument("solve_lp: rhs size mismatch");

  Standardized s;
  const Index rows = me + mu;
  const Index cols = n + mu;  // one slack per inequality
  s.a = MatrixXd::Zero(rows, cols);
  s.b = VectorXd::Zero(rows);
  s.c = VectorXd::Zero(cols);
  s.c.head(n) = p.objective;
  s.structural_cols = cols;

  if (me > 0) {
    s.a.topLeftCorner(me, n) = p.a_eq;
    s.b.head(me) = p.b_eq;
  }
  if (mu > 0) {
    s.a.block(me, 0, mu, n) = p.a_ub;
    s.a.block(me, n, mu, mu).setIdentity();
    s.b.tail(mu) = p.b_ub;
  }
  // Flip rows so b >= 0 (slack signs flip with them).
  for (Index r = 0; r < rows; ++r) {
    if (s.b[r] < 0) {
      s.a.row(r) = -s.a.row(r);
      s.b[r] = -s.b[r];
    }
  }
  return s;
}

// One simplex phase over columns [0, usable_cols) of A with costs c, starting
// from the given basis. Dantzig pricing, switching to Bland's rule after a
// stretch of stalled (degenerate) pivots to rule out cycling. Returns false
// on iteration limit.
bool run_phase(const MatrixXd& a, const VectorXd& b, const VectorXd& c,
               std::vector<Index>& basis, Index usable_cols, double tol,
               int& iterations_left, bool& unbounded) {
  const Index rows = a.rows();
  unbounded = false;

  double last_objective = std::numeric_limits<double>::infinity();
  int stalled = 0;
  bool bland = false;
  std::vector<char> is_basic(static_cast<std::size_t>(a.cols()), 0);
  for (Index r = 0; r < rows; ++r) is_basic[static_cast<std::size_t>(basis[r])] = 1;

  while (iterations_left-- > 0) {
    MatrixXd basis_mat(rows, rows);
    for (Index r = 0; r < rows; ++r) basis_mat.col(r) = a.col(basis[r]);
    Eigen::PartialPivLU<MatrixXd> lu(basis_mat);

    const VectorXd xb = lu.solve(b);
    VectorXd cb(rows);
    for (Index r = 0; r < rows; ++r) cb[r] = c[basis[r]];
    const VectorXd y = lu.transpose().solve(cb);

    const double objective = cb.dot(xb);
    if (objective < last_objective - 1e-13) {
      stalled = 0;
      last_objective = objective;
    } else if (++stalled > 64) {
      bland = true;
    }

    const VectorXd reduced =
        c.head(usable_cols) - a.leftCols(usable_cols).transpose() * y;
    Index entering = -1;
    double most_negative = -tol;
    for (Index j = 0; j < usable_cols; ++j) {
      if (is_basic[static_cast<std::size_t>(j)]) continue;
      if (reduced[j] < most_negative) {
        entering = j;
        if (bland) break;  // lowest eligible index
        most_negative = reduced[j];
      }
    }
    if (entering < 0) return true;  // optimal

    const VectorXd direction = lu.solve(a.col(entering));
    Index leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < rows; ++r) {
      if (direction[r] > tol) {
        const double ratio = std::max(xb[r], 0.0) / direction[r];
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (leaving < 0 || basis[r] < basis[leaving]))) {
          best_ratio = ratio;
          leaving = r;
        }
      }
    }
    if (leaving < 0) {
      unbounded = true;
      return true;
    }
    is_basic[static_cast<std::size_t>(basis[leaving])] = 0;
    is_basic[static_cast<std::size_t>(entering)] = 1;
    basis[leaving] = entering;
  }
  return false;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, double tol, int max_iterations) {
  Standardized s = standardize(problem);
  const Index rows = s.a.rows();
  const Index cols = s.structural_cols;

  LpSolution out;
  if (rows == 0) {
    // Only bound constraints: minimum at x = 0 unless some cost is negative.
    if ((problem.objective.array() < -tol).any()) {
      out.status = LpStatus::kUnbounded;
      return out;
    }
    out.status = LpStatus::kOptimal;
    out.x = VectorXd::Zero(problem.objective.size());
    out.objective = 0.0;
    return out;
  }

  // Phase 1: artificial columns with unit costs.
  MatrixXd a1(rows, cols + rows);
  a1.leftCols(cols) = s.a;
  a1.rightCols(rows).setIdentity();
  VectorXd c1 = VectorXd::Zero(cols + rows);
  c1.tail(rows).setOnes();

  std::vector<Index> basis(rows);
  for (Index r = 0; r < rows; ++r) basis[r] = cols + r;

  int iterations_left = max_iterations;
  bool unbounded = false;
  if (!run_phase(a1, s.b, c1, basis, cols + rows, tol, iterations_left, unbounded)) {
    out.status = LpStatus::kIterationLimit;
    return out;
  }

  {
    MatrixXd basis_mat(rows, rows);
    for (Index r = 0; r < rows; ++r) basis_mat.col(r) = a1.col(basis[r]);
    const VectorXd xb = Eigen::PartialPivLU<MatrixXd>(basis_mat).solve(s.b);
    double infeasibility = 0.0;
    for (Index r = 0; r < rows; ++r)
      if (basis[r] >= cols) infeasibility += xb[r];
    if (infeasibility > 1e-7) {
      out.status = LpStatus::kInfeasible;
      return out;
    }
  }

  // Pivot any artificial still in the basis (at value zero) onto a structural
  // column; drop its row's influence if none is available.
  for (Index r = 0; r < rows; ++r) {
    if (basis[r] < cols) continue;
    MatrixXd basis_mat(rows, rows);
    for (Index k = 0; k < rows; ++k) basis_mat.col(k) = a1.col(basis[k]);
    Eigen::PartialPivLU<MatrixXd> lu(basis_mat);
    bool replaced = false;
    for (Index j = 0; j < cols && !replaced; ++j) {
      bool basic = false;
      for (Index k = 0; k < rows; ++k)
        if (basis[k] == j) { basic = true; break; }
      if (basic) continue;
      const VectorXd d = lu.solve(a1.col(j));
      if (std::abs(d[r]) > 1e-8) {
        basis[r] = j;
        replaced = true;
      }
    }
    // A remaining artificial marks a redundant row; it stays basic at zero
    // and never re-enters with positive value.
  }

  // Phase 2 over structural columns only (artificials keep +inf-like cost by
  // exclusion from pricing; they can only stay basic at value zero).
  VectorXd c2 = VectorXd::Zero(cols + rows);
  c2.head(cols) = s.c;
  c2.tail(rows).setConstant(0.0);
  if (!run_phase(a1, s.b, c2, basis, cols, tol, iterations_left, unbounded)) {
    out.status = LpStatus::kIterationLimit;
    return out;
  }
  if (unbounded) {
    out.status = LpStatus::kUnbounded;
    return out;
  }

  // Final basic solution from a fresh factorization of the original data.
  MatrixXd basis_mat(rows, rows);
  for (Index r = 0; r < rows; ++r) basis_mat.col(r) = a1.col(basis[r]);
  const VectorXd xb = Eigen::PartialPivLU<MatrixXd>(basis_mat).solve(s.b);

  VectorXd full = VectorXd::Zero(cols + rows);
  for (Index r = 0; r < rows; ++r) full[basis[r]] = xb[r];
  out.x = full.head(problem.objective.size());
  out.objective = problem.objective.dot(out.x);
  out.status = LpStatus::kOptimal;
  return out;
}

}  // namespace tolerant
