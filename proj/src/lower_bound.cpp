#include "tolerant/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "tolerant/simplex.hpp"

namespace tolerant {

namespace {

void fill_ab(LbParams& p) {
  const double nd = static_cast<double>(p.n);
  p.a = nd * (p.big_m + p.kappa) / p.m - 1.0 - p.eps1;
  p.b = nd * (p.big_m - p.kappa) / p.m + 1.0 - p.eps1;
}

int default_degree(Eigen::Index n) {
  return static_cast<int>(
      std::ceil(4.0 * std::exp(2.0) * std::log(static_cast<double>(n))));
}

}  // namespace

LbParams lb_parameters(Eigen::Index n, double m, double eps1,
                       std::optional<int> l_override) {
  if (n < 2 || m <= 0) throw std::invalid_argument("lb_parameters: need n >= 2, m > 0");
  const double nd = static_cast<double>(n);
  const double nlogn = nd * std::log(nd);

  LbParams p;
  p.n = n;
  p.m = m;
  p.eps1 = eps1;
  p.degree = l_override.value_or(default_degree(n));

  const bool low = m < nlogn / 4.0;
  const bool high = m > 4.0 * nlogn;
  // Intermediate budgets pick the closer regime by the ratio m / (n ln n).
  const bool use_low = low || (!high && m < nlogn);
  if (use_low) {
    p.regime = 1;
    p.kappa = std::log(nd);
    p.big_m = p.kappa;
  } else {
    p.regime = 2;
    p.kappa = m / nd;
    p.big_m = std::sqrt(m * std::log(nd) / nd);
  }
  p.flagged_intermediate = !low && !high;
  fill_ab(p);
  return p;
}

LbParams lb_params_from_support(Eigen::Index n, double m, double kappa,
                                double big_m, double eps1, int degree) {
  if (n < 2 || m <= 0) throw std::invalid_argument("lb_params_from_support: need n >= 2, m > 0");
  if (!(kappa >= big_m) || big_m < 0)
    throw std::invalid_argument("lb_params_from_support: requires kappa >= M >= 0");
  LbParams p;
  p.n = n;
  p.m = m;
  p.kappa = kappa;
  p.big_m = big_m;
  p.eps1 = eps1;
  p.degree = degree;
  p.regime = 0;
  fill_ab(p);
  return p;
}

Vector MomentProblem::grid() const {
  if (grid_points < 2) throw std::invalid_argument("MomentProblem: need at least 2 grid points");
  if (a + b <= 0) throw std::invalid_argument("MomentProblem: empty support interval");
  const double delta = (a + b) / static_cast<double>(grid_points - 1);
  Vector g(grid_points);
  for (int k = 0; k < grid_points; ++k) g[k] = -b + delta * k;
  g[grid_points - 1] = a;  // pin the endpoint exactly
  Eigen::Index nearest = 0;
  g.cwiseAbs().minCoeff(&nearest);
  if (nearest > 0 && nearest < grid_points - 1) g[nearest] = 0.0;
  return g;
}

MomentProblem moment_problem(const LbParams& params, int grid_points) {
  MomentProblem prob;
  prob.a = params.a;
  prob.b = params.b;
  prob.eps1 = params.eps1;
  prob.degree = params.degree;
  prob.grid_points = grid_points;
  return prob;
}

MomentMatchedPair solve_moment_lp(const MomentProblem& problem,
                                  const LbParams& context) {
  if (problem.eps1 <= 0)
    throw std::invalid_argument("solve_moment_lp: eps1 must be positive");
  const Vector grid = problem.grid();
  const Eigen::Index g = grid.size();
  const int degree = problem.degree;
  const double scale = std::max(problem.a, problem.b);

  // Variables: [w (g), w' (g)].
  const Eigen::Index cols = 2 * g;
  Eigen::MatrixXd a_eq(degree + 2, cols);
  Eigen::VectorXd b_eq = Eigen::VectorXd::Zero(degree + 2);
  a_eq.setZero();
  a_eq.row(0).head(g).setOnes();   // sum w = 1
  a_eq.row(1).tail(g).setOnes();   // sum w' = 1
  b_eq[0] = 1.0;
  b_eq[1] = 1.0;
  for (int k = 1; k <= degree; ++k) {
    for (Eigen::Index j = 0; j < g; ++j) {
      const double t = std::pow(grid[j] / scale, k);
      a_eq(k + 1, j) = t;
      a_eq(k + 1, g + j) = -t;
    }
  }

  Eigen::MatrixXd a_ub(1, cols);
  a_ub.setZero();
  a_ub.row(0).head(g) = grid.cwiseAbs().transpose() / scale;
  Eigen::VectorXd b_ub(1);
  b_ub[0] = problem.eps1 / (2.0 * scale);

  Eigen::VectorXd objective = Eigen::VectorXd::Zero(cols);
  objective.tail(g) = -grid.cwiseAbs();  // maximize E|Y'|

  LpProblem lp{std::move(a_eq), std::move(b_eq), std::move(a_ub), std::move(b_ub),
               std::move(objective)};
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible)
    throw std::runtime_error("solve_moment_lp: internal error, LP reported infeasible");
  if (sol.status != LpStatus::kOptimal)
    throw std::runtime_error("solve_moment_lp: LP did not converge");

  MomentMatchedPair pair;
  pair.support = grid;
  pair.w = sol.x.head(g).cwiseMax(0.0);
  pair.w_prime = sol.x.tail(g).cwiseMax(0.0);
  pair.objective = -sol.objective;
  pair.eps1_problem = problem.eps1;
  pair.mean_y = pair.w.dot(grid);
  pair.eps1_effective = pair.w.dot((grid.array() - pair.mean_y).abs().matrix());
  pair.eps2_effective = pair.w_prime.dot((grid.array() - pair.mean_y).abs().matrix());

  for (int k = 1; k <= degree; ++k) {
    const Vector powers = (grid.array() / scale).pow(k).matrix();
    pair.max_moment_residual = std::max(
        pair.max_moment_residual, std::abs(powers.dot(pair.w - pair.w_prime)));
  }

  pair.n = context.n;
  pair.m = context.m;
  pair.kappa = context.kappa;
  pair.big_m = context.big_m;
  pair.degree = degree;
  pair.u_lo = (context.kappa - context.big_m) / context.m;
  pair.u_hi = (context.kappa + context.big_m) / context.m;
  pair.support_u =
      ((grid.array() - pair.mean_y + 1.0) / static_cast<double>(context.n)).matrix();
  return pair;
}

double mm_tv_bound(double kappa, double big_m, int degree) {
  if (big_m < 0 || kappa < big_m)
    throw std::invalid_argument("mm_tv_bound: requires kappa >= M >= 0");
  if (big_m == 0) return 0.0;
  const double base = std::exp(1.0) * big_m /
                      std::sqrt(kappa * static_cast<double>(degree + 1));
  return 2.0 * std::pow(base, degree + 1);
}

namespace {

// log pmf of Poisson(rate) at k, stable for large rates.
double poisson_pmf(double rate, std::int64_t k) {
  if (rate == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(rate) - rate - std::lgamma(kd + 1.0));
}

// P[Poi(rate) > k_max] via the complement of the partial sum.
double poisson_tail(double rate, std::int64_t k_max) {
  if (rate == 0.0) return 0.0;
  double cdf = 0.0;
  double term = std::exp(-rate);
  for (std::int64_t k = 0; k <= k_max; ++k) {
    cdf += term;
    term *= rate / static_cast<double>(k + 1);
  }
  return std::max(0.0, 1.0 - cdf);
}

}  // namespace

double poisson_mixture_tv(const MomentMatchedPair& pair, double m,
                          double tail_eps) {
  if (tail_eps <= 0) throw std::invalid_argument("poisson_mixture_tv: tail_eps must be positive");
  const Vector rates = (m * pair.support_u.array()).matrix();
  if ((rates.array() < 0).any())
    throw std::invalid_argument("poisson_mixture_tv: negative Poisson rate");
  const double max_rate = rates.maxCoeff();

  // Truncation point: mean + 20 sqrt(mean) + 50, then verified directly and
  // grown if any component tail still exceeds tail_eps.
  std::int64_t k_max =
      static_cast<std::int64_t>(std::ceil(max_rate + 20.0 * std::sqrt(max_rate) + 50.0));
  while (poisson_tail(max_rate, k_max) >= tail_eps) k_max += k_max / 2 + 10;

  double tv = 0.0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    double mix = 0.0, mix_prime = 0.0;
    for (Eigen::Index j = 0; j < rates.size(); ++j) {
      if (pair.w[j] == 0 && pair.w_prime[j] == 0) continue;
      const double p = poisson_pmf(rates[j], k);
      mix += pair.w[j] * p;
      mix_prime += pair.w_prime[j] * p;
    }
    tv += std::abs(mix - mix_prime);
  }
  return 0.5 * tv + tail_eps;
}

PriorDraw build_prior_instance(const MomentMatchedPair& pair, Eigen::Index n,
                               PriorSide side, RngStream& rng) {
  const Vector& weights = side == PriorSide::kClose ? pair.w : pair.w_prime;
  // Basic LP solutions are sparse; draw over the nonzero support only.
  std::vector<double> support, mass;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0) {
      support.push_back(pair.support_u[j]);
      mass.push_back(weights[j]);
    }
  }
  std::discrete_distribution<int> dist(mass.begin(), mass.end());

  const double inv_n = 1.0 / static_cast<double>(n);
  Vector u(n);
  double sum = 0.0, dev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = support[static_cast<std::size_t>(dist(rng))];
    u[i] = v;
    sum += v;
    dev += std::abs(v - inv_n);
  }
  if (sum <= 0) throw std::runtime_error("build_prior_instance: degenerate zero draw");

  PriorDraw draw{Pmf::normalized(u), false, sum, dev, 0.0};
  draw.l1_to_uniform = l1_distance(draw.pmf, make_uniform(n));
  if (side == PriorSide::kClose) {
    draw.event_held =
        std::abs(sum - 1.0) <= 0.1 && dev <= 10.0 * pair.eps1_problem;
  } else {
    draw.event_held = std::abs(sum - 1.0) <= pair.eps2_effective / 10.0 &&
                      dev >= 0.9 * pair.eps2_effective;
  }
  return draw;
}

double dual_bound_value(double eps1, double a, double b, int degree) {
  if (degree < 1) throw std::invalid_argument("dual_bound_value: degree must be >= 1");
  if (!(eps1 > 0) || eps1 > std::min(a, b) / 4.0)
    throw std::out_of_range(
        "dual_bound_value: requires 0 < eps1 <= min(A/4, B/4)");
  const double l = static_cast<double>(degree);
  const double term1 = std::sqrt(eps1 * (a + b) / (32.0 * l * l));
  const double term2 = std::sqrt(eps1 * std::sqrt(a * b) / (16.0 * l));
  return std::max(term1, term2) / 12.0;
}

}  // namespace tolerant
