#pragma once

#include <optional>

#include "tolerant/pmf.hpp"
#include "tolerant/rng.hpp"

namespace tolerant {

// Parameters of the moment-matching construction. A and B are the endpoints
// of the shifted support [-B, A]:
//   A = n (M + kappa) / m - 1 - eps1,   B = n (M - kappa) / m + 1 - eps1.
struct LbParams {
  Eigen::Index n = 0;
  double m = 0.0;
  double kappa = 0.0;
  double big_m = 0.0;  // M
  int degree = 0;      // L
  double eps1 = 0.0;
  double a = 0.0;  // A
  double b = 0.0;  // B
  int regime = 0;  // 1: m small, 2: m large
  bool flagged_intermediate = false;
};

// Regime-based parameter choice:
//   m < n ln(n)/4:  kappa = M = ln n
//   m > 4 n ln(n):  kappa = m/n, M = sqrt(m ln(n) / n)
// with L = ceil(4 e^2 ln n) unless overridden. Intermediate m extends the
// closer regime (by the ratio m / (n ln n)) and flags the output.
LbParams lb_parameters(Eigen::Index n, double m, double eps1,
                       std::optional<int> l_override = std::nullopt);

// Explicit construction for desk-scale studies; A and B derive from the
// supplied support parameters. Requires kappa >= M >= 0.
LbParams lb_params_from_support(Eigen::Index n, double m, double kappa,
                                double big_m, double eps1, int degree);

// Finite-grid relaxation of the moment LP over [-B, A].
struct MomentProblem {
  double a = 0.0;       // A
  double b = 0.0;       // B
  double eps1 = 0.0;    // E|Y| budget is eps1 / 2
  int degree = 0;       // L matched moments
  int grid_points = 401;

  // -B + k delta with delta = (A+B)/(grid_points-1); the point nearest the
  // origin is snapped to exactly 0 so the zero point mass stays feasible for
  // every eps1.
  Vector grid() const;
};

MomentProblem moment_problem(const LbParams& params, int grid_points = 401);

// Solved pair (Y, Y') on the grid plus the derived priors U = (Y - EY + 1)/n
// and U' with matched moments, E[U] = E[U'] = 1/n.
struct MomentMatchedPair {
  Vector support;   // grid values in Y-space
  Vector w;         // weights of Y
  Vector w_prime;   // weights of Y'
  double objective = 0.0;        // E|Y'|
  double mean_y = 0.0;           // E[Y] = E[Y']
  double eps1_problem = 0.0;     // LP budget: E|Y| <= eps1/2
  double eps1_effective = 0.0;   // E|Y - EY|  (close prior distance scale)
  double eps2_effective = 0.0;   // E|Y' - EY| (far prior distance scale)
  double max_moment_residual = 0.0;  // max_k |E Y^k - E Y'^k| / max(A,B)^k

  Vector support_u;  // (support - EY + 1) / n
  Eigen::Index n = 0;
  double m = 0.0;
  double kappa = 0.0;
  double big_m = 0.0;
  int degree = 0;
  double u_lo = 0.0;  // (kappa - M)/m
  double u_hi = 0.0;  // (kappa + M)/m
};

// Maximizes E|Y'| subject to E|Y| <= eps1/2, matched moments k = 1..L, both
// weight vectors normalized and supported on the grid.
MomentMatchedPair solve_moment_lp(const MomentProblem& problem,
                                  const LbParams& context);

// Lemma-style moment-matching TV bound 2 (e M / sqrt(kappa (L+1)))^(L+1);
// requires kappa >= M >= 0.
double mm_tv_bound(double kappa, double big_m, int degree);

// Certified upper bound on TV(E Poi(m U), E Poi(m U')): truncated mixture TV
// plus the verified tail allowance.
double poisson_mixture_tv(const MomentMatchedPair& pair, double m,
                          double tail_eps);

enum class PriorSide { kClose, kFar };

struct PriorDraw {
  Pmf pmf;                    // l1-normalized draw D
  bool event_held = false;    // E^(1) (close) or E^(2) (far)
  double sum_u = 0.0;         // sum of raw coordinates
  double deviation_sum = 0.0; // sum |U_i - 1/n|
  double l1_to_uniform = 0.0; // realized ||D - Unif_n||_1
};

// Draws n i.i.d. coordinates from U (close) or U' (far) and l1-normalizes.
// Events are reported, never rejection-sampled.
PriorDraw build_prior_instance(const MomentMatchedPair& pair, Eigen::Index n,
                               PriorSide side, RngStream& rng);

// Closed form from the dual analysis:
//   (1/12) max{ sqrt(eps1 (A+B) / (32 L^2)), sqrt(eps1 sqrt(AB) / (16 L)) }.
// Requires 0 < eps1 <= min(A/4, B/4).
double dual_bound_value(double eps1, double a, double b, int degree);

}  // namespace tolerant
