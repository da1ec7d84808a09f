#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tolerant/instance_optimal.hpp"
#include "tolerant/lower_bound.hpp"
#include "tolerant/pmf.hpp"
#include "tolerant/tester.hpp"

namespace tolerant {

// Wilson score interval; behaves correctly at 0 or k = trials observed.
struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

WilsonInterval wilson_interval(int successes, int trials, double z = 1.959963984540054);

enum class TesterKind { kIdentity, kEquivalence, kInstanceOptimal };
enum class InstanceFamily { kPaninski, kEmbedded, kPriorPair, kCustom };

struct ExperimentSpec {
  Eigen::Index n = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  TesterKind tester = TesterKind::kIdentity;
  InstanceFamily family = InstanceFamily::kPaninski;
  std::vector<double> m_grid;
  int trials = 100;
  std::uint64_t seed = 0;
  double c = kDefaultThresholdC;
  double delta = 0.2;  // per-test failure target (k = 1 at the base guarantee)

  std::optional<Pmf> custom_q;
  std::optional<Pmf> custom_p_close;
  std::optional<Pmf> custom_p_far;
  std::optional<MomentMatchedPair> prior;

  void validate() const;
};

struct TrialRecord {
  double m = 0.0;
  bool ground_truth_far = false;
  Verdict verdict;
  double realized_l1 = 0.0;
  bool label_consistent = true;
};

struct ErrorRateRow {
  double m = 0.0;
  double close_error = 0.0;
  double far_error = 0.0;
  WilsonInterval close_ci;
  WilsonInterval far_ci;
  int trials = 0;
};

// Seeded per-m error rates for the spec's instance family and tester kind.
std::vector<ErrorRateRow> estimate_error_rate(const ExperimentSpec& spec);
std::vector<ErrorRateRow> estimate_error_rate(const ExperimentSpec& spec,
                                              std::vector<TrialRecord>* records);

struct CalibrationResult {
  double c = 0.0;       // midpoint of the feasible interval
  double c_lo = 0.0;    // smallest c with false-Far <= 1/5
  double c_hi = 0.0;    // largest c with false-Close <= 1/5
  double close_error = 0.0;  // achieved rates at the midpoint
  double far_error = 0.0;
};

// Selects the threshold constant on the reference pair {Unif_n vs
// Paninski(n, eps2)} at m = 8 sqrt(n) / eps2^2, run through the identity
// pipeline. The feasible-c interval comes from the order statistics of the
// collected Z samples (both error curves are step functions of c), and the
// midpoint is returned.
CalibrationResult calibrate_constant(Eigen::Index n, double eps2, int trials,
                                     RngStream& rng);

struct SampleComplexityResult {
  double m_star = 0.0;
  bool capped = false;  // search hit the m <= 64 n budget cap
};

// Doubling then bisection on m until both Wilson-95 upper bounds drop to the
// target error.
SampleComplexityResult find_sample_complexity(const ExperimentSpec& spec,
                                              double target_error);

// Analytic classifier: which of sqrt(n)/eps2^2, n rho, n rho^2 dominates the
// sample-complexity expression (rho = eps1/eps2^2).
std::string dominant_term_label(Eigen::Index n, double eps1, double eps2);

struct PhaseDiagramRow {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double m_star = 0.0;
  bool capped = false;
  std::string label;
};

std::vector<PhaseDiagramRow> phase_diagram(Eigen::Index n,
                                           const std::vector<double>& eps1_grid,
                                           const std::vector<double>& eps2_grid,
                                           int trials, std::uint64_t seed);

// Theorem-range advisory: the analysis requires eps1 below a constant times
// eps2; warn (without blocking) past eps2 / 8.
bool eps1_within_theorem_range(double eps1, double eps2);

}  // namespace tolerant
