#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "tolerant/rng.hpp"

namespace tolerant {

using Vector = Eigen::VectorXd;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IndexList = std::vector<Eigen::Index>;

inline constexpr double kPmfNormalizationTol = 1e-9;

// Probability mass function over [n]: nonnegative weights summing to one
// (within kPmfNormalizationTol). Construction validates; inputs are never
// silently renormalized.
class Pmf {
 public:
  explicit Pmf(Vector weights);

  // Renormalizes an arbitrary nonnegative weight vector on explicit request.
  static Pmf normalized(Vector weights);

  Eigen::Index size() const { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }
  const Vector& weights() const { return weights_; }

 private:
  Vector weights_;
};

// Sub-distribution left after mass truncation: weights of the retained
// symbols (summing to 1 - removed_mass) plus their original indices.
struct SubPmf {
  Vector weights;
  IndexList retained_indices;
  double removed_mass = 0.0;
};

Pmf make_uniform(Eigen::Index n);

// Power-law reference: weight of symbol i proportional to 1/(i+1)^exponent.
Pmf make_zipf(Eigen::Index n, double exponent);

// Full l1 norm of the difference, i.e. twice the total variation distance.
double l1_distance(const Pmf& p, const Pmf& q);

double l2_distance(const Pmf& p, const Pmf& q);
double l2_norm(const Pmf& p);

// r-quasinorm (sum w_i^r)^(1/r) for r in {2/3, 1/2}.
double quasinorm(const Eigen::Ref<const Vector>& weights, double r);
double quasinorm(const Pmf& p, double r);
double quasinorm(const SubPmf& p, double r);

// Number of strictly positive weights.
Eigen::Index support_size(const Eigen::Ref<const Vector>& weights);
Eigen::Index support_size(const Pmf& p);
Eigen::Index support_size(const SubPmf& p);

// Removes symbols in ascending weight order (ties by ascending index) while
// the cumulative removed mass stays <= x. Requires 0 <= x < 1.
SubPmf truncate_mass(const Pmf& q, double x);

// Perturbed-uniform far instance: pairs (2k, 2k+1) get (1 +/- eps)/n with a
// random sign per pair, so the l1 distance to Unif_n equals eps exactly.
Pmf paninski_perturbation(Eigen::Index n, double eps, RngStream& rng);

}  // namespace tolerant
