#include "tolerant/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tolerant {

Pmf::Pmf(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw std::invalid_argument("Pmf: empty domain");
  if ((weights_.array() < 0).any())
    throw std::invalid_argument("Pmf: negative weight");
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kPmfNormalizationTol)
    throw std::invalid_argument("Pmf: weights sum to " + std::to_string(total) +
                                ", not 1");
}

Pmf Pmf::normalized(Vector weights) {
  if (weights.size() == 0) throw std::invalid_argument("Pmf: empty domain");
  if ((weights.array() < 0).any())
    throw std::invalid_argument("Pmf: negative weight");
  const double total = weights.sum();
  if (total <= 0) throw std::invalid_argument("Pmf: zero total mass");
  return Pmf(weights / total);
}

Pmf make_uniform(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("make_uniform: domain size must be positive");
  return Pmf(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Pmf make_zipf(Eigen::Index n, double exponent) {
  if (n < 1) throw std::invalid_argument("make_zipf: domain size must be positive");
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w[i] = std::pow(static_cast<double>(i + 1), -exponent);
  return Pmf::normalized(std::move(w));
}

namespace {

void require_same_domain(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("distance: mismatched domain sizes");
}

}  // namespace

double l1_distance(const Pmf& p, const Pmf& q) {
  require_same_domain(p, q);
  return (p.weights() - q.weights()).cwiseAbs().sum();
}

double l2_distance(const Pmf& p, const Pmf& q) {
  require_same_domain(p, q);
  return (p.weights() - q.weights()).norm();
}

double l2_norm(const Pmf& p) { return p.weights().norm(); }

double quasinorm(const Eigen::Ref<const Vector>& weights, double r) {
  if (r != 0.5 && r != 2.0 / 3.0)
    throw std::invalid_argument("quasinorm: unsupported exponent");
  if ((weights.array() < 0).any())
    throw std::invalid_argument("quasinorm: negative weight");
  const double s = weights.array().pow(r).sum();
  return std::pow(s, 1.0 / r);
}

double quasinorm(const Pmf& p, double r) { return quasinorm(p.weights(), r); }
double quasinorm(const SubPmf& p, double r) { return quasinorm(p.weights, r); }

Eigen::Index support_size(const Eigen::Ref<const Vector>& weights) {
  return (weights.array() > 0).count();
}

Eigen::Index support_size(const Pmf& p) { return support_size(p.weights()); }
Eigen::Index support_size(const SubPmf& p) { return support_size(p.weights); }

SubPmf truncate_mass(const Pmf& q, double x) {
  if (x < 0 || x >= 1) throw std::invalid_argument("truncate_mass: budget must be in [0,1)");
  const Eigen::Index n = q.size();
  IndexList order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return q[a] < q[b];  // ties keep ascending index via stable_sort
  });

  std::vector<bool> removed(n, false);
  double removed_mass = 0.0;
  for (Eigen::Index i : order) {
    if (removed_mass + q[i] > x) break;
    removed_mass += q[i];
    removed[i] = true;
  }

  SubPmf out;
  out.removed_mass = removed_mass;
  Eigen::Index kept = n - static_cast<Eigen::Index>(std::count(removed.begin(), removed.end(), true));
  out.weights.resize(kept);
  out.retained_indices.reserve(kept);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (removed[i]) continue;
    out.weights[j++] = q[i];
    out.retained_indices.push_back(i);
  }
  return out;
}

Pmf paninski_perturbation(Eigen::Index n, double eps, RngStream& rng) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("paninski_perturbation: domain size must be even");
  if (eps < 0 || eps > 1)
    throw std::invalid_argument("paninski_perturbation: eps must be in [0,1]");
  const double base = 1.0 / static_cast<double>(n);
  const double delta = eps / static_cast<double>(n);
  Vector w(n);
  for (Eigen::Index k = 0; k < n / 2; ++k) {
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    w[2 * k] = base + sign * delta;
    w[2 * k + 1] = base - sign * delta;
  }
  return Pmf(std::move(w));
}

}  // namespace tolerant
