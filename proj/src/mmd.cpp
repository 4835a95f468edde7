#include "mmddro/mmd.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mmddro/errors.hpp"
#include "mmddro/linalg.hpp"

namespace mmddro {

WeightedSample::WeightedSample(Eigen::MatrixXd points_, Eigen::VectorXd weights_)
    : points(std::move(points_)), weights(std::move(weights_)) {
  if (points.rows() == 0) throw std::invalid_argument("WeightedSample: empty point set");
  if (points.rows() != weights.size())
    throw std::invalid_argument("WeightedSample: point and weight counts differ");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < -1e-12)
      throw std::invalid_argument("WeightedSample: weights must be nonnegative");
    if (weights[i] < 0.0) weights[i] = 0.0;
    sum += weights[i];
  }
  if (sum <= 0.0) throw std::invalid_argument("WeightedSample: weights sum to zero");
  weights /= sum;
}

WeightedSample WeightedSample::uniform(Eigen::MatrixXd points_) {
  const Eigen::Index n = points_.rows();
  return WeightedSample(std::move(points_),
                        Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

double mmd(const GaussianKernel& k, const WeightedSample& P, const WeightedSample& Q) {
  if (P.points.cols() != Q.points.cols())
    throw std::invalid_argument("mmd: point dimensions differ");
  const Eigen::MatrixXd Kpp = matrix(k, P.points).entries;
  const Eigen::MatrixXd Kqq = matrix(k, Q.points).entries;
  const Eigen::MatrixXd Kpq = cross_matrix(k, P.points, Q.points);
  const double radicand = P.weights.dot(Kpp * P.weights) -
                          2.0 * P.weights.dot(Kpq * Q.weights) +
                          Q.weights.dot(Kqq * Q.weights);
  return sqrt_clamped(radicand, "mmd");
}

Radius radius(int n, double delta, double kernel_bound) {
  if (n < 1) throw std::invalid_argument("radius: sample count must be >= 1");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("radius: delta must lie strictly in (0, 1)");
  if (!std::isfinite(kernel_bound) || kernel_bound <= 0.0)
    throw std::invalid_argument("radius: kernel bound must be positive");
  const double dn = static_cast<double>(n);
  const double eps = 2.0 * std::sqrt(kernel_bound / dn) + std::sqrt(2.0 * std::log(1.0 / delta) / dn);
  return Radius{eps, n, delta, kernel_bound};
}

RkhsFunction mean_embedding(const GaussianKernel& k, const WeightedSample& P) {
  return RkhsFunction(P.points, P.weights, k);
}

}  // namespace mmddro
