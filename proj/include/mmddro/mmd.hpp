#pragma once

#include <Eigen/Dense>

#include "mmddro/kernel.hpp"
#include "mmddro/rkhs.hpp"

namespace mmddro {

// Points with probability weights. Weights are validated (>= -1e-12) and
// renormalized to sum to 1 on construction; empirical samples use 1/n.
struct WeightedSample {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  WeightedSample(Eigen::MatrixXd points_, Eigen::VectorXd weights_);
  static WeightedSample uniform(Eigen::MatrixXd points_);
};

// Concentration radius eps = 2 sqrt(M/n) + sqrt(2 ln(1/delta) / n) for an
// n-sample empirical estimate at confidence 1 - delta, kernel bound M.
struct Radius {
  double epsilon;
  int n;
  double delta;
  double kernel_bound;
};

// Biased V-statistic MMD: exactly the RKHS norm of the difference of the two
// weighted mean embeddings, sqrt(w'Kpp w - 2 w'Kpq u + u'Kqq u).
double mmd(const GaussianKernel& k, const WeightedSample& P, const WeightedSample& Q);

Radius radius(int n, double delta, double kernel_bound);

// mu_P = sum_i w_i k(x_i, .) as an expansion.
RkhsFunction mean_embedding(const GaussianKernel& k, const WeightedSample& P);

}  // namespace mmddro
