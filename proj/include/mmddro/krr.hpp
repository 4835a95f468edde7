#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mmddro/kernel.hpp"
#include "mmddro/mmd.hpp"
#include "mmddro/rkhs.hpp"

namespace mmddro {

struct RegressionProblem {
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;
  GaussianKernel kernel;

  RegressionProblem(Eigen::MatrixXd x, Eigen::VectorXd y, GaussianKernel k);
};

enum class RegularizerKind { ClassicSquaredNorm, ProductNorm };

// Gradient-descent settings for fit_product_norm. The defaults are the
// recorded reference configuration; sweeps may loosen tol/max_iters.
struct GdOptions {
  int max_iters = 10000;
  double grad_tol = 1e-7;       // infinity norm of the objective gradient
  double initial_step = 1.0;    // backtracking restarts here every iteration
  double shrink = 0.5;
  double armijo_c = 1e-4;
  double mu_floor = 1e-12;      // smoothing inside sqrt(trace + mu), keeps a = 0 differentiable
  bool record_objective_trace = false;
};

struct FitReport {
  RkhsFunction model;  // anchors are the training points
  RegularizerKind regularizer;
  double lambda;
  double final_objective;
  int iterations;
  bool converged;
  std::vector<double> objective_trace;  // filled when record_objective_trace is set
};

// Classic kernel ridge: minimizes (1/n) sum (f(x_i) - y_i)^2 + lambda |f|_sigma^2,
// solved in closed form via (K + n lambda I) a = y.
FitReport fit_classic(const RegressionProblem& problem, double lambda);

// Product-norm regularized regression: minimizes
//   (1/n) sum (f(x_i) - y_i)^2 + lambda sqrt(trace((D Kt)^4) + mu_floor)
// over expansion coefficients by full-batch gradient descent with Armijo
// backtracking, warm-started from the classic ridge solution at the same
// lambda. Kt is the training Gram matrix at bandwidth sigma*sqrt2.
FitReport fit_product_norm(const RegressionProblem& problem, double lambda,
                           const GdOptions& opts = {});

// Squared-error risk of `model` against a target function under Q.
double risk(const RkhsFunction& model, const RkhsFunction& target, const WeightedSample& Q);

// Mean squared residual of `model` on labeled pairs (rows of X, entries of y).
double risk(const RkhsFunction& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace mmddro
