#pragma once

#include <Eigen/Dense>

#include "mmddro/kernel.hpp"

namespace mmddro {

// Finite kernel expansion f = sum_i a_i k_sigma(x_i, .). Anchor points are
// rows of `anchors`; duplicates are permitted (the Gram matrix may then be
// singular, but every operation here works with quadratic and trace forms
// that stay well-defined).
struct RkhsFunction {
  Eigen::MatrixXd anchors;
  Eigen::VectorXd coefficients;
  GaussianKernel kernel;

  RkhsFunction(Eigen::MatrixXd anchors_, Eigen::VectorXd coefficients_, GaussianKernel kernel_);
};

double evaluate(const RkhsFunction& f, const Eigen::VectorXd& x);

// Evaluates f at every row of X.
Eigen::VectorXd evaluate_rows(const RkhsFunction& f, const Eigen::MatrixXd& X);

// <f, g> in H_sigma; requires matching bandwidths.
double inner_product(const RkhsFunction& f, const RkhsFunction& g);

// |f|_sigma = sqrt(a^T K_sigma a). Quadratic forms below -1e-10 raise
// NumericalError; tiny negatives from roundoff clamp to 0.
double norm(const RkhsFunction& f);

RkhsFunction scale(const RkhsFunction& f, double c);

// f + g as one expansion: coefficients add when the anchor sets are identical,
// otherwise the anchor lists are concatenated.
RkhsFunction add(const RkhsFunction& f, const RkhsFunction& g);

// |fg|_{sigma/sqrt2} = sqrt(trace((D_a Kt)^2 (D_b Kt)^2)) with Kt the anchor
// Gram matrix at bandwidth sigma*sqrt2. When f and g carry different anchor
// sets they are first merged by concatenation with zero-padded coefficients.
double product_norm(const RkhsFunction& f, const RkhsFunction& g);

// |f^2|^2_{sigma/sqrt2} = trace((D Kt)^4), the quantity the product-norm
// regularizer differentiates. Equals product_norm(f, f)^2.
double squared_norm_trace(const RkhsFunction& f);

// d/da trace((D Kt)^4); component i is 4 [Kt (D Kt)^3]_ii.
Eigen::VectorXd squared_norm_trace_gradient(const RkhsFunction& f);

// Test utility for trace(XY) <= trace(X) trace(Y) on symmetric PSD matrices.
bool trace_submultiplicative_check(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

}  // namespace mmddro
