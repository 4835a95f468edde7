#pragma once

#include <Eigen/Dense>

namespace mmddro {

// Solves K X = B for symmetric positive semidefinite K via LDLT, escalating a
// diagonal jitter of {0, 1e-12, 1e-10} times the mean diagonal entry until the
// factorization produces a finite, backward-stable solution. Throws
// NumericalError once the ladder is exhausted.
Eigen::MatrixXd solve_psd_jitter(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B);

// sqrt of a quadratic form that is nonnegative in exact arithmetic: values in
// [-1e-10, 0] clamp to 0, anything below -1e-10 throws NumericalError with
// `what` naming the quantity.
double sqrt_clamped(double q, const char* what);

}  // namespace mmddro
