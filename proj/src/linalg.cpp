#include "mmddro/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mmddro/errors.hpp"

namespace mmddro {

Eigen::MatrixXd solve_psd_jitter(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B) {
  if (K.rows() != K.cols()) throw std::invalid_argument("solve_psd_jitter: matrix not square");
  if (K.rows() != B.rows()) throw std::invalid_argument("solve_psd_jitter: size mismatch");
  const double mean_diag = K.trace() / static_cast<double>(K.rows());
  const double norm_b = B.cwiseAbs().maxCoeff();
  static constexpr double kJitterScales[] = {0.0, 1e-12, 1e-10};
  for (double scale : kJitterScales) {
    Eigen::MatrixXd Kj = K;
    if (scale > 0.0) Kj.diagonal().array() += scale * mean_diag;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Kj);
    if (ldlt.info() != Eigen::Success) continue;
    Eigen::MatrixXd X = ldlt.solve(B);
    if (!X.allFinite()) continue;
    // Backward-stability check: catches factorization breakdown on (near-)
    // singular input without rejecting merely ill-conditioned systems.
    const double resid = (Kj * X - B).cwiseAbs().maxCoeff();
    const double scale_ref =
        Kj.cwiseAbs().maxCoeff() * X.cwiseAbs().maxCoeff() + norm_b + 1.0;
    if (resid <= 1e-8 * scale_ref) return X;
  }
  throw NumericalError(
      "solve_psd_jitter: matrix is singular beyond jitter 1e-10 * mean diagonal");
}

double sqrt_clamped(double q, const char* what) {
  if (std::isnan(q) || q < -1e-10)
    throw NumericalError(std::string(what) +
                         ": quadratic form is negative beyond tolerance (" +
                         std::to_string(q) + ")");
  return q <= 0.0 ? 0.0 : std::sqrt(q);
}

}  // namespace mmddro
