#include "mmddro/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace mmddro {

GaussianKernel::GaussianKernel(double sigma) : sigma_(sigma) {
  if (!std::isfinite(sigma) || sigma <= 0.0)
    throw std::invalid_argument("GaussianKernel: bandwidth sigma must be positive and finite");
}

double squared_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("squared_distance: point dimensions differ");
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double eval(const GaussianKernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double s = k.sigma();
  return std::exp(-squared_distance(x, y) / (2.0 * s * s));
}

GaussianKernel scaled(const GaussianKernel& k, BandwidthFactor factor) {
  const double f =
      factor == BandwidthFactor::Sqrt2 ? std::sqrt(2.0) : 1.0 / std::sqrt(2.0);
  return GaussianKernel(k.sigma() * f);
}

KernelMatrix matrix(const GaussianKernel& k, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  if (n == 0) throw std::invalid_argument("matrix: empty point set");
  const double inv = -1.0 / (2.0 * k.sigma() * k.sigma());
  Eigen::MatrixXd E(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    E(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double d = X(i, c) - X(j, c);
        s += d * d;
      }
      const double v = std::exp(inv * s);
      E(i, j) = v;
      E(j, i) = v;
    }
  }
  return KernelMatrix{std::move(E), k.sigma()};
}

Eigen::MatrixXd cross_matrix(const GaussianKernel& k, const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& Y) {
  if (X.cols() != Y.cols())
    throw std::invalid_argument("cross_matrix: point dimensions differ");
  if (X.rows() == 0 || Y.rows() == 0)
    throw std::invalid_argument("cross_matrix: empty point set");
  const double inv = -1.0 / (2.0 * k.sigma() * k.sigma());
  Eigen::MatrixXd D2(X.rows(), Y.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < Y.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double d = X(i, c) - Y(j, c);
        s += d * d;
      }
      D2(i, j) = s;
    }
  return (inv * D2).array().exp().matrix();
}

}  // namespace mmddro
