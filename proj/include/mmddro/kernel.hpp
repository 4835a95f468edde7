#pragma once

#include <Eigen/Dense>

namespace mmddro {

// The product-norm calculus ties three bandwidths together: functions live at
// sigma, their pointwise products at sigma/sqrt(2), and the shared anchor
// matrix at sigma*sqrt(2). Restricting rescaling to these two factors keeps
// that bookkeeping explicit.
enum class BandwidthFactor { Sqrt2, InvSqrt2 };

// k_sigma(x, y) = exp(-|x - y|^2 / (2 sigma^2)). Bounded by 1, so the kernel
// bound M in the concentration radius is 1.
class GaussianKernel {
 public:
  explicit GaussianKernel(double sigma);
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

struct KernelMatrix {
  Eigen::MatrixXd entries;  // symmetric, unit diagonal, PSD up to roundoff
  double bandwidth = 0.0;
};

// |x - y|^2 as a direct sum of squared coordinate differences. The dot-product
// expansion |x|^2 + |y|^2 - 2x.y is deliberately avoided: it loses the digits
// the bandwidth-identity tests check at 1e-12.
double squared_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double eval(const GaussianKernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

GaussianKernel scaled(const GaussianKernel& k, BandwidthFactor factor);

// Gram matrix of the rows of X. Diagonal is exactly 1.
KernelMatrix matrix(const GaussianKernel& k, const Eigen::MatrixXd& X);

// Rectangular kernel matrix between the rows of X and the rows of Y.
Eigen::MatrixXd cross_matrix(const GaussianKernel& k, const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& Y);

}  // namespace mmddro
