#include "mmddro/rkhs.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mmddro/errors.hpp"
#include "mmddro/linalg.hpp"

namespace mmddro {

namespace {

void check_same_bandwidth(const RkhsFunction& f, const RkhsFunction& g, const char* op) {
  if (f.kernel.sigma() != g.kernel.sigma())
    throw std::invalid_argument(std::string(op) + ": kernel bandwidths differ");
  if (f.anchors.cols() != g.anchors.cols())
    throw std::invalid_argument(std::string(op) + ": anchor dimensions differ");
}

bool same_anchors(const RkhsFunction& f, const RkhsFunction& g) {
  return f.anchors.rows() == g.anchors.rows() && f.anchors == g.anchors;
}

// Shared expansion for a binary product-norm: identical anchor sets are kept,
// otherwise anchors are concatenated and each coefficient vector is padded
// with zeros on the other function's block.
struct MergedPair {
  Eigen::MatrixXd anchors;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

MergedPair merge_for_product(const RkhsFunction& f, const RkhsFunction& g) {
  if (same_anchors(f, g)) return {f.anchors, f.coefficients, g.coefficients};
  const Eigen::Index nf = f.anchors.rows(), ng = g.anchors.rows();
  MergedPair m;
  m.anchors.resize(nf + ng, f.anchors.cols());
  m.anchors.topRows(nf) = f.anchors;
  m.anchors.bottomRows(ng) = g.anchors;
  m.a = Eigen::VectorXd::Zero(nf + ng);
  m.a.head(nf) = f.coefficients;
  m.b = Eigen::VectorXd::Zero(nf + ng);
  m.b.tail(ng) = g.coefficients;
  return m;
}

}  // namespace

RkhsFunction::RkhsFunction(Eigen::MatrixXd anchors_, Eigen::VectorXd coefficients_,
                           GaussianKernel kernel_)
    : anchors(std::move(anchors_)), coefficients(std::move(coefficients_)), kernel(kernel_) {
  if (anchors.rows() == 0)
    throw std::invalid_argument("RkhsFunction: expansion needs at least one anchor");
  if (anchors.rows() != coefficients.size())
    throw std::invalid_argument("RkhsFunction: anchor and coefficient counts differ");
}

double evaluate(const RkhsFunction& f, const Eigen::VectorXd& x) {
  if (x.size() != f.anchors.cols())
    throw std::invalid_argument("evaluate: point dimension differs from anchors");
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.anchors.rows(); ++i)
    s += f.coefficients[i] * eval(f.kernel, f.anchors.row(i), x);
  return s;
}

Eigen::VectorXd evaluate_rows(const RkhsFunction& f, const Eigen::MatrixXd& X) {
  return cross_matrix(f.kernel, X, f.anchors) * f.coefficients;
}

double inner_product(const RkhsFunction& f, const RkhsFunction& g) {
  check_same_bandwidth(f, g, "inner_product");
  const Eigen::MatrixXd G = cross_matrix(f.kernel, f.anchors, g.anchors);
  return f.coefficients.dot(G * g.coefficients);
}

double norm(const RkhsFunction& f) {
  const Eigen::MatrixXd K = matrix(f.kernel, f.anchors).entries;
  return sqrt_clamped(f.coefficients.dot(K * f.coefficients), "rkhs norm");
}

RkhsFunction scale(const RkhsFunction& f, double c) {
  return RkhsFunction(f.anchors, c * f.coefficients, f.kernel);
}

RkhsFunction add(const RkhsFunction& f, const RkhsFunction& g) {
  check_same_bandwidth(f, g, "add");
  if (same_anchors(f, g))
    return RkhsFunction(f.anchors, f.coefficients + g.coefficients, f.kernel);
  Eigen::MatrixXd anchors(f.anchors.rows() + g.anchors.rows(), f.anchors.cols());
  anchors.topRows(f.anchors.rows()) = f.anchors;
  anchors.bottomRows(g.anchors.rows()) = g.anchors;
  Eigen::VectorXd coeffs(f.coefficients.size() + g.coefficients.size());
  coeffs.head(f.coefficients.size()) = f.coefficients;
  coeffs.tail(g.coefficients.size()) = g.coefficients;
  return RkhsFunction(std::move(anchors), std::move(coeffs), f.kernel);
}

double product_norm(const RkhsFunction& f, const RkhsFunction& g) {
  check_same_bandwidth(f, g, "product_norm");
  const MergedPair m = merge_for_product(f, g);
  const Eigen::MatrixXd Kt = matrix(scaled(f.kernel, BandwidthFactor::Sqrt2), m.anchors).entries;
  const Eigen::MatrixXd A = m.a.asDiagonal() * Kt;
  const Eigen::MatrixXd B = m.b.asDiagonal() * Kt;
  const Eigen::MatrixXd A2 = A * A;
  const Eigen::MatrixXd B2 = B * B;
  // trace(A^2 B^2) without forming the final product.
  const double t = A2.cwiseProduct(B2.transpose()).sum();
  return sqrt_clamped(t, "product_norm");
}

double squared_norm_trace(const RkhsFunction& f) {
  const Eigen::MatrixXd Kt = matrix(scaled(f.kernel, BandwidthFactor::Sqrt2), f.anchors).entries;
  const Eigen::MatrixXd M = f.coefficients.asDiagonal() * Kt;
  const Eigen::MatrixXd M2 = M * M;
  const double t = M2.cwiseProduct(M2.transpose()).sum();
  if (t < -1e-10)
    throw NumericalError("squared_norm_trace: trace form is negative beyond tolerance");
  return t < 0.0 ? 0.0 : t;
}

Eigen::VectorXd squared_norm_trace_gradient(const RkhsFunction& f) {
  const Eigen::MatrixXd Kt = matrix(scaled(f.kernel, BandwidthFactor::Sqrt2), f.anchors).entries;
  const Eigen::MatrixXd M = f.coefficients.asDiagonal() * Kt;
  const Eigen::MatrixXd M3 = M * M * M;
  // 4 diag(Kt M^3), the cyclic-trace derivative of trace((D Kt)^4).
  return 4.0 * Kt.cwiseProduct(M3.transpose()).rowwise().sum();
}

bool trace_submultiplicative_check(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != X.cols() || Y.rows() != Y.cols() || X.rows() != Y.rows())
    throw std::invalid_argument("trace_submultiplicative_check: sizes differ or not square");
  const double sx = (X - X.transpose()).cwiseAbs().maxCoeff();
  const double sy = (Y - Y.transpose()).cwiseAbs().maxCoeff();
  const double tol_x = 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff());
  const double tol_y = 1e-12 * std::max(1.0, Y.cwiseAbs().maxCoeff());
  if (sx > tol_x || sy > tol_y)
    throw std::invalid_argument("trace_submultiplicative_check: input is not symmetric");
  const double txy = X.cwiseProduct(Y.transpose()).sum();
  return txy <= X.trace() * Y.trace() + 1e-9;
}

}  // namespace mmddro
