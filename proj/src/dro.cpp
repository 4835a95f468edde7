#include "mmddro/dro.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmddro/errors.hpp"
#include "mmddro/linalg.hpp"

namespace mmddro {

EmbeddingWorstCase embedding_worst_case(const RkhsFunction& loss, const WeightedSample& P,
                                        double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0)
    throw std::invalid_argument("embedding_worst_case: epsilon must be nonnegative");
  if (loss.anchors.cols() != P.points.cols())
    throw std::invalid_argument("embedding_worst_case: point dimensions differ");
  const RkhsFunction mu_p = mean_embedding(loss.kernel, P);
  const double base_risk = P.weights.dot(evaluate_rows(loss, P.points));
  const double loss_norm = norm(loss);
  if (loss_norm == 0.0 || epsilon == 0.0)
    return EmbeddingWorstCase{base_risk, mu_p, epsilon};
  return EmbeddingWorstCase{base_risk + epsilon * loss_norm,
                            add(mu_p, scale(loss, epsilon / loss_norm)), epsilon};
}

namespace {

struct CenteredSolve {
  double lambda_star;
  double penalty;
  Eigen::VectorXd kinv_centered;  // K^-1 (l - lambda* 1)
};

CenteredSolve centered_adversary_solve(const Eigen::VectorXd& l, const Eigen::MatrixXd& K) {
  const Eigen::Index n = l.size();
  Eigen::MatrixXd B(n, 2);
  B.col(0) = l;
  B.col(1) = Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd X = solve_psd_jitter(K, B);
  const double denom = X.col(1).sum();  // 1' K^-1 1, positive for PD K
  if (!std::isfinite(denom) || denom <= 0.0)
    throw NumericalError("discrete_adversary: 1'K^-1 1 is not positive");
  CenteredSolve out;
  out.lambda_star = X.col(0).sum() / denom;
  out.kinv_centered = X.col(0) - out.lambda_star * X.col(1);
  const double q = (l.array() - out.lambda_star).matrix().dot(out.kinv_centered);
  out.penalty = sqrt_clamped(q, "discrete_adversary penalty");
  return out;
}

}  // namespace

AdversarySolution discrete_adversary(const Eigen::VectorXd& loss_values,
                                     const Eigen::MatrixXd& K, double epsilon) {
  const Eigen::Index n = loss_values.size();
  if (n == 0) throw std::invalid_argument("discrete_adversary: empty loss vector");
  if (K.rows() != n || K.cols() != n)
    throw std::invalid_argument("discrete_adversary: kernel matrix size differs from loss");
  if ((K - K.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, K.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("discrete_adversary: kernel matrix is not symmetric");
  if (!std::isfinite(epsilon) || epsilon < 0.0)
    throw std::invalid_argument("discrete_adversary: epsilon must be nonnegative");

  const CenteredSolve cs = centered_adversary_solve(loss_values, K);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

  AdversarySolution sol;
  sol.lambda_star = cs.lambda_star;
  if (cs.penalty > 1e-12) {
    sol.penalty = cs.penalty;
    sol.weights = uniform + (epsilon / cs.penalty) * cs.kinv_centered;
    sol.eta_star = epsilon > 0.0 ? cs.penalty / (2.0 * epsilon)
                                 : std::numeric_limits<double>::infinity();
  } else {
    // l is (numerically) constant: the objective is flat, eta* diverges and
    // the uniform weights stay optimal.
    sol.penalty = 0.0;
    sol.weights = uniform;
    sol.eta_star = std::numeric_limits<double>::infinity();
  }
  sol.value = loss_values.mean() + epsilon * sol.penalty;
  sol.nonnegativity_violated = sol.weights.minCoeff() < -1e-10;
  return sol;
}

AdversarySolution discrete_adversary(const Eigen::VectorXd& loss_values,
                                     const KernelMatrix& K, double epsilon) {
  return discrete_adversary(loss_values, K.entries, epsilon);
}

double empirical_variance(const Eigen::VectorXd& loss_values) {
  if (loss_values.size() == 0) throw std::invalid_argument("empirical_variance: empty input");
  const double mean = loss_values.mean();
  return (loss_values.array() - mean).square().sum() / static_cast<double>(loss_values.size());
}

double variance_penalty_special(const Eigen::VectorXd& loss_values, double a, double b) {
  const Eigen::Index n = loss_values.size();
  if (n == 0) throw std::invalid_argument("variance_penalty_special: empty input");
  if (!std::isfinite(a) || a <= 0.0)
    throw std::invalid_argument("variance_penalty_special: a must be positive");
  if (a + b * static_cast<double>(n) <= 0.0)
    throw std::invalid_argument("variance_penalty_special: a I + b 11' is not positive definite");
  const double closed =
      std::sqrt(static_cast<double>(n) * empirical_variance(loss_values) / a);
  const Eigen::MatrixXd K =
      a * Eigen::MatrixXd::Identity(n, n) + b * Eigen::MatrixXd::Ones(n, n);
  const double general = centered_adversary_solve(loss_values, K).penalty;
  if (std::abs(closed - general) > 1e-8 * std::max(1.0, std::abs(general)))
    throw NumericalError(
        "variance_penalty_special: closed form disagrees with the general solver");
  return closed;
}

BoundReport krr_generalization_bound(double empirical_risk, int n, double delta,
                                     double lambda_f2, double lambda_h2, double lambda_f,
                                     double lambda_h) {
  if (n < 1) throw std::invalid_argument("krr_generalization_bound: n must be >= 1");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("krr_generalization_bound: delta must lie strictly in (0, 1)");
  if (!std::isfinite(empirical_risk) || empirical_risk < 0.0)
    throw std::invalid_argument("krr_generalization_bound: empirical risk must be nonnegative");
  for (double l : {lambda_f2, lambda_h2, lambda_f, lambda_h})
    if (!std::isfinite(l) || l < 0.0)
      throw std::invalid_argument("krr_generalization_bound: norm bounds must be nonnegative");
  const double eps = (2.0 / std::sqrt(static_cast<double>(n))) *
                     (1.0 + std::sqrt(std::log(1.0 / delta) / 2.0));
  BoundReport r;
  r.empirical_risk = empirical_risk;
  r.epsilon = eps;
  r.lambda_f2 = lambda_f2;
  r.lambda_h2 = lambda_h2;
  r.lambda_f = lambda_f;
  r.lambda_h = lambda_h;
  r.bound = empirical_risk + eps * (lambda_f2 + lambda_h2 + 2.0 * lambda_f * lambda_h);
  return r;
}

double mohri_reference_bound(double empirical_risk, int n, double delta, double lambda) {
  if (n < 1) throw std::invalid_argument("mohri_reference_bound: n must be >= 1");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("mohri_reference_bound: delta must lie strictly in (0, 1)");
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("mohri_reference_bound: lambda must be nonnegative");
  return empirical_risk + (8.0 * lambda * lambda / std::sqrt(static_cast<double>(n))) *
                              (1.0 + 0.5 * std::sqrt(std::log(1.0 / delta) / 2.0));
}

}  // namespace mmddro
