#include "mmddro/krr.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mmddro/errors.hpp"
#include "mmddro/linalg.hpp"

namespace mmddro {

RegressionProblem::RegressionProblem(Eigen::MatrixXd x, Eigen::VectorXd y, GaussianKernel k)
    : train_x(std::move(x)), train_y(std::move(y)), kernel(k) {
  if (train_x.rows() == 0) throw std::invalid_argument("RegressionProblem: empty training set");
  if (train_x.rows() != train_y.size())
    throw std::invalid_argument("RegressionProblem: point and label counts differ");
}

namespace {

void check_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("fit: lambda must be nonnegative and finite");
}

void check_options(const GdOptions& o) {
  if (o.max_iters < 0) throw std::invalid_argument("GdOptions: max_iters must be >= 0");
  if (!(o.grad_tol > 0.0)) throw std::invalid_argument("GdOptions: grad_tol must be positive");
  if (!(o.initial_step > 0.0))
    throw std::invalid_argument("GdOptions: initial_step must be positive");
  if (!(o.shrink > 0.0) || !(o.shrink < 1.0))
    throw std::invalid_argument("GdOptions: shrink must lie in (0, 1)");
  if (!(o.armijo_c > 0.0) || !(o.armijo_c < 1.0))
    throw std::invalid_argument("GdOptions: armijo_c must lie in (0, 1)");
  if (!(o.mu_floor > 0.0)) throw std::invalid_argument("GdOptions: mu_floor must be positive");
}

// Objective state for the product-norm descent. The penalty uses
//   trace((D Kt)^4) = a' (Y o Y) a   with   Y = Kt D Kt,
// obtained by grouping the trace as trace((D.Kt D Kt)^2) = sum_ij a_i a_j Y_ij^2.
// Y is linear in a, so a line-search candidate a - t g has Y_c = Y - t Yg and
// every backtracking step costs O(n^2) after the single product Yg = Kt Dg Kt.
// The same grouping gives the gradient: 4 diag(Kt (D Kt)^3) = 4 (Y o Y) a.
struct PnState {
  Eigen::VectorXd a;
  Eigen::VectorXd r;  // K a - y
  Eigen::MatrixXd Y;  // Kt D Kt (unused when lambda = 0)
  Eigen::VectorXd w;  // (Y o Y) a
  double trace = 0.0;
  double objective = 0.0;
};

// w_i = sum_j Y(i,j)^2 a_j, using columns since Y is symmetric.
void hadamard_square_apply(const Eigen::MatrixXd& Y, const Eigen::VectorXd& a,
                           Eigen::VectorXd& w) {
  const Eigen::Index n = a.size();
  w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w[i] = Y.col(i).cwiseAbs2().dot(a);
}

double pn_objective(const Eigen::VectorXd& r, double trace, double lambda, double mu_floor,
                    Eigen::Index n) {
  const double loss = r.squaredNorm() / static_cast<double>(n);
  return lambda > 0.0 ? loss + lambda * std::sqrt(trace + mu_floor) : loss;
}

}  // namespace

FitReport fit_classic(const RegressionProblem& problem, double lambda) {
  check_lambda(lambda);
  const Eigen::Index n = problem.train_x.rows();
  const Eigen::MatrixXd K = matrix(problem.kernel, problem.train_x).entries;
  Eigen::MatrixXd A = K;
  A.diagonal().array() += static_cast<double>(n) * lambda;
  const Eigen::VectorXd a = solve_psd_jitter(A, problem.train_y);
  const double objective =
      (K * a - problem.train_y).squaredNorm() / static_cast<double>(n) +
      lambda * a.dot(K * a);
  if (!std::isfinite(objective))
    throw NumericalError("fit_classic: objective is not finite at the solution");
  FitReport report{RkhsFunction(problem.train_x, a, problem.kernel),
                   RegularizerKind::ClassicSquaredNorm,
                   lambda,
                   objective,
                   0,
                   true,
                   {}};
  return report;
}

FitReport fit_product_norm(const RegressionProblem& problem, double lambda,
                           const GdOptions& opts) {
  check_lambda(lambda);
  check_options(opts);
  const Eigen::Index n = problem.train_x.rows();
  const Eigen::VectorXd& y = problem.train_y;
  const Eigen::MatrixXd K = matrix(problem.kernel, problem.train_x).entries;
  const bool use_penalty = lambda > 0.0;
  Eigen::MatrixXd Kt;
  if (use_penalty)
    Kt = matrix(scaled(problem.kernel, BandwidthFactor::Sqrt2), problem.train_x).entries;

  // Warm start in the convex-loss basin; fall back to zero coefficients if the
  // ridge system is singular beyond the jitter ladder.
  Eigen::VectorXd a0;
  try {
    a0 = fit_classic(problem, lambda).model.coefficients;
  } catch (const NumericalError&) {
    a0 = Eigen::VectorXd::Zero(n);
  }

  PnState st;
  st.a = a0;
  st.r = K * st.a - y;
  if (use_penalty) {
    st.Y.noalias() = Kt * (st.a.asDiagonal() * Kt);
    hadamard_square_apply(st.Y, st.a, st.w);
    st.trace = st.a.dot(st.w);
  }
  st.objective = pn_objective(st.r, st.trace, lambda, opts.mu_floor, n);
  if (!std::isfinite(st.objective))
    throw NumericalError("fit_product_norm: objective is not finite at the initial point");

  std::vector<double> trace_log;
  if (opts.record_objective_trace) trace_log.push_back(st.objective);

  PnState cand;
  Eigen::VectorXd g(n), Kg(n);
  Eigen::MatrixXd Yg;
  int iterations = 0;
  bool converged = false;

  for (int iter = 0; iter < opts.max_iters + 1; ++iter) {
    g.noalias() = (2.0 / static_cast<double>(n)) * (K * st.r);
    if (use_penalty)
      g += (2.0 * lambda / std::sqrt(st.trace + opts.mu_floor)) * st.w;
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      converged = true;
      break;
    }
    if (iter == opts.max_iters) break;

    Kg.noalias() = K * g;
    if (use_penalty) Yg.noalias() = Kt * (g.asDiagonal() * Kt);
    const double gg = g.squaredNorm();

    double t = opts.initial_step;
    bool accepted = false;
    while (t >= 1e-20) {
      cand.a = st.a - t * g;
      cand.r = st.r - t * Kg;
      if (use_penalty) {
        cand.Y = st.Y - t * Yg;
        hadamard_square_apply(cand.Y, cand.a, cand.w);
        cand.trace = cand.a.dot(cand.w);
      }
      cand.objective = pn_objective(cand.r, cand.trace, lambda, opts.mu_floor, n);
      if (std::isfinite(cand.objective) &&
          cand.objective <= st.objective - opts.armijo_c * t * gg) {
        accepted = true;
        break;
      }
      t *= opts.shrink;
    }
    if (!accepted) break;  // flat to machine precision; report non-converged

    st.a.swap(cand.a);
    st.r.swap(cand.r);
    st.Y.swap(cand.Y);
    st.w.swap(cand.w);
    st.trace = cand.trace;
    st.objective = cand.objective;
    ++iterations;
    if (opts.record_objective_trace) trace_log.push_back(st.objective);
  }

  FitReport report{RkhsFunction(problem.train_x, st.a, problem.kernel),
                   RegularizerKind::ProductNorm,
                   lambda,
                   st.objective,
                   iterations,
                   converged,
                   std::move(trace_log)};
  return report;
}

double risk(const RkhsFunction& model, const RkhsFunction& target, const WeightedSample& Q) {
  const Eigen::VectorXd d = evaluate_rows(model, Q.points) - evaluate_rows(target, Q.points);
  return Q.weights.dot(d.cwiseAbs2());
}

double risk(const RkhsFunction& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size())
    throw std::invalid_argument("risk: point and label counts differ");
  if (X.rows() == 0) throw std::invalid_argument("risk: empty evaluation set");
  return (evaluate_rows(model, X) - y).squaredNorm() / static_cast<double>(X.rows());
}

}  // namespace mmddro
