#pragma once

#include <Eigen/Dense>

#include "mmddro/kernel.hpp"
#include "mmddro/mmd.hpp"
#include "mmddro/rkhs.hpp"

namespace mmddro {

// Worst case of E_Q[loss] over mean embeddings mu_Q within MMD distance
// epsilon of mu_P. The supremum is attained by pushing the embedding along
// the loss direction: value = E_P[loss] + eps |loss|, mu_Q* = mu_P +
// (eps/|loss|) loss.
struct EmbeddingWorstCase {
  double value;
  RkhsFunction worst_embedding;
  double epsilon;
};

EmbeddingWorstCase embedding_worst_case(const RkhsFunction& loss, const WeightedSample& P,
                                        double epsilon);

// Closed-form solution of max_w l'w over probability vectors w with
// (w - 1/n)' K (w - 1/n) <= eps^2, assuming the nonnegativity constraints are
// inactive. When they are not, the closed form still upper-bounds the
// constrained optimum and nonnegativity_violated is set.
struct AdversarySolution {
  Eigen::VectorXd weights;  // w*
  double value;             // mean(l) + eps * penalty
  double lambda_star;       // multiplier of the sum-to-one constraint
  double eta_star;          // multiplier of the MMD ball; +inf when l is constant or eps = 0
  bool nonnegativity_violated;
  double penalty;           // sqrt((l - lambda* 1)' K^-1 (l - lambda* 1))
};

AdversarySolution discrete_adversary(const Eigen::VectorXd& loss_values,
                                     const Eigen::MatrixXd& K, double epsilon);
AdversarySolution discrete_adversary(const Eigen::VectorXd& loss_values,
                                     const KernelMatrix& K, double epsilon);

// E[l^2] - E[l]^2 under uniform weights; population style, no Bessel factor.
double empirical_variance(const Eigen::VectorXd& loss_values);

// For K = a I + b 11' the adversary's penalty collapses to
// a^{-1/2} sqrt(n) sqrt(Var(l)). Returns that closed form and cross-checks it
// against the general solver, throwing NumericalError on disagreement.
double variance_penalty_special(const Eigen::VectorXd& loss_values, double a, double b);

// Generalization bound for square loss under an MMD ball:
// bound = empirical_risk + eps_n (L_f2 + L_h2 + 2 L_f L_h) with
// eps_n = (2/sqrt(n)) (1 + sqrt(ln(1/delta)/2)).
struct BoundReport {
  double empirical_risk;
  double epsilon;
  double lambda_f2;
  double lambda_h2;
  double lambda_f;
  double lambda_h;
  double bound;
};

BoundReport krr_generalization_bound(double empirical_risk, int n, double delta,
                                     double lambda_f2, double lambda_h2, double lambda_f,
                                     double lambda_h);

// Reference Rademacher-complexity bound used for comparison:
// empirical_risk + (8 Lambda^2 / sqrt(n)) (1 + (1/2) sqrt(ln(1/delta)/2)).
double mohri_reference_bound(double empirical_risk, int n, double delta, double lambda);

}  // namespace mmddro
