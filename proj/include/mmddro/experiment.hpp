#pragma once
// Synthetic regression harness: a fixed Gaussian population with a known
// ground-truth function, per-trial subsampled training sets, lambda sweeps
// over both regularizers, and CSV emission of per-trial and aggregated rows.
//
// Determinism contract: records are a pure function of the config. Each trial
// owns an RNG stream derived from (seed, trial index) by a splitmix64 mix, so
// serial and threaded sweeps produce identical bytes.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmddro/kernel.hpp"
#include "mmddro/krr.hpp"
#include "mmddro/mmd.hpp"
#include "mmddro/rkhs.hpp"

namespace mmddro {

// Deterministic stream-splittable RNG. The engine is mt19937_64 seeded through
// splitmix64, and all distributions are hand-rolled on top of raw 64-bit draws
// because the standard library's distribution algorithms are not pinned.
class SplitRng {
 public:
  SplitRng(std::uint64_t seed, std::uint64_t stream);

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01();
  // Standard normal via the trigonometric Box-Muller transform, pair-cached.
  double normal();
  // Uniform integer on [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n);
  // k distinct indices from [0, n) by partial Fisher-Yates, in draw order.
  std::vector<int> subsample(int n, int k);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

enum class Regime { Easy, Hard };

const char* regime_name(Regime regime);
const char* regularizer_name(RegularizerKind kind);

struct GroundTruthSpec {
  Eigen::MatrixXd anchors;
  Eigen::VectorXd coefficients;
};

struct ExperimentConfig {
  Regime regime = Regime::Easy;
  double sigma = 1.0;
  GroundTruthSpec ground_truth;  // default: k(1,.) - k(-1,.) at bandwidth sigma
  int population_size = 10000;
  int n_train = 1000;
  double noise_var = 1e-2;
  std::vector<double> lambda_grid_classic;
  std::vector<double> lambda_grid_product;
  int trials = 100;
  std::uint64_t seed = 0;
  bool run_classic = true;
  bool run_product = true;
  GdOptions gd;  // product-norm optimizer settings for every fit in the sweep
};

// Regime presets: easy = 1000 train points at noise variance 1e-2, 100 trials;
// hard = 100 train points at noise variance 1, 1000 trials. Both start from
// 15-point log-spaced lambda grids per regularizer.
ExperimentConfig default_config(Regime regime);

// Parses a JSON config document. Unknown keys are errors naming the key, as
// are type mismatches; absent keys keep the regime defaults.
ExperimentConfig parse_config(const std::string& json_text);

// Throws std::invalid_argument on empty grids, nonpositive counts, negative
// noise variance, inconsistent ground-truth shapes, or no regularizer enabled.
void validate(const ExperimentConfig& config);

RkhsFunction ground_truth_function(const ExperimentConfig& config);

// The population sample: population_size i.i.d. standard normals (stream 0 of
// the seed) with uniform weights. Drawn once per experiment.
WeightedSample make_population(const ExperimentConfig& config);

// Per-trial dataset: n_train points subsampled from the population, labeled
// y_i = h(x_i) + noise, on stream (trial_index + 1).
std::pair<WeightedSample, RegressionProblem> synthesize(const ExperimentConfig& config,
                                                        int trial_index);

struct TrialRecord {
  Regime regime;
  RegularizerKind regularizer;
  double lambda;
  int trial;
  double population_risk;  // NaN when the fit threw; converged is then false
  double empirical_risk;
  bool converged;
};

struct SummaryRow {
  Regime regime;
  RegularizerKind regularizer;
  double lambda;
  double mean_risk;
  double stderr_risk;  // NaN when fewer than two converged trials
  double ci_lo;
  double ci_hi;
  int trials;  // converged trials only
};

// Runs every (regularizer, lambda, trial) fit. Rows are ordered by
// (regularizer: classic first, lambda in grid order, trial); fit failures
// become non-converged rows and never abort the sweep.
std::vector<TrialRecord> run_sweep(const ExperimentConfig& config, int threads = 1);

// Converged rows only, grouped by (regime, regularizer, lambda) and emitted in
// sorted key order; 95% CI = mean +/- 1.96 * stderr (width 0 when stderr is
// undefined at fewer than two rows).
std::vector<SummaryRow> aggregate(const std::vector<TrialRecord>& records);

// CSV snapshots with fixed headers and 17-significant-digit floats.
std::string records_csv(const std::vector<TrialRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace mmddro
