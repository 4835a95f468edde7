#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "mmddro/experiment.hpp"
#include "mmddro/krr.hpp"
#include "mmddro/rkhs.hpp"
#include "oracles.hpp"

using namespace mmddro;

namespace {

// Small sweep that exercises both regularizers quickly.
ExperimentConfig tiny_config() {
  ExperimentConfig config = default_config(Regime::Easy);
  config.population_size = 500;
  config.n_train = 40;
  config.trials = 4;
  config.lambda_grid_classic = {1e-3, 1e-1};
  config.lambda_grid_product = {1e-3, 1e-1};
  config.seed = 7;
  config.gd.grad_tol = 1e-5;
  config.gd.max_iters = 2000;
  return config;
}

bool message_contains(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("split rng streams are reproducible and distinct") {
  SplitRng a(42, 3);
  SplitRng b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == b.uniform01());

  SplitRng c(42, 4);
  SplitRng d(43, 3);
  SplitRng base(42, 3);
  int differ_stream = 0;
  int differ_seed = 0;
  for (int i = 0; i < 32; ++i) {
    const double r = base.uniform01();
    differ_stream += r != c.uniform01();
    differ_seed += r != d.uniform01();
  }
  CHECK(differ_stream > 24);
  CHECK(differ_seed > 24);
}

TEST_CASE("uniform draws cover [0,1) with the right moments") {
  SplitRng rng(7, 0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("normal draws have standard moments") {
  SplitRng rng(11, 2);
  const int n = 100000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(var - 1.0) <= 0.05);
}

TEST_CASE("bounded draws stay in range and spread evenly") {
  SplitRng rng(13, 1);
  int counts[5] = {0, 0, 0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t v = rng.below(5);
    REQUIRE(v < 5);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c / static_cast<double>(n) - 0.2) <= 0.05);
  CHECK(rng.below(1) == 0);
  CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
}

TEST_CASE("subsampling draws distinct indices with a prefix property") {
  SplitRng rng(17, 5);
  const std::vector<int> picked = rng.subsample(30, 12);
  REQUIRE(picked.size() == 12);
  std::set<int> seen(picked.begin(), picked.end());
  CHECK(seen.size() == 12);
  for (int i : picked) {
    CHECK(i >= 0);
    CHECK(i < 30);
  }

  // The first k draws do not depend on how many more are requested.
  SplitRng r1(21, 9);
  SplitRng r2(21, 9);
  const std::vector<int> part = r1.subsample(10, 4);
  const std::vector<int> full = r2.subsample(10, 10);
  for (int i = 0; i < 4; ++i) CHECK(part[static_cast<std::size_t>(i)] == full[static_cast<std::size_t>(i)]);

  std::vector<int> perm = full;
  std::sort(perm.begin(), perm.end());
  for (int i = 0; i < 10; ++i) CHECK(perm[static_cast<std::size_t>(i)] == i);

  CHECK_THROWS_AS(rng.subsample(5, 6), std::invalid_argument);
  CHECK_THROWS_AS(rng.subsample(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(rng.subsample(5, -1), std::invalid_argument);
}

TEST_CASE("regime and regularizer names are stable identifiers") {
  CHECK(std::string(regime_name(Regime::Easy)) == "easy");
  CHECK(std::string(regime_name(Regime::Hard)) == "hard");
  CHECK(std::string(regularizer_name(RegularizerKind::ClassicSquaredNorm)) == "classic");
  CHECK(std::string(regularizer_name(RegularizerKind::ProductNorm)) == "product");
}

TEST_CASE("regime presets pin the sweep shape") {
  const ExperimentConfig easy = default_config(Regime::Easy);
  CHECK(easy.regime == Regime::Easy);
  CHECK(easy.population_size == 10000);
  CHECK(easy.n_train == 1000);
  CHECK(easy.noise_var == 1e-2);
  CHECK(easy.trials == 100);
  CHECK(easy.sigma == 1.0);
  CHECK(easy.run_classic);
  CHECK(easy.run_product);
  REQUIRE(easy.lambda_grid_classic.size() == 15);
  CHECK(testutil::rel_close(easy.lambda_grid_classic.front(), 1e-8, 1e-12));
  CHECK(testutil::rel_close(easy.lambda_grid_classic.back(), 1.0, 1e-12));
  CHECK(easy.lambda_grid_classic == easy.lambda_grid_product);
  CHECK(std::is_sorted(easy.lambda_grid_classic.begin(), easy.lambda_grid_classic.end()));

  const ExperimentConfig hard = default_config(Regime::Hard);
  CHECK(hard.n_train == 100);
  CHECK(hard.noise_var == 1.0);
  CHECK(hard.trials == 1000);
  REQUIRE(hard.lambda_grid_product.size() == 15);
  CHECK(testutil::rel_close(hard.lambda_grid_product.front(), 1e-6, 1e-12));
  CHECK(testutil::rel_close(hard.lambda_grid_product.back(), 1e2, 1e-12));

  // The preset target function is the odd two-bump difference.
  CHECK(easy.ground_truth.anchors(0, 0) == 1.0);
  CHECK(easy.ground_truth.anchors(1, 0) == -1.0);
  CHECK(easy.ground_truth.coefficients[0] == 1.0);
  CHECK(easy.ground_truth.coefficients[1] == -1.0);
}

TEST_CASE("config parsing applies regime defaults then explicit keys") {
  const ExperimentConfig blank = parse_config("{}");
  CHECK(blank.regime == Regime::Easy);
  CHECK(blank.n_train == 1000);

  const ExperimentConfig hard = parse_config(R"({"regime": "hard"})");
  CHECK(hard.regime == Regime::Hard);
  CHECK(hard.n_train == 100);
  CHECK(hard.noise_var == 1.0);

  const ExperimentConfig custom = parse_config(
      R"({"regime": "hard", "n_train": 64, "noise_var": 0.25, "sigma": 1.5,
          "population_size": 2000, "trials": 12, "seed": 99,
          "gd_max_iters": 321, "gd_tol": 2e-4})");
  CHECK(custom.n_train == 64);
  CHECK(custom.noise_var == 0.25);
  CHECK(custom.sigma == 1.5);
  CHECK(custom.population_size == 2000);
  CHECK(custom.trials == 12);
  CHECK(custom.seed == 99);
  CHECK(custom.gd.max_iters == 321);
  CHECK(custom.gd.grad_tol == 2e-4);
}

TEST_CASE("a shared lambda grid seeds both regularizers but specific keys win") {
  const ExperimentConfig shared = parse_config(R"({"lambda_grid": [0.5, 1.0]})");
  CHECK(shared.lambda_grid_classic == std::vector<double>{0.5, 1.0});
  CHECK(shared.lambda_grid_product == std::vector<double>{0.5, 1.0});

  // The specific key takes precedence even when it appears before the shared
  // one in the document.
  const ExperimentConfig mixed = parse_config(
      R"({"lambda_grid_classic": [0.25], "lambda_grid": [0.5, 1.0]})");
  CHECK(mixed.lambda_grid_classic == std::vector<double>{0.25});
  CHECK(mixed.lambda_grid_product == std::vector<double>{0.5, 1.0});
}

TEST_CASE("config parsing rejects malformed documents") {
  CHECK(message_contains([] { parse_config(R"({"frobnicate": 1})"); },
                         "unknown key 'frobnicate'"));
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"regime": "medium"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"seed": -4})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"lambda_grid": []})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"trials": 2.5})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"regularizers": ["ridge"]})"), std::invalid_argument);
}

TEST_CASE("regularizer selection disables the other sweep") {
  const ExperimentConfig only_product = parse_config(R"({"regularizers": ["product"]})");
  CHECK_FALSE(only_product.run_classic);
  CHECK(only_product.run_product);

  const ExperimentConfig both = parse_config(R"({"regularizers": ["classic", "product"]})");
  CHECK(both.run_classic);
  CHECK(both.run_product);
}

TEST_CASE("ground truth accepts flat and nested anchor arrays") {
  const ExperimentConfig flat = parse_config(
      R"({"ground_truth": {"anchors": [1.0, -1.0], "coefficients": [2.0, -2.0]}})");
  CHECK(flat.ground_truth.anchors.rows() == 2);
  CHECK(flat.ground_truth.anchors.cols() == 1);
  CHECK(flat.ground_truth.coefficients[0] == 2.0);

  const ExperimentConfig nested = parse_config(
      R"({"ground_truth": {"anchors": [[1.0], [-1.0]], "coefficients": [1.0, -1.0]}})");
  CHECK(nested.ground_truth.anchors == flat.ground_truth.anchors);

  CHECK_THROWS_AS(
      parse_config(
          R"({"ground_truth": {"anchors": [[1.0], [1.0, 2.0]], "coefficients": [1, 1]}})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config(R"({"ground_truth": {"anchors": [1.0]}})"), std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent sweeps") {
  ExperimentConfig config = tiny_config();
  CHECK_NOTHROW(validate(config));

  ExperimentConfig big_train = tiny_config();
  big_train.n_train = big_train.population_size + 1;
  CHECK_THROWS_AS(validate(big_train), std::invalid_argument);

  ExperimentConfig no_trials = tiny_config();
  no_trials.trials = 0;
  CHECK_THROWS_AS(validate(no_trials), std::invalid_argument);

  ExperimentConfig neg_noise = tiny_config();
  neg_noise.noise_var = -0.1;
  CHECK_THROWS_AS(validate(neg_noise), std::invalid_argument);

  ExperimentConfig empty_grid = tiny_config();
  empty_grid.lambda_grid_classic.clear();
  CHECK_THROWS_AS(validate(empty_grid), std::invalid_argument);

  // A disabled regularizer's grid is not consulted.
  ExperimentConfig product_only = tiny_config();
  product_only.run_classic = false;
  product_only.lambda_grid_classic.clear();
  CHECK_NOTHROW(validate(product_only));

  ExperimentConfig nothing = tiny_config();
  nothing.run_classic = false;
  nothing.run_product = false;
  CHECK_THROWS_AS(validate(nothing), std::invalid_argument);

  ExperimentConfig bad_truth = tiny_config();
  bad_truth.ground_truth.coefficients = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(validate(bad_truth), std::invalid_argument);
}

TEST_CASE("the population is drawn once and is reproducible") {
  const ExperimentConfig config = tiny_config();
  const WeightedSample p1 = make_population(config);
  const WeightedSample p2 = make_population(config);
  CHECK(p1.points.rows() == config.population_size);
  CHECK(p1.points.cols() == 1);
  CHECK(p1.weights.minCoeff() == p1.weights.maxCoeff());
  CHECK(p1.points == p2.points);

  ExperimentConfig other = config;
  other.seed = config.seed + 1;
  CHECK(make_population(other).points != p1.points);
}

TEST_CASE("trial synthesis is deterministic per trial index") {
  const ExperimentConfig config = tiny_config();
  const auto [pop1, prob1] = synthesize(config, 2);
  const auto [pop2, prob2] = synthesize(config, 2);
  CHECK(prob1.train_x == prob2.train_x);
  CHECK(prob1.train_y == prob2.train_y);
  CHECK(prob1.train_x.rows() == config.n_train);
  CHECK(pop1.points == pop2.points);

  const auto [pop3, prob3] = synthesize(config, 3);
  CHECK(prob1.train_y != prob3.train_y);

  // Training points are rows of the population.
  for (int i = 0; i < 5; ++i) {
    bool found = false;
    for (int j = 0; j < pop1.points.rows() && !found; ++j)
      found = prob1.train_x(i, 0) == pop1.points(j, 0);
    CHECK(found);
  }
}

TEST_CASE("labels are the target values plus calibrated noise") {
  ExperimentConfig clean = tiny_config();
  clean.noise_var = 0.0;
  const RkhsFunction truth = ground_truth_function(clean);
  const auto [pop, prob] = synthesize(clean, 0);
  CHECK(prob.train_y == evaluate_rows(truth, prob.train_x));

  // Pooled residual variance across trials approximates noise_var.
  ExperimentConfig noisy = tiny_config();
  noisy.noise_var = 1e-2;
  double pooled = 0.0;
  int count = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto [p, problem] = synthesize(noisy, trial);
    const Eigen::VectorXd residual =
        problem.train_y - evaluate_rows(truth, problem.train_x);
    pooled += residual.squaredNorm();
    count += static_cast<int>(residual.size());
  }
  const double var = pooled / count;
  CHECK(std::abs(var - 1e-2) <= 0.2 * 1e-2);
}

TEST_CASE("sweep records follow task-major order with trial-major blocks") {
  ExperimentConfig config = tiny_config();
  config.trials = 3;
  config.lambda_grid_classic = {1e-3, 1e-1};
  config.lambda_grid_product = {1e-2};
  config.gd.grad_tol = 1e-3;  // descent converges within the iteration budget
  const std::vector<TrialRecord> records = run_sweep(config);
  REQUIRE(records.size() == 9);  // (2 classic + 1 product) x 3 trials

  const auto at = [&](int task, int trial) -> const TrialRecord& {
    return records[static_cast<std::size_t>(task * 3 + trial)];
  };
  for (int trial = 0; trial < 3; ++trial) {
    CHECK(at(0, trial).regularizer == RegularizerKind::ClassicSquaredNorm);
    CHECK(at(0, trial).lambda == 1e-3);
    CHECK(at(1, trial).regularizer == RegularizerKind::ClassicSquaredNorm);
    CHECK(at(1, trial).lambda == 1e-1);
    CHECK(at(2, trial).regularizer == RegularizerKind::ProductNorm);
    CHECK(at(2, trial).lambda == 1e-2);
    for (int task = 0; task < 3; ++task) {
      CHECK(at(task, trial).trial == trial);
      CHECK(at(task, trial).regime == Regime::Easy);
      CHECK(at(task, trial).converged);
      CHECK(std::isfinite(at(task, trial).population_risk));
      CHECK(at(task, trial).population_risk >= 0.0);
      CHECK(at(task, trial).empirical_risk >= 0.0);
    }
  }

  CHECK_THROWS_AS(run_sweep(config, 0), std::invalid_argument);
}

TEST_CASE("crushing regularization drives the classic risk to the target's energy") {
  ExperimentConfig config = tiny_config();
  config.trials = 1;
  config.run_product = false;
  config.lambda_grid_classic = {1e6};
  const std::vector<TrialRecord> records = run_sweep(config);
  REQUIRE(records.size() == 1);

  const RkhsFunction truth = ground_truth_function(config);
  const WeightedSample pop = make_population(config);
  const Eigen::VectorXd h = evaluate_rows(truth, pop.points);
  const double energy = pop.weights.dot(h.cwiseAbs2());
  CHECK(testutil::rel_close(records[0].population_risk, energy, 1e-4));
}

TEST_CASE("threaded sweeps emit byte-identical records") {
  const ExperimentConfig config = tiny_config();
  const std::string serial = records_csv(run_sweep(config, 1));
  const std::string threaded = records_csv(run_sweep(config, 4));
  CHECK(serial == threaded);
}

TEST_CASE("fit failures become non-converged rows instead of aborting") {
  ExperimentConfig config = tiny_config();
  config.trials = 2;
  config.lambda_grid_classic = {1e-2};
  config.lambda_grid_product = {1e-2};
  config.ground_truth.coefficients = Eigen::VectorXd(2);
  config.ground_truth.coefficients << 1e200, -1e200;  // finite labels, overflowing objective
  const std::vector<TrialRecord> records = run_sweep(config);
  REQUIRE(records.size() == 4);
  for (const TrialRecord& r : records) {
    CHECK_FALSE(r.converged);
    CHECK(std::isnan(r.population_risk));
    CHECK(std::isnan(r.empirical_risk));
  }
  const std::vector<SummaryRow> summary = aggregate(records);
  REQUIRE(summary.size() == 2);
  for (const SummaryRow& row : summary) {
    CHECK(row.trials == 0);
    CHECK(std::isnan(row.mean_risk));
  }
}

TEST_CASE("aggregation groups converged rows and orders keys") {
  std::vector<TrialRecord> records;
  const auto push = [&](RegularizerKind kind, double lambda, int trial, double risk,
                        bool converged) {
    records.push_back(TrialRecord{Regime::Easy, kind, lambda, trial, risk, risk, converged});
  };
  push(RegularizerKind::ProductNorm, 0.1, 0, 3.0, true);
  push(RegularizerKind::ClassicSquaredNorm, 0.2, 0, 1.0, true);
  push(RegularizerKind::ClassicSquaredNorm, 0.1, 0, 2.0, true);
  push(RegularizerKind::ClassicSquaredNorm, 0.1, 1, 4.0, true);
  push(RegularizerKind::ClassicSquaredNorm, 0.1, 2, 100.0, false);  // excluded

  const std::vector<SummaryRow> rows = aggregate(records);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].regularizer == RegularizerKind::ClassicSquaredNorm);
  CHECK(rows[0].lambda == 0.1);
  CHECK(rows[1].regularizer == RegularizerKind::ClassicSquaredNorm);
  CHECK(rows[1].lambda == 0.2);
  CHECK(rows[2].regularizer == RegularizerKind::ProductNorm);

  // Mean 3, sample sd sqrt(2), stderr 1.
  CHECK(rows[0].trials == 2);
  CHECK(rows[0].mean_risk == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(rows[0].stderr_risk == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rows[0].ci_lo == doctest::Approx(3.0 - 1.96).epsilon(1e-12));
  CHECK(rows[0].ci_hi == doctest::Approx(3.0 + 1.96).epsilon(1e-12));

  // Single-trial groups have an undefined stderr and a collapsed interval.
  CHECK(rows[1].trials == 1);
  CHECK(std::isnan(rows[1].stderr_risk));
  CHECK(rows[1].ci_lo == rows[1].mean_risk);
  CHECK(rows[1].ci_hi == rows[1].mean_risk);

  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("aggregation intervals match the normal-theory width") {
  std::mt19937_64 gen(61);
  std::vector<TrialRecord> records;
  const double true_var = 0.09;
  std::normal_distribution<double> noise(2.0, std::sqrt(true_var));
  const int n = 400;
  for (int i = 0; i < n; ++i)
    records.push_back(TrialRecord{Regime::Hard, RegularizerKind::ProductNorm, 0.5, i,
                                  noise(gen), 0.0, true});
  const std::vector<SummaryRow> rows = aggregate(records);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == n);
  const double expected_half = 1.96 * std::sqrt(true_var / n);
  const double half = 0.5 * (rows[0].ci_hi - rows[0].ci_lo);
  CHECK(std::abs(half - expected_half) <= 0.15 * expected_half);
  CHECK(rows[0].ci_lo <= rows[0].mean_risk);
  CHECK(rows[0].mean_risk <= rows[0].ci_hi);

  // Identical values collapse the interval entirely.
  std::vector<TrialRecord> flat;
  for (int i = 0; i < 5; ++i)
    flat.push_back(TrialRecord{Regime::Easy, RegularizerKind::ClassicSquaredNorm, 0.1, i,
                               1.25, 1.25, true});
  const std::vector<SummaryRow> frow = aggregate(flat);
  CHECK(frow[0].stderr_risk == 0.0);
  CHECK(frow[0].ci_lo == frow[0].ci_hi);
}

TEST_CASE("csv emission uses pinned headers and round-trip precision") {
  std::vector<TrialRecord> records;
  records.push_back(
      TrialRecord{Regime::Easy, RegularizerKind::ClassicSquaredNorm, 0.1, 0, 1.0 / 3.0,
                  0.2, true});
  records.push_back(TrialRecord{Regime::Hard, RegularizerKind::ProductNorm, 1e-8, 1,
                                std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN(), false});
  const std::string text = records_csv(records);
  const std::size_t first_newline = text.find('\n');
  CHECK(text.substr(0, first_newline) ==
        "regime,regularizer,lambda,trial,population_risk,empirical_risk,converged");
  CHECK(text.find("easy,classic,") != std::string::npos);
  CHECK(text.find("hard,product,") != std::string::npos);
  CHECK(text.find("true") != std::string::npos);
  CHECK(text.find("false") != std::string::npos);

  // 17 significant digits reproduce the double exactly.
  const std::size_t row_start = text.find("easy,classic,");
  const std::size_t risk_field_start = text.find(",0,", row_start) + 3;
  const double parsed = std::strtod(text.c_str() + risk_field_start, nullptr);
  CHECK(parsed == 1.0 / 3.0);

  const std::vector<SummaryRow> rows = aggregate(records);
  const std::string summary = summary_csv(rows);
  CHECK(summary.substr(0, summary.find('\n')) ==
        "regime,regularizer,lambda,mean_risk,stderr,ci_lo,ci_hi,trials");
}

TEST_CASE("csv writers persist the exact in-memory text") {
  const ExperimentConfig config = [] {
    ExperimentConfig c = tiny_config();
    c.trials = 2;
    c.lambda_grid_classic = {1e-2};
    c.lambda_grid_product = {1e-2};
    return c;
  }();
  const std::vector<TrialRecord> records = run_sweep(config);
  const std::vector<SummaryRow> rows = aggregate(records);

  testutil::TempDir dir;
  const std::string rec_path = dir.file("records.csv");
  const std::string sum_path = dir.file("summary.csv");
  write_records_csv(records, rec_path);
  write_summary_csv(rows, sum_path);
  CHECK(testutil::read_file(rec_path) == records_csv(records));
  CHECK(testutil::read_file(sum_path) == summary_csv(rows));
}
