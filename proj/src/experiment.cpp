#include "mmddro/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace mmddro {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitRng::SplitRng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t t = splitmix64_next(s) + stream * 0x9E3779B97F4A7C15ULL;
  engine_.seed(splitmix64_next(t));
}

double SplitRng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SplitRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(theta);
  has_cached_ = true;
  return radius * std::cos(theta);
}

std::uint64_t SplitRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("SplitRng::below: n must be positive");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;  // multiple of n, so x % n is unbiased
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::vector<int> SplitRng::subsample(int n, int k) {
  if (n < 0 || k < 0 || k > n)
    throw std::invalid_argument("SplitRng::subsample: need 0 <= k <= n");
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

const char* regime_name(Regime regime) {
  return regime == Regime::Easy ? "easy" : "hard";
}

const char* regularizer_name(RegularizerKind kind) {
  return kind == RegularizerKind::ClassicSquaredNorm ? "classic" : "product";
}

namespace {

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return grid;
}

}  // namespace

ExperimentConfig default_config(Regime regime) {
  ExperimentConfig config;
  config.regime = regime;
  if (regime == Regime::Easy) {
    config.n_train = 1000;
    config.noise_var = 1e-2;
    config.trials = 100;
    config.lambda_grid_classic = log_spaced(1e-8, 1.0, 15);
    config.lambda_grid_product = log_spaced(1e-8, 1.0, 15);
  } else {
    config.n_train = 100;
    config.noise_var = 1.0;
    config.trials = 1000;
    config.lambda_grid_classic = log_spaced(1e-6, 1e2, 15);
    config.lambda_grid_product = log_spaced(1e-6, 1e2, 15);
  }
  config.ground_truth.anchors = Eigen::MatrixXd(2, 1);
  config.ground_truth.anchors << 1.0, -1.0;
  config.ground_truth.coefficients = Eigen::VectorXd(2);
  config.ground_truth.coefficients << 1.0, -1.0;
  return config;
}

namespace {

using nlohmann::json;

double as_real(const json& value, const std::string& key) {
  if (!value.is_number())
    throw std::invalid_argument("config: key '" + key + "' must be a number");
  return value.get<double>();
}

int as_count(const json& value, const std::string& key) {
  if (!value.is_number_integer())
    throw std::invalid_argument("config: key '" + key + "' must be an integer");
  return value.get<int>();
}

std::vector<double> as_grid(const json& value, const std::string& key) {
  if (!value.is_array() || value.empty())
    throw std::invalid_argument("config: key '" + key + "' must be a nonempty array");
  std::vector<double> grid;
  grid.reserve(value.size());
  for (const auto& item : value) grid.push_back(as_real(item, key));
  return grid;
}

GroundTruthSpec parse_ground_truth(const json& value) {
  if (!value.is_object() || !value.contains("anchors") || !value.contains("coefficients"))
    throw std::invalid_argument(
        "config: key 'ground_truth' must be an object with 'anchors' and 'coefficients'");
  for (const auto& [key, unused] : value.items()) {
    (void)unused;
    if (key != "anchors" && key != "coefficients")
      throw std::invalid_argument("config: unknown key 'ground_truth." + key + "'");
  }
  const json& anchors = value.at("anchors");
  const json& coeffs = value.at("coefficients");
  if (!anchors.is_array() || anchors.empty())
    throw std::invalid_argument("config: key 'ground_truth.anchors' must be a nonempty array");
  if (!coeffs.is_array() || coeffs.empty())
    throw std::invalid_argument(
        "config: key 'ground_truth.coefficients' must be a nonempty array");
  GroundTruthSpec spec;
  const Eigen::Index rows = static_cast<Eigen::Index>(anchors.size());
  if (anchors.front().is_array()) {
    const Eigen::Index dim = static_cast<Eigen::Index>(anchors.front().size());
    if (dim == 0)
      throw std::invalid_argument("config: key 'ground_truth.anchors' has an empty point");
    spec.anchors.resize(rows, dim);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const json& point = anchors.at(static_cast<std::size_t>(i));
      if (!point.is_array() || static_cast<Eigen::Index>(point.size()) != dim)
        throw std::invalid_argument(
            "config: key 'ground_truth.anchors' has points of mixed dimension");
      for (Eigen::Index j = 0; j < dim; ++j)
        spec.anchors(i, j) = as_real(point.at(static_cast<std::size_t>(j)), "ground_truth.anchors");
    }
  } else {
    spec.anchors.resize(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i)
      spec.anchors(i, 0) = as_real(anchors.at(static_cast<std::size_t>(i)), "ground_truth.anchors");
  }
  spec.coefficients.resize(static_cast<Eigen::Index>(coeffs.size()));
  for (Eigen::Index i = 0; i < spec.coefficients.size(); ++i)
    spec.coefficients[i] = as_real(coeffs.at(static_cast<std::size_t>(i)), "ground_truth.coefficients");
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw std::invalid_argument("config: top level must be a JSON object");

  Regime regime = Regime::Easy;
  if (doc.contains("regime")) {
    const json& value = doc.at("regime");
    if (!value.is_string())
      throw std::invalid_argument("config: key 'regime' must be \"easy\" or \"hard\"");
    const std::string name = value.get<std::string>();
    if (name == "easy")
      regime = Regime::Easy;
    else if (name == "hard")
      regime = Regime::Hard;
    else
      throw std::invalid_argument("config: key 'regime' must be \"easy\" or \"hard\"");
  }
  ExperimentConfig config = default_config(regime);

  // 'lambda_grid' seeds both per-regularizer grids; the specific keys win.
  if (doc.contains("lambda_grid")) {
    const auto grid = as_grid(doc.at("lambda_grid"), "lambda_grid");
    config.lambda_grid_classic = grid;
    config.lambda_grid_product = grid;
  }

  for (const auto& [key, value] : doc.items()) {
    if (key == "regime" || key == "lambda_grid") {
      continue;
    } else if (key == "sigma") {
      config.sigma = as_real(value, key);
    } else if (key == "ground_truth") {
      config.ground_truth = parse_ground_truth(value);
    } else if (key == "population_size") {
      config.population_size = as_count(value, key);
    } else if (key == "n_train") {
      config.n_train = as_count(value, key);
    } else if (key == "noise_var") {
      config.noise_var = as_real(value, key);
    } else if (key == "lambda_grid_classic") {
      config.lambda_grid_classic = as_grid(value, key);
    } else if (key == "lambda_grid_product") {
      config.lambda_grid_product = as_grid(value, key);
    } else if (key == "trials") {
      config.trials = as_count(value, key);
    } else if (key == "seed") {
      if (!value.is_number_integer() || (value.is_number_integer() && !value.is_number_unsigned() &&
                                         value.get<std::int64_t>() < 0))
        throw std::invalid_argument("config: key 'seed' must be a nonnegative integer");
      config.seed = value.get<std::uint64_t>();
    } else if (key == "regularizers") {
      if (!value.is_array() || value.empty())
        throw std::invalid_argument("config: key 'regularizers' must be a nonempty array");
      config.run_classic = false;
      config.run_product = false;
      for (const auto& item : value) {
        if (!item.is_string())
          throw std::invalid_argument("config: key 'regularizers' must list \"classic\"/\"product\"");
        const std::string name = item.get<std::string>();
        if (name == "classic")
          config.run_classic = true;
        else if (name == "product")
          config.run_product = true;
        else
          throw std::invalid_argument("config: unknown regularizer '" + name + "'");
      }
    } else if (key == "gd_max_iters") {
      config.gd.max_iters = as_count(value, key);
    } else if (key == "gd_tol") {
      config.gd.grad_tol = as_real(value, key);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  validate(config);
  return config;
}

void validate(const ExperimentConfig& config) {
  if (!std::isfinite(config.sigma) || config.sigma <= 0.0)
    throw std::invalid_argument("config: sigma must be positive and finite");
  if (config.population_size < 1)
    throw std::invalid_argument("config: population_size must be >= 1");
  if (config.n_train < 1) throw std::invalid_argument("config: n_train must be >= 1");
  if (config.n_train > config.population_size)
    throw std::invalid_argument("config: n_train cannot exceed population_size");
  if (!std::isfinite(config.noise_var) || config.noise_var < 0.0)
    throw std::invalid_argument("config: noise_var must be nonnegative and finite");
  if (config.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!config.run_classic && !config.run_product)
    throw std::invalid_argument("config: at least one regularizer must be enabled");
  auto check_grid = [](const std::vector<double>& grid, const char* name) {
    if (grid.empty())
      throw std::invalid_argument(std::string("config: ") + name + " must be nonempty");
    for (double lambda : grid)
      if (!std::isfinite(lambda) || lambda < 0.0)
        throw std::invalid_argument(std::string("config: ") + name +
                                    " entries must be nonnegative and finite");
  };
  if (config.run_classic) check_grid(config.lambda_grid_classic, "lambda_grid_classic");
  if (config.run_product) check_grid(config.lambda_grid_product, "lambda_grid_product");
  if (config.ground_truth.anchors.rows() == 0 ||
      config.ground_truth.anchors.rows() != config.ground_truth.coefficients.size())
    throw std::invalid_argument("config: ground_truth anchor and coefficient counts differ");
  if (config.ground_truth.anchors.cols() != 1)
    throw std::invalid_argument("config: ground_truth anchors must be one-dimensional points");
  if (!config.ground_truth.anchors.allFinite() || !config.ground_truth.coefficients.allFinite())
    throw std::invalid_argument("config: ground_truth values must be finite");
  if (config.gd.max_iters < 0)
    throw std::invalid_argument("config: gd_max_iters must be >= 0");
  if (!(config.gd.grad_tol > 0.0))
    throw std::invalid_argument("config: gd_tol must be positive");
}

RkhsFunction ground_truth_function(const ExperimentConfig& config) {
  return RkhsFunction(config.ground_truth.anchors, config.ground_truth.coefficients,
                      GaussianKernel(config.sigma));
}

WeightedSample make_population(const ExperimentConfig& config) {
  SplitRng rng(config.seed, 0);
  Eigen::MatrixXd points(config.population_size, 1);
  for (Eigen::Index i = 0; i < points.rows(); ++i) points(i, 0) = rng.normal();
  return WeightedSample::uniform(points);
}

std::pair<WeightedSample, RegressionProblem> synthesize(const ExperimentConfig& config,
                                                        int trial_index) {
  validate(config);
  if (trial_index < 0) throw std::invalid_argument("synthesize: trial_index must be >= 0");
  WeightedSample population = make_population(config);
  SplitRng rng(config.seed, static_cast<std::uint64_t>(trial_index) + 1);
  const std::vector<int> picked = rng.subsample(config.population_size, config.n_train);
  Eigen::MatrixXd train_x(config.n_train, population.points.cols());
  for (int i = 0; i < config.n_train; ++i)
    train_x.row(i) = population.points.row(picked[static_cast<std::size_t>(i)]);
  const RkhsFunction truth = ground_truth_function(config);
  Eigen::VectorXd train_y = evaluate_rows(truth, train_x);
  const double noise_sd = std::sqrt(config.noise_var);
  for (Eigen::Index i = 0; i < train_y.size(); ++i) train_y[i] += noise_sd * rng.normal();
  return {std::move(population),
          RegressionProblem(std::move(train_x), std::move(train_y), GaussianKernel(config.sigma))};
}

std::vector<TrialRecord> run_sweep(const ExperimentConfig& config, int threads) {
  validate(config);
  if (threads < 1) throw std::invalid_argument("run_sweep: threads must be >= 1");

  struct Task {
    RegularizerKind kind;
    double lambda;
  };
  std::vector<Task> tasks;
  if (config.run_classic)
    for (double lambda : config.lambda_grid_classic)
      tasks.push_back({RegularizerKind::ClassicSquaredNorm, lambda});
  if (config.run_product)
    for (double lambda : config.lambda_grid_product)
      tasks.push_back({RegularizerKind::ProductNorm, lambda});

  const WeightedSample population = make_population(config);
  const RkhsFunction truth = ground_truth_function(config);
  const Eigen::VectorXd truth_pop = evaluate_rows(truth, population.points);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int trial_count = config.trials;

  // Row layout is (task, trial): workers own whole trials and write at fixed
  // indices, so the output is identical for any thread count or schedule.
  std::vector<TrialRecord> records(tasks.size() * static_cast<std::size_t>(trial_count));
  std::atomic<int> next_trial{0};

  auto worker = [&]() {
    for (int trial = next_trial.fetch_add(1); trial < trial_count;
         trial = next_trial.fetch_add(1)) {
      auto store = [&](std::size_t task_index, const TrialRecord& rec) {
        records[task_index * static_cast<std::size_t>(trial_count) +
                static_cast<std::size_t>(trial)] = rec;
      };
      try {
        const auto [pop_copy, problem] = synthesize(config, trial);
        (void)pop_copy;  // the shared population above is the same sample
        const Eigen::MatrixXd cross =
            cross_matrix(problem.kernel, population.points, problem.train_x);
        for (std::size_t k = 0; k < tasks.size(); ++k) {
          TrialRecord rec{config.regime, tasks[k].kind, tasks[k].lambda, trial, nan, nan, false};
          try {
            const FitReport fit = tasks[k].kind == RegularizerKind::ClassicSquaredNorm
                                      ? fit_classic(problem, tasks[k].lambda)
                                      : fit_product_norm(problem, tasks[k].lambda, config.gd);
            const Eigen::VectorXd pred = cross * fit.model.coefficients;
            rec.population_risk = population.weights.dot((pred - truth_pop).cwiseAbs2());
            rec.empirical_risk = risk(fit.model, problem.train_x, problem.train_y);
            rec.converged = fit.converged;
          } catch (const std::exception&) {
            // failed fit: keep the NaN, non-converged row and move on
          }
          store(k, rec);
        }
      } catch (const std::exception&) {
        for (std::size_t k = 0; k < tasks.size(); ++k)
          store(k, {config.regime, tasks[k].kind, tasks[k].lambda, trial, nan, nan, false});
      }
    }
  };

  const int worker_count = std::min(threads, trial_count);
  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

std::vector<SummaryRow> aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  std::map<std::tuple<int, int, double>, std::vector<double>> groups;
  for (const TrialRecord& rec : records) {
    auto& values = groups[{static_cast<int>(rec.regime), static_cast<int>(rec.regularizer),
                           rec.lambda}];
    if (rec.converged) values.push_back(rec.population_risk);
  }
  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [key, values] : groups) {
    SummaryRow row;
    row.regime = static_cast<Regime>(std::get<0>(key));
    row.regularizer = static_cast<RegularizerKind>(std::get<1>(key));
    row.lambda = std::get<2>(key);
    row.trials = static_cast<int>(values.size());
    if (values.empty()) {
      row.mean_risk = nan;
      row.stderr_risk = nan;
      row.ci_lo = nan;
      row.ci_hi = nan;
    } else {
      double sum = 0.0;
      for (double v : values) sum += v;
      const double mean = sum / static_cast<double>(values.size());
      row.mean_risk = mean;
      if (values.size() < 2) {
        row.stderr_risk = nan;  // undefined; CI collapses to the point estimate
        row.ci_lo = mean;
        row.ci_hi = mean;
      } else {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double m = static_cast<double>(values.size());
        row.stderr_risk = std::sqrt(ss / (m - 1.0) / m);
        row.ci_lo = mean - 1.96 * row.stderr_risk;
        row.ci_hi = mean + 1.96 * row.stderr_risk;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

void append_real(std::string& out, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  out += buf;
}

}  // namespace

std::string records_csv(const std::vector<TrialRecord>& records) {
  std::string out = "regime,regularizer,lambda,trial,population_risk,empirical_risk,converged\n";
  for (const TrialRecord& rec : records) {
    out += regime_name(rec.regime);
    out += ',';
    out += regularizer_name(rec.regularizer);
    out += ',';
    append_real(out, rec.lambda);
    out += ',';
    out += std::to_string(rec.trial);
    out += ',';
    append_real(out, rec.population_risk);
    out += ',';
    append_real(out, rec.empirical_risk);
    out += ',';
    out += rec.converged ? "true" : "false";
    out += '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "regime,regularizer,lambda,mean_risk,stderr,ci_lo,ci_hi,trials\n";
  for (const SummaryRow& row : rows) {
    out += regime_name(row.regime);
    out += ',';
    out += regularizer_name(row.regularizer);
    out += ',';
    append_real(out, row.lambda);
    out += ',';
    append_real(out, row.mean_risk);
    out += ',';
    append_real(out, row.stderr_risk);
    out += ',';
    append_real(out, row.ci_lo);
    out += ',';
    append_real(out, row.ci_hi);
    out += ',';
    out += std::to_string(row.trials);
    out += '\n';
  }
  return out;
}

namespace {

void write_text_file(const std::string& text, const std::string& path) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream) throw std::runtime_error("cannot open '" + path + "' for writing");
  stream << text;
  if (!stream) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  write_text_file(records_csv(records), path);
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  write_text_file(summary_csv(rows), path);
}

}  // namespace mmddro
