#include "mmddro/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmddro/csv.hpp"
#include "mmddro/dro.hpp"
#include "mmddro/errors.hpp"
#include "mmddro/experiment.hpp"
#include "mmddro/kernel.hpp"
#include "mmddro/krr.hpp"
#include "mmddro/mmd.hpp"
#include "mmddro/rkhs.hpp"

namespace mmddro {

namespace {

using nlohmann::json;

// Non-finite doubles (eta_star on degenerate duals) serialize as JSON null.
void emit_json(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream stream(out_path, std::ios::binary);
    if (!stream) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    stream << text;
  }
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct MmdOpts {
  std::string file_p, file_q;
  double sigma = 1.0;
  double delta = 0.05;
};

void add_mmd_command(CLI::App& app) {
  auto opts = std::make_shared<MmdOpts>();
  CLI::App* cmd = app.add_subcommand(
      "mmd", "MMD between two point files, plus the concentration radius for |P|");
  cmd->add_option("P", opts->file_p, "CSV of sample P points")->required();
  cmd->add_option("Q", opts->file_q, "CSV of sample Q points")->required();
  cmd->add_option("--sigma", opts->sigma, "Gaussian kernel bandwidth");
  cmd->add_option("--delta", opts->delta, "confidence level for the radius line");
  cmd->callback([opts]() {
    const GaussianKernel kernel(opts->sigma);
    const WeightedSample P = WeightedSample::uniform(read_points_csv(opts->file_p));
    const WeightedSample Q = WeightedSample::uniform(read_points_csv(opts->file_q));
    const double value = mmd(kernel, P, Q);
    const Radius r = radius(static_cast<int>(P.points.rows()), opts->delta, 1.0);
    std::printf("%.17g\n", value);
    std::printf("radius %.17g\n", r.epsilon);
  });
}

struct AdvOpts {
  std::string loss_file, out;
  double sigma = 1.0;
  double epsilon = 0.0;
};

void add_adversary_command(CLI::App& app) {
  auto opts = std::make_shared<AdvOpts>();
  CLI::App* cmd = app.add_subcommand(
      "adversary", "worst-case reweighting of a discrete sample within an MMD ball");
  cmd->add_option("LOSS", opts->loss_file, "CSV with point columns and a 'loss' column")
      ->required();
  cmd->add_option("--sigma", opts->sigma, "Gaussian kernel bandwidth");
  cmd->add_option("--epsilon", opts->epsilon, "MMD ball radius")->required();
  cmd->add_option("--out", opts->out, "write JSON here instead of stdout");
  cmd->callback([opts]() {
    const LabeledData data = read_labeled_csv(opts->loss_file, "loss");
    const GaussianKernel kernel(opts->sigma);
    const AdversarySolution sol =
        discrete_adversary(data.label, matrix(kernel, data.x), opts->epsilon);
    json doc;
    doc["value"] = sol.value;
    doc["weights"] = vector_to_json(sol.weights);
    doc["lambda_star"] = sol.lambda_star;
    doc["eta_star"] = sol.eta_star;
    doc["penalty"] = sol.penalty;
    doc["nonnegativity_violated"] = sol.nonnegativity_violated;
    emit_json(doc, opts->out);
  });
}

struct BoundOpts {
  double risk = 0.0;
  int n = 0;
  double delta = 0.05;
  double lambda_f = 0.0, lambda_h = 0.0;
  double lambda_f2 = -1.0, lambda_h2 = -1.0;  // default: squares of the above
  std::string out;
};

void add_bound_command(CLI::App& app) {
  auto opts = std::make_shared<BoundOpts>();
  CLI::App* cmd =
      app.add_subcommand("bound", "square-loss generalization bound from norm budgets");
  cmd->add_option("--risk", opts->risk, "empirical risk");
  cmd->add_option("--n", opts->n, "sample count")->required();
  cmd->add_option("--delta", opts->delta, "confidence level");
  cmd->add_option("--lambda-f", opts->lambda_f, "norm budget for the model f")->required();
  cmd->add_option("--lambda-h", opts->lambda_h, "norm budget for the target h")->required();
  cmd->add_option("--lambda-f2", opts->lambda_f2, "norm budget for f^2 (default lambda_f^2)");
  cmd->add_option("--lambda-h2", opts->lambda_h2, "norm budget for h^2 (default lambda_h^2)");
  cmd->add_option("--out", opts->out, "write JSON here instead of stdout");
  cmd->callback([opts]() {
    const double f2 = opts->lambda_f2 < 0.0 ? opts->lambda_f * opts->lambda_f : opts->lambda_f2;
    const double h2 = opts->lambda_h2 < 0.0 ? opts->lambda_h * opts->lambda_h : opts->lambda_h2;
    const BoundReport report = krr_generalization_bound(opts->risk, opts->n, opts->delta, f2,
                                                        h2, opts->lambda_f, opts->lambda_h);
    json doc;
    doc["empirical_risk"] = report.empirical_risk;
    doc["epsilon"] = report.epsilon;
    doc["lambda_f2"] = report.lambda_f2;
    doc["lambda_h2"] = report.lambda_h2;
    doc["lambda_f"] = report.lambda_f;
    doc["lambda_h"] = report.lambda_h;
    doc["bound"] = report.bound;
    emit_json(doc, opts->out);
  });
}

struct FitOpts {
  std::string train_file, regularizer, out;
  double sigma = 1.0;
  double lambda = 0.0;
};

void add_fit_command(CLI::App& app) {
  auto opts = std::make_shared<FitOpts>();
  CLI::App* cmd = app.add_subcommand("fit", "kernel ridge fit with either regularizer");
  cmd->add_option("TRAIN", opts->train_file, "CSV with point columns and a 'y' column")
      ->required();
  cmd->add_option("--sigma", opts->sigma, "Gaussian kernel bandwidth");
  cmd->add_option("--lambda", opts->lambda, "regularization weight")->required();
  cmd->add_option("--regularizer", opts->regularizer, "classic | product")
      ->required()
      ->check(CLI::IsMember({"classic", "product"}));
  cmd->add_option("--out", opts->out, "write JSON here instead of stdout");
  cmd->callback([opts]() {
    const LabeledData data = read_labeled_csv(opts->train_file, "y");
    const RegressionProblem problem(data.x, data.label, GaussianKernel(opts->sigma));
    const FitReport fit = opts->regularizer == "classic"
                              ? fit_classic(problem, opts->lambda)
                              : fit_product_norm(problem, opts->lambda);
    json doc;
    doc["regularizer"] = regularizer_name(fit.regularizer);
    doc["lambda"] = fit.lambda;
    doc["sigma"] = opts->sigma;
    doc["anchors"] = matrix_to_json(fit.model.anchors);
    doc["coefficients"] = vector_to_json(fit.model.coefficients);
    doc["final_objective"] = fit.final_objective;
    doc["iterations"] = fit.iterations;
    doc["converged"] = fit.converged;
    doc["empirical_risk"] = risk(fit.model, data.x, data.label);
    emit_json(doc, opts->out);
  });
}

struct ExpOpts {
  std::string config_file;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

void add_experiment_command(CLI::App& app) {
  auto opts = std::make_shared<ExpOpts>();
  CLI::App* cmd =
      app.add_subcommand("experiment", "lambda-sweep benchmark; writes records.csv, summary.csv");
  cmd->add_option("--config", opts->config_file, "JSON experiment config")->required();
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--seed", opts->seed, "override the config seed")
      ->each([opts](const std::string&) { opts->seed_given = true; });
  cmd->add_option("--threads", opts->threads, "worker threads for the trial loop");
  cmd->callback([opts]() {
    std::ifstream stream(opts->config_file);
    if (!stream) throw std::runtime_error("cannot open '" + opts->config_file + "'");
    std::ostringstream text;
    text << stream.rdbuf();
    ExperimentConfig config = parse_config(text.str());
    if (opts->seed_given) config.seed = opts->seed;
    const std::vector<TrialRecord> records = run_sweep(config, opts->threads);
    const std::vector<SummaryRow> summary = aggregate(records);
    std::filesystem::create_directories(opts->out_dir);
    const std::string records_path =
        (std::filesystem::path(opts->out_dir) / "records.csv").string();
    const std::string summary_path =
        (std::filesystem::path(opts->out_dir) / "summary.csv").string();
    write_records_csv(records, records_path);
    write_summary_csv(summary, summary_path);
    std::cout << "wrote " << records_path << "\n";
    std::cout << "wrote " << summary_path << "\n";
  });
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"MMD-ball distributionally robust toolkit"};
  app.require_subcommand(1);
  add_mmd_command(app);
  add_adversary_command(app);
  add_bound_command(app);
  add_fit_command(app);
  add_experiment_command(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mmddro
