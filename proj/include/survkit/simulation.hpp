#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "survkit/dataset.hpp"
#include "survkit/rng.hpp"

namespace survkit {

enum class CovariateDesign { iid_normal, ar1 };
enum class CensoringScheme { none, exponential };

// Generator settings for one synthetic survival dataset. Strata are assigned
// round-robin so every stratum has (near) equal size.
struct SimConfig {
  int n = 0;
  int d = 0;
  Eigen::VectorXd beta_true;
  CovariateDesign design = CovariateDesign::iid_normal;
  double ar1_rho = 0.0;
  std::vector<double> baseline_hazards;  // constant hazard per stratum
  int n_strata = 1;
  CensoringScheme censoring = CensoringScheme::none;
  double censoring_rate = 0.0;
  // Optional unfitted interaction: gamma * X_a * X_b added to the linear part.
  std::optional<std::pair<int, int>> interaction;  // 0-based covariate indices
  double interaction_gamma = 0.0;
  std::uint64_t seed = 0;
};

// iid: standard normal entries. ar1: each row is a stationary AR(1) sequence
// across coordinates with unit marginal variance and lag-s correlation rho^s.
Eigen::MatrixXd gen_covariates(int n, int d, CovariateDesign design, double rho,
                               Rng& rng);

// Inverse-CDF draw under a constant per-stratum baseline hazard:
// T = -log(U) / (h0 * exp(eta)), eta clamped to [-30, 30] before
// exponentiation. All observations are events.
struct SurvivalDraw {
  Eigen::VectorXd times;
  std::vector<int> events;
};
SurvivalDraw gen_survival(const Eigen::MatrixXd& covariates,
                          const std::vector<int>& strata_labels,
                          const Eigen::VectorXd& beta_true,
                          const std::vector<double>& baseline_hazards,
                          const std::optional<std::pair<int, int>>& interaction,
                          double interaction_gamma, Rng& rng);

void apply_censoring(Eigen::VectorXd& times, std::vector<int>& events,
                     CensoringScheme scheme, double rate, Rng& rng);

Dataset simulate_dataset(const SimConfig& config, Rng& rng);

// Shuffle each stratum and put the leading train_fraction share in train;
// both sides keep every stratum. Returned index lists are ascending.
std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const Dataset& data, double train_fraction, Rng& rng);

struct StratifiedExperimentConfig {
  SimConfig sim;
  double train_fraction = 0.7;
};

struct CvExperimentConfig {
  SimConfig sim;
  int k_folds = 5;
  int n_lambda = 50;
  double lambda_min_ratio = 0.05;
};

struct ExperimentRow {
  int replication = 0;  // 1-based
  std::string metric;
  double value = 0.0;
  std::optional<double> selected_lambda;  // cv experiment only
};

struct MetricSummary {
  std::string metric;
  int n = 0;
  double mean = 0, sd = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct ExperimentResult {
  std::string kind;  // "stratified" | "cv"
  std::uint64_t seed = 0;
  int n_replications = 0;
  std::vector<ExperimentRow> rows;
  std::vector<MetricSummary> summary;
  std::vector<std::string> failures;  // "replication R: message"
};

// Per replication: simulate, split, fit the Cox model on train, and score the
// test set with the within-stratum, all-pairs linear-predictor, and
// baseline-adjusted C-indices. Replications run on `threads` workers with one
// RNG substream each, so results do not depend on the thread count.
ExperimentResult run_stratified_experiment(const StratifiedExperimentConfig& config,
                                           int n_replications, int threads = 1);

// Per replication: simulate, build a shared fold assignment and penalty grid,
// select lambda by each of the three metrics, refit on the full data at each
// selection, and record ||beta_hat - beta_true||^2 per metric (the unfitted
// interaction term is not part of the target).
ExperimentResult run_cv_experiment(const CvExperimentConfig& config,
                                   int n_replications, int threads = 1);

// Declarative key = value experiment description (see configs/).
struct ExperimentConfig {
  std::string kind;  // "stratified" | "cv"
  StratifiedExperimentConfig stratified;
  CvExperimentConfig cv;
  int replications = 0;
};
ExperimentConfig parse_experiment_config(const std::string& text);

ExperimentResult run_experiment(const ExperimentConfig& config,
                                int n_replications_override, int threads);

// Tidy CSV, one row per replication per metric.
std::string experiment_rows_csv(const ExperimentResult& result);
// Summary statistics per metric as JSON.
std::string experiment_summary_json(const ExperimentResult& result);

}  // namespace survkit
