#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "survkit/cox.hpp"
#include "survkit/dataset.hpp"

namespace survkit {

// Stratified fold assignment: fold sizes differ by at most one globally and
// within every stratum. Deterministic given the seed.
struct FoldAssignment {
  std::vector<int> fold;  // 0-based fold index per observation
  int k_folds = 0;
  std::uint64_t seed = 0;

  std::vector<std::vector<int>> fold_members() const;
  std::vector<int> complement(int fold_index) const;
};

FoldAssignment kfold_split(const Dataset& data, int k_folds, std::uint64_t seed);

// Held-out partial log-likelihood: the validation fold's own risk sets
// evaluated at the training-fold coefficients.
double heldout_partial_likelihood(const Eigen::VectorXd& train_beta,
                                  const Dataset& validation);

// Unweighted mean over folds (with at least one comparable pair) of the
// per-fold C-index of -beta_fold^T X.
std::optional<double> cv_within_fold_cindex(
    const std::vector<Eigen::VectorXd>& fold_betas,
    const std::vector<Dataset>& folds);

// Pooled baseline-adjusted C-index for one penalty: fit on each training
// complement, estimate its baselines, predict the held-out fold, then score
// every comparable pair among all predicted observations, across folds.
// Observations whose stratum has no training events are excluded and counted.
double cv_baseline_adjusted_cindex(const Dataset& data,
                                   const FoldAssignment& assignment,
                                   double lambda, const FitOptions& options = {},
                                   long long* n_excluded = nullptr);

enum class CvMetric { deviance, within_fold_cindex, baseline_adjusted_cindex };

std::string cv_metric_name(CvMetric metric);
CvMetric cv_metric_from_name(const std::string& name);

struct CvFoldDiagnostics {
  int fold = 0;  // 1-based
  long long n = 0;
  long long n_events = 0;
  int n_nonconverged = 0;          // fits over the grid without KKT convergence
  int n_failed = 0;                // fits that threw
  long long n_excluded_predictions = 0;  // summed over the grid
};

// All three metrics are stored in maximization orientation (the held-out
// likelihood is the negated deviance up to scale).
struct CvResult {
  std::vector<double> lambdas;
  CvMetric metric = CvMetric::deviance;
  std::vector<std::optional<double>> scores;
  int selected_index = -1;
  double selected_lambda = 0.0;
  std::uint64_t seed = 0;
  int k_folds = 0;
  std::vector<CvFoldDiagnostics> folds;
};

// One shared fold assignment across all lambdas; fold fits warm-started in
// path order (lambdas must be positive, strictly decreasing). Ties on the
// score select the larger lambda.
CvResult cv_select_lambda(const Dataset& data, int k_folds,
                          const std::vector<double>& lambdas, CvMetric metric,
                          std::uint64_t seed, const FitOptions& options = {});

}  // namespace survkit
