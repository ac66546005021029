#include "survkit/cross_validation.hpp"

#include <algorithm>
#include <cmath>

#include "survkit/baseline.hpp"
#include "survkit/concordance.hpp"
#include "survkit/lasso.hpp"
#include "survkit/rng.hpp"

namespace survkit {

std::vector<std::vector<int>> FoldAssignment::fold_members() const {
  std::vector<std::vector<int>> members(k_folds);
  for (int i = 0; i < static_cast<int>(fold.size()); ++i)
    members[fold[i]].push_back(i);
  return members;
}

std::vector<int> FoldAssignment::complement(int fold_index) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(fold.size()); ++i)
    if (fold[i] != fold_index) out.push_back(i);
  return out;
}

FoldAssignment kfold_split(const Dataset& data, int k_folds, std::uint64_t seed) {
  if (k_folds < 2) fail(ErrorCode::invalid_argument, "k_folds must be >= 2");
  std::string undersized;
  for (int k = 0; k < data.n_strata(); ++k) {
    if (static_cast<int>(data.stratum_members(k).size()) < k_folds) {
      if (!undersized.empty()) undersized += ", ";
      undersized += std::to_string(data.strata_labels()[k]);
    }
  }
  if (!undersized.empty())
    fail(ErrorCode::undersized_strata,
         "strata with fewer observations than folds: " + undersized);

  FoldAssignment assignment;
  assignment.fold.resize(data.n());
  assignment.k_folds = k_folds;
  assignment.seed = seed;

  // Shuffle within each stratum, then deal into folds with a counter that
  // runs on across strata; this keeps both the global and the per-stratum
  // fold sizes within one of each other.
  Rng rng(seed);
  int counter = 0;
  for (int k = 0; k < data.n_strata(); ++k) {
    std::vector<int> members = data.stratum_members(k);
    rng.shuffle(members);
    for (int i : members) assignment.fold[i] = counter++ % k_folds;
  }
  return assignment;
}

double heldout_partial_likelihood(const Eigen::VectorXd& train_beta,
                                  const Dataset& validation) {
  return partial_log_likelihood(validation, train_beta);
}

std::optional<double> cv_within_fold_cindex(
    const std::vector<Eigen::VectorXd>& fold_betas,
    const std::vector<Dataset>& folds) {
  if (fold_betas.size() != folds.size())
    fail(ErrorCode::invalid_argument, "one beta per fold required");
  double sum = 0.0;
  int defined = 0;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    ConcordanceReport r = cindex_linear_predictor(fold_betas[k], folds[k]);
    if (r.index) {
      sum += *r.index;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / defined;
}

namespace {

// Predictions for one fold pooled into the full-length arrays.
void pool_fold_predictions(const Dataset& data, const std::vector<int>& members,
                           const Dataset& train, const Eigen::VectorXd& beta,
                           std::vector<std::optional<double>>& pooled,
                           long long& n_excluded) {
  const BaselineSet baselines = breslow_cumhaz(train, beta);
  const Dataset validation = data.subset(members);
  const PredictionOutcome pred =
      predict_times_dropping(beta, baselines, validation);
  n_excluded += pred.n_dropped;
  for (std::size_t r = 0; r < members.size(); ++r)
    pooled[members[r]] = pred.times[r];
}

std::optional<double> pooled_cindex(const Dataset& data,
                                    const std::vector<std::optional<double>>& pooled) {
  std::vector<double> scores, times;
  std::vector<int> events;
  for (int i = 0; i < data.n(); ++i) {
    if (!pooled[i]) continue;
    scores.push_back(*pooled[i]);
    times.push_back(data.times()[i]);
    events.push_back(data.events()[i]);
  }
  return cindex_from_scores(scores, times, events).index;
}

}  // namespace

double cv_baseline_adjusted_cindex(const Dataset& data,
                                   const FoldAssignment& assignment,
                                   double lambda, const FitOptions& options,
                                   long long* n_excluded) {
  if (static_cast<int>(assignment.fold.size()) != data.n())
    fail(ErrorCode::invalid_argument, "fold assignment does not match dataset");
  const std::vector<std::vector<int>> members = assignment.fold_members();
  std::vector<std::optional<double>> pooled(data.n());
  long long excluded = 0;
  for (int k = 0; k < assignment.k_folds; ++k) {
    const Dataset train = data.subset(assignment.complement(k));
    const LassoFit fit = fit_lasso_cox(train, lambda, std::nullopt, options);
    pool_fold_predictions(data, members[k], train, fit.beta, pooled, excluded);
  }
  if (n_excluded) *n_excluded = excluded;
  std::optional<double> index = pooled_cindex(data, pooled);
  if (!index)
    fail(ErrorCode::data_error, "no comparable pairs among predicted observations");
  return *index;
}

std::string cv_metric_name(CvMetric metric) {
  switch (metric) {
    case CvMetric::deviance: return "deviance";
    case CvMetric::within_fold_cindex: return "within_fold_cindex";
    case CvMetric::baseline_adjusted_cindex: return "baseline_adjusted_cindex";
  }
  fail(ErrorCode::internal, "unknown metric");
}

CvMetric cv_metric_from_name(const std::string& name) {
  if (name == "deviance") return CvMetric::deviance;
  if (name == "within_fold_cindex" || name == "within-fold-cindex")
    return CvMetric::within_fold_cindex;
  if (name == "baseline_adjusted_cindex" || name == "baseline-adjusted-cindex")
    return CvMetric::baseline_adjusted_cindex;
  fail(ErrorCode::invalid_argument, "unknown cv metric: " + name);
}

CvResult cv_select_lambda(const Dataset& data, int k_folds,
                          const std::vector<double>& lambdas, CvMetric metric,
                          std::uint64_t seed, const FitOptions& options) {
  if (lambdas.empty()) fail(ErrorCode::invalid_argument, "empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0))
      fail(ErrorCode::invalid_argument, "lambdas must be positive");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      fail(ErrorCode::invalid_argument, "lambdas must be strictly decreasing");
  }

  const int n_lambda = static_cast<int>(lambdas.size());
  CvResult result;
  result.lambdas = lambdas;
  result.metric = metric;
  result.seed = seed;
  result.k_folds = k_folds;

  const FoldAssignment assignment = kfold_split(data, k_folds, seed);
  const std::vector<std::vector<int>> members = assignment.fold_members();

  std::vector<Dataset> trains, validations;
  trains.reserve(k_folds);
  validations.reserve(k_folds);
  for (int k = 0; k < k_folds; ++k) {
    trains.push_back(data.subset(assignment.complement(k)));
    validations.push_back(data.subset(members[k]));
    CvFoldDiagnostics diag;
    diag.fold = k + 1;
    diag.n = validations.back().n();
    diag.n_events = validations.back().n_events();
    result.folds.push_back(diag);
  }

  // Warm-started path per fold; a throwing fit marks that (fold, lambda) as
  // failed without aborting the grid.
  std::vector<std::vector<std::optional<Eigen::VectorXd>>> betas(
      k_folds, std::vector<std::optional<Eigen::VectorXd>>(n_lambda));
  for (int k = 0; k < k_folds; ++k) {
    std::optional<Eigen::VectorXd> warm;
    for (int li = 0; li < n_lambda; ++li) {
      try {
        LassoFit fit = fit_lasso_cox(trains[k], lambdas[li], warm, options);
        if (!fit.converged) ++result.folds[k].n_nonconverged;
        warm = fit.beta;
        betas[k][li] = std::move(fit.beta);
      } catch (const Error&) {
        ++result.folds[k].n_failed;
      }
    }
  }

  result.scores.resize(n_lambda);
  for (int li = 0; li < n_lambda; ++li) {
    switch (metric) {
      case CvMetric::deviance: {
        double sum = 0.0;
        int used = 0;
        for (int k = 0; k < k_folds; ++k) {
          if (!betas[k][li]) continue;
          sum += heldout_partial_likelihood(*betas[k][li], validations[k]);
          ++used;
        }
        if (used > 0) result.scores[li] = sum;
        break;
      }
      case CvMetric::within_fold_cindex: {
        double sum = 0.0;
        int defined = 0;
        for (int k = 0; k < k_folds; ++k) {
          if (!betas[k][li]) continue;
          ConcordanceReport r =
              cindex_linear_predictor(*betas[k][li], validations[k]);
          if (r.index) {
            sum += *r.index;
            ++defined;
          }
        }
        if (defined > 0) result.scores[li] = sum / defined;
        break;
      }
      case CvMetric::baseline_adjusted_cindex: {
        std::vector<std::optional<double>> pooled(data.n());
        int used = 0;
        for (int k = 0; k < k_folds; ++k) {
          if (!betas[k][li]) continue;
          long long excluded = 0;
          pool_fold_predictions(data, members[k], trains[k], *betas[k][li],
                                pooled, excluded);
          result.folds[k].n_excluded_predictions += excluded;
          ++used;
        }
        if (used > 0) result.scores[li] = pooled_cindex(data, pooled);
        break;
      }
    }
  }

  result.selected_index = -1;
  for (int li = 0; li < n_lambda; ++li) {
    if (!result.scores[li]) continue;
    if (result.selected_index < 0 ||
        *result.scores[li] > *result.scores[result.selected_index])
      result.selected_index = li;  // ties keep the earlier (larger) lambda
  }
  if (result.selected_index < 0)
    fail(ErrorCode::data_error, "every lambda was undefined in cross-validation");
  result.selected_lambda = lambdas[result.selected_index];
  return result;
}

}  // namespace survkit
