#include "survkit/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "survkit/baseline.hpp"
#include "survkit/concordance.hpp"
#include "survkit/cox.hpp"
#include "survkit/cross_validation.hpp"
#include "survkit/csv.hpp"
#include "survkit/lasso.hpp"

namespace survkit {

Eigen::MatrixXd gen_covariates(int n, int d, CovariateDesign design, double rho,
                               Rng& rng) {
  if (n <= 0 || d <= 0) fail(ErrorCode::invalid_argument, "n and d must be positive");
  Eigen::MatrixXd x(n, d);
  switch (design) {
    case CovariateDesign::iid_normal:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
      break;
    case CovariateDesign::ar1: {
      if (!(rho > -1.0 && rho < 1.0))
        fail(ErrorCode::invalid_argument, "ar1 rho must be in (-1, 1)");
      const double innovation = std::sqrt(1.0 - rho * rho);
      for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        for (int j = 1; j < d; ++j)
          x(i, j) = rho * x(i, j - 1) + innovation * rng.normal();
      }
      break;
    }
  }
  return x;
}

SurvivalDraw gen_survival(const Eigen::MatrixXd& covariates,
                          const std::vector<int>& strata_labels,
                          const Eigen::VectorXd& beta_true,
                          const std::vector<double>& baseline_hazards,
                          const std::optional<std::pair<int, int>>& interaction,
                          double interaction_gamma, Rng& rng) {
  const int n = static_cast<int>(covariates.rows());
  if (static_cast<int>(strata_labels.size()) != n)
    fail(ErrorCode::invalid_argument, "strata labels length mismatch");
  if (beta_true.size() != covariates.cols())
    fail(ErrorCode::invalid_argument, "beta_true dimension mismatch");
  for (double h : baseline_hazards)
    if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "baseline hazards must be positive");

  // Map labels to positions in the hazard list via the sorted distinct labels.
  std::map<int, int> label_pos;
  for (int s : strata_labels) label_pos.emplace(s, 0);
  {
    int next = 0;
    for (auto& [label, pos] : label_pos) pos = next++;
  }
  if (label_pos.size() != baseline_hazards.size())
    fail(ErrorCode::invalid_argument,
         "need one baseline hazard per stratum, got " +
             std::to_string(baseline_hazards.size()) + " for " +
             std::to_string(label_pos.size()) + " strata");

  SurvivalDraw draw;
  draw.times.resize(n);
  draw.events.assign(n, 1);
  for (int i = 0; i < n; ++i) {
    double eta = covariates.row(i).dot(beta_true);
    if (interaction)
      eta += interaction_gamma * covariates(i, interaction->first) *
             covariates(i, interaction->second);
    eta = std::clamp(eta, -30.0, 30.0);
    const double hazard =
        baseline_hazards[label_pos[strata_labels[i]]] * std::exp(eta);
    draw.times[i] = -std::log(rng.uniform01()) / hazard;
  }
  return draw;
}

void apply_censoring(Eigen::VectorXd& times, std::vector<int>& events,
                     CensoringScheme scheme, double rate, Rng& rng) {
  if (scheme == CensoringScheme::none) return;
  if (!(rate > 0.0)) fail(ErrorCode::invalid_argument, "censoring rate must be positive");
  for (int i = 0; i < times.size(); ++i) {
    const double c = rng.exponential(rate);
    if (c < times[i]) {
      times[i] = c;
      events[i] = 0;
    }
  }
}

Dataset simulate_dataset(const SimConfig& config, Rng& rng) {
  Eigen::MatrixXd x =
      gen_covariates(config.n, config.d, config.design, config.ar1_rho, rng);
  std::vector<int> strata(config.n);
  for (int i = 0; i < config.n; ++i) strata[i] = i % config.n_strata + 1;
  SurvivalDraw draw =
      gen_survival(x, strata, config.beta_true, config.baseline_hazards,
                   config.interaction, config.interaction_gamma, rng);
  apply_censoring(draw.times, draw.events, config.censoring,
                  config.censoring_rate, rng);
  return Dataset(std::move(x), std::move(draw.times), std::move(draw.events),
                 std::move(strata));
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const Dataset& data, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::invalid_argument, "train_fraction must be in (0, 1)");
  std::vector<int> train, test;
  for (int k = 0; k < data.n_strata(); ++k) {
    std::vector<int> members = data.stratum_members(k);
    if (members.size() < 2)
      fail(ErrorCode::data_error, "stratum too small to split");
    rng.shuffle(members);
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    train.insert(train.end(), members.begin(), members.begin() + n_train);
    test.insert(test.end(), members.begin() + n_train, members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

namespace {

// type-7 quantile (linear interpolation), matching common stats software
double quantile(std::vector<double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) return 0.0;
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

MetricSummary summarize(const std::string& metric, std::vector<double> values) {
  MetricSummary s;
  s.metric = metric;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = s.n > 1 ? std::sqrt(ss / (s.n - 1)) : 0.0;
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  return s;
}

// Run `body(rep)` for every replication on a small worker pool. Each
// replication writes only its own slot, so the schedule cannot change results.
void parallel_replications(int n_replications, int threads,
                           const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n_replications));
  if (threads == 1) {
    for (int r = 0; r < n_replications; ++r) body(r);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= n_replications) return;
        body(r);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

struct RepOutcome {
  bool ok = false;
  std::string error;
  std::vector<ExperimentRow> rows;
};

void collect(ExperimentResult& result, std::vector<RepOutcome>& outcomes,
             const std::vector<std::string>& metric_order) {
  for (int r = 0; r < static_cast<int>(outcomes.size()); ++r) {
    if (!outcomes[r].ok) {
      result.failures.push_back("replication " + std::to_string(r + 1) + ": " +
                                outcomes[r].error);
      continue;
    }
    for (ExperimentRow& row : outcomes[r].rows)
      result.rows.push_back(std::move(row));
  }
  for (const std::string& metric : metric_order) {
    std::vector<double> values;
    for (const ExperimentRow& row : result.rows)
      if (row.metric == metric) values.push_back(row.value);
    result.summary.push_back(summarize(metric, std::move(values)));
  }
}

}  // namespace

ExperimentResult run_stratified_experiment(const StratifiedExperimentConfig& config,
                                           int n_replications, int threads) {
  if (n_replications <= 0)
    fail(ErrorCode::invalid_argument, "n_replications must be positive");
  ExperimentResult result;
  result.kind = "stratified";
  result.seed = config.sim.seed;
  result.n_replications = n_replications;

  std::vector<RepOutcome> outcomes(n_replications);
  parallel_replications(n_replications, threads, [&](int r) {
    RepOutcome& out = outcomes[r];
    try {
      Rng rng = Rng::substream(config.sim.seed, static_cast<std::uint64_t>(r));
      const Dataset data = simulate_dataset(config.sim, rng);
      auto [train_idx, test_idx] =
          stratified_split(data, config.train_fraction, rng);
      const Dataset train = data.subset(train_idx);
      const Dataset test = data.subset(test_idx);
      const CoxFit fit = fit_cox(train);

      const StratifiedConcordance within = cindex_within_strata(fit.beta, test);
      const ConcordanceReport all_pairs = cindex_linear_predictor(fit.beta, test);
      const ConcordanceReport adjusted =
          cindex_baseline_adjusted(train, test, fit.beta);
      if (!within.index || !all_pairs.index || !adjusted.index)
        fail(ErrorCode::data_error, "undefined concordance on test split");

      out.rows = {{r + 1, "within_stratum_cindex", *within.index, std::nullopt},
                  {r + 1, "linear_predictor_cindex", *all_pairs.index, std::nullopt},
                  {r + 1, "baseline_adjusted_cindex", *adjusted.index, std::nullopt}};
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  collect(result, outcomes,
          {"within_stratum_cindex", "linear_predictor_cindex",
           "baseline_adjusted_cindex"});
  return result;
}

ExperimentResult run_cv_experiment(const CvExperimentConfig& config,
                                   int n_replications, int threads) {
  if (n_replications <= 0)
    fail(ErrorCode::invalid_argument, "n_replications must be positive");
  ExperimentResult result;
  result.kind = "cv";
  result.seed = config.sim.seed;
  result.n_replications = n_replications;

  const CvMetric metrics[] = {CvMetric::deviance, CvMetric::within_fold_cindex,
                              CvMetric::baseline_adjusted_cindex};

  std::vector<RepOutcome> outcomes(n_replications);
  parallel_replications(n_replications, threads, [&](int r) {
    RepOutcome& out = outcomes[r];
    try {
      Rng rng = Rng::substream(config.sim.seed, static_cast<std::uint64_t>(r));
      const Dataset data = simulate_dataset(config.sim, rng);
      const std::vector<double> grid =
          lambda_grid(lambda_max(data), config.n_lambda, config.lambda_min_ratio);
      const std::uint64_t fold_seed = rng.next_u64();

      FitOptions options;
      options.max_iterations = 200;

      for (CvMetric metric : metrics) {
        const CvResult cv = cv_select_lambda(data, config.k_folds, grid, metric,
                                             fold_seed, options);
        const LassoFit refit =
            fit_lasso_cox(data, cv.selected_lambda, std::nullopt, options);
        const double mse = (refit.beta - config.sim.beta_true).squaredNorm();
        out.rows.push_back(
            {r + 1, cv_metric_name(metric), mse, cv.selected_lambda});
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  collect(result, outcomes,
          {"deviance", "within_fold_cindex", "baseline_adjusted_cindex"});
  return result;
}

namespace {

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
    } catch (...) {
      fail(ErrorCode::parse_error, "config key " + key + ": bad number '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorCode::parse_error, "config key " + key + " is empty");
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::parse_error,
           "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (!kv.emplace(key, value).second)
      fail(ErrorCode::parse_error, "config key duplicated: " + key);
  }

  const auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  const auto require = [&](const std::string& key) {
    auto v = take(key);
    if (!v) fail(ErrorCode::parse_error, "config key missing: " + key);
    return *v;
  };
  const auto to_int = [](const std::string& v, const std::string& key) {
    try {
      return std::stoi(v);
    } catch (...) {
      fail(ErrorCode::parse_error, "config key " + key + ": bad integer '" + v + "'");
    }
  };
  const auto to_double = [](const std::string& v, const std::string& key) {
    try {
      return std::stod(v);
    } catch (...) {
      fail(ErrorCode::parse_error, "config key " + key + ": bad number '" + v + "'");
    }
  };

  ExperimentConfig config;
  config.kind = require("experiment");
  if (config.kind != "stratified" && config.kind != "cv")
    fail(ErrorCode::parse_error, "experiment must be 'stratified' or 'cv'");

  SimConfig sim;
  sim.n = to_int(require("n"), "n");
  sim.d = to_int(require("d"), "d");
  sim.n_strata = to_int(take("n_strata").value_or("1"), "n_strata");

  const std::string design = take("covariate_design").value_or("iid_normal");
  if (design == "iid_normal") {
    sim.design = CovariateDesign::iid_normal;
  } else if (design == "ar1") {
    sim.design = CovariateDesign::ar1;
  } else {
    fail(ErrorCode::parse_error, "covariate_design must be iid_normal or ar1");
  }
  sim.ar1_rho = to_double(take("ar1_rho").value_or("0"), "ar1_rho");

  const std::vector<double> beta = parse_double_list(require("beta_true"), "beta_true");
  if (static_cast<int>(beta.size()) != sim.d)
    fail(ErrorCode::parse_error, "beta_true must list d values");
  sim.beta_true = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());

  sim.baseline_hazards = parse_double_list(require("baseline_hazards"), "baseline_hazards");
  if (sim.baseline_hazards.size() == 1 && sim.n_strata > 1)
    sim.baseline_hazards.assign(sim.n_strata, sim.baseline_hazards[0]);
  if (static_cast<int>(sim.baseline_hazards.size()) != sim.n_strata)
    fail(ErrorCode::parse_error, "baseline_hazards must list one value per stratum");

  const std::string censoring = take("censoring").value_or("none");
  if (censoring == "none") {
    sim.censoring = CensoringScheme::none;
  } else if (censoring == "exponential") {
    sim.censoring = CensoringScheme::exponential;
    sim.censoring_rate = to_double(require("censoring_rate"), "censoring_rate");
  } else {
    fail(ErrorCode::parse_error, "censoring must be none or exponential");
  }

  sim.seed = static_cast<std::uint64_t>(
      std::stoull(take("seed").value_or("1")));
  config.replications = to_int(require("replications"), "replications");

  if (config.kind == "stratified") {
    config.stratified.sim = sim;
    config.stratified.train_fraction =
        to_double(take("train_fraction").value_or("0.7"), "train_fraction");
  } else {
    if (auto inter = take("interaction"); inter && *inter != "none") {
      const std::vector<double> pair = parse_double_list(*inter, "interaction");
      if (pair.size() != 2)
        fail(ErrorCode::parse_error, "interaction must name two covariates");
      sim.interaction = {static_cast<int>(pair[0]) - 1,
                         static_cast<int>(pair[1]) - 1};
      if (sim.interaction->first < 0 || sim.interaction->first >= sim.d ||
          sim.interaction->second < 0 || sim.interaction->second >= sim.d)
        fail(ErrorCode::parse_error, "interaction covariates out of range");
      sim.interaction_gamma =
          to_double(take("interaction_gamma").value_or("1"), "interaction_gamma");
    }
    config.cv.sim = sim;
    config.cv.k_folds = to_int(take("k_folds").value_or("5"), "k_folds");
    config.cv.n_lambda = to_int(take("n_lambda").value_or("50"), "n_lambda");
    config.cv.lambda_min_ratio =
        to_double(take("lambda_min_ratio").value_or("0.05"), "lambda_min_ratio");
  }

  if (!kv.empty())
    fail(ErrorCode::parse_error, "unknown config key: " + kv.begin()->first);
  return config;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                int n_replications_override, int threads) {
  const int reps = n_replications_override > 0 ? n_replications_override
                                               : config.replications;
  if (config.kind == "stratified")
    return run_stratified_experiment(config.stratified, reps, threads);
  return run_cv_experiment(config.cv, reps, threads);
}

std::string experiment_rows_csv(const ExperimentResult& result) {
  std::string out = "replication,metric,value,selected_lambda\n";
  for (const ExperimentRow& row : result.rows) {
    out += std::to_string(row.replication);
    out += ',';
    out += row.metric;
    out += ',';
    out += format_double(row.value);
    out += ',';
    if (row.selected_lambda) out += format_double(*row.selected_lambda);
    out += '\n';
  }
  return out;
}

std::string experiment_summary_json(const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["experiment"] = result.kind;
  j["seed"] = result.seed;
  j["replications"] = result.n_replications;
  j["failed_replications"] = result.failures.size();
  j["metrics"] = nlohmann::ordered_json::array();
  for (const MetricSummary& s : result.summary) {
    j["metrics"].push_back({{"name", s.metric},
                            {"n", s.n},
                            {"mean", s.mean},
                            {"sd", s.sd},
                            {"min", s.min},
                            {"q1", s.q1},
                            {"median", s.median},
                            {"q3", s.q3},
                            {"max", s.max}});
  }
  j["failures"] = result.failures;
  return j.dump(2) + "\n";
}

}  // namespace survkit
