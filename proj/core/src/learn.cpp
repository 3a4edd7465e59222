#include "facedyn/learn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "facedyn/errors.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/stats.hpp"
#include "json.hpp"

namespace facedyn::learn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_trainable(const Dataset& data) {
  if (data.n_rows() == 0) throw std::invalid_argument("empty training set");
  for (double v : data.x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite feature value in training set");
    }
  }
  std::set<int> classes(data.y.begin(), data.y.end());
  if (classes.size() < 2) {
    throw std::invalid_argument("training labels contain a single class");
  }
}

std::string fingerprint(const Dataset& data) {
  // cheap order-sensitive hash of the training matrix
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  mix(data.n_rows());
  mix(data.n_cols());
  for (double v : data.x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    mix(bits);
  }
  for (int v : data.y) mix(static_cast<std::uint64_t>(v));
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

// --- logistic regression (binary, IRLS with a small ridge) ---

std::vector<double> fit_logistic(const Dataset& data, double ridge) {
  const std::size_t n = data.n_rows(), p = data.n_cols();
  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd target(n);
  for (std::size_t r = 0; r < n; ++r) {
    design(r, 0) = 1.0;
    for (std::size_t c = 0; c < p; ++c) design(r, c + 1) = data.row(r)[c];
    target(r) = data.y[r] == 1 ? 1.0 : 0.0;
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd mu(n), weight(n);
    for (std::size_t r = 0; r < n; ++r) {
      mu(r) = sigmoid(eta(r));
      weight(r) = std::max(mu(r) * (1.0 - mu(r)), 1e-10);
    }
    Eigen::MatrixXd wx = weight.asDiagonal() * design;
    Eigen::MatrixXd hessian = design.transpose() * wx;
    hessian.diagonal().array() += ridge;
    const Eigen::VectorXd gradient =
        design.transpose() * (target - mu) - ridge * beta;
    const Eigen::VectorXd step = hessian.ldlt().solve(gradient);
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-10) break;
  }
  return std::vector<double>(beta.data(), beta.data() + beta.size());
}

// --- SVM with RBF kernel (SMO) + Platt scaling ---

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;
};

SmoResult smo_train(const std::vector<double>& gram,
                    const std::vector<double>& y_pm, double c,
                    std::uint64_t seed, double tol = 1e-3) {
  const std::size_t n = y_pm.size();
  SmoResult result;
  result.alpha.assign(n, 0.0);
  Rng rng(seed);

  const auto decision = [&](std::size_t i) {
    double f = result.bias;
    for (std::size_t j = 0; j < n; ++j) {
      if (result.alpha[j] > 0.0) {
        f += result.alpha[j] * y_pm[j] * gram[j * n + i];
      }
    }
    return f;
  };

  int passes = 0;
  const int max_passes = 8;
  int guard = 0;
  while (passes < max_passes && guard++ < 5000) {
    int changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double err_i = decision(i) - y_pm[i];
      const bool violates = (y_pm[i] * err_i < -tol &&
                             result.alpha[i] < c) ||
                            (y_pm[i] * err_i > tol && result.alpha[i] > 0.0);
      if (!violates) continue;
      std::size_t j = rng.uniform_index(n - 1);
      if (j >= i) ++j;
      const double err_j = decision(j) - y_pm[j];

      const double ai_old = result.alpha[i], aj_old = result.alpha[j];
      double lo, hi;
      if (y_pm[i] != y_pm[j]) {
        lo = std::max(0.0, aj_old - ai_old);
        hi = std::min(c, c + aj_old - ai_old);
      } else {
        lo = std::max(0.0, ai_old + aj_old - c);
        hi = std::min(c, ai_old + aj_old);
      }
      if (lo >= hi) continue;
      const double eta =
          2.0 * gram[i * n + j] - gram[i * n + i] - gram[j * n + j];
      if (eta >= 0.0) continue;
      double aj = aj_old - y_pm[j] * (err_i - err_j) / eta;
      aj = std::clamp(aj, lo, hi);
      if (std::fabs(aj - aj_old) < 1e-6) continue;
      const double ai = ai_old + y_pm[i] * y_pm[j] * (aj_old - aj);
      result.alpha[i] = ai;
      result.alpha[j] = aj;

      const double b1 = result.bias - err_i -
                        y_pm[i] * (ai - ai_old) * gram[i * n + i] -
                        y_pm[j] * (aj - aj_old) * gram[i * n + j];
      const double b2 = result.bias - err_j -
                        y_pm[i] * (ai - ai_old) * gram[i * n + j] -
                        y_pm[j] * (aj - aj_old) * gram[j * n + j];
      if (ai > 0.0 && ai < c) {
        result.bias = b1;
      } else if (aj > 0.0 && aj < c) {
        result.bias = b2;
      } else {
        result.bias = 0.5 * (b1 + b2);
      }
      ++changed;
    }
    passes = changed == 0 ? passes + 1 : 0;
  }
  return result;
}

/// Platt's sigmoid fit on decision values (Lin-Weng-Keerthi Newton form).
std::pair<double, double> platt_fit(const std::vector<double>& decisions,
                                    const std::vector<int>& labels01) {
  const std::size_t n = decisions.size();
  double prior1 = 0.0;
  for (int y : labels01) prior1 += y;
  const double prior0 = static_cast<double>(n) - prior1;

  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    target[i] = labels01[i] == 1 ? hi_target : lo_target;
  }

  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const auto objective = [&](double aa, double bb) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = decisions[i] * aa + bb;
      // numerically safe log(1 + exp)
      if (f >= 0.0) {
        obj += target[i] * f + std::log1p(std::exp(-f));
      } else {
        obj += (target[i] - 1.0) * f + std::log1p(std::exp(f));
      }
    }
    return obj;
  };

  double best = objective(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = decisions[i] * a + b;
      const double p = f >= 0.0 ? std::exp(-f) / (1.0 + std::exp(-f))
                                : 1.0 / (1.0 + std::exp(f));
      const double q = 1.0 - p;
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = target[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-7 && std::fabs(g2) < 1e-7) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    double step = 1.0;
    while (step >= 1e-10) {
      const double trial = objective(a + step * da, b + step * db);
      if (trial < best + 1e-10) {
        a += step * da;
        b += step * db;
        best = trial;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  return {a, b};
}

double rbf_kernel(const double* a, const double* b, std::size_t p,
                  double gamma) {
  double dist = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double d = a[i] - b[i];
    dist += d * d;
  }
  return std::exp(-gamma * dist);
}

}  // namespace

// Dataset helpers -----------------------------------------------------------

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.class_labels = class_labels;
  for (auto r : rows) {
    out.ids.push_back(ids.empty() ? std::to_string(r) : ids[r]);
    out.y.push_back(y[r]);
    out.x.insert(out.x.end(), x.begin() + r * n_cols(),
                 x.begin() + (r + 1) * n_cols());
  }
  return out;
}

double PredictionSet::accuracy() const {
  if (items.empty()) return 0.0;
  double correct = 0.0;
  for (const auto& p : items) correct += p.predicted == p.true_class ? 1 : 0;
  return correct / static_cast<double>(items.size());
}

std::vector<double> PredictionSet::scores() const {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& p : items) out.push_back(p.score());
  return out;
}

std::vector<int> PredictionSet::binary_labels() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& p : items) out.push_back(p.true_class == 1 ? 1 : 0);
  return out;
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kRandomForest: return "random_forest";
    case Algorithm::kLogisticRegression: return "logistic_regression";
    case Algorithm::kSvmRbf: return "svm_rbf";
    case Algorithm::kBoostedTrees: return "boosted_trees";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "random_forest") return Algorithm::kRandomForest;
  if (name == "logistic_regression") return Algorithm::kLogisticRegression;
  if (name == "svm_rbf") return Algorithm::kSvmRbf;
  if (name == "boosted_trees") return Algorithm::kBoostedTrees;
  throw ConfigError("unknown classifier algorithm: " + name);
}

// TrainedClassifier ----------------------------------------------------------

TrainedClassifier TrainedClassifier::fit(const ClassifierSpec& spec,
                                         const Dataset& data) {
  require_trainable(data);
  const int n_classes = data.n_classes();
  if (n_classes > 2 && (spec.algorithm == Algorithm::kLogisticRegression ||
                        spec.algorithm == Algorithm::kSvmRbf)) {
    throw std::invalid_argument(to_string(spec.algorithm) +
                                " supports binary labels only");
  }

  TrainedClassifier model;
  model.spec_ = spec;
  model.feature_names_ = data.feature_names;
  model.class_labels_ = data.class_labels;
  model.train_fingerprint_ = fingerprint(data);

  switch (spec.algorithm) {
    case Algorithm::kRandomForest: {
      forest::Options options;
      options.n_trees = spec.hp.trees;
      options.mtry = spec.hp.mtry;
      options.max_depth = spec.hp.max_depth;
      options.bootstrap = spec.hp.bootstrap;
      options.seed = spec.seed;
      options.compute_importance = true;
      std::vector<double> targets(data.y.begin(), data.y.end());
      model.forest_ = std::make_shared<forest::RandomForest>(
          forest::RandomForest::fit(data.view(), targets,
                                    forest::RandomForest::Task::kClassify,
                                    n_classes, options));
      break;
    }
    case Algorithm::kLogisticRegression: {
      model.lr_coefficients_ = fit_logistic(data, spec.hp.ridge);
      break;
    }
    case Algorithm::kSvmRbf: {
      const std::size_t n = data.n_rows(), p = data.n_cols();
      const double gamma = spec.hp.svm_gamma > 0.0
                               ? spec.hp.svm_gamma
                               : 1.0 / static_cast<double>(p);
      std::vector<double> gram(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double k = rbf_kernel(data.row(i), data.row(j), p, gamma);
          gram[i * n + j] = k;
          gram[j * n + i] = k;
        }
      }
      std::vector<double> y_pm(n);
      for (std::size_t i = 0; i < n; ++i) y_pm[i] = data.y[i] == 1 ? 1.0 : -1.0;
      const auto smo = smo_train(gram, y_pm, spec.hp.svm_c, spec.seed);

      auto state = std::make_shared<SvmState>();
      state->gamma = gamma;
      state->bias = smo.bias;
      state->n_features = p;
      std::vector<double> decisions(n, smo.bias);
      for (std::size_t i = 0; i < n; ++i) {
        if (smo.alpha[i] <= 0.0) continue;
        state->dual_times_y.push_back(smo.alpha[i] * y_pm[i]);
        state->support_rows.insert(state->support_rows.end(), data.row(i),
                                   data.row(i) + p);
      }
      for (std::size_t i = 0; i < n; ++i) {
        double f = smo.bias;
        const std::size_t n_sv = state->dual_times_y.size();
        for (std::size_t s = 0; s < n_sv; ++s) {
          f += state->dual_times_y[s] *
               rbf_kernel(state->support_rows.data() + s * p, data.row(i), p,
                          gamma);
        }
        decisions[i] = f;
      }
      std::vector<int> labels01(n);
      for (std::size_t i = 0; i < n; ++i) labels01[i] = data.y[i] == 1 ? 1 : 0;
      const auto [a, b] = platt_fit(decisions, labels01);
      state->platt_a = a;
      state->platt_b = b;
      model.svm_ = std::move(state);
      break;
    }
    case Algorithm::kBoostedTrees: {
      auto state = std::make_shared<BoostedState>();
      state->n_classes = n_classes;
      state->learning_rate = spec.hp.learning_rate;
      state->rounds_per_class = spec.hp.boost_rounds;
      const std::size_t n = data.n_rows();

      // one-vs-rest additive models on logistic loss
      for (int cls = 0; cls < (n_classes == 2 ? 1 : n_classes); ++cls) {
        std::vector<double> score(n, 0.0);
        double pos = 0.0;
        const int positive = n_classes == 2 ? 1 : cls;
        for (std::size_t i = 0; i < n; ++i) {
          pos += data.y[i] == positive ? 1.0 : 0.0;
        }
        const double base =
            std::log(std::max(pos, 0.5) /
                     std::max(static_cast<double>(n) - pos, 0.5));
        state->base_score.push_back(base);
        std::fill(score.begin(), score.end(), base);

        for (int round = 0; round < spec.hp.boost_rounds; ++round) {
          std::vector<double> residual(n);
          for (std::size_t i = 0; i < n; ++i) {
            const double target = data.y[i] == positive ? 1.0 : 0.0;
            residual[i] = target - sigmoid(score[i]);
          }
          forest::Options options;
          options.n_trees = 1;
          options.bootstrap = false;
          options.mtry = data.n_cols();
          options.max_depth = spec.hp.boost_depth;
          options.min_leaf = 5;
          options.compute_oob = false;
          options.seed = derive_seed(spec.seed, cls, round);
          auto tree = std::make_shared<forest::RandomForest>(
              forest::RandomForest::fit(data.view(), residual,
                                        forest::RandomForest::Task::kRegress,
                                        0, options));
          for (std::size_t i = 0; i < n; ++i) {
            score[i] += spec.hp.learning_rate * tree->predict_value(data.row(i));
          }
          state->rounds.push_back(std::move(tree));
        }
      }
      model.boosted_ = std::move(state);
      break;
    }
  }
  return model;
}

std::vector<double> TrainedClassifier::predict_row_proba(
    const double* row) const {
  const int n_classes = static_cast<int>(class_labels_.size());
  if (forest_) return forest_->predict_proba(row);
  if (!lr_coefficients_.empty()) {
    double eta = lr_coefficients_[0];
    for (std::size_t c = 0; c + 1 < lr_coefficients_.size(); ++c) {
      eta += lr_coefficients_[c + 1] * row[c];
    }
    const double p1 = sigmoid(eta);
    return {1.0 - p1, p1};
  }
  if (svm_) {
    double f = svm_->bias;
    const std::size_t n_sv = svm_->dual_times_y.size();
    for (std::size_t s = 0; s < n_sv; ++s) {
      f += svm_->dual_times_y[s] *
           rbf_kernel(svm_->support_rows.data() + s * svm_->n_features, row,
                      svm_->n_features, svm_->gamma);
    }
    const double p1 = sigmoid(-(svm_->platt_a * f + svm_->platt_b));
    return {1.0 - p1, p1};
  }
  if (boosted_) {
    if (boosted_->n_classes == 2) {
      double score = boosted_->base_score[0];
      for (const auto& tree : boosted_->rounds) {
        score += boosted_->learning_rate * tree->predict_value(row);
      }
      const double p1 = sigmoid(score);
      return {1.0 - p1, p1};
    }
    std::vector<double> proba(n_classes);
    double total = 0.0;
    for (int cls = 0; cls < n_classes; ++cls) {
      double score = boosted_->base_score[cls];
      for (int round = 0; round < boosted_->rounds_per_class; ++round) {
        score += boosted_->learning_rate *
                 boosted_->rounds[cls * boosted_->rounds_per_class + round]
                     ->predict_value(row);
      }
      proba[cls] = sigmoid(score);
      total += proba[cls];
    }
    for (auto& p : proba) p /= total;
    return proba;
  }
  throw std::logic_error("classifier has no fitted state");
}

PredictionSet TrainedClassifier::predict(const Dataset& data) const {
  if (data.feature_names != feature_names_) {
    std::ostringstream msg;
    msg << "feature mismatch;";
    for (const auto& name : feature_names_) {
      if (std::find(data.feature_names.begin(), data.feature_names.end(),
                    name) == data.feature_names.end()) {
        msg << " missing:" << name;
      }
    }
    for (const auto& name : data.feature_names) {
      if (std::find(feature_names_.begin(), feature_names_.end(), name) ==
          feature_names_.end()) {
        msg << " unexpected:" << name;
      }
    }
    throw std::invalid_argument(msg.str());
  }
  PredictionSet out;
  out.class_labels = class_labels_;
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    Prediction p;
    p.id = data.ids.empty() ? std::to_string(r) : data.ids[r];
    p.true_class = data.y[r];
    p.proba = predict_row_proba(data.row(r));
    p.predicted = static_cast<int>(std::distance(
        p.proba.begin(), std::max_element(p.proba.begin(), p.proba.end())));
    out.items.push_back(std::move(p));
  }
  return out;
}

const std::vector<double>& TrainedClassifier::forest_importance() const {
  if (!forest_) {
    throw std::logic_error("importance available for random forest only");
  }
  return forest_->importance_mean();
}

double TrainedClassifier::forest_oob_error() const {
  if (!forest_) {
    throw std::logic_error("OOB error available for random forest only");
  }
  return forest_->oob_error();
}

// Cross-validation harness ---------------------------------------------------

namespace {

/// Stratified fold ids: per class round-robin with a global cursor, so fold
/// sizes differ by at most one overall and per class.
std::vector<int> stratified_folds(const std::vector<int>& y, int k,
                                  std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  std::vector<int> fold(y.size(), 0);
  int cursor = 0;
  std::uint64_t class_index = 0;
  for (auto& [cls, rows] : by_class) {
    Rng rng(derive_seed(seed, 0xf01d, class_index++));
    rng.shuffle(rows);
    for (auto r : rows) {
      fold[r] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return fold;
}

}  // namespace

CvResult repeated_kfold(const Dataset& data, const ClassifierSpec& spec,
                        int k, int repeats, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > data.n_rows()) {
    throw std::invalid_argument("repeated_kfold: k out of range");
  }
  CvResult result;
  std::vector<double> accuracies;
  std::vector<double> aucs;
  for (int repeat = 0; repeat < repeats; ++repeat) {
    const auto folds =
        stratified_folds(data.y, k, derive_seed(seed, 0xc5, repeat));
    for (int f = 0; f < k; ++f) {
      std::vector<std::size_t> train_rows, valid_rows;
      for (std::size_t r = 0; r < data.n_rows(); ++r) {
        (folds[r] == f ? valid_rows : train_rows).push_back(r);
      }
      ClassifierSpec fold_spec = spec;
      fold_spec.seed = derive_seed(spec.seed, repeat, f);
      const auto model =
          TrainedClassifier::fit(fold_spec, data.subset(train_rows));
      auto predictions = model.predict(data.subset(valid_rows));
      accuracies.push_back(predictions.accuracy());
      if (data.n_classes() == 2) {
        const auto labels = predictions.binary_labels();
        const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                          std::count(labels.begin(), labels.end(), 0) > 0;
        if (both) {
          aucs.push_back(
              stats::roc_auc(predictions.scores(), labels).auc);
        }
      }
      result.folds.push_back(std::move(predictions));
    }
  }
  result.summary.resamples = static_cast<int>(accuracies.size());
  double mean = 0.0;
  for (double a : accuracies) mean += a;
  mean /= accuracies.size();
  double ss = 0.0;
  for (double a : accuracies) ss += (a - mean) * (a - mean);
  result.summary.mean_accuracy = mean;
  result.summary.sd_accuracy =
      accuracies.size() > 1 ? std::sqrt(ss / (accuracies.size() - 1)) : 0.0;
  if (!aucs.empty()) {
    double auc_mean = 0.0;
    for (double a : aucs) auc_mean += a;
    result.summary.mean_auc = auc_mean / aucs.size();
  } else {
    result.summary.mean_auc = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

TrainedClassifier train_with_cv(const ClassifierSpec& spec, const Dataset& data,
                                int k, int repeats, CvResult* cv_out) {
  ClassifierSpec chosen = spec;
  if (spec.algorithm == Algorithm::kSvmRbf) {
    const double gamma_base = 1.0 / static_cast<double>(data.n_cols());
    double best_accuracy = -1.0;
    for (double c : {0.25, 1.0, 4.0}) {
      for (double gamma_scale : {0.25, 1.0, 4.0}) {
        ClassifierSpec candidate = spec;
        candidate.hp.svm_c = c;
        candidate.hp.svm_gamma = gamma_base * gamma_scale;
        const auto cv = repeated_kfold(data, candidate, k, repeats, spec.seed);
        if (cv.summary.mean_accuracy > best_accuracy) {
          best_accuracy = cv.summary.mean_accuracy;
          chosen = candidate;
        }
      }
    }
  }
  if (cv_out) *cv_out = repeated_kfold(data, chosen, k, repeats, spec.seed);
  return TrainedClassifier::fit(chosen, data);
}

Dataset downsample_balance(const Dataset& data, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    by_class[data.y[i]].push_back(i);
  }
  for (int cls = 0; cls < data.n_classes(); ++cls) {
    if (by_class.find(cls) == by_class.end()) {
      throw std::invalid_argument("downsample_balance: empty class " +
                                  data.class_labels[cls]);
    }
  }
  std::size_t floor_count = data.n_rows();
  for (const auto& [cls, rows] : by_class) {
    floor_count = std::min(floor_count, rows.size());
  }
  std::vector<std::size_t> keep;
  std::uint64_t class_index = 0;
  for (auto& [cls, rows] : by_class) {
    Rng rng(derive_seed(seed, 0xba1a, class_index++));
    rng.shuffle(rows);
    keep.insert(keep.end(), rows.begin(), rows.begin() + floor_count);
  }
  std::sort(keep.begin(), keep.end());
  return data.subset(keep);
}

std::string serialize_classifier(const TrainedClassifier& model) {
  nlohmann::ordered_json doc;
  doc["algorithm"] = to_string(model.spec_.algorithm);
  doc["seed"] = model.spec_.seed;
  doc["feature_names"] = model.feature_names_;
  doc["class_labels"] = model.class_labels_;
  doc["train_fingerprint"] = model.train_fingerprint_;
  nlohmann::ordered_json hp;
  hp["trees"] = model.spec_.hp.trees;
  hp["mtry"] = model.spec_.hp.mtry;
  hp["max_depth"] = model.spec_.hp.max_depth;
  hp["bootstrap"] = model.spec_.hp.bootstrap;
  hp["ridge"] = model.spec_.hp.ridge;
  hp["svm_c"] = model.spec_.hp.svm_c;
  hp["svm_gamma"] = model.spec_.hp.svm_gamma;
  hp["boost_rounds"] = model.spec_.hp.boost_rounds;
  hp["learning_rate"] = model.spec_.hp.learning_rate;
  hp["boost_depth"] = model.spec_.hp.boost_depth;
  doc["hyperparams"] = std::move(hp);

  if (model.forest_) {
    doc["forest"] = model.forest_->serialize();
    doc["importance_mean"] = model.forest_->importance_mean();
  } else if (!model.lr_coefficients_.empty()) {
    doc["coefficients"] = model.lr_coefficients_;
  } else if (model.svm_) {
    doc["svm"] = {{"support_rows", model.svm_->support_rows},
                  {"dual_times_y", model.svm_->dual_times_y},
                  {"bias", model.svm_->bias},
                  {"gamma", model.svm_->gamma},
                  {"platt_a", model.svm_->platt_a},
                  {"platt_b", model.svm_->platt_b},
                  {"n_features", model.svm_->n_features}};
  } else if (model.boosted_) {
    nlohmann::ordered_json boosted;
    boosted["base_score"] = model.boosted_->base_score;
    boosted["learning_rate"] = model.boosted_->learning_rate;
    boosted["n_classes"] = model.boosted_->n_classes;
    boosted["rounds_per_class"] = model.boosted_->rounds_per_class;
    auto& rounds = boosted["rounds"] = nlohmann::ordered_json::array();
    for (const auto& round : model.boosted_->rounds) {
      rounds.push_back(round->serialize());
    }
    doc["boosted"] = std::move(boosted);
  }
  return doc.dump();
}

TrainedClassifier deserialize_classifier(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  TrainedClassifier model;
  model.spec_.algorithm =
      algorithm_from_string(doc.at("algorithm").get<std::string>());
  model.spec_.seed = doc.at("seed").get<std::uint64_t>();
  model.feature_names_ =
      doc.at("feature_names").get<std::vector<std::string>>();
  model.class_labels_ = doc.at("class_labels").get<std::vector<std::string>>();
  model.train_fingerprint_ = doc.at("train_fingerprint").get<std::string>();
  const auto& hp = doc.at("hyperparams");
  model.spec_.hp.trees = hp.at("trees").get<int>();
  model.spec_.hp.mtry = hp.at("mtry").get<std::size_t>();
  model.spec_.hp.max_depth = hp.at("max_depth").get<int>();
  model.spec_.hp.bootstrap = hp.at("bootstrap").get<bool>();
  model.spec_.hp.ridge = hp.at("ridge").get<double>();
  model.spec_.hp.svm_c = hp.at("svm_c").get<double>();
  model.spec_.hp.svm_gamma = hp.at("svm_gamma").get<double>();
  model.spec_.hp.boost_rounds = hp.at("boost_rounds").get<int>();
  model.spec_.hp.learning_rate = hp.at("learning_rate").get<double>();
  model.spec_.hp.boost_depth = hp.at("boost_depth").get<int>();

  if (doc.contains("forest")) {
    model.forest_ = std::make_shared<forest::RandomForest>(
        forest::RandomForest::deserialize(doc.at("forest").get<std::string>()));
  } else if (doc.contains("coefficients")) {
    model.lr_coefficients_ = doc.at("coefficients").get<std::vector<double>>();
  } else if (doc.contains("svm")) {
    auto state = std::make_shared<TrainedClassifier::SvmState>();
    const auto& svm = doc.at("svm");
    state->support_rows = svm.at("support_rows").get<std::vector<double>>();
    state->dual_times_y = svm.at("dual_times_y").get<std::vector<double>>();
    state->bias = svm.at("bias").get<double>();
    state->gamma = svm.at("gamma").get<double>();
    state->platt_a = svm.at("platt_a").get<double>();
    state->platt_b = svm.at("platt_b").get<double>();
    state->n_features = svm.at("n_features").get<std::size_t>();
    model.svm_ = std::move(state);
  } else if (doc.contains("boosted")) {
    auto state = std::make_shared<TrainedClassifier::BoostedState>();
    const auto& boosted = doc.at("boosted");
    state->base_score = boosted.at("base_score").get<std::vector<double>>();
    state->learning_rate = boosted.at("learning_rate").get<double>();
    state->n_classes = boosted.at("n_classes").get<int>();
    state->rounds_per_class = boosted.at("rounds_per_class").get<int>();
    for (const auto& round : boosted.at("rounds")) {
      state->rounds.push_back(std::make_shared<forest::RandomForest>(
          forest::RandomForest::deserialize(round.get<std::string>())));
    }
    model.boosted_ = std::move(state);
  }
  return model;
}

PredictionSet grouped_cv(const Dataset& data,
                         const std::vector<std::string>& group_ids,
                         const ClassifierSpec& spec) {
  if (group_ids.size() != data.n_rows()) {
    throw std::invalid_argument("grouped_cv: group ids size mismatch");
  }
  std::set<std::string> distinct(group_ids.begin(), group_ids.end());
  if (distinct.size() < 2) {
    throw std::invalid_argument("grouped_cv: need at least 2 groups");
  }
  PredictionSet out;
  out.class_labels = data.class_labels;
  std::uint64_t fold_index = 0;
  for (const auto& held_out : distinct) {
    std::vector<std::size_t> train_rows, valid_rows;
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      (group_ids[r] == held_out ? valid_rows : train_rows).push_back(r);
    }
    ClassifierSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, 0x10960, fold_index++);
    const auto model =
        TrainedClassifier::fit(fold_spec, data.subset(train_rows));
    const auto fold_preds = model.predict(data.subset(valid_rows));
    out.items.insert(out.items.end(), fold_preds.items.begin(),
                     fold_preds.items.end());
  }
  return out;
}

}  // namespace facedyn::learn
