#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "facedyn/forest.hpp"

namespace facedyn::learn {

enum class Algorithm {
  kRandomForest,
  kLogisticRegression,
  kSvmRbf,
  kBoostedTrees,
};

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct Hyperparams {
  int trees = 500;
  std::size_t mtry = 0;        // 0: floor(sqrt(p))
  int max_depth = -1;
  bool bootstrap = true;
  double ridge = 1e-6;         // logistic regression separation guard
  double svm_c = 1.0;
  double svm_gamma = 0.0;      // 0: 1/p
  int boost_rounds = 150;
  double learning_rate = 0.1;
  int boost_depth = 3;
};

struct ClassifierSpec {
  Algorithm algorithm = Algorithm::kRandomForest;
  Hyperparams hp;
  std::uint64_t seed = 0;
};

/// Rows of named features plus integer class labels. For binary problems
/// the convention is index 1 = "fake" = positive class.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_labels;
  std::vector<double> x;  // row-major
  std::vector<int> y;

  std::size_t n_rows() const { return y.size(); }
  std::size_t n_cols() const { return feature_names.size(); }
  const double* row(std::size_t r) const { return x.data() + r * n_cols(); }
  forest::MatrixView view() const { return {x.data(), n_rows(), n_cols()}; }
  Dataset subset(const std::vector<std::size_t>& rows) const;
  int n_classes() const { return static_cast<int>(class_labels.size()); }
};

struct Prediction {
  std::string id;
  int true_class = 0;
  int predicted = 0;
  std::vector<double> proba;  // one entry per class, sums to 1

  /// Probability of the positive class for binary problems.
  double score() const { return proba.size() > 1 ? proba[1] : proba[0]; }
};

struct PredictionSet {
  std::vector<std::string> class_labels;
  std::vector<Prediction> items;

  double accuracy() const;
  std::vector<double> scores() const;       // positive-class probabilities
  std::vector<int> binary_labels() const;   // 1 where true class == 1
};

class TrainedClassifier {
 public:
  static TrainedClassifier fit(const ClassifierSpec& spec, const Dataset& data);

  PredictionSet predict(const Dataset& data) const;

  const ClassifierSpec& spec() const { return spec_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  const std::vector<std::string>& class_labels() const {
    return class_labels_;
  }

  /// Mean-decrease-in-accuracy importance (random forest only).
  const std::vector<double>& forest_importance() const;
  double forest_oob_error() const;

 private:
  std::vector<double> predict_row_proba(const double* row) const;

  ClassifierSpec spec_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> class_labels_;
  std::string train_fingerprint_;

  // fitted state; exactly one populated depending on the algorithm
  std::shared_ptr<forest::RandomForest> forest_;
  std::vector<double> lr_coefficients_;  // intercept first
  struct SvmState {
    std::vector<double> support_rows;  // row-major support vectors
    std::vector<double> dual_times_y;
    double bias = 0.0;
    double gamma = 0.0;
    double platt_a = 0.0;
    double platt_b = 0.0;
    std::size_t n_features = 0;
  };
  std::shared_ptr<SvmState> svm_;
  struct BoostedState {
    std::vector<std::shared_ptr<forest::RandomForest>> rounds;  // per class
    std::vector<double> base_score;
    double learning_rate = 0.1;
    int n_classes = 2;
    int rounds_per_class = 0;
  };
  std::shared_ptr<BoostedState> boosted_;

  friend std::string serialize_classifier(const TrainedClassifier&);
  friend TrainedClassifier deserialize_classifier(const std::string&);
};

/// Structured-document model persistence for all four algorithms.
std::string serialize_classifier(const TrainedClassifier& model);
TrainedClassifier deserialize_classifier(const std::string& text);

struct CvSummary {
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  double mean_auc = 0.0;  // binary only; NaN otherwise
  int resamples = 0;
};

struct CvResult {
  std::vector<PredictionSet> folds;  // k * repeats validation sets
  CvSummary summary;
};

/// Stratified k-fold, repeated. Fold sizes differ by at most one and class
/// proportions are preserved within one sample.
CvResult repeated_kfold(const Dataset& data, const ClassifierSpec& spec,
                        int k = 5, int repeats = 3, std::uint64_t seed = 0);

/// Tunes the small hyperparameter grid by repeated-kfold accuracy (only the
/// SVM has more than one grid point), then refits on all rows.
TrainedClassifier train_with_cv(const ClassifierSpec& spec, const Dataset& data,
                                int k = 5, int repeats = 3,
                                CvResult* cv_out = nullptr);

/// Downsamples every class to the smallest class count.
Dataset downsample_balance(const Dataset& data, std::uint64_t seed);

/// One fold per distinct group id; training excludes the held-out group.
PredictionSet grouped_cv(const Dataset& data,
                         const std::vector<std::string>& group_ids,
                         const ClassifierSpec& spec);

}  // namespace facedyn::learn
