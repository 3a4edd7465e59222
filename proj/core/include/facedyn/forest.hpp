#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace facedyn::forest {

/// Row-major matrix view over caller-owned storage.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Options {
  int n_trees = 500;
  std::size_t mtry = 0;       // 0: sqrt(p) classify, p/3 regress
  int max_depth = -1;         // -1: unlimited
  std::size_t min_leaf = 1;
  std::uint64_t seed = 0;
  bool bootstrap = true;      // false: every tree sees the full sample
  bool compute_importance = false;
  bool compute_oob = true;
};

/// Bagged CART forest. Classification splits on Gini, regression on
/// variance. Trees are built in parallel with per-tree seeds, so results do
/// not depend on thread count.
class RandomForest {
 public:
  enum class Task { kClassify, kRegress };

  /// y holds class indices (0..n_classes-1) for classification or targets
  /// for regression.
  static RandomForest fit(const MatrixView& x, const std::vector<double>& y,
                          Task task, int n_classes, const Options& options);

  /// Vote fractions per class (classification).
  std::vector<double> predict_proba(const double* row) const;
  int predict_class(const double* row) const;
  double predict_value(const double* row) const;  // regression mean

  Task task() const { return task_; }
  int n_classes() const { return n_classes_; }
  std::size_t n_features() const { return n_features_; }

  /// Classification: OOB error rate; regression: OOB mean squared error.
  double oob_error() const { return oob_error_; }

  /// Per-row OOB aggregate (majority class or mean); NaN when a row was
  /// in-bag for every tree.
  const std::vector<double>& oob_predictions() const {
    return oob_predictions_;
  }

  /// Mean decrease in accuracy (or MSE increase) under OOB permutation.
  const std::vector<double>& importance_mean() const {
    return importance_mean_;
  }
  /// Importance z-scores: mean / (sd / sqrt(trees)).
  const std::vector<double>& importance_z() const { return importance_z_; }

  /// Structured-document round trip (trees, leaves, OOB summaries).
  std::string serialize() const;
  static RandomForest deserialize(const std::string& text);

 private:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_index = -1;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<double> leaf_values;  // class index or mean per leaf
  };

  double tree_predict(const Tree& tree, const double* row) const;
  double tree_predict_permuted(const Tree& tree, const MatrixView& x,
                               std::size_t row, std::size_t swapped_feature,
                               std::size_t source_row) const;

  Task task_ = Task::kClassify;
  int n_classes_ = 2;
  std::size_t n_features_ = 0;
  std::vector<Tree> trees_;
  double oob_error_ = 0.0;
  std::vector<double> oob_predictions_;
  std::vector<double> importance_mean_;
  std::vector<double> importance_z_;
};

}  // namespace facedyn::forest
