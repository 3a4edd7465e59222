#include "facedyn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "facedyn/parallel.hpp"
#include "facedyn/rng.hpp"
#include "json.hpp"

namespace facedyn::forest {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct Builder {
  const MatrixView& x;
  const std::vector<double>& y;
  RandomForest::Task task;
  int n_classes;
  std::size_t mtry;
  int max_depth;
  std::size_t min_leaf;
  Rng& rng;

  std::vector<std::pair<double, double>> scratch;  // (value, target)

  double node_impurity(const std::vector<std::size_t>& rows) const {
    if (task == RandomForest::Task::kClassify) {
      std::vector<double> counts(n_classes, 0.0);
      for (auto r : rows) counts[static_cast<int>(y[r])] += 1.0;
      double gini = 1.0;
      const double n = static_cast<double>(rows.size());
      for (double c : counts) gini -= (c / n) * (c / n);
      return gini;
    }
    double sum = 0.0, ss = 0.0;
    for (auto r : rows) {
      sum += y[r];
      ss += y[r] * y[r];
    }
    const double n = static_cast<double>(rows.size());
    return ss / n - (sum / n) * (sum / n);
  }

  /// Best split of `rows` on `feature`, or gain 0 when none improves.
  SplitChoice best_split_on(const std::vector<std::size_t>& rows,
                            std::size_t feature) {
    scratch.clear();
    for (auto r : rows) scratch.emplace_back(x.at(r, feature), y[r]);
    std::sort(scratch.begin(), scratch.end());
    const std::size_t n = scratch.size();
    if (scratch.front().first == scratch.back().first) return {};

    SplitChoice best;
    best.feature = static_cast<int>(feature);
    const double parent = node_impurity(rows);

    if (task == RandomForest::Task::kClassify) {
      std::vector<double> left(n_classes, 0.0), right(n_classes, 0.0);
      for (const auto& [v, t] : scratch) right[static_cast<int>(t)] += 1.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const int cls = static_cast<int>(scratch[i].second);
        left[cls] += 1.0;
        right[cls] -= 1.0;
        if (scratch[i].first == scratch[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        if (nl < min_leaf || nr < min_leaf) continue;
        double gini_l = 1.0, gini_r = 1.0;
        for (int c = 0; c < n_classes; ++c) {
          gini_l -= (left[c] / nl) * (left[c] / nl);
          gini_r -= (right[c] / nr) * (right[c] / nr);
        }
        const double gain = parent - (nl * gini_l + nr * gini_r) / (nl + nr);
        if (gain > best.gain) {
          best.gain = gain;
          best.threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
        }
      }
    } else {
      double sum_left = 0.0, ss_left = 0.0;
      double sum_right = 0.0, ss_right = 0.0;
      for (const auto& [v, t] : scratch) {
        sum_right += t;
        ss_right += t * t;
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = scratch[i].second;
        sum_left += t;
        ss_left += t * t;
        sum_right -= t;
        ss_right -= t * t;
        if (scratch[i].first == scratch[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        if (nl < min_leaf || nr < min_leaf) continue;
        const double var_l = ss_left / nl - (sum_left / nl) * (sum_left / nl);
        const double var_r =
            ss_right / nr - (sum_right / nr) * (sum_right / nr);
        const double gain = parent - (nl * var_l + nr * var_r) / (nl + nr);
        if (gain > best.gain) {
          best.gain = gain;
          best.threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
        }
      }
    }
    return best;
  }

};

}  // namespace

RandomForest RandomForest::fit(const MatrixView& x,
                               const std::vector<double>& y, Task task,
                               int n_classes, const Options& options) {
  if (x.rows == 0 || x.cols == 0 || y.size() != x.rows) {
    throw std::invalid_argument("RandomForest::fit: empty data or size mismatch");
  }
  if (task == Task::kClassify && n_classes < 2) {
    throw std::invalid_argument("RandomForest::fit: need >= 2 classes");
  }

  RandomForest rf;
  rf.task_ = task;
  rf.n_classes_ = task == Task::kClassify ? n_classes : 1;
  rf.n_features_ = x.cols;
  rf.trees_.resize(options.n_trees);

  std::size_t mtry = options.mtry;
  if (mtry == 0) {
    mtry = task == Task::kClassify
               ? static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols)))
               : x.cols / 3;
  }
  mtry = std::max<std::size_t>(1, std::min(mtry, x.cols));

  // per-tree OOB bookkeeping, merged after the parallel section
  std::vector<std::vector<std::uint32_t>> oob_rows(options.n_trees);
  std::vector<std::vector<double>> per_tree_importance;
  if (options.compute_importance) {
    per_tree_importance.assign(options.n_trees,
                               std::vector<double>(x.cols, 0.0));
  }

  parallel_for(static_cast<std::size_t>(options.n_trees), [&](std::size_t t) {
    Rng rng(derive_seed(options.seed, 0xf07e57, t));
    Tree& tree = rf.trees_[t];

    // bootstrap sample
    std::vector<std::size_t> sample(x.rows);
    std::vector<char> in_bag(x.rows, 0);
    if (options.bootstrap) {
      for (auto& s : sample) {
        s = rng.uniform_index(x.rows);
        in_bag[s] = 1;
      }
    } else {
      std::iota(sample.begin(), sample.end(), 0);
      std::fill(in_bag.begin(), in_bag.end(), 1);
    }
    if (options.compute_oob || options.compute_importance) {
      for (std::size_t r = 0; r < x.rows; ++r) {
        if (!in_bag[r]) oob_rows[t].push_back(static_cast<std::uint32_t>(r));
      }
    }

    Builder builder{x,  y,  task, rf.n_classes_, mtry, options.max_depth,
                    options.min_leaf, rng, {}};

    // iterative depth-first growth
    struct Pending {
      std::vector<std::size_t> rows;
      int depth;
      int node_index;
    };
    const auto make_leaf = [&](const std::vector<std::size_t>& rows) {
      double value;
      if (task == Task::kClassify) {
        std::vector<double> counts(rf.n_classes_, 0.0);
        for (auto r : rows) counts[static_cast<int>(y[r])] += 1.0;
        value = static_cast<double>(std::distance(
            counts.begin(), std::max_element(counts.begin(), counts.end())));
      } else {
        double sum = 0.0;
        for (auto r : rows) sum += y[r];
        value = sum / static_cast<double>(rows.size());
      }
      tree.leaf_values.push_back(value);
      return static_cast<int>(tree.leaf_values.size() - 1);
    };

    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({std::move(sample), 0, 0});
    std::vector<std::size_t> feature_pool(x.cols);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);

    while (!stack.empty()) {
      Pending item = std::move(stack.back());
      stack.pop_back();

      const bool depth_capped =
          options.max_depth >= 0 && item.depth >= options.max_depth;
      bool pure = true;
      for (std::size_t i = 1; i < item.rows.size(); ++i) {
        if (y[item.rows[i]] != y[item.rows[0]]) {
          pure = false;
          break;
        }
      }
      if (pure || depth_capped || item.rows.size() < 2 * options.min_leaf) {
        tree.nodes[item.node_index].leaf_index = make_leaf(item.rows);
        continue;
      }

      // sample mtry features without replacement
      for (std::size_t i = 0; i < mtry; ++i) {
        std::swap(feature_pool[i],
                  feature_pool[i + rng.uniform_index(x.cols - i)]);
      }
      SplitChoice best;
      for (std::size_t i = 0; i < mtry; ++i) {
        const auto candidate = builder.best_split_on(item.rows,
                                                     feature_pool[i]);
        if (candidate.gain > best.gain) best = candidate;
      }
      if (best.feature < 0 || best.gain <= 0.0) {
        tree.nodes[item.node_index].leaf_index = make_leaf(item.rows);
        continue;
      }

      std::vector<std::size_t> left_rows, right_rows;
      for (auto r : item.rows) {
        (x.at(r, best.feature) <= best.threshold ? left_rows : right_rows)
            .push_back(r);
      }
      const int left_index = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int right_index = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      Node& node = tree.nodes[item.node_index];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = left_index;
      node.right = right_index;
      stack.push_back({std::move(right_rows), item.depth + 1, right_index});
      stack.push_back({std::move(left_rows), item.depth + 1, left_index});
    }

    // permutation importance on this tree's OOB rows; features the tree
    // never splits on keep their exact importance of zero
    if (options.compute_importance && !oob_rows[t].empty()) {
      const auto& oob = oob_rows[t];
      std::vector<char> used(x.cols, 0);
      for (const auto& node : tree.nodes) {
        if (node.feature >= 0) used[node.feature] = 1;
      }
      double baseline = 0.0;
      for (auto r : oob) {
        const double pred = rf.tree_predict(tree, x.data + r * x.cols);
        if (task == Task::kClassify) {
          baseline += pred == y[r] ? 1.0 : 0.0;
        } else {
          baseline -= (pred - y[r]) * (pred - y[r]);
        }
      }
      std::vector<std::uint32_t> permuted(oob);
      for (std::size_t f = 0; f < x.cols; ++f) {
        if (!used[f]) continue;
        // fresh permutation of the OOB rows per feature
        for (std::size_t i = permuted.size(); i > 1; --i) {
          std::swap(permuted[i - 1], permuted[rng.uniform_index(i)]);
        }
        double score = 0.0;
        for (std::size_t i = 0; i < oob.size(); ++i) {
          const double pred =
              rf.tree_predict_permuted(tree, x, oob[i], f, permuted[i]);
          if (task == Task::kClassify) {
            score += pred == y[oob[i]] ? 1.0 : 0.0;
          } else {
            score -= (pred - y[oob[i]]) * (pred - y[oob[i]]);
          }
        }
        per_tree_importance[t][f] =
            (baseline - score) / static_cast<double>(oob.size());
      }
    }
  });

  // OOB aggregation (sequential, fixed order)
  if (options.compute_oob) {
    std::vector<std::vector<double>> votes(
        x.rows, std::vector<double>(rf.n_classes_, 0.0));
    std::vector<double> sums(x.rows, 0.0);
    std::vector<int> counts(x.rows, 0);
    for (int t = 0; t < options.n_trees; ++t) {
      for (auto r : oob_rows[t]) {
        const double pred =
            rf.tree_predict(rf.trees_[t], x.data + r * x.cols);
        if (task == Task::kClassify) {
          votes[r][static_cast<int>(pred)] += 1.0;
        } else {
          sums[r] += pred;
        }
        counts[r] += 1;
      }
    }
    rf.oob_predictions_.assign(x.rows, kNan);
    double error = 0.0;
    std::size_t covered = 0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      if (counts[r] == 0) continue;
      ++covered;
      if (task == Task::kClassify) {
        const int cls = static_cast<int>(std::distance(
            votes[r].begin(),
            std::max_element(votes[r].begin(), votes[r].end())));
        rf.oob_predictions_[r] = cls;
        error += cls == static_cast<int>(y[r]) ? 0.0 : 1.0;
      } else {
        rf.oob_predictions_[r] = sums[r] / counts[r];
        error += (rf.oob_predictions_[r] - y[r]) *
                 (rf.oob_predictions_[r] - y[r]);
      }
    }
    rf.oob_error_ = covered > 0 ? error / static_cast<double>(covered) : kNan;
  }

  if (options.compute_importance) {
    rf.importance_mean_.assign(x.cols, 0.0);
    rf.importance_z_.assign(x.cols, 0.0);
    for (std::size_t f = 0; f < x.cols; ++f) {
      double sum = 0.0;
      for (int t = 0; t < options.n_trees; ++t) {
        sum += per_tree_importance[t][f];
      }
      const double mean = sum / options.n_trees;
      double ss = 0.0;
      for (int t = 0; t < options.n_trees; ++t) {
        const double d = per_tree_importance[t][f] - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / std::max(1, options.n_trees - 1));
      rf.importance_mean_[f] = mean;
      rf.importance_z_[f] =
          sd > 0.0 ? mean / (sd / std::sqrt(static_cast<double>(
                                 options.n_trees)))
                   : (mean > 0.0 ? 1e6 : 0.0);
    }
  }
  return rf;
}

double RandomForest::tree_predict(const Tree& tree, const double* row) const {
  int node = 0;
  while (tree.nodes[node].leaf_index < 0) {
    const auto& n = tree.nodes[node];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return tree.leaf_values[tree.nodes[node].leaf_index];
}

double RandomForest::tree_predict_permuted(const Tree& tree,
                                           const MatrixView& x,
                                           std::size_t row,
                                           std::size_t swapped_feature,
                                           std::size_t source_row) const {
  int node = 0;
  while (tree.nodes[node].leaf_index < 0) {
    const auto& n = tree.nodes[node];
    const double value =
        static_cast<std::size_t>(n.feature) == swapped_feature
            ? x.at(source_row, swapped_feature)
            : x.at(row, n.feature);
    node = value <= n.threshold ? n.left : n.right;
  }
  return tree.leaf_values[tree.nodes[node].leaf_index];
}

std::vector<double> RandomForest::predict_proba(const double* row) const {
  std::vector<double> votes(n_classes_, 0.0);
  for (const auto& tree : trees_) {
    votes[static_cast<int>(tree_predict(tree, row))] += 1.0;
  }
  for (auto& v : votes) v /= static_cast<double>(trees_.size());
  return votes;
}

int RandomForest::predict_class(const double* row) const {
  const auto proba = predict_proba(row);
  return static_cast<int>(std::distance(
      proba.begin(), std::max_element(proba.begin(), proba.end())));
}

double RandomForest::predict_value(const double* row) const {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree_predict(tree, row);
  return sum / static_cast<double>(trees_.size());
}

std::string RandomForest::serialize() const {
  nlohmann::ordered_json doc;
  doc["task"] = task_ == Task::kClassify ? "classify" : "regress";
  doc["n_classes"] = n_classes_;
  doc["n_features"] = n_features_;
  doc["oob_error"] = oob_error_;
  auto& trees = doc["trees"] = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json entry;
    auto& nodes = entry["nodes"] = nlohmann::ordered_json::array();
    for (const auto& node : tree.nodes) {
      nodes.push_back({node.feature, node.threshold, node.left, node.right,
                       node.leaf_index});
    }
    entry["leaves"] = tree.leaf_values;
    trees.push_back(std::move(entry));
  }
  return doc.dump();
}

RandomForest RandomForest::deserialize(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  RandomForest rf;
  rf.task_ = doc.at("task").get<std::string>() == "classify"
                 ? Task::kClassify
                 : Task::kRegress;
  rf.n_classes_ = doc.at("n_classes").get<int>();
  rf.n_features_ = doc.at("n_features").get<std::size_t>();
  rf.oob_error_ = doc.at("oob_error").get<double>();
  for (const auto& entry : doc.at("trees")) {
    Tree tree;
    for (const auto& n : entry.at("nodes")) {
      Node node;
      node.feature = n[0].get<int>();
      node.threshold = n[1].get<double>();
      node.left = n[2].get<int>();
      node.right = n[3].get<int>();
      node.leaf_index = n[4].get<int>();
      tree.nodes.push_back(node);
    }
    tree.leaf_values = entry.at("leaves").get<std::vector<double>>();
    rf.trees_.push_back(std::move(tree));
  }
  return rf;
}

}  // namespace facedyn::forest
