#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "facedyn/learn.hpp"

namespace facedyn::select {

enum class BorutaStatus { kConfirmed, kTentative, kRejected };

std::string to_string(BorutaStatus status);

struct BorutaOptions {
  int max_runs = 100;
  double alpha = 0.01;
  int forest_trees = 500;
  std::uint64_t seed = 0;
};

struct BorutaDecision {
  std::vector<std::string> feature_names;
  std::vector<BorutaStatus> status;
  std::vector<int> hit_counts;
  /// importance z-score per run and feature; NaN after a feature is dropped
  std::vector<std::vector<double>> importance_history;
  std::vector<double> shadow_max_history;
  int runs_completed = 0;
  BorutaOptions params;

  std::vector<std::string> confirmed_names() const;
  double median_importance(std::size_t feature) const;
  std::string to_csv() const;
};

/// All-relevant selection: each run appends freshly shuffled shadow copies,
/// fits a forest, and scores a hit when a feature's importance beats the best
/// shadow. Two-sided binomial tests against 0.5 with Bonferroni correction
/// decide confirmation/rejection; undecided features end tentative.
BorutaDecision boruta(const learn::Dataset& data, const BorutaOptions& options);

/// Resolves tentatives: confirmed iff median importance over history beats
/// the median of the per-run shadow maxima.
BorutaDecision tentative_rough_fix(BorutaDecision decision);

enum class PcaCriterion { kKaiser, kCumVar };

struct PcaModel {
  std::vector<std::string> feature_names;      // retained, non-constant
  std::vector<std::string> dropped_constant;
  Eigen::MatrixXd loadings;        // p x p, columns ordered by eigenvalue
  Eigen::VectorXd eigenvalues;     // descending, >= 0
  std::vector<double> cumulative_variance;
  int retained_kaiser = 0;
  int retained_95 = 0;
  Eigen::VectorXd means;
  Eigen::VectorXd sds;
};

struct PcaResult {
  PcaModel model;
  Eigen::MatrixXd scores;  // n x retained
  int retained = 0;
};

/// PCA on the correlation matrix (features standardized internally).
PcaResult pca_select(const learn::Dataset& data,
                     PcaCriterion criterion = PcaCriterion::kKaiser,
                     double cumvar_threshold = 0.95);

}  // namespace facedyn::select
