#pragma once

#include <map>
#include <string>
#include <vector>

#include "facedyn/learn.hpp"
#include "facedyn/stats.hpp"
#include "facedyn/synth.hpp"
#include "facedyn/types.hpp"

namespace facedyn::human {

/// Rating threshold: >= 50 counts as a fake call.
Label binarize(double rating);

struct ConsensusEntry {
  Label judgment = Label::kReal;
  long fake_votes = 0;
  long real_votes = 0;
  bool tie = false;  // exact ties resolve to real
};

std::map<std::string, ConsensusEntry> consensus(
    const std::vector<synth::HumanRating>& ratings);

struct AgreementReport {
  std::string stratum;
  // contingency[model][human], index 0 = real call, 1 = fake call
  std::array<std::array<long, 2>, 2> contingency{};
  double agreement_rate = 0.0;
  stats::ChiSquareResult chi;
};

/// Model-vs-human label agreement over aligned videos.
AgreementReport agreement(const std::map<std::string, Label>& model_calls,
                          const std::map<std::string, Label>& human_calls,
                          const std::string& stratum = "all");

/// Same statistics over correct/incorrect indicators (whether the same
/// videos fool both agents).
AgreementReport correctness_correspondence(
    const std::vector<bool>& model_correct,
    const std::vector<bool>& human_correct);

struct OutcomeGroupStats {
  bool model_correct = false;
  bool human_correct = false;
  long count = 0;
  std::vector<double> feature_mean;  // aligned with feature_names
  std::vector<double> feature_se;
};

struct FeatureStratification {
  std::vector<std::string> feature_names;
  std::vector<OutcomeGroupStats> groups;  // empty groups stay with count 0
};

/// Mean +- SE of each feature within the four (model correct x human
/// correct) outcome groups.
FeatureStratification feature_stratified_accuracy(
    const std::vector<std::string>& feature_names,
    const std::vector<std::vector<double>>& feature_rows,
    const std::vector<bool>& model_correct,
    const std::vector<bool>& human_correct);

enum class HumanCvScheme { kLopo, kLoso };

struct HumanPredictionReport {
  learn::PredictionSet predictions;
  double accuracy = 0.0;
  double kappa = 0.0;
  double sensitivity = 0.0;  // positive class = judged fake
  double specificity = 0.0;
};

/// Predicts per-(participant, video) binary judgments from video features
/// under leave-one-participant-out or leave-one-stimulus-out folds.
HumanPredictionReport predict_human(
    const learn::Dataset& video_features,  // one row per video, y ignored
    const std::vector<synth::HumanRating>& ratings, HumanCvScheme scheme,
    const learn::ClassifierSpec& spec);

}  // namespace facedyn::human
