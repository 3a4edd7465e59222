#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facedyn/learn.hpp"
#include "facedyn/synth.hpp"

namespace facedyn::pipeline {

struct PreprocessConfig {
  int smooth_window = 4;
  double confidence_threshold = 0.83;
  double success_threshold = 0.94;
  double split_ratio = 0.8;
};

struct NmfConfig {
  int rank = 3;
  int restarts = 3;
  int max_iter = 500;
  double tol = 1e-5;
  bool scan = false;
  int scan_lo = 2;
  int scan_hi = 10;
};

struct FeatureConfig {
  bool include_permutation_entropy = false;
  int window = 24;
};

struct SelectConfig {
  int max_runs = 100;
  double alpha = 0.01;
  int forest_trees = 500;
};

struct TrainConfig {
  std::vector<learn::Algorithm> algorithms{learn::Algorithm::kRandomForest};
  int trees = 500;
  int cv_folds = 5;
  int cv_repeats = 3;
};

struct EvalConfig {
  bool paper_compat = false;
  bool strata_emotion = true;
};

struct HumanConfig {
  bool enabled = false;
  std::string ratings_path;     // existing ratings CSV; empty -> synthesize
  synth::JudgmentModel model = synth::JudgmentModel::kFeatureLinked;
  std::string link_feature = "diff2_acf1_AU12";
  double weight = -3.0;  // fakes sit lower on the link feature
  double bias = 0.5;
  int participants = 89;
  int subset_size = 40;  // test videos shown to raters
};

struct PipelineConfig {
  std::uint64_t seed = 7;
  std::string out_dir = "out";
  std::string data_dir;  // empty: generate with the synth profile
  synth::SynthProfile synth_profile;
  PreprocessConfig preprocess;
  NmfConfig nmf;
  FeatureConfig features;
  SelectConfig select;
  TrainConfig train;
  EvalConfig eval;
  HumanConfig human;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig config_from_json_text(const std::string& text);
std::string config_to_json(const PipelineConfig& config);

/// FNV-1a of the canonical config document; embedded in every report.
std::string config_hash(const PipelineConfig& config);

// Stage entry points. Each reads the previous stage's artifacts from
// config.out_dir and writes its own, so stages can be rerun independently.
void run_synth(const PipelineConfig& config);
void run_ingest(const PipelineConfig& config);
void run_nmf(const PipelineConfig& config);
void run_features(const PipelineConfig& config);
void run_select(const PipelineConfig& config);
void run_train(const PipelineConfig& config);
void run_eval(const PipelineConfig& config);
void run_valence(const PipelineConfig& config);
void run_human(const PipelineConfig& config);
void run_report(const PipelineConfig& config);

/// synth/ingest -> nmf -> features -> select -> train -> eval -> valence
/// (-> human when enabled) -> report.
void run_pipeline(const PipelineConfig& config);

}  // namespace facedyn::pipeline
