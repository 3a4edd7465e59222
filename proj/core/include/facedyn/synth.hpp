#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "facedyn/types.hpp"

namespace facedyn::synth {

struct ComponentDynamics {
  double ar_coefficient = 0.92;
  double innovation_sd = 0.35;
  int smoothing_window = 6;
  double baseline = 1.2;
};

struct BurstModel {
  double rate_per_video = 2.5;     // expected burst count in emotive videos
  double amplitude = 2.2;
  double duration_mean_frames = 18.0;
  double duration_sd_frames = 5.0;
};

struct Degradation {
  double velocity_jitter_sd = 0.12;
  double shift_probability = 0.15;  // chance of one scaled segment
  double shift_scale = 1.35;
  bool emotive_burst_only = false;  // jitter confined to burst windows
};

/// Ground-truth generator profile. The planted basis has one dominant AU
/// per component, so the representative-AU step has a known right answer.
struct SynthProfile {
  Eigen::MatrixXd basis;  // kAuCount x 3; default_basis() when empty
  ComponentDynamics dynamics[3];
  BurstModel burst;
  Degradation degradation;
  double observation_noise_sd = 0.02;
  double emotive_fraction = 0.6;
  double positive_share = 0.5;  // of emotive pairs, remainder negative
  int n_pairs = 200;
  std::uint64_t seed = 0;
};

/// Three-component basis: mouth block peaking at AU12, chin block at AU17,
/// brow block at AU01, with cross-loadings keeping the peaks unambiguous
/// under per-video rescaling.
Eigen::MatrixXd default_basis();

struct GeneratedPair {
  AuRecording real;
  AuRecording fake;
};

GeneratedPair generate_pair(const SynthProfile& profile, int pair_index);

struct GeneratedDataset {
  std::vector<AuRecording> recordings;  // pair order, real then fake
  std::vector<RecordingMeta> manifest;
};

GeneratedDataset generate_dataset(const SynthProfile& profile);

/// Writes per-video AU CSVs plus manifest.csv into the directory.
void write_dataset(const GeneratedDataset& dataset,
                   const std::string& directory);

struct HumanRating {
  std::string participant_id;
  std::string video_id;
  double rating = 0.0;  // 0 = real, 100 = fake
};

enum class JudgmentModel { kFeatureLinked, kRandom };

struct JudgmentOptions {
  JudgmentModel model = JudgmentModel::kRandom;
  double weight = 3.0;  // logistic slope on the z-scored feature
  double bias = 0.5;    // P(judged fake) in random mode
  int n_participants = 89;
  std::uint64_t seed = 0;
};

struct VideoForJudgment {
  std::string video_id;
  double feature_value = 0.0;  // ignored in random mode
};

/// Ratings drawn per (participant, video): a logistic link on the z-scored
/// feature, or a biased coin.
std::vector<HumanRating> generate_judgments(
    const std::vector<VideoForJudgment>& videos,
    const JudgmentOptions& options);

void write_ratings(const std::vector<HumanRating>& ratings,
                   const std::string& path);

}  // namespace facedyn::synth
