#include "facedyn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "facedyn/csv.hpp"
#include "facedyn/errors.hpp"
#include "facedyn/ingest.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/timeseries.hpp"

namespace facedyn::synth {

namespace {

struct Burst {
  int center = 0;
  double width = 1.0;
  double amplitude = 0.0;
  int component = 0;
  double ripple = 0.0;  // relative amplitude of the in-burst oscillation
};

// class-dependent burst texture: positive bursts are smooth envelopes,
// negative bursts carry a ~2.4 Hz ripple. The valence signal thus lives in
// fine temporal structure that velocity jitter can plausibly erase.
constexpr double kRipplePeriodFrames = 10.0;
constexpr double kRippleRelativeAmplitude = 0.5;

/// Smoothed AR activation, non-negative, kFrameTarget long.
std::vector<double> component_activation(const ComponentDynamics& dynamics,
                                         Rng& rng) {
  const int warmup = 40;
  const int n = kFrameTarget + warmup;
  std::vector<double> raw(n);
  double state = 0.0;
  for (int t = 0; t < n; ++t) {
    state = dynamics.ar_coefficient * state +
            dynamics.innovation_sd * rng.normal();
    raw[t] = state;
  }
  const auto smoothed = ingest::smooth(raw, dynamics.smoothing_window);
  std::vector<double> out(kFrameTarget);
  for (int t = 0; t < kFrameTarget; ++t) {
    out[t] = std::max(0.0, dynamics.baseline + smoothed[t + warmup]);
  }
  return out;
}

std::vector<Burst> draw_bursts(const BurstModel& model, Valence valence,
                               Rng& rng) {
  std::vector<Burst> bursts;
  if (valence == Valence::kNeutral) return bursts;
  // Poisson draw by inversion
  const double rate = model.rate_per_video;
  double acc = std::exp(-rate);
  double u = rng.uniform();
  int count = 0;
  double term = acc;
  while (u > acc && count < 12) {
    ++count;
    term *= rate / count;
    acc += term;
  }
  count = std::max(count, 1);  // emotive videos always carry an event
  for (int b = 0; b < count; ++b) {
    Burst burst;
    burst.center = 20 + static_cast<int>(rng.uniform() * (kFrameTarget - 40));
    const double duration = std::max(
        6.0, model.duration_mean_frames + model.duration_sd_frames *
                                              rng.normal());
    burst.width = duration;
    burst.amplitude = model.amplitude * (0.8 + 0.4 * rng.uniform());
    burst.component = rng.uniform() < 0.5 ? 0 : 1;
    burst.ripple =
        valence == Valence::kNegative ? kRippleRelativeAmplitude : 0.0;
    bursts.push_back(burst);
  }
  return bursts;
}

void apply_bursts(std::vector<std::vector<double>>& activations,
                  const std::vector<Burst>& bursts) {
  constexpr double kTau = 6.28318530717958648;
  for (const auto& burst : bursts) {
    auto& series = activations[burst.component];
    for (int t = 0; t < kFrameTarget; ++t) {
      const double z = (t - burst.center) / burst.width;
      const double envelope = burst.amplitude * std::exp(-0.5 * z * z);
      const double texture =
          1.0 + burst.ripple *
                    std::sin(kTau * (t - burst.center) / kRipplePeriodFrames);
      series[t] += std::max(0.0, envelope * texture);
    }
  }
}

std::vector<char> burst_mask(const std::vector<Burst>& bursts) {
  std::vector<char> mask(kFrameTarget, 0);
  for (const auto& burst : bursts) {
    const int lo = std::max(0, burst.center - static_cast<int>(2 * burst.width));
    const int hi = std::min(kFrameTarget - 1,
                            burst.center + static_cast<int>(2 * burst.width));
    for (int t = lo; t <= hi; ++t) mask[t] = 1;
  }
  return mask;
}

/// White jitter on the velocity signal, re-integrated; optionally one
/// scaled segment (a distribution shift).
std::vector<double> degrade_activation(const std::vector<double>& activation,
                                       const Degradation& degradation,
                                       const std::vector<char>& mask,
                                       bool emotive, Rng& rng) {
  std::vector<double> velocity(activation.size() - 1);
  for (std::size_t t = 0; t + 1 < activation.size(); ++t) {
    velocity[t] = activation[t + 1] - activation[t];
  }
  for (std::size_t t = 0; t < velocity.size(); ++t) {
    const bool in_scope =
        !degradation.emotive_burst_only || (emotive && mask[t]);
    if (in_scope) {
      velocity[t] += degradation.velocity_jitter_sd * rng.normal();
    }
  }
  std::vector<double> degraded(activation.size());
  degraded[0] = activation[0];
  for (std::size_t t = 0; t < velocity.size(); ++t) {
    degraded[t + 1] = std::max(0.0, degraded[t] + velocity[t]);
  }
  const bool shift_allowed = !degradation.emotive_burst_only || emotive;
  if (rng.uniform() < degradation.shift_probability && shift_allowed) {
    const int start = static_cast<int>(rng.uniform() * (kFrameTarget - 60));
    const int len = 30 + static_cast<int>(rng.uniform() * 30.0);
    for (int t = start; t < std::min<int>(kFrameTarget, start + len); ++t) {
      degraded[t] *= degradation.shift_scale;
    }
  }
  return degraded;
}

AuRecording render(const Eigen::MatrixXd& basis,
                   const std::vector<std::vector<double>>& activations,
                   double noise_sd, const std::string& video_id, Label label,
                   const std::string& pair_id, bool emotion_flag,
                   Valence valence, Rng& rng) {
  AuRecording rec;
  rec.video_id = video_id;
  rec.label = label;
  rec.pair_id = pair_id;
  rec.emotion_flag = emotion_flag;
  rec.valence = valence;
  rec.frames.resize(kFrameTarget);
  for (int t = 0; t < kFrameTarget; ++t) {
    auto& frame = rec.frames[t];
    frame.frame_index = t;
    frame.timestamp = t / kDefaultFps;
    frame.confidence = 0.97;
    frame.success = 1;
    for (int a = 0; a < kAuCount; ++a) {
      double value = 0.0;
      for (int c = 0; c < basis.cols(); ++c) {
        value += basis(a, c) * activations[c][t];
      }
      value += noise_sd * rng.normal();
      frame.au[a] = std::max(0.0, value);
    }
  }
  return rec;
}

std::string scene_keyword(Valence valence) {
  switch (valence) {
    case Valence::kPositive: return "podium_speech_happy";
    case Valence::kNegative: return "hallway_confrontation_angry";
    default: return "interview_talking_serious";
  }
}

}  // namespace

Eigen::MatrixXd default_basis() {
  // Per-video z-scoring erases per-AU loading magnitudes, so identity must
  // live in the mixing directions: each peak AU is the pure anchor of its
  // component, every other AU mixes at least two components, and rows carry
  // unit norm so the preprocessing approximately preserves the basis.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kAuCount, 3);
  const auto set = [&](const char* au, double mouth, double chin,
                       double brow) {
    const int a = au_index(au);
    Eigen::Vector3d row(mouth, chin, brow);
    w.row(a) = row.transpose() / row.norm();
  };
  // component 0: mouth block anchored by AU12
  set("AU12", 1.00, 0.00, 0.00);
  set("AU06", 0.85, 0.20, 0.30);
  set("AU10", 0.80, 0.35, 0.15);
  set("AU14", 0.75, 0.40, 0.20);
  set("AU25", 0.70, 0.30, 0.30);
  // component 1: chin / lower face anchored by AU17
  set("AU17", 0.00, 1.00, 0.00);
  set("AU15", 0.30, 0.85, 0.20);
  set("AU23", 0.25, 0.80, 0.30);
  set("AU26", 0.30, 0.75, 0.20);
  set("AU20", 0.20, 0.70, 0.35);
  set("AU09", 0.35, 0.65, 0.30);
  // component 2: brow / upper face anchored by AU01
  set("AU01", 0.00, 0.00, 1.00);
  set("AU02", 0.25, 0.20, 0.90);
  set("AU05", 0.30, 0.30, 0.80);
  set("AU04", 0.20, 0.35, 0.75);
  set("AU07", 0.35, 0.25, 0.70);
  set("AU45", 0.30, 0.30, 0.65);
  return w;
}

GeneratedPair generate_pair(const SynthProfile& profile, int pair_index) {
  const Eigen::MatrixXd basis =
      profile.basis.size() > 0 ? profile.basis : default_basis();
  if (basis.rows() != kAuCount || basis.cols() != 3 ||
      basis.minCoeff() < 0.0) {
    throw std::invalid_argument("synth: basis must be non-negative 17x3");
  }

  // pair identity: emotive share first, positive before negative
  const int n_emotive = static_cast<int>(
      std::llround(profile.emotive_fraction * profile.n_pairs));
  const bool emotive = pair_index < n_emotive;
  const int n_positive =
      static_cast<int>(std::llround(profile.positive_share * n_emotive));
  const Valence valence = !emotive ? Valence::kNeutral
                          : pair_index < n_positive ? Valence::kPositive
                                                    : Valence::kNegative;

  Rng rng(derive_seed(profile.seed, 0x9a17, pair_index));
  std::vector<std::vector<double>> activations(3);
  for (int c = 0; c < 3; ++c) {
    activations[c] = component_activation(profile.dynamics[c], rng);
  }
  const auto bursts = draw_bursts(profile.burst, valence, rng);
  apply_bursts(activations, bursts);
  const auto mask = burst_mask(bursts);

  std::vector<std::vector<double>> degraded(3);
  for (int c = 0; c < 3; ++c) {
    degraded[c] = degrade_activation(activations[c], profile.degradation,
                                     mask, emotive, rng);
  }

  const std::string pair_id = "pair" + std::to_string(pair_index);
  GeneratedPair pair;
  pair.real = render(basis, activations, profile.observation_noise_sd,
                     pair_id + "_real", Label::kReal, pair_id, emotive,
                     valence, rng);
  pair.fake = render(basis, degraded, profile.observation_noise_sd,
                     pair_id + "_fake", Label::kFake, pair_id, emotive,
                     valence, rng);
  return pair;
}

GeneratedDataset generate_dataset(const SynthProfile& profile) {
  if (profile.n_pairs < 2) {
    throw std::invalid_argument("synth: need at least 2 pairs");
  }
  GeneratedDataset dataset;
  for (int p = 0; p < profile.n_pairs; ++p) {
    auto pair = generate_pair(profile, p);
    for (auto* rec : {&pair.real, &pair.fake}) {
      RecordingMeta meta;
      meta.video_id = rec->video_id;
      meta.path = rec->video_id + ".csv";
      meta.label = rec->label;
      meta.pair_id = rec->pair_id;
      meta.scene_keywords = scene_keyword(rec->valence);
      meta.emotion_flag = rec->emotion_flag;
      meta.valence = rec->valence;
      dataset.manifest.push_back(meta);
    }
    dataset.recordings.push_back(std::move(pair.real));
    dataset.recordings.push_back(std::move(pair.fake));
  }
  return dataset;
}

void write_dataset(const GeneratedDataset& dataset,
                   const std::string& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& rec : dataset.recordings) {
    std::ofstream out(std::filesystem::path(directory) /
                      (rec.video_id + ".csv"));
    if (!out) throw DataError("cannot write AU CSV for " + rec.video_id);
    ingest::write_au_csv(out, rec.frames);
  }
  std::ofstream manifest(std::filesystem::path(directory) / "manifest.csv");
  if (!manifest) throw DataError("cannot write manifest.csv");
  ingest::write_manifest(manifest, dataset.manifest);
}

std::vector<HumanRating> generate_judgments(
    const std::vector<VideoForJudgment>& videos,
    const JudgmentOptions& options) {
  if (videos.empty()) throw std::invalid_argument("generate_judgments: no videos");

  // z-score the linking feature over the video set
  std::vector<double> feature;
  for (const auto& v : videos) feature.push_back(v.feature_value);
  const double mean = ts::mean(feature);
  const double sd = ts::sd(feature);

  std::vector<HumanRating> ratings;
  ratings.reserve(videos.size() * options.n_participants);
  for (int participant = 0; participant < options.n_participants;
       ++participant) {
    Rng rng(derive_seed(options.seed, 0x4a7e, participant));
    const std::string participant_id = "p" + std::to_string(participant + 1);
    for (const auto& video : videos) {
      double p_fake = options.bias;
      if (options.model == JudgmentModel::kFeatureLinked && sd > 0.0) {
        const double z = (video.feature_value - mean) / sd;
        p_fake = 1.0 / (1.0 + std::exp(-options.weight * z));
      }
      const bool fake_call = rng.uniform() < p_fake;
      HumanRating rating;
      rating.participant_id = participant_id;
      rating.video_id = video.video_id;
      rating.rating = fake_call ? rng.uniform(55.0, 95.0)
                                : rng.uniform(5.0, 45.0);
      ratings.push_back(std::move(rating));
    }
  }
  return ratings;
}

void write_ratings(const std::vector<HumanRating>& ratings,
                   const std::string& path) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ratings: " + path);
  csv::write_row(out, {"participant_id", "video_id", "rating"});
  for (const auto& rating : ratings) {
    csv::write_row(out, {rating.participant_id, rating.video_id,
                         csv::format_double(rating.rating)});
  }
}

}  // namespace facedyn::synth
