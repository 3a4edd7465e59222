#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "facedyn/types.hpp"

namespace facedyn::ingest {

/// Shift applied after per-video z-scoring: the minimum z over the whole
/// training set, all AUs and frames. Subtracting it makes the training-set
/// minimum exactly 0 (the non-negativity NMF needs).
struct NormalizationParams {
  double global_min_z = 0.0;
};

enum class SplitSide { kTrain, kTest };

struct SplitAssignment {
  std::map<std::string, SplitSide> by_pair;
  double ratio = 0.8;
  std::uint64_t seed = 0;
  bool degraded_stratification = false;  // some stratum had < 2 pairs

  SplitSide side(const std::string& pair_id) const;
};

struct ExclusionRecord {
  std::string video_id;
  std::string reason;
};

struct FilterResult {
  std::vector<AuRecording> kept;
  std::vector<ExclusionRecord> excluded;
};

/// Parses one OpenFace-style AU CSV into frames. Requires frame, timestamp,
/// confidence, success and the 17 *_r intensity columns; *_c presence
/// columns and any extras are ignored.
std::vector<FrameSample> parse_au_csv(std::istream& in);
std::vector<FrameSample> parse_au_csv_file(const std::string& path);

/// Writes frames back out in the exact same schema (full precision).
void write_au_csv(std::ostream& out, const std::vector<FrameSample>& frames);

/// Parses the dataset manifest (video_id, path, label, pair_id,
/// scene_keywords). Every pair_id must appear exactly twice with one real
/// and one fake member.
std::vector<RecordingMeta> parse_manifest(std::istream& in);
std::vector<RecordingMeta> parse_manifest_file(const std::string& path);

void write_manifest(std::ostream& out, const std::vector<RecordingMeta>& rows);

/// Emotion flag and valence from scene keywords. Unknown keywords fall
/// through to (no emotion, neutral).
std::pair<bool, Valence> classify_metadata(const std::string& scene_keywords);

/// Keeps a recording iff mean confidence and mean success clear the
/// thresholds; an exclusion always removes the whole pair.
FilterResult quality_filter(const std::vector<AuRecording>& recordings,
                            double conf_thresh = 0.83,
                            double succ_thresh = 0.94);

/// Left-aligned rolling mean with the final value extended past the end.
std::vector<double> smooth(const std::vector<double>& series, int window = 4);

/// Truncates to the first kFrameTarget frames; throws DataError when the
/// recording is shorter.
void truncate_frames(AuRecording& recording);

/// Applies smoothing to every AU series of a recording in place.
void smooth_recording(AuRecording& recording, int window = 4);

/// Fits the global shift on smoothed training recordings.
NormalizationParams fit_normalization(const std::vector<AuRecording>& train);

struct NormalizeOutcome {
  long clamped_cells = 0;  // test-mode values below the shift, clamped to 0
};

/// Per-AU z-score within the video (sd 0 maps to z 0), then shift so the
/// training minimum is 0. Off-train values below 0 are clamped.
NormalizeOutcome normalize(AuRecording& recording,
                           const NormalizationParams& params, bool train_mode);

struct PairInfo {
  std::string pair_id;
  bool emotion_flag = false;
  Valence valence = Valence::kNeutral;
};

/// Pair-preserving stratified split over (emotion_flag, valence) strata.
/// Strata with fewer than 2 pairs fall back to one global pool.
SplitAssignment split_pairs(const std::vector<PairInfo>& pairs,
                            double ratio = 0.8, std::uint64_t seed = 0);

}  // namespace facedyn::ingest
