#pragma once

#include <array>
#include <string>
#include <vector>

#include "facedyn/errors.hpp"

namespace facedyn {

inline constexpr int kAuCount = 17;

/// Truncation length: 10 s at 24 fps.
inline constexpr int kFrameTarget = 241;
inline constexpr double kDefaultFps = 24.0;

/// Fixed AU order used across all matrices and CSV schemas.
inline constexpr std::array<const char*, kAuCount> kAuNames = {
    "AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
    "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU45"};

int au_index(const std::string& name);

enum class Label { kReal, kFake };
enum class Valence { kPositive, kNeutral, kNegative };

std::string to_string(Label label);
std::string to_string(Valence valence);
Label label_from_string(const std::string& s);
Valence valence_from_string(const std::string& s);

struct FrameSample {
  int frame_index = 0;
  double timestamp = 0.0;
  double confidence = 1.0;
  int success = 1;
  std::array<double, kAuCount> au{};
};

/// One video's per-frame AU intensities plus labels.
struct AuRecording {
  std::string video_id;
  Label label = Label::kReal;
  std::string pair_id;
  bool emotion_flag = false;
  Valence valence = Valence::kNeutral;
  double fps = kDefaultFps;
  std::vector<FrameSample> frames;

  /// Copy of one AU's time series.
  std::vector<double> series(int au) const;
  void set_series(int au, const std::vector<double>& values);

  double mean_confidence() const;
  double mean_success() const;
};

struct RecordingMeta {
  std::string video_id;
  std::string path;
  Label label = Label::kReal;
  std::string pair_id;
  std::string scene_keywords;
  bool emotion_flag = false;
  Valence valence = Valence::kNeutral;
};

}  // namespace facedyn
