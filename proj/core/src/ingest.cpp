#include "facedyn/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "facedyn/csv.hpp"
#include "facedyn/errors.hpp"
#include "facedyn/rng.hpp"

namespace facedyn::ingest {

SplitSide SplitAssignment::side(const std::string& pair_id) const {
  const auto it = by_pair.find(pair_id);
  if (it == by_pair.end()) {
    throw DataError("pair_id not covered by split: " + pair_id);
  }
  return it->second;
}

std::vector<FrameSample> parse_au_csv(std::istream& in) {
  const auto table = csv::read(in);

  const auto require = [&](const std::string& name) {
    const auto idx = table.column(name);
    if (!idx) throw SchemaError("AU CSV missing required column: " + name);
    return *idx;
  };

  const std::size_t col_frame = require("frame");
  const std::size_t col_time = require("timestamp");
  const std::size_t col_conf = require("confidence");
  const std::size_t col_succ = require("success");
  std::array<std::size_t, kAuCount> col_au{};
  for (int a = 0; a < kAuCount; ++a) {
    col_au[a] = require(std::string(kAuNames[a]) + "_r");
  }

  std::vector<FrameSample> frames;
  frames.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < table.header.size()) {
      throw ParseError("short row at data row " + std::to_string(r));
    }
    FrameSample f;
    f.frame_index =
        static_cast<int>(csv::to_double(row[col_frame], r, "frame"));
    f.timestamp = csv::to_double(row[col_time], r, "timestamp");
    f.confidence = csv::to_double(row[col_conf], r, "confidence");
    f.success = static_cast<int>(csv::to_double(row[col_succ], r, "success"));
    for (int a = 0; a < kAuCount; ++a) {
      const double value =
          csv::to_double(row[col_au[a]], r, std::string(kAuNames[a]) + "_r");
      if (!std::isfinite(value)) {
        throw ParseError("non-finite AU intensity at data row " +
                         std::to_string(r));
      }
      f.au[a] = value;
    }
    frames.push_back(f);
  }
  return frames;
}

std::vector<FrameSample> parse_au_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open AU CSV: " + path);
  return parse_au_csv(in);
}

void write_au_csv(std::ostream& out, const std::vector<FrameSample>& frames) {
  std::vector<std::string> header{"frame", "timestamp", "confidence",
                                  "success"};
  for (const char* name : kAuNames) header.push_back(std::string(name) + "_r");
  csv::write_row(out, header);
  for (const auto& f : frames) {
    std::vector<std::string> row{
        std::to_string(f.frame_index), csv::format_double(f.timestamp),
        csv::format_double(f.confidence), std::to_string(f.success)};
    for (int a = 0; a < kAuCount; ++a) {
      row.push_back(csv::format_double(f.au[a]));
    }
    csv::write_row(out, row);
  }
}

std::vector<RecordingMeta> parse_manifest(std::istream& in) {
  const auto table = csv::read(in);
  for (const char* name :
       {"video_id", "path", "label", "pair_id", "scene_keywords"}) {
    if (!table.column(name)) {
      throw SchemaError(std::string("manifest missing column: ") + name);
    }
  }
  const std::size_t col_id = *table.column("video_id");
  const std::size_t col_path = *table.column("path");
  const std::size_t col_label = *table.column("label");
  const std::size_t col_pair = *table.column("pair_id");
  const std::size_t col_scene = *table.column("scene_keywords");

  std::vector<RecordingMeta> rows;
  std::map<std::string, std::vector<Label>> pair_members;
  for (const auto& cells : table.rows) {
    RecordingMeta meta;
    meta.video_id = cells[col_id];
    meta.path = cells[col_path];
    meta.label = label_from_string(cells[col_label]);
    meta.pair_id = cells[col_pair];
    meta.scene_keywords = cells[col_scene];
    const auto [flag, valence] = classify_metadata(meta.scene_keywords);
    meta.emotion_flag = flag;
    meta.valence = valence;
    pair_members[meta.pair_id].push_back(meta.label);
    rows.push_back(std::move(meta));
  }

  std::vector<std::string> broken;
  for (const auto& [pair_id, labels] : pair_members) {
    const bool complete =
        labels.size() == 2 && ((labels[0] == Label::kReal) !=
                               (labels[1] == Label::kReal));
    if (!complete) broken.push_back(pair_id);
  }
  if (!broken.empty()) {
    std::ostringstream msg;
    msg << "unpaired or malformed pairs:";
    for (const auto& id : broken) msg << ' ' << id;
    throw PairingError(msg.str());
  }
  return rows;
}

std::vector<RecordingMeta> parse_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  return parse_manifest(in);
}

void write_manifest(std::ostream& out, const std::vector<RecordingMeta>& rows) {
  csv::write_row(out, {"video_id", "path", "label", "pair_id",
                       "scene_keywords"});
  for (const auto& meta : rows) {
    csv::write_row(out, {meta.video_id, meta.path, to_string(meta.label),
                         meta.pair_id, meta.scene_keywords});
  }
}

std::pair<bool, Valence> classify_metadata(const std::string& scene_keywords) {
  const auto contains = [&](const char* word) {
    return scene_keywords.find(word) != std::string::npos;
  };
  if (contains("laughing") || contains("happy")) {
    return {true, Valence::kPositive};
  }
  if (contains("angry") || contains("disgust")) {
    return {true, Valence::kNegative};
  }
  return {false, Valence::kNeutral};
}

FilterResult quality_filter(const std::vector<AuRecording>& recordings,
                            double conf_thresh, double succ_thresh) {
  FilterResult result;
  std::set<std::string> excluded_pairs;
  std::map<std::string, std::string> reasons;
  for (const auto& rec : recordings) {
    if (rec.frames.empty()) {
      throw DataError("quality_filter: empty recording " + rec.video_id);
    }
    std::ostringstream why;
    if (rec.mean_confidence() < conf_thresh) {
      why << "mean confidence " << rec.mean_confidence() << " < "
          << conf_thresh;
    }
    if (rec.mean_success() < succ_thresh) {
      if (why.tellp() > 0) why << "; ";
      why << "mean success " << rec.mean_success() << " < " << succ_thresh;
    }
    if (why.tellp() > 0) {
      excluded_pairs.insert(rec.pair_id);
      reasons[rec.video_id] = why.str();
    }
  }
  for (const auto& rec : recordings) {
    if (excluded_pairs.count(rec.pair_id)) {
      const auto it = reasons.find(rec.video_id);
      result.excluded.push_back(
          {rec.video_id, it != reasons.end()
                             ? it->second
                             : "pair partner excluded (" + rec.pair_id + ")"});
    } else {
      result.kept.push_back(rec);
    }
  }
  return result;
}

std::vector<double> smooth(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("smooth: window must be >= 1");
  if (series.empty()) return {};
  if (static_cast<std::size_t>(window) > series.size()) {
    throw std::invalid_argument("smooth: window longer than series");
  }
  const std::size_t n = series.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < window; ++j) {
      const std::size_t idx = std::min(i + j, n - 1);  // endpoint extension
      sum += series[idx];
    }
    out[i] = sum / window;
  }
  return out;
}

void truncate_frames(AuRecording& recording) {
  if (recording.frames.size() < static_cast<std::size_t>(kFrameTarget)) {
    throw DataError("recording " + recording.video_id + " has only " +
                    std::to_string(recording.frames.size()) + " frames (need " +
                    std::to_string(kFrameTarget) + ")");
  }
  recording.frames.resize(kFrameTarget);
}

void smooth_recording(AuRecording& recording, int window) {
  for (int a = 0; a < kAuCount; ++a) {
    recording.set_series(a, smooth(recording.series(a), window));
  }
}

namespace {

/// Per-AU z-scores of one recording; sd 0 maps to all-zero z (sd := 1).
std::array<std::vector<double>, kAuCount> video_z_scores(
    const AuRecording& recording) {
  std::array<std::vector<double>, kAuCount> z;
  const std::size_t n = recording.frames.size();
  for (int a = 0; a < kAuCount; ++a) {
    const auto series = recording.series(a);
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    z[a].resize(n);
    if (sd == 0.0) continue;  // all zeros
    for (std::size_t t = 0; t < n; ++t) z[a][t] = (series[t] - mean) / sd;
  }
  return z;
}

}  // namespace

NormalizationParams fit_normalization(const std::vector<AuRecording>& train) {
  if (train.empty()) throw DataError("fit_normalization: no training videos");
  double min_z = std::numeric_limits<double>::infinity();
  for (const auto& rec : train) {
    const auto z = video_z_scores(rec);
    for (int a = 0; a < kAuCount; ++a) {
      for (double v : z[a]) min_z = std::min(min_z, v);
    }
  }
  return NormalizationParams{min_z};
}

NormalizeOutcome normalize(AuRecording& recording,
                           const NormalizationParams& params, bool train_mode) {
  NormalizeOutcome outcome;
  const auto z = video_z_scores(recording);
  for (int a = 0; a < kAuCount; ++a) {
    std::vector<double> shifted(z[a].size());
    for (std::size_t t = 0; t < z[a].size(); ++t) {
      double value = z[a][t] - params.global_min_z;
      if (value < 0.0) {
        if (train_mode) {
          throw DataError(
              "normalize: training value below the global shift (shift "
              "fitted on a different set?)");
        }
        value = 0.0;
        ++outcome.clamped_cells;
      }
      shifted[t] = value;
    }
    recording.set_series(a, shifted);
  }
  return outcome;
}

SplitAssignment split_pairs(const std::vector<PairInfo>& pairs, double ratio,
                            std::uint64_t seed) {
  if (ratio <= 0.0 || ratio >= 1.0) {
    throw std::invalid_argument("split_pairs: ratio must be in (0,1)");
  }
  if (pairs.empty()) throw DataError("split_pairs: no pairs");

  SplitAssignment assignment;
  assignment.ratio = ratio;
  assignment.seed = seed;

  // strata keyed by (emotion_flag, valence); undersized strata pool together
  std::map<std::pair<bool, int>, std::vector<std::string>> strata;
  for (const auto& pair : pairs) {
    if (assignment.by_pair.count(pair.pair_id)) {
      throw PairingError("duplicate pair_id in split input: " + pair.pair_id);
    }
    assignment.by_pair[pair.pair_id] = SplitSide::kTest;  // placeholder
    strata[{pair.emotion_flag, static_cast<int>(pair.valence)}].push_back(
        pair.pair_id);
  }

  std::vector<std::vector<std::string>> groups;
  std::vector<std::string> pooled;
  for (auto& [key, ids] : strata) {
    if (ids.size() < 2) {
      assignment.degraded_stratification = true;
      pooled.insert(pooled.end(), ids.begin(), ids.end());
    } else {
      groups.push_back(std::move(ids));
    }
  }
  if (!pooled.empty()) groups.push_back(std::move(pooled));

  std::uint64_t group_index = 0;
  for (auto& ids : groups) {
    std::sort(ids.begin(), ids.end());  // input-order independence
    Rng rng(derive_seed(seed, 0x5eed, group_index++));
    rng.shuffle(ids);
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      assignment.by_pair[ids[i]] =
          i < n_train ? SplitSide::kTrain : SplitSide::kTest;
    }
  }
  return assignment;
}

}  // namespace facedyn::ingest
