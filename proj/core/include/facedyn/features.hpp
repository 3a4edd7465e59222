#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facedyn/nmf.hpp"
#include "facedyn/types.hpp"

namespace facedyn::feat {

enum class Transform { kNone, kDiff1, kDiff2 };

std::string to_string(Transform transform);

struct FeatureDescriptor {
  std::string metric;    // registry metric id, e.g. "acf1"
  Transform transform = Transform::kNone;
  bool anchored = true;  // false: standard catalogue filler, not cited
  bool enabled_by_default = true;

  /// Column naming convention: [transform]_[metric]_[AU]; the transform
  /// prefix is omitted for raw-series metrics.
  std::string column_name(const std::string& au) const;
};

/// The 37-entry metric registry evaluated per representative AU
/// (3 x 37 = 111 columns when everything is enabled).
const std::vector<FeatureDescriptor>& registry();

struct DroppedColumn {
  std::string name;
  std::string reason;
};

struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> column_names;
  std::vector<double> values;         // row-major
  std::vector<std::uint8_t> imputed;  // row-major cell mask
  std::vector<DroppedColumn> dropped;

  std::size_t n_rows() const { return row_ids.size(); }
  std::size_t n_cols() const { return column_names.size(); }
  double& at(std::size_t r, std::size_t c) {
    return values[r * n_cols() + c];
  }
  double at(std::size_t r, std::size_t c) const {
    return values[r * n_cols() + c];
  }
  std::optional<std::size_t> column(const std::string& name) const;

  std::string to_csv() const;  // sentinels as inf/-inf/nan tokens
};

FeatureMatrix feature_matrix_from_csv(const std::string& text);

struct ExtractOptions {
  bool include_permutation_entropy = false;  // excluded by default
  int window = 24;  // lumpiness / stability / shift windows
};

/// One row of registry features for a preprocessed recording.
std::vector<double> extract_row(const AuRecording& recording,
                                const nmf::RepresentativeSet& reps,
                                const ExtractOptions& options = {});

std::vector<std::string> column_names(const nmf::RepresentativeSet& reps,
                                      const ExtractOptions& options = {});

FeatureMatrix extract_features(const std::vector<AuRecording>& recordings,
                               const nmf::RepresentativeSet& reps,
                               const ExtractOptions& options = {});

/// Drops zero-variance columns over the given (training) rows.
void drop_zero_variance(FeatureMatrix& matrix,
                        const std::vector<std::size_t>& train_rows);

struct ImputeOptions {
  int max_iterations = 10;
  double tol = 1e-3;   // stop when OOB NRMSE change falls below
  int forest_trees = 60;
  std::uint64_t seed = 0;
};

struct ImputeReport {
  int iterations = 0;
  double final_oob_nrmse = 0.0;
  long imputed_cells = 0;
};

/// Iterative random-forest imputation of non-finite cells, initialized with
/// column medians. Columns with no finite values are dropped.
ImputeReport impute_nonfinite(FeatureMatrix& matrix,
                              const ImputeOptions& options = {});

struct TransitionThresholds {
  double mean = 0.0;
  double sd = 0.0;
};

/// Pooled mean/sd of frame-to-frame first differences over the training
/// recordings' representative AUs.
TransitionThresholds transition_thresholds(
    const std::vector<AuRecording>& train, const nmf::RepresentativeSet& reps);

struct TransitionEventSummary {
  std::string video_id;
  long event_count = 0;
  double transition_fraction = 0.0;
  double mean_duration = 0.0;
  double max_duration = 0.0;
  double mean_velocity_magnitude = 0.0;
  double max_velocity_magnitude = 0.0;
  double velocity_range = 0.0;
};

/// A frame is a transition frame when its velocity lies outside
/// mean +- sd; maximal runs form events, pooled over representative AUs.
TransitionEventSummary transition_events(const AuRecording& recording,
                                         const nmf::RepresentativeSet& reps,
                                         const TransitionThresholds& thresholds);

}  // namespace facedyn::feat
