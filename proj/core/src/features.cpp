#include "facedyn/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "facedyn/csv.hpp"
#include "facedyn/errors.hpp"
#include "facedyn/forest.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/parallel.hpp"
#include "facedyn/timeseries.hpp"

namespace facedyn::feat {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double evaluate_metric(const std::string& metric,
                       const std::vector<double>& series,
                       const ExtractOptions& options) {
  if (metric == "acf1") return ts::acf1(series);
  if (metric == "acf10") return ts::acf10(series);
  if (metric == "pacf5") return ts::pacf5(series);
  if (metric == "max_kl_shift") {
    return ts::max_kl_shift(series, options.window).max_kl;
  }
  if (metric == "max_level_shift") {
    return ts::max_level_shift(series, options.window);
  }
  if (metric == "max_var_shift") {
    return ts::max_var_shift(series, options.window);
  }
  if (metric == "lumpiness") return ts::lumpiness(series, options.window);
  if (metric == "stability") return ts::stability(series, options.window);
  if (metric == "shannon_entropy") return ts::shannon_entropy_kde(series);
  if (metric == "approx_entropy") return ts::approx_entropy(series);
  if (metric == "sample_entropy") return ts::sample_entropy(series);
  if (metric == "spectral_entropy") return ts::spectral_entropy(series);
  if (metric == "permutation_entropy") return ts::permutation_entropy(series);
  if (metric == "hurst") return ts::hurst_rs(series);
  if (metric == "trend_strength") return ts::trend_strength(series);
  if (metric == "linearity") return ts::linearity(series);
  if (metric == "curvature") return ts::curvature(series);
  if (metric == "spikiness") return ts::spikiness(series);
  if (metric == "kpss_stat") return ts::kpss_stat(series);
  if (metric == "lz_complexity") return ts::lz_complexity(series);
  if (metric == "crossing_points") return ts::crossing_points(series);
  if (metric == "flat_spots") return ts::flat_spots(series);
  if (metric == "sd") return ts::sd(series);
  if (metric == "skewness") return ts::skewness(series);
  if (metric == "kurtosis") return ts::excess_kurtosis(series);
  throw std::invalid_argument("unknown registry metric: " + metric);
}

}  // namespace

std::string to_string(Transform transform) {
  switch (transform) {
    case Transform::kNone: return "none";
    case Transform::kDiff1: return "diff1";
    case Transform::kDiff2: return "diff2";
  }
  return "none";
}

std::string FeatureDescriptor::column_name(const std::string& au) const {
  if (transform == Transform::kNone) return metric + "_" + au;
  return to_string(transform) + "_" + metric + "_" + au;
}

const std::vector<FeatureDescriptor>& registry() {
  // 37 metrics per AU. Anchored entries are named in the study material
  // (the eight selected features, the entropy/long-range families);
  // anchored=false marks standard catalogue fillers.
  static const std::vector<FeatureDescriptor> entries = {
      // raw series (22)
      {"acf1", Transform::kNone, true, true},
      {"acf10", Transform::kNone, true, true},
      {"pacf5", Transform::kNone, true, true},
      {"max_kl_shift", Transform::kNone, true, true},
      {"max_level_shift", Transform::kNone, false, true},
      {"max_var_shift", Transform::kNone, false, true},
      {"lumpiness", Transform::kNone, true, true},
      {"stability", Transform::kNone, true, true},
      {"shannon_entropy", Transform::kNone, true, true},
      {"approx_entropy", Transform::kNone, true, true},
      {"sample_entropy", Transform::kNone, true, true},
      {"spectral_entropy", Transform::kNone, true, true},
      {"permutation_entropy", Transform::kNone, true, false},
      {"hurst", Transform::kNone, true, true},
      {"trend_strength", Transform::kNone, true, true},
      {"linearity", Transform::kNone, false, true},
      {"curvature", Transform::kNone, false, true},
      {"spikiness", Transform::kNone, false, true},
      {"kpss_stat", Transform::kNone, true, true},
      {"lz_complexity", Transform::kNone, true, true},
      {"crossing_points", Transform::kNone, false, true},
      {"flat_spots", Transform::kNone, false, true},
      // velocity (8)
      {"acf1", Transform::kDiff1, true, true},
      {"acf10", Transform::kDiff1, true, true},
      {"pacf5", Transform::kDiff1, true, true},
      {"sd", Transform::kDiff1, false, true},
      {"skewness", Transform::kDiff1, false, true},
      {"kurtosis", Transform::kDiff1, false, true},
      {"approx_entropy", Transform::kDiff1, false, true},
      {"sample_entropy", Transform::kDiff1, false, true},
      // acceleration (7)
      {"acf1", Transform::kDiff2, true, true},
      {"acf10", Transform::kDiff2, true, true},
      {"pacf5", Transform::kDiff2, true, true},
      {"sd", Transform::kDiff2, false, true},
      {"skewness", Transform::kDiff2, false, true},
      {"kurtosis", Transform::kDiff2, false, true},
      {"approx_entropy", Transform::kDiff2, false, true},
  };
  return entries;
}

std::optional<std::size_t> FeatureMatrix::column(
    const std::string& name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return i;
  }
  return std::nullopt;
}

std::string FeatureMatrix::to_csv() const {
  std::ostringstream out;
  out << "video_id";
  for (const auto& name : column_names) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < n_rows(); ++r) {
    out << row_ids[r];
    for (std::size_t c = 0; c < n_cols(); ++c) {
      const double v = at(r, c);
      out << ',';
      if (std::isnan(v)) {
        out << "nan";
      } else if (std::isinf(v)) {
        out << (v > 0 ? "inf" : "-inf");
      } else {
        out << csv::format_double(v);
      }
    }
    out << '\n';
  }
  return out.str();
}

FeatureMatrix feature_matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  const auto table = csv::read(in);
  if (table.header.empty() || table.header[0] != "video_id") {
    throw SchemaError("feature CSV must start with a video_id column");
  }
  FeatureMatrix matrix;
  matrix.column_names.assign(table.header.begin() + 1, table.header.end());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    matrix.row_ids.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      const std::string& cell = row[c];
      if (cell == "nan") {
        matrix.values.push_back(kNan);
      } else if (cell == "inf") {
        matrix.values.push_back(std::numeric_limits<double>::infinity());
      } else if (cell == "-inf") {
        matrix.values.push_back(-std::numeric_limits<double>::infinity());
      } else {
        matrix.values.push_back(csv::to_double(cell, r, table.header[c]));
      }
    }
  }
  matrix.imputed.assign(matrix.values.size(), 0);
  return matrix;
}

std::vector<std::string> column_names(const nmf::RepresentativeSet& reps,
                                      const ExtractOptions& options) {
  std::vector<std::string> names;
  for (const auto& au : reps.au_name) {
    for (const auto& descriptor : registry()) {
      if (!descriptor.enabled_by_default &&
          !(descriptor.metric == "permutation_entropy" &&
            options.include_permutation_entropy)) {
        continue;
      }
      names.push_back(descriptor.column_name(au));
    }
  }
  return names;
}

std::vector<double> extract_row(const AuRecording& recording,
                                const nmf::RepresentativeSet& reps,
                                const ExtractOptions& options) {
  std::vector<double> row;
  for (int au : reps.au_index) {
    const auto raw = recording.series(au);
    const auto velocity = ts::difference(raw, 1);
    const auto acceleration = ts::difference(raw, 2);
    for (const auto& descriptor : registry()) {
      if (!descriptor.enabled_by_default &&
          !(descriptor.metric == "permutation_entropy" &&
            options.include_permutation_entropy)) {
        continue;
      }
      const auto& series = descriptor.transform == Transform::kNone
                               ? raw
                               : (descriptor.transform == Transform::kDiff1
                                      ? velocity
                                      : acceleration);
      row.push_back(evaluate_metric(descriptor.metric, series, options));
    }
  }
  return row;
}

FeatureMatrix extract_features(const std::vector<AuRecording>& recordings,
                               const nmf::RepresentativeSet& reps,
                               const ExtractOptions& options) {
  FeatureMatrix matrix;
  matrix.column_names = column_names(reps, options);
  matrix.row_ids.resize(recordings.size());
  matrix.values.assign(recordings.size() * matrix.n_cols(), 0.0);
  parallel_for(recordings.size(), [&](std::size_t r) {
    matrix.row_ids[r] = recordings[r].video_id;
    const auto row = extract_row(recordings[r], reps, options);
    std::copy(row.begin(), row.end(),
              matrix.values.begin() + r * matrix.n_cols());
  });
  matrix.imputed.assign(matrix.values.size(), 0);
  return matrix;
}

namespace {

void erase_columns(FeatureMatrix& matrix, const std::set<std::size_t>& gone) {
  if (gone.empty()) return;
  FeatureMatrix next;
  next.row_ids = matrix.row_ids;
  next.dropped = matrix.dropped;
  for (std::size_t c = 0; c < matrix.n_cols(); ++c) {
    if (!gone.count(c)) next.column_names.push_back(matrix.column_names[c]);
  }
  next.values.reserve(matrix.n_rows() * next.column_names.size());
  next.imputed.reserve(next.values.capacity());
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    for (std::size_t c = 0; c < matrix.n_cols(); ++c) {
      if (gone.count(c)) continue;
      next.values.push_back(matrix.at(r, c));
      next.imputed.push_back(matrix.imputed[r * matrix.n_cols() + c]);
    }
  }
  matrix = std::move(next);
}

}  // namespace

void drop_zero_variance(FeatureMatrix& matrix,
                        const std::vector<std::size_t>& train_rows) {
  std::set<std::size_t> gone;
  for (std::size_t c = 0; c < matrix.n_cols(); ++c) {
    double first = kNan;
    bool varies = false;
    for (auto r : train_rows) {
      const double v = matrix.at(r, c);
      if (!std::isfinite(v)) continue;
      if (std::isnan(first)) {
        first = v;
      } else if (v != first) {
        varies = true;
        break;
      }
    }
    if (!varies) {
      gone.insert(c);
      matrix.dropped.push_back(
          {matrix.column_names[c], "zero variance on training rows"});
    }
  }
  erase_columns(matrix, gone);
}

ImputeReport impute_nonfinite(FeatureMatrix& matrix,
                              const ImputeOptions& options) {
  ImputeReport report;
  const std::size_t n = matrix.n_rows();

  // locate non-finite cells; drop columns with nothing observed
  std::set<std::size_t> dead_columns;
  std::vector<std::vector<std::size_t>> missing_rows(matrix.n_cols());
  for (std::size_t c = 0; c < matrix.n_cols(); ++c) {
    std::size_t observed = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::isfinite(matrix.at(r, c))) {
        ++observed;
      } else {
        missing_rows[c].push_back(r);
      }
    }
    if (observed == 0) {
      dead_columns.insert(c);
      matrix.dropped.push_back(
          {matrix.column_names[c], "no finite values to impute from"});
    }
  }
  if (!dead_columns.empty()) {
    std::vector<std::vector<std::size_t>> kept;
    for (std::size_t c = 0; c < matrix.n_cols(); ++c) {
      if (!dead_columns.count(c)) kept.push_back(std::move(missing_rows[c]));
    }
    erase_columns(matrix, dead_columns);
    missing_rows = std::move(kept);
  }

  std::vector<std::size_t> affected;
  for (std::size_t c = 0; c < matrix.n_cols(); ++c) {
    if (!missing_rows[c].empty()) {
      affected.push_back(c);
      report.imputed_cells += static_cast<long>(missing_rows[c].size());
      for (auto r : missing_rows[c]) {
        matrix.imputed[r * matrix.n_cols() + c] = 1;
      }
    }
  }
  if (affected.empty()) return report;

  // initialize with column medians of observed values
  std::vector<std::pair<double, double>> observed_range(matrix.n_cols());
  for (auto c : affected) {
    std::vector<double> observed;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = matrix.at(r, c);
      if (std::isfinite(v)) observed.push_back(v);
    }
    const double med = ts::median(observed);
    observed_range[c] = {*std::min_element(observed.begin(), observed.end()),
                         *std::max_element(observed.begin(), observed.end())};
    for (auto r : missing_rows[c]) matrix.at(r, c) = med;
  }

  // iterative refits: each affected column regressed on all others
  double prev_nrmse = std::numeric_limits<double>::infinity();
  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    double nrmse_sum = 0.0;
    int nrmse_count = 0;
    for (auto c : affected) {
      // predictor matrix without column c
      const std::size_t p = matrix.n_cols() - 1;
      std::vector<double> x;
      x.reserve(n * p);
      std::vector<double> y_train;
      std::vector<std::size_t> train_rows;
      std::vector<char> is_missing(n, 0);
      for (auto r : missing_rows[c]) is_missing[r] = 1;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < matrix.n_cols(); ++k) {
          if (k != c) x.push_back(matrix.at(r, k));
        }
        if (!is_missing[r]) train_rows.push_back(r);
      }
      for (auto r : train_rows) y_train.push_back(matrix.at(r, c));

      std::vector<double> x_train;
      x_train.reserve(train_rows.size() * p);
      for (auto r : train_rows) {
        x_train.insert(x_train.end(), x.begin() + r * p,
                       x.begin() + (r + 1) * p);
      }
      forest::Options forest_options;
      forest_options.n_trees = options.forest_trees;
      forest_options.min_leaf = 5;
      forest_options.seed = derive_seed(options.seed, c, iteration);
      const auto rf = forest::RandomForest::fit(
          {x_train.data(), train_rows.size(), p}, y_train,
          forest::RandomForest::Task::kRegress, 0, forest_options);

      // out-of-bag normalized RMSE over observed rows
      const double spread = ts::sd(y_train);
      if (spread > 0.0) {
        double mse = rf.oob_error();
        if (std::isfinite(mse)) {
          nrmse_sum += std::sqrt(mse) / spread;
          ++nrmse_count;
        }
      }
      for (auto r : missing_rows[c]) {
        double value = rf.predict_value(x.data() + r * p);
        value = std::clamp(value, observed_range[c].first,
                           observed_range[c].second);
        matrix.at(r, c) = value;
      }
    }
    report.iterations = iteration + 1;
    const double nrmse = nrmse_count > 0 ? nrmse_sum / nrmse_count : 0.0;
    report.final_oob_nrmse = nrmse;
    if (std::fabs(prev_nrmse - nrmse) < options.tol) break;
    prev_nrmse = nrmse;
  }
  return report;
}

TransitionThresholds transition_thresholds(
    const std::vector<AuRecording>& train,
    const nmf::RepresentativeSet& reps) {
  std::vector<double> pooled;
  for (const auto& rec : train) {
    for (int au : reps.au_index) {
      const auto velocity = ts::difference(rec.series(au), 1);
      pooled.insert(pooled.end(), velocity.begin(), velocity.end());
    }
  }
  if (pooled.empty()) throw DataError("transition_thresholds: no data");
  TransitionThresholds thresholds;
  thresholds.mean = ts::mean(pooled);
  thresholds.sd = ts::sd(pooled);
  return thresholds;
}

TransitionEventSummary transition_events(
    const AuRecording& recording, const nmf::RepresentativeSet& reps,
    const TransitionThresholds& thresholds) {
  TransitionEventSummary summary;
  summary.video_id = recording.video_id;

  const double lo = thresholds.mean - thresholds.sd;
  const double hi = thresholds.mean + thresholds.sd;
  long transition_frames = 0, total_frames = 0;
  std::vector<double> durations;
  std::vector<double> magnitudes;
  double v_min = std::numeric_limits<double>::infinity();
  double v_max = -std::numeric_limits<double>::infinity();

  for (int au : reps.au_index) {
    const auto velocity = ts::difference(recording.series(au), 1);
    total_frames += static_cast<long>(velocity.size());
    long run = 0;
    for (std::size_t t = 0; t <= velocity.size(); ++t) {
      const bool transition =
          t < velocity.size() && (velocity[t] < lo || velocity[t] > hi);
      if (transition) {
        ++run;
        ++transition_frames;
        magnitudes.push_back(std::fabs(velocity[t]));
        v_min = std::min(v_min, velocity[t]);
        v_max = std::max(v_max, velocity[t]);
      } else if (run > 0) {
        durations.push_back(static_cast<double>(run));
        run = 0;
      }
    }
  }

  summary.event_count = static_cast<long>(durations.size());
  summary.transition_fraction =
      total_frames > 0
          ? static_cast<double>(transition_frames) / total_frames
          : 0.0;
  if (!durations.empty()) {
    summary.mean_duration = ts::mean(durations);
    summary.max_duration =
        *std::max_element(durations.begin(), durations.end());
    summary.mean_velocity_magnitude = ts::mean(magnitudes);
    summary.max_velocity_magnitude =
        *std::max_element(magnitudes.begin(), magnitudes.end());
    summary.velocity_range = v_max - v_min;
  }
  return summary;
}

}  // namespace facedyn::feat
