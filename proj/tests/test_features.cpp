#include "facedyn/features.hpp"

#include <cmath>
#include <set>

#include "doctest.h"
#include "facedyn/rng.hpp"
#include "facedyn/timeseries.hpp"

using namespace facedyn;
namespace feat = facedyn::feat;

namespace {

nmf::RepresentativeSet paper_reps() {
  nmf::RepresentativeSet reps;
  for (const char* name : {"AU12", "AU17", "AU01"}) {
    reps.au_index.push_back(au_index(name));
    reps.au_name.push_back(name);
  }
  return reps;
}

AuRecording noisy_recording(const std::string& id, std::uint64_t seed) {
  AuRecording rec;
  rec.video_id = id;
  Rng rng(seed);
  std::array<double, kAuCount> level{};
  for (auto& l : level) l = 1.0 + rng.uniform();
  for (int t = 0; t < kFrameTarget; ++t) {
    FrameSample f;
    f.frame_index = t;
    f.timestamp = t / 24.0;
    for (int a = 0; a < kAuCount; ++a) {
      level[a] = 0.95 * level[a] + 0.05 * (1.5 + rng.normal());
      f.au[a] = std::max(0.0, level[a]);
    }
    rec.frames.push_back(f);
  }
  return rec;
}

}  // namespace

TEST_CASE("registry holds exactly 37 metrics with the required members") {
  const auto& entries = feat::registry();
  CHECK(entries.size() == 37);

  const auto names = feat::column_names(paper_reps());
  // permutation entropy is excluded by default: 36 x 3 columns
  CHECK(names.size() == 108);
  feat::ExtractOptions with_pe;
  with_pe.include_permutation_entropy = true;
  CHECK(feat::column_names(paper_reps(), with_pe).size() == 111);

  const std::set<std::string> name_set(names.begin(), names.end());
  for (const char* required :
       {"diff1_pacf5_AU17", "diff1_pacf5_AU01", "diff2_acf1_AU01",
        "diff2_acf10_AU12", "max_kl_shift_AU12", "diff1_acf1_AU12",
        "lumpiness_AU12", "diff2_acf1_AU12"}) {
    INFO("required column ", required);
    CHECK(name_set.count(required) == 1);
  }

  SUBCASE("names are unique") {
    CHECK(name_set.size() == names.size());
  }
}

TEST_CASE("feature extraction") {
  const auto reps = paper_reps();
  const auto rec = noisy_recording("v1", 5);

  SUBCASE("two runs produce identical rows") {
    const auto a = feat::extract_row(rec, reps);
    const auto b = feat::extract_row(rec, reps);
    CHECK(a == b);
  }
  SUBCASE("zero-motion recording yields sentinels and zero lumpiness") {
    AuRecording still = rec;
    for (auto& f : still.frames) f.au.fill(2.0);
    const auto matrix = feat::extract_features({still}, reps);
    const auto acf_col = matrix.column("diff1_acf1_AU12");
    REQUIRE(acf_col.has_value());
    CHECK(std::isnan(matrix.at(0, *acf_col)));
    const auto lump_col = matrix.column("lumpiness_AU12");
    REQUIRE(lump_col.has_value());
    CHECK(matrix.at(0, *lump_col) == 0.0);
  }
  SUBCASE("extraction across thread counts is bit-identical") {
    std::vector<AuRecording> recs;
    for (int i = 0; i < 6; ++i) {
      recs.push_back(noisy_recording("v" + std::to_string(i), 100 + i));
    }
    setenv("FACEDYN_THREADS", "1", 1);
    const auto serial = feat::extract_features(recs, reps);
    setenv("FACEDYN_THREADS", "4", 1);
    const auto parallel = feat::extract_features(recs, reps);
    unsetenv("FACEDYN_THREADS");
    CHECK(serial.values == parallel.values);
  }
}

TEST_CASE("feature matrix csv round-trip with sentinel tokens") {
  feat::FeatureMatrix matrix;
  matrix.row_ids = {"a", "b"};
  matrix.column_names = {"f1", "f2"};
  matrix.values = {1.5, -std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::quiet_NaN(), 2.25};
  matrix.imputed.assign(4, 0);
  const auto text = matrix.to_csv();
  CHECK(text.find("-inf") != std::string::npos);
  CHECK(text.find("nan") != std::string::npos);
  const auto loaded = feat::feature_matrix_from_csv(text);
  CHECK(loaded.at(0, 0) == 1.5);
  CHECK(std::isinf(loaded.at(0, 1)));
  CHECK(std::isnan(loaded.at(1, 0)));
  CHECK(loaded.at(1, 1) == 2.25);
}

TEST_CASE("zero-variance drop") {
  feat::FeatureMatrix matrix;
  matrix.row_ids = {"a", "b", "c"};
  matrix.column_names = {"varying", "flat"};
  matrix.values = {1.0, 7.0, 2.0, 7.0, 3.0, 7.0};
  matrix.imputed.assign(6, 0);
  feat::drop_zero_variance(matrix, {0, 1, 2});
  CHECK(matrix.column_names == std::vector<std::string>{"varying"});
  REQUIRE(matrix.dropped.size() == 1);
  CHECK(matrix.dropped[0].name == "flat");
}

TEST_CASE("imputation") {
  SUBCASE("clean matrix returned unchanged") {
    feat::FeatureMatrix matrix;
    matrix.row_ids = {"a", "b"};
    matrix.column_names = {"f"};
    matrix.values = {1.0, 2.0};
    matrix.imputed.assign(2, 0);
    const auto report = feat::impute_nonfinite(matrix);
    CHECK(report.imputed_cells == 0);
    CHECK(matrix.values == std::vector<double>{1.0, 2.0});
  }

  SUBCASE("single -inf cell lands inside the observed range") {
    Rng rng(3);
    feat::FeatureMatrix matrix;
    matrix.column_names = {"f1", "f2"};
    for (int r = 0; r < 40; ++r) {
      matrix.row_ids.push_back(std::to_string(r));
      const double base = rng.uniform();
      matrix.values.push_back(base);
      matrix.values.push_back(2.0 * base + 0.01 * rng.normal());
    }
    matrix.imputed.assign(matrix.values.size(), 0);
    matrix.values[31] = -std::numeric_limits<double>::infinity();
    double lo = 1e300, hi = -1e300;
    for (int r = 0; r < 40; ++r) {
      if (r == 15) continue;
      lo = std::min(lo, matrix.values[r * 2 + 1]);
      hi = std::max(hi, matrix.values[r * 2 + 1]);
    }
    const auto report = feat::impute_nonfinite(matrix);
    CHECK(report.imputed_cells == 1);
    CHECK(std::isfinite(matrix.at(15, 1)));
    CHECK(matrix.at(15, 1) >= lo);
    CHECK(matrix.at(15, 1) <= hi);
    CHECK(matrix.imputed[15 * 2 + 1] == 1);
    // the mask marks exactly the formerly non-finite cells
    long flagged = 0;
    for (auto m : matrix.imputed) flagged += m;
    CHECK(flagged == 1);
  }

  SUBCASE("forest beats median imputation on correlated features") {
    // plant missingness on a feature strongly predicted by the others
    Rng rng(12);
    feat::FeatureMatrix matrix;
    matrix.column_names = {"a", "b", "target"};
    std::vector<double> truth;
    for (int r = 0; r < 120; ++r) {
      matrix.row_ids.push_back(std::to_string(r));
      const double a = rng.normal();
      const double b = rng.normal();
      const double target = 2.0 * a - b + 0.05 * rng.normal();
      matrix.values.push_back(a);
      matrix.values.push_back(b);
      matrix.values.push_back(target);
      truth.push_back(target);
    }
    matrix.imputed.assign(matrix.values.size(), 0);
    std::vector<std::size_t> masked;
    double median_of_observed;
    {
      std::vector<double> observed;
      for (int r = 0; r < 120; ++r) {
        if (r % 6 == 0) {
          masked.push_back(r);
          matrix.at(r, 2) = std::numeric_limits<double>::quiet_NaN();
        } else {
          observed.push_back(truth[r]);
        }
      }
      median_of_observed = ts::median(observed);
    }
    feat::ImputeOptions options;
    options.seed = 5;
    feat::impute_nonfinite(matrix, options);
    double rf_sse = 0.0, median_sse = 0.0;
    for (auto r : masked) {
      rf_sse += std::pow(matrix.at(r, 2) - truth[r], 2.0);
      median_sse += std::pow(median_of_observed - truth[r], 2.0);
    }
    CHECK(rf_sse < median_sse);
  }

  SUBCASE("fully non-finite column is dropped with a reason") {
    feat::FeatureMatrix matrix;
    matrix.column_names = {"ok", "doomed"};
    for (int r = 0; r < 10; ++r) {
      matrix.row_ids.push_back(std::to_string(r));
      matrix.values.push_back(static_cast<double>(r));
      matrix.values.push_back(std::numeric_limits<double>::infinity());
    }
    matrix.imputed.assign(matrix.values.size(), 0);
    feat::impute_nonfinite(matrix);
    CHECK(matrix.column_names == std::vector<std::string>{"ok"});
    REQUIRE(matrix.dropped.size() == 1);
    CHECK(matrix.dropped[0].name == "doomed");
  }
}

TEST_CASE("transition events") {
  const auto reps = paper_reps();

  SUBCASE("constant series has no events") {
    AuRecording still;
    still.video_id = "still";
    for (int t = 0; t < kFrameTarget; ++t) {
      FrameSample f;
      f.frame_index = t;
      f.au.fill(1.0);
      still.frames.push_back(f);
    }
    const feat::TransitionThresholds thresholds{0.0, 0.05};
    const auto summary = feat::transition_events(still, reps, thresholds);
    CHECK(summary.event_count == 0);
    CHECK(summary.transition_fraction == 0.0);
  }

  SUBCASE("a single steep ramp forms one event of known duration") {
    AuRecording ramp;
    ramp.video_id = "ramp";
    for (int t = 0; t < kFrameTarget; ++t) {
      FrameSample f;
      f.frame_index = t;
      f.au.fill(0.0);
      // AU12 climbs steeply for 10 frames starting at t=100
      double value = 0.0;
      if (t > 100 && t <= 110) value = (t - 100) * 0.5;
      if (t > 110) value = 5.0;
      f.au[au_index("AU12")] = value;
      ramp.frames.push_back(f);
    }
    const feat::TransitionThresholds thresholds{0.0, 0.1};
    const auto summary = feat::transition_events(ramp, reps, thresholds);
    CHECK(summary.event_count == 1);
    CHECK(summary.max_duration == doctest::Approx(10.0));
    CHECK(summary.max_velocity_magnitude == doctest::Approx(0.5));
  }

  SUBCASE("thresholds come from the training pool") {
    std::vector<AuRecording> train{noisy_recording("a", 1),
                                   noisy_recording("b", 2)};
    const auto thresholds = feat::transition_thresholds(train, reps);
    CHECK(thresholds.sd > 0.0);
    CHECK(std::fabs(thresholds.mean) < thresholds.sd);
  }
}
