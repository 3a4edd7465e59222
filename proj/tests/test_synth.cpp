#include "facedyn/synth.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "facedyn/ingest.hpp"
#include "facedyn/nmf.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/timeseries.hpp"

using namespace facedyn;
namespace synth = facedyn::synth;

TEST_CASE("pair generation determinism and null degradation") {
  synth::SynthProfile profile;
  profile.n_pairs = 4;
  profile.seed = 11;

  SUBCASE("same profile and index give bit-identical pairs") {
    const auto a = synth::generate_pair(profile, 2);
    const auto b = synth::generate_pair(profile, 2);
    for (int t = 0; t < kFrameTarget; ++t) {
      CHECK(a.real.frames[t].au == b.real.frames[t].au);
      CHECK(a.fake.frames[t].au == b.fake.frames[t].au);
    }
  }

  SUBCASE("zero degradation leaves only observation noise differences") {
    profile.degradation.velocity_jitter_sd = 0.0;
    profile.degradation.shift_probability = 0.0;
    const auto pair = synth::generate_pair(profile, 0);
    double max_gap = 0.0;
    for (int t = 0; t < kFrameTarget; ++t) {
      for (int a = 0; a < kAuCount; ++a) {
        max_gap = std::max(max_gap, std::fabs(pair.real.frames[t].au[a] -
                                              pair.fake.frames[t].au[a]));
      }
    }
    // same underlying activations, independent noise draws
    CHECK(max_gap < 8.0 * profile.observation_noise_sd);
    CHECK(max_gap > 0.0);
  }

  SUBCASE("recordings satisfy ingest invariants") {
    const auto pair = synth::generate_pair(profile, 1);
    CHECK(pair.real.frames.size() == kFrameTarget);
    CHECK(pair.real.pair_id == pair.fake.pair_id);
    for (const auto& f : pair.real.frames) {
      for (double v : f.au) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("default degradation lowers acceleration smoothness of fakes") {
  synth::SynthProfile profile;
  profile.n_pairs = 100;
  profile.seed = 21;
  const auto reps_aus = {au_index("AU12"), au_index("AU17"), au_index("AU01")};
  double real_sum = 0.0, fake_sum = 0.0;
  for (int p = 0; p < 100; ++p) {
    const auto pair = synth::generate_pair(profile, p);
    for (int au : reps_aus) {
      real_sum += ts::acf1(ts::difference(pair.real.series(au), 2));
      fake_sum += ts::acf1(ts::difference(pair.fake.series(au), 2));
    }
  }
  CHECK(fake_sum < real_sum);
}

TEST_CASE("degradation strength is monotone in the planted direction") {
  // larger jitter -> larger mean |delta diff2_acf1| between classes
  const int au12 = au_index("AU12");
  std::vector<double> gaps;
  for (double jitter : {0.02, 0.06, 0.18}) {
    double gap = 0.0;
    int used = 0;
    for (int seed = 0; seed < 50; ++seed) {
      synth::SynthProfile profile;
      profile.n_pairs = 2;
      profile.seed = derive_seed(900, seed);
      profile.degradation.velocity_jitter_sd = jitter;
      profile.degradation.shift_probability = 0.0;
      const auto pair = synth::generate_pair(profile, 0);
      const double real_val = ts::acf1(ts::difference(pair.real.series(au12), 2));
      const double fake_val = ts::acf1(ts::difference(pair.fake.series(au12), 2));
      if (std::isfinite(real_val) && std::isfinite(fake_val)) {
        gap += std::fabs(real_val - fake_val);
        ++used;
      }
    }
    gaps.push_back(gap / used);
  }
  CHECK(gaps[0] < gaps[1]);
  CHECK(gaps[1] < gaps[2]);
}

TEST_CASE("dataset generation and round-trip") {
  synth::SynthProfile profile;
  profile.n_pairs = 10;
  profile.emotive_fraction = 0.6;
  profile.seed = 31;
  const auto dataset = synth::generate_dataset(profile);

  SUBCASE("emotive fraction respected within one pair") {
    std::map<std::string, bool> pair_emotive;
    for (const auto& rec : dataset.recordings) {
      pair_emotive[rec.pair_id] = rec.emotion_flag;
    }
    int emotive = 0;
    for (const auto& [id, flag] : pair_emotive) emotive += flag ? 1 : 0;
    CHECK(std::abs(emotive - 6) <= 1);
  }

  SUBCASE("manifest carries valence keywords that classify back") {
    for (const auto& meta : dataset.manifest) {
      const auto [flag, valence] =
          ingest::classify_metadata(meta.scene_keywords);
      CHECK(flag == meta.emotion_flag);
      CHECK(valence == meta.valence);
    }
  }

  SUBCASE("written files parse back exactly") {
    const std::string dir = "/tmp/facedyn_synth_test";
    std::filesystem::remove_all(dir);
    synth::write_dataset(dataset, dir);
    const auto manifest = ingest::parse_manifest_file(dir + "/manifest.csv");
    CHECK(manifest.size() == dataset.manifest.size());
    const auto frames =
        ingest::parse_au_csv_file(dir + "/" + manifest[0].video_id + ".csv");
    REQUIRE(frames.size() == kFrameTarget);
    const auto& original = dataset.recordings[0];
    for (int t = 0; t < kFrameTarget; ++t) {
      for (int a = 0; a < kAuCount; ++a) {
        CHECK(frames[t].au[a] ==
              doctest::Approx(original.frames[t].au[a]).epsilon(1e-9));
      }
    }
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("planted basis is recovered through the preprocessing pipeline") {
  synth::SynthProfile profile;
  profile.n_pairs = 40;
  profile.seed = 77;
  auto dataset = synth::generate_dataset(profile);

  // run the real ingest path: smooth, fit shift on all videos, normalize
  for (auto& rec : dataset.recordings) ingest::smooth_recording(rec);
  const auto params = ingest::fit_normalization(dataset.recordings);
  for (auto& rec : dataset.recordings) {
    ingest::normalize(rec, params, true);
  }
  const auto assembled = nmf::assemble_v(dataset.recordings);
  nmf::FitOptions options;
  options.seed = 5;
  const auto model = nmf::nmf_fit(assembled.v, 3, options);

  const auto planted = synth::default_basis();
  double cosine_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    double best = -1.0;
    for (int f = 0; f < 3; ++f) {
      const double denom = planted.col(c).norm() * model.w.col(f).norm();
      if (denom > 0.0) {
        best = std::max(best, planted.col(c).dot(model.w.col(f)) / denom);
      }
    }
    cosine_sum += best;
  }
  CHECK(cosine_sum / 3.0 >= 0.9);

  SUBCASE("representative AUs match the planted peaks") {
    const auto reps = nmf::representative_aus(model.w, model.d);
    std::set<std::string> found(reps.au_name.begin(), reps.au_name.end());
    CHECK(found == std::set<std::string>{"AU01", "AU12", "AU17"});
  }
}

TEST_CASE("judgment generation") {
  std::vector<synth::VideoForJudgment> videos;
  Rng rng(9);
  for (int v = 0; v < 40; ++v) {
    videos.push_back({"vid" + std::to_string(v), rng.normal()});
  }

  SUBCASE("participant count and determinism") {
    synth::JudgmentOptions options;
    options.n_participants = 89;
    options.seed = 4;
    const auto a = synth::generate_judgments(videos, options);
    const auto b = synth::generate_judgments(videos, options);
    CHECK(a.size() == 89u * 40u);
    std::set<std::string> participants;
    for (const auto& rating : a) participants.insert(rating.participant_id);
    CHECK(participants.size() == 89);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].rating == b[i].rating);
    }
  }

  SUBCASE("random judgments hit the base rate") {
    synth::JudgmentOptions options;
    options.model = synth::JudgmentModel::kRandom;
    options.bias = 0.5;
    options.n_participants = 89;
    options.seed = 2;
    const auto ratings = synth::generate_judgments(videos, options);
    // accuracy against any fixed truth assignment is ~0.5
    long fake_calls = 0;
    for (const auto& rating : ratings) {
      fake_calls += rating.rating >= 50.0 ? 1 : 0;
    }
    const double fake_rate = static_cast<double>(fake_calls) / ratings.size();
    CHECK(fake_rate == doctest::Approx(0.5).epsilon(0.05));
  }

  SUBCASE("feature-linked judgments track the feature") {
    synth::JudgmentOptions options;
    options.model = synth::JudgmentModel::kFeatureLinked;
    options.weight = 50.0;  // effectively deterministic
    options.n_participants = 5;
    options.seed = 6;
    const auto ratings = synth::generate_judgments(videos, options);
    long agree = 0;
    for (const auto& rating : ratings) {
      const std::size_t v = std::stoul(rating.video_id.substr(3));
      const bool feature_high = videos[v].feature_value > 0.0;
      agree += (rating.rating >= 50.0) == feature_high ? 1 : 0;
    }
    CHECK(static_cast<double>(agree) / ratings.size() > 0.9);
  }
}
