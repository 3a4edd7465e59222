#include <benchmark/benchmark.h>

#include "facedyn/features.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/timeseries.hpp"

namespace {

facedyn::AuRecording textured_recording(std::uint64_t seed) {
  facedyn::AuRecording rec;
  rec.video_id = "bench";
  facedyn::Rng rng(seed);
  std::array<double, facedyn::kAuCount> level{};
  for (auto& l : level) l = 1.0 + rng.uniform();
  for (int t = 0; t < facedyn::kFrameTarget; ++t) {
    facedyn::FrameSample f;
    f.frame_index = t;
    for (int a = 0; a < facedyn::kAuCount; ++a) {
      level[a] = 0.93 * level[a] + 0.07 * (1.5 + rng.normal());
      f.au[a] = std::max(0.0, level[a]);
    }
    rec.frames.push_back(f);
  }
  return rec;
}

facedyn::nmf::RepresentativeSet reps() {
  facedyn::nmf::RepresentativeSet set;
  for (const char* name : {"AU12", "AU17", "AU01"}) {
    set.au_index.push_back(facedyn::au_index(name));
    set.au_name.push_back(name);
  }
  return set;
}

void BM_FeatureRow(benchmark::State& state) {
  const auto rec = textured_recording(5);
  const auto r = reps();
  for (auto _ : state) {
    benchmark::DoNotOptimize(facedyn::feat::extract_row(rec, r));
  }
}
BENCHMARK(BM_FeatureRow)->Unit(benchmark::kMillisecond);

void BM_MaxKlShift(benchmark::State& state) {
  const auto rec = textured_recording(9);
  const auto series = rec.series(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(facedyn::ts::max_kl_shift(series, 24));
  }
}
BENCHMARK(BM_MaxKlShift)->Unit(benchmark::kMicrosecond);

void BM_SampleEntropy(benchmark::State& state) {
  const auto rec = textured_recording(11);
  const auto series = rec.series(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(facedyn::ts::sample_entropy(series));
  }
}
BENCHMARK(BM_SampleEntropy)->Unit(benchmark::kMicrosecond);

}  // namespace
