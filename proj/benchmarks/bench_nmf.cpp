#include <benchmark/benchmark.h>

#include "facedyn/nmf.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/types.hpp"

namespace {

Eigen::MatrixXd planted_matrix(int cols, std::uint64_t seed) {
  facedyn::Rng rng(seed);
  Eigen::MatrixXd w(facedyn::kAuCount, 3), h(3, cols);
  for (int i = 0; i < w.rows(); ++i) {
    for (int c = 0; c < 3; ++c) w(i, c) = rng.uniform();
  }
  for (int c = 0; c < 3; ++c) {
    for (int j = 0; j < cols; ++j) h(c, j) = rng.uniform();
  }
  Eigen::MatrixXd v = w * h;
  for (int i = 0; i < v.rows(); ++i) {
    for (int j = 0; j < v.cols(); ++j) {
      v(i, j) = std::max(0.0, v(i, j) + 0.05 * rng.normal());
    }
  }
  return v;
}

void BM_NmfFit(benchmark::State& state) {
  const auto v = planted_matrix(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    facedyn::nmf::FitOptions options;
    options.seed = 7;
    benchmark::DoNotOptimize(facedyn::nmf::nmf_fit(v, 3, options));
  }
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_NmfFit)->Arg(2410)->Arg(12050)->Arg(48200)
    ->Unit(benchmark::kMillisecond);

void BM_NnlsProjection(benchmark::State& state) {
  const auto v = planted_matrix(static_cast<int>(state.range(0)), 3);
  facedyn::nmf::FitOptions options;
  options.seed = 3;
  const auto model = facedyn::nmf::nmf_fit(v, 3, options);
  for (auto _ : state) {
    benchmark::DoNotOptimize(facedyn::nmf::project_h(v, model.w, model.d));
  }
  state.SetItemsProcessed(state.iterations() * v.cols());
}
BENCHMARK(BM_NnlsProjection)->Arg(2410)->Arg(12050)
    ->Unit(benchmark::kMillisecond);

}  // namespace
