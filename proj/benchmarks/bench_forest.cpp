#include <benchmark/benchmark.h>

#include "facedyn/forest.hpp"
#include "facedyn/rng.hpp"

namespace {

struct BenchData {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t rows, cols;
};

BenchData detection_style(std::size_t rows, std::size_t cols,
                          std::uint64_t seed) {
  facedyn::Rng rng(seed);
  BenchData d;
  d.rows = rows;
  d.cols = cols;
  d.x.resize(rows * cols);
  d.y.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    d.y[r] = static_cast<double>(r % 2);
    d.x[r * cols] = d.y[r] + 1.5 * rng.normal();
    for (std::size_t c = 1; c < cols; ++c) d.x[r * cols + c] = rng.normal();
  }
  return d;
}

void BM_ForestFit(benchmark::State& state) {
  const auto data = detection_style(400, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    facedyn::forest::Options options;
    options.n_trees = 500;
    options.seed = 3;
    benchmark::DoNotOptimize(facedyn::forest::RandomForest::fit(
        {data.x.data(), data.rows, data.cols}, data.y,
        facedyn::forest::RandomForest::Task::kClassify, 2, options));
  }
}
BENCHMARK(BM_ForestFit)->Arg(8)->Arg(108)->Unit(benchmark::kMillisecond);

void BM_ForestFitWithImportance(benchmark::State& state) {
  const auto data = detection_style(200, 22, 5);
  for (auto _ : state) {
    facedyn::forest::Options options;
    options.n_trees = 500;
    options.seed = 5;
    options.compute_importance = true;
    benchmark::DoNotOptimize(facedyn::forest::RandomForest::fit(
        {data.x.data(), data.rows, data.cols}, data.y,
        facedyn::forest::RandomForest::Task::kClassify, 2, options));
  }
}
BENCHMARK(BM_ForestFitWithImportance)->Unit(benchmark::kMillisecond);

}  // namespace
