#include "facedyn/select.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "facedyn/rng.hpp"

using namespace facedyn;
using namespace facedyn::select;

namespace {

/// n=200 binary set: one informative feature plus pure-noise columns.
learn::Dataset planted_set(std::size_t n_noise, std::uint64_t seed,
                           bool signal = true) {
  learn::Dataset d;
  d.class_labels = {"real", "fake"};
  d.feature_names.push_back("signal");
  for (std::size_t c = 0; c < n_noise; ++c) {
    d.feature_names.push_back("noise" + std::to_string(c));
  }
  const std::size_t n = 200, p = d.feature_names.size();
  Rng rng(seed);
  d.x.resize(n * p);
  d.y.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    d.ids.push_back(std::to_string(r));
    d.y[r] = static_cast<int>(r % 2);
    d.x[r * p] = signal ? (d.y[r] ? 1.0 : 0.0) + 0.1 * rng.normal()
                        : rng.normal();
    for (std::size_t c = 1; c < p; ++c) d.x[r * p + c] = rng.normal();
  }
  return d;
}

}  // namespace

TEST_CASE("boruta confirms planted signal and rejects noise") {
  int good_seeds = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = planted_set(10, derive_seed(42, seed));
    BorutaOptions options;
    options.forest_trees = 120;
    options.max_runs = 40;
    options.seed = seed;
    const auto decision = tentative_rough_fix(boruta(data, options));

    const bool signal_confirmed = decision.status[0] == BorutaStatus::kConfirmed;
    int noise_rejected = 0;
    for (std::size_t i = 1; i < decision.status.size(); ++i) {
      noise_rejected += decision.status[i] == BorutaStatus::kRejected ? 1 : 0;
    }
    if (signal_confirmed && noise_rejected >= 8) ++good_seeds;
  }
  CHECK(good_seeds >= 4);
}

TEST_CASE("boruta confirms nothing on pure noise") {
  // short hit streaks must not clear the binomial bar; a longer run count
  // keeps the evidence threshold meaningful
  int clean_seeds = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = planted_set(10, derive_seed(77, seed), false);
    BorutaOptions options;
    options.forest_trees = 150;
    options.max_runs = 60;
    options.seed = seed;
    const auto decision = boruta(data, options);
    int confirmed = 0;
    for (auto s : decision.status) {
      confirmed += s == BorutaStatus::kConfirmed ? 1 : 0;
    }
    if (confirmed == 0) ++clean_seeds;
  }
  CHECK(clean_seeds >= 4);
}

TEST_CASE("a feature equal to the label is confirmed every seed") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto data = planted_set(5, derive_seed(99, seed));
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      data.x[r * data.n_cols()] = static_cast<double>(data.y[r]);
    }
    BorutaOptions options;
    options.forest_trees = 80;
    options.max_runs = 30;
    options.seed = seed;
    const auto decision = boruta(data, options);
    CHECK(decision.status[0] == BorutaStatus::kConfirmed);
  }
}

TEST_CASE("boruta reproducibility and monotonicity under duplication") {
  const auto data = planted_set(6, 1234);
  BorutaOptions options;
  options.forest_trees = 100;
  options.max_runs = 25;
  options.seed = 9;

  SUBCASE("same inputs, same decision") {
    const auto a = boruta(data, options);
    const auto b = boruta(data, options);
    CHECK(a.hit_counts == b.hit_counts);
    for (std::size_t i = 0; i < a.status.size(); ++i) {
      CHECK(a.status[i] == b.status[i]);
    }
  }

  SUBCASE("duplicating a confirmed feature never rejects the original") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto dup = data;
      dup.feature_names.push_back("signal_copy");
      learn::Dataset rebuilt;
      rebuilt.class_labels = dup.class_labels;
      rebuilt.feature_names = dup.feature_names;
      rebuilt.ids = dup.ids;
      rebuilt.y = dup.y;
      const std::size_t p_old = data.n_cols();
      for (std::size_t r = 0; r < data.n_rows(); ++r) {
        for (std::size_t c = 0; c < p_old; ++c) {
          rebuilt.x.push_back(data.row(r)[c]);
        }
        rebuilt.x.push_back(data.row(r)[0]);
      }
      BorutaOptions o = options;
      o.seed = seed;
      const auto decision = boruta(rebuilt, o);
      CHECK(decision.status[0] != BorutaStatus::kRejected);
      CHECK(decision.status[p_old] != BorutaStatus::kRejected);
    }
  }
}

TEST_CASE("tentative rough fix rule") {
  BorutaDecision decision;
  decision.feature_names = {"above", "below", "confirmed_already"};
  decision.status = {BorutaStatus::kTentative, BorutaStatus::kTentative,
                     BorutaStatus::kConfirmed};
  decision.hit_counts = {3, 1, 9};
  decision.shadow_max_history = {1.0, 2.0, 3.0};  // median 2.0
  decision.importance_history = {
      {5.0, 0.5, 9.0}, {2.5, 1.0, 9.0}, {2.2, 1.5, 9.0}};
  const auto fixed = tentative_rough_fix(decision);
  CHECK(fixed.status[0] == BorutaStatus::kConfirmed);  // median 2.5 > 2.0
  CHECK(fixed.status[1] == BorutaStatus::kRejected);   // median 1.0 < 2.0
  CHECK(fixed.status[2] == BorutaStatus::kConfirmed);  // untouched

  SUBCASE("no tentatives is an identity") {
    const auto again = tentative_rough_fix(fixed);
    for (std::size_t i = 0; i < fixed.status.size(); ++i) {
      CHECK(again.status[i] == fixed.status[i]);
    }
  }
}

TEST_CASE("pca on collinear features") {
  learn::Dataset d;
  d.class_labels = {"a", "b"};
  d.feature_names = {"f1", "f2", "f3"};
  Rng rng(8);
  const std::size_t n = 120;
  for (std::size_t r = 0; r < n; ++r) {
    const double f1 = rng.normal();
    const double f2 = rng.normal();
    d.ids.push_back(std::to_string(r));
    d.y.push_back(static_cast<int>(r % 2));
    d.x.push_back(f1);
    d.x.push_back(f2);
    d.x.push_back(f1 + f2);
  }
  const auto result = pca_select(d, PcaCriterion::kCumVar, 0.95);
  int above_tiny = 0;
  for (Eigen::Index i = 0; i < result.model.eigenvalues.size(); ++i) {
    above_tiny += result.model.eigenvalues(i) > 1e-10 ? 1 : 0;
  }
  CHECK(above_tiny <= 2);
  CHECK(result.model.cumulative_variance[1] >= 0.99);

  SUBCASE("eigenvalues sum to feature count") {
    CHECK(result.model.eigenvalues.sum() ==
          doctest::Approx(3.0).epsilon(1e-8));
  }
}

TEST_CASE("pca kaiser criterion with a dominant direction") {
  learn::Dataset d;
  d.class_labels = {"a", "b"};
  d.feature_names = {"f1", "f2", "f3"};
  Rng rng(4);
  for (std::size_t r = 0; r < 400; ++r) {
    const double shared = rng.normal() * 10.0;
    d.ids.push_back(std::to_string(r));
    d.y.push_back(static_cast<int>(r % 2));
    // one strong shared direction plus small independent wobble
    d.x.push_back(shared + 0.5 * rng.normal());
    d.x.push_back(shared + 0.5 * rng.normal());
    d.x.push_back(shared + 0.5 * rng.normal());
  }
  const auto result = pca_select(d, PcaCriterion::kKaiser);
  CHECK(result.model.retained_kaiser == 1);
  CHECK(result.retained == 1);
  CHECK(result.scores.cols() == 1);
}

TEST_CASE("pca degenerate cases") {
  SUBCASE("single feature explains everything") {
    learn::Dataset d;
    d.class_labels = {"a", "b"};
    d.feature_names = {"only"};
    Rng rng(2);
    for (std::size_t r = 0; r < 50; ++r) {
      d.ids.push_back(std::to_string(r));
      d.y.push_back(static_cast<int>(r % 2));
      d.x.push_back(rng.normal());
    }
    const auto result = pca_select(d, PcaCriterion::kCumVar, 0.95);
    CHECK(result.model.cumulative_variance.back() == doctest::Approx(1.0));
    CHECK(result.retained == 1);
  }
  SUBCASE("constant column is dropped with a note") {
    learn::Dataset d;
    d.class_labels = {"a", "b"};
    d.feature_names = {"varying", "flat"};
    Rng rng(3);
    for (std::size_t r = 0; r < 50; ++r) {
      d.ids.push_back(std::to_string(r));
      d.y.push_back(static_cast<int>(r % 2));
      d.x.push_back(rng.normal());
      d.x.push_back(7.0);
    }
    const auto result = pca_select(d, PcaCriterion::kKaiser);
    CHECK(result.model.dropped_constant ==
          std::vector<std::string>{"flat"});
    CHECK(result.model.feature_names == std::vector<std::string>{"varying"});
  }
}
