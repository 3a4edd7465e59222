#include "facedyn/humancmp.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "facedyn/rng.hpp"

using namespace facedyn;
namespace human = facedyn::human;

TEST_CASE("binarize threshold is inclusive at 50") {
  CHECK(human::binarize(50.0) == Label::kFake);
  CHECK(human::binarize(49.9) == Label::kReal);
  CHECK(human::binarize(0.0) == Label::kReal);
  CHECK(human::binarize(100.0) == Label::kFake);
  CHECK_THROWS_AS(human::binarize(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(human::binarize(100.1), std::invalid_argument);
}

TEST_CASE("consensus") {
  SUBCASE("unanimous raters") {
    std::vector<synth::HumanRating> ratings;
    for (int p = 0; p < 89; ++p) {
      ratings.push_back({"p" + std::to_string(p), "v1", 80.0});
    }
    const auto result = human::consensus(ratings);
    CHECK(result.at("v1").judgment == Label::kFake);
    CHECK(result.at("v1").fake_votes == 89);
  }
  SUBCASE("one-vote margin wins") {
    std::vector<synth::HumanRating> ratings;
    for (int p = 0; p < 45; ++p) {
      ratings.push_back({"p" + std::to_string(p), "v", 90.0});
    }
    for (int p = 45; p < 89; ++p) {
      ratings.push_back({"p" + std::to_string(p), "v", 10.0});
    }
    CHECK(human::consensus(ratings).at("v").judgment == Label::kFake);
  }
  SUBCASE("exact tie goes to real with a flag") {
    std::vector<synth::HumanRating> ratings;
    for (int p = 0; p < 10; ++p) {
      ratings.push_back({"p" + std::to_string(p), "v", 90.0});
      ratings.push_back({"q" + std::to_string(p), "v", 10.0});
    }
    const auto result = human::consensus(ratings);
    CHECK(result.at("v").judgment == Label::kReal);
    CHECK(result.at("v").tie);
  }
  SUBCASE("rater order does not matter") {
    std::vector<synth::HumanRating> ratings{
        {"a", "v", 80.0}, {"b", "v", 20.0}, {"c", "v", 70.0}};
    auto reversed = ratings;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(human::consensus(ratings).at("v").judgment ==
          human::consensus(reversed).at("v").judgment);
  }
}

TEST_CASE("agreement report") {
  SUBCASE("identical predictions agree perfectly") {
    std::map<std::string, Label> calls{{"a", Label::kFake},
                                       {"b", Label::kReal},
                                       {"c", Label::kFake},
                                       {"d", Label::kReal}};
    const auto report = human::agreement(calls, calls);
    CHECK(report.agreement_rate == doctest::Approx(1.0));
  }
  SUBCASE("agreement rate equals the diagonal fraction exactly") {
    std::map<std::string, Label> model, humans;
    Rng rng(6);
    long diag = 0;
    for (int v = 0; v < 60; ++v) {
      const auto id = "v" + std::to_string(v);
      const Label m = rng.uniform() < 0.5 ? Label::kFake : Label::kReal;
      const Label h = rng.uniform() < 0.5 ? Label::kFake : Label::kReal;
      model[id] = m;
      humans[id] = h;
      diag += m == h ? 1 : 0;
    }
    const auto report = human::agreement(model, humans);
    CHECK(report.agreement_rate == doctest::Approx(diag / 60.0));
    // phi consistency with the reported statistic
    CHECK(report.chi.effect ==
          doctest::Approx(std::sqrt(report.chi.statistic / 60.0))
              .epsilon(1e-9));
  }
  SUBCASE("mismatched ids are listed") {
    std::map<std::string, Label> model{{"a", Label::kFake}};
    std::map<std::string, Label> humans{{"b", Label::kFake}};
    CHECK_THROWS_WITH_AS(human::agreement(model, humans),
                         doctest::Contains("a"), DataError);
  }
  SUBCASE("independent labels give phi near zero") {
    std::map<std::string, Label> model, humans;
    Rng rng(8);
    for (int v = 0; v < 10000; ++v) {
      const auto id = "v" + std::to_string(v);
      model[id] = rng.uniform() < 0.5 ? Label::kFake : Label::kReal;
      humans[id] = rng.uniform() < 0.5 ? Label::kFake : Label::kReal;
    }
    CHECK(std::fabs(human::agreement(model, humans).chi.effect) < 0.03);
  }
}

TEST_CASE("correctness correspondence") {
  SUBCASE("perfectly aligned correctness has phi 1") {
    std::vector<bool> correct;
    for (int i = 0; i < 40; ++i) correct.push_back(i % 2 == 0);
    const auto report = human::correctness_correspondence(correct, correct);
    CHECK(report.chi.effect == doctest::Approx(1.0).epsilon(0.15));
    CHECK(report.agreement_rate == doctest::Approx(1.0));
  }
  SUBCASE("independent correctness has phi near zero") {
    Rng rng(3);
    std::vector<bool> model, humans;
    for (int i = 0; i < 10000; ++i) {
      model.push_back(rng.uniform() < 0.55);
      humans.push_back(rng.uniform() < 0.5);
    }
    CHECK(std::fabs(human::correctness_correspondence(model, humans)
                        .chi.effect) < 0.03);
  }
}

TEST_CASE("feature stratification by outcome group") {
  std::vector<std::string> names{"constant", "model_indicator"};
  std::vector<std::vector<double>> rows;
  std::vector<bool> model_correct, human_correct;
  Rng rng(5);
  for (int i = 0; i < 80; ++i) {
    const bool m = i % 2 == 0;
    const bool h = (i / 2) % 2 == 0;
    model_correct.push_back(m);
    human_correct.push_back(h);
    rows.push_back({3.14, m ? 1.0 : 0.0});
  }
  const auto strat = human::feature_stratified_accuracy(names, rows,
                                                        model_correct,
                                                        human_correct);
  REQUIRE(strat.groups.size() == 4);
  for (const auto& group : strat.groups) {
    CHECK(group.count == 20);
    CHECK(group.feature_mean[0] == doctest::Approx(3.14));
    CHECK(group.feature_mean[1] ==
          doctest::Approx(group.model_correct ? 1.0 : 0.0));
  }
}

TEST_CASE("predict_human") {
  // 30 videos with one feature; truth irrelevant, judgments are the target
  learn::Dataset videos;
  videos.class_labels = {"real", "fake"};
  videos.feature_names = {"driver"};
  Rng rng(12);
  for (int v = 0; v < 30; ++v) {
    videos.ids.push_back("vid" + std::to_string(v));
    videos.y.push_back(0);
    videos.x.push_back(rng.normal());
  }

  learn::ClassifierSpec spec;
  spec.algorithm = learn::Algorithm::kRandomForest;
  spec.hp.trees = 80;
  spec.seed = 3;

  SUBCASE("deterministic judgments are learnable under LOSO") {
    std::vector<synth::VideoForJudgment> for_judgment;
    for (std::size_t v = 0; v < videos.n_rows(); ++v) {
      for_judgment.push_back({videos.ids[v], videos.x[v]});
    }
    synth::JudgmentOptions options;
    options.model = synth::JudgmentModel::kFeatureLinked;
    options.weight = 60.0;
    options.n_participants = 8;
    options.seed = 5;
    const auto ratings = synth::generate_judgments(for_judgment, options);
    const auto report = human::predict_human(videos, ratings,
                                             human::HumanCvScheme::kLoso, spec);
    CHECK(report.predictions.items.size() == ratings.size());
    CHECK(report.accuracy >= 0.95);
  }

  SUBCASE("random judgments give chance accuracy and zero kappa") {
    std::vector<synth::VideoForJudgment> for_judgment;
    for (std::size_t v = 0; v < videos.n_rows(); ++v) {
      for_judgment.push_back({videos.ids[v], videos.x[v]});
    }
    synth::JudgmentOptions options;
    options.model = synth::JudgmentModel::kRandom;
    options.bias = 0.5;
    options.n_participants = 20;
    options.seed = 7;
    const auto ratings = synth::generate_judgments(for_judgment, options);
    const auto report = human::predict_human(videos, ratings,
                                             human::HumanCvScheme::kLopo, spec);
    CHECK(std::fabs(report.kappa) < 0.05);
  }
}
