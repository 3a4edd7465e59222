#include "facedyn/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "facedyn/errors.hpp"
#include "json.hpp"

using namespace facedyn;
namespace pipeline = facedyn::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

pipeline::PipelineConfig tiny_config(const std::string& out_dir) {
  pipeline::PipelineConfig config;
  config.seed = 17;
  config.out_dir = out_dir;
  config.synth_profile.n_pairs = 20;
  config.select.max_runs = 20;
  config.select.forest_trees = 80;
  config.train.trees = 100;
  config.human.participants = 15;
  config.human.subset_size = 8;
  return config;
}

}  // namespace

TEST_CASE("config round trip and hashing") {
  pipeline::PipelineConfig config = tiny_config("/tmp/x");
  const auto text = pipeline::config_to_json(config);
  const auto parsed = pipeline::config_from_json_text(text);
  CHECK(pipeline::config_to_json(parsed) == text);

  SUBCASE("hash ignores the artifact directory") {
    auto moved = config;
    moved.out_dir = "/elsewhere";
    CHECK(pipeline::config_hash(moved) == pipeline::config_hash(config));
  }
  SUBCASE("hash reacts to analysis parameters") {
    auto changed = config;
    changed.nmf.rank = 5;
    CHECK(pipeline::config_hash(changed) != pipeline::config_hash(config));
  }
  SUBCASE("bad config text maps to ConfigError") {
    CHECK_THROWS_AS(pipeline::config_from_json_text("{nope"), ConfigError);
  }
}

TEST_CASE("pipeline stages produce the documented artifacts") {
  const std::string out = "/tmp/facedyn_pipeline_test";
  fs::remove_all(out);
  auto config = tiny_config(out);
  config.nmf.scan = true;
  config.nmf.scan_lo = 2;
  config.nmf.scan_hi = 4;
  config.human.enabled = true;

  pipeline::run_pipeline(config);

  for (const char* artifact :
       {"dataset/manifest.csv", "ingested/videos.csv", "ingested/ingest.json",
        "nmf/model.json", "nmf/basis_heatmap.csv", "nmf/basis_heatmap.svg",
        "nmf/representatives.json", "nmf/r2.json", "nmf/rank_scan.csv",
        "features/features.csv", "features/features_imputed.csv",
        "features/transition_events.csv", "select/boruta.csv",
        "select/selected.json", "train/cv_report.json",
        "train/model_random_forest.json",
        "eval/predictions_random_forest.csv", "eval/roc_random_forest.csv",
        "eval/metrics.json", "valence/valence_report.json",
        "human/human_report.json", "human/ratings.csv", "report/roc.svg",
        "report/rank_scan.svg", "report/w_heatmap.svg", "report/summary.json",
        "pipeline_summary.json"}) {
    INFO("artifact ", artifact);
    CHECK(fs::exists(fs::path(out) / artifact));
  }

  SUBCASE("reports embed the config hash and seed") {
    const auto expected_hash = pipeline::config_hash(config);
    for (const char* report :
         {"ingested/ingest.json", "eval/metrics.json",
          "valence/valence_report.json", "human/human_report.json",
          "pipeline_summary.json"}) {
      const auto doc = nlohmann::json::parse(slurp(fs::path(out) / report));
      INFO("report ", report);
      CHECK(doc.at("config_hash").get<std::string>() == expected_hash);
      CHECK(doc.at("seed").get<std::uint64_t>() == config.seed);
    }
  }

  SUBCASE("eval reports strata with between-group tests") {
    const auto doc =
        nlohmann::json::parse(slurp(fs::path(out) / "eval/metrics.json"));
    const auto& strata = doc.at("models").at(0).at("strata");
    CHECK(strata.contains("emotion"));
    CHECK(strata.contains("no_emotion"));
    CHECK(strata.contains("fisher_accuracy_p"));
  }

  SUBCASE("svg artifacts are well formed") {
    for (const char* plot :
         {"report/roc.svg", "report/rank_scan.svg", "report/w_heatmap.svg"}) {
      const auto body = slurp(fs::path(out) / plot);
      INFO("plot ", plot);
      CHECK(body.rfind("<svg", 0) == 0);
      CHECK(body.find("</svg>") != std::string::npos);
    }
  }

  SUBCASE("stages can be rerun independently from artifacts") {
    // wipe one stage's outputs and regenerate just that stage
    fs::remove_all(fs::path(out) / "eval");
    pipeline::run_eval(config);
    CHECK(fs::exists(fs::path(out) / "eval/metrics.json"));
  }

  fs::remove_all(out);
}

TEST_CASE("ingest honors exclusion bookkeeping on real-data-looking input") {
  const std::string out = "/tmp/facedyn_pipeline_excl";
  fs::remove_all(out);
  auto config = tiny_config(out);
  pipeline::run_synth(config);

  // sabotage one video: drop frames below the truncation target
  const fs::path dataset = fs::path(out) / "dataset";
  {
    const auto body = slurp(dataset / "pair3_fake.csv");
    std::istringstream in(body);
    std::ostringstream shortened;
    std::string line;
    for (int i = 0; i < 100 && std::getline(in, line); ++i) {
      shortened << line << '\n';
    }
    std::ofstream outfile(dataset / "pair3_fake.csv");
    outfile << shortened.str();
  }
  pipeline::run_ingest(config);

  const auto report =
      nlohmann::json::parse(slurp(fs::path(out) / "ingested/ingest.json"));
  // the short video and its pair partner are both excluded
  int excluded = 0;
  for (const auto& entry : report.at("exclusions")) {
    const auto id = entry.at("video_id").get<std::string>();
    if (id.rfind("pair3", 0) == 0) ++excluded;
  }
  CHECK(excluded == 2);
  fs::remove_all(out);
}
