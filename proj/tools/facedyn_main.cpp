// facedyn: deepfake detection from facial action-unit dynamics.
//
// Subcommands cover the pipeline stages (synth, ingest, nmf, features,
// select, train, eval, valence, human, report) plus `pipeline`, which chains
// them end to end. Every stage reads/writes artifacts under --out so stages
// can be rerun independently.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "facedyn/errors.hpp"
#include "facedyn/pipeline.hpp"

namespace {

using facedyn::pipeline::PipelineConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string data_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "pipeline config JSON");
  cmd->add_option("--out", args.out_dir, "artifact directory");
  cmd->add_option("--data", args.data_dir,
                  "existing AU CSV directory with manifest.csv");
  cmd->add_option("--seed", args.seed, "master seed")
      ->each([&](const std::string&) { args.seed_set = true; });
}

PipelineConfig resolve_config(const CommonArgs& args) {
  PipelineConfig config = args.config_path.empty()
                              ? PipelineConfig{}
                              : facedyn::pipeline::load_config(args.config_path);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (!args.data_dir.empty()) config.data_dir = args.data_dir;
  if (args.seed_set) config.seed = args.seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepfake detection from facial AU dynamics"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonArgs args;
  bool scan_flag = false;
  bool paper_compat_flag = false;
  std::string strata;
  std::string report_format = "svg";

  auto* cmd_synth = app.add_subcommand(
      "synth", "generate a synthetic AU dataset with ground truth");
  auto* cmd_ingest = app.add_subcommand(
      "ingest", "parse, filter, smooth, normalize and split recordings");
  auto* cmd_nmf =
      app.add_subcommand("nmf", "fit the movement-component factorization");
  cmd_nmf->add_flag("--scan", scan_flag, "also scan ranks 2..10");
  auto* cmd_features = app.add_subcommand(
      "features", "extract temporal features over representative AUs");
  auto* cmd_select =
      app.add_subcommand("select", "all-relevant feature selection");
  auto* cmd_train =
      app.add_subcommand("train", "train classifiers with cross-validation");
  auto* cmd_eval = app.add_subcommand("eval", "evaluate on the test split");
  cmd_eval->add_option("--strata", strata,
                       "stratified evaluation: emotion");
  cmd_eval->add_flag("--paper-compat", paper_compat_flag,
                     "class-metric intervals at the full test n");
  auto* cmd_valence = app.add_subcommand(
      "valence", "real-only valence training, real/fake evaluation");
  auto* cmd_human =
      app.add_subcommand("human", "human-judgment comparison analyses");
  auto* cmd_pipeline =
      app.add_subcommand("pipeline", "run every stage in order");
  auto* cmd_report = app.add_subcommand("report", "emit plots and summary");
  cmd_report->add_option("--format", report_format, "plot format (svg)");

  for (auto* cmd :
       {cmd_synth, cmd_ingest, cmd_nmf, cmd_features, cmd_select, cmd_train,
        cmd_eval, cmd_valence, cmd_human, cmd_pipeline, cmd_report}) {
    add_common(cmd, args);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    PipelineConfig config = resolve_config(args);
    if (scan_flag) config.nmf.scan = true;
    if (paper_compat_flag) config.eval.paper_compat = true;
    if (!strata.empty()) {
      if (strata != "emotion") {
        throw facedyn::ConfigError("unknown strata: " + strata);
      }
      config.eval.strata_emotion = true;
    }
    if (report_format != "svg") {
      throw facedyn::ConfigError("unsupported report format: " +
                                 report_format);
    }

    if (app.got_subcommand(cmd_synth)) {
      facedyn::pipeline::run_synth(config);
    } else if (app.got_subcommand(cmd_ingest)) {
      facedyn::pipeline::run_ingest(config);
    } else if (app.got_subcommand(cmd_nmf)) {
      facedyn::pipeline::run_nmf(config);
    } else if (app.got_subcommand(cmd_features)) {
      facedyn::pipeline::run_features(config);
    } else if (app.got_subcommand(cmd_select)) {
      facedyn::pipeline::run_select(config);
    } else if (app.got_subcommand(cmd_train)) {
      facedyn::pipeline::run_train(config);
    } else if (app.got_subcommand(cmd_eval)) {
      facedyn::pipeline::run_eval(config);
    } else if (app.got_subcommand(cmd_valence)) {
      facedyn::pipeline::run_valence(config);
    } else if (app.got_subcommand(cmd_human)) {
      config.human.enabled = true;
      facedyn::pipeline::run_human(config);
    } else if (app.got_subcommand(cmd_pipeline)) {
      facedyn::pipeline::run_pipeline(config);
    } else if (app.got_subcommand(cmd_report)) {
      facedyn::pipeline::run_report(config);
    }
  } catch (const facedyn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const facedyn::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "argument error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
