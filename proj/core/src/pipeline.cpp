#include "facedyn/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "facedyn/csv.hpp"
#include "facedyn/errors.hpp"
#include "facedyn/features.hpp"
#include "facedyn/humancmp.hpp"
#include "facedyn/ingest.hpp"
#include "facedyn/nmf.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/select.hpp"
#include "facedyn/stats.hpp"
#include "json.hpp"

namespace facedyn::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// small IO helpers
// ---------------------------------------------------------------------------

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

struct VideoEntry {
  RecordingMeta meta;
  ingest::SplitSide split = ingest::SplitSide::kTrain;
};

void write_videos_csv(const fs::path& path,
                      const std::vector<VideoEntry>& entries) {
  std::ostringstream out;
  csv::write_row(out, {"video_id", "label", "pair_id", "scene_keywords",
                       "emotion", "valence", "split"});
  for (const auto& entry : entries) {
    csv::write_row(
        out, {entry.meta.video_id, to_string(entry.meta.label),
              entry.meta.pair_id, entry.meta.scene_keywords,
              entry.meta.emotion_flag ? "yes" : "no",
              to_string(entry.meta.valence),
              entry.split == ingest::SplitSide::kTrain ? "train" : "test"});
  }
  write_text(path, out.str());
}

std::vector<VideoEntry> read_videos_csv(const fs::path& path) {
  const auto table = csv::read_file(path.string());
  std::vector<VideoEntry> entries;
  for (const auto& row : table.rows) {
    VideoEntry entry;
    entry.meta.video_id = row[0];
    entry.meta.label = label_from_string(row[1]);
    entry.meta.pair_id = row[2];
    entry.meta.scene_keywords = row[3];
    entry.meta.emotion_flag = row[4] == "yes";
    entry.meta.valence = valence_from_string(row[5]);
    entry.split = row[6] == "train" ? ingest::SplitSide::kTrain
                                    : ingest::SplitSide::kTest;
    entries.push_back(std::move(entry));
  }
  return entries;
}

fs::path dataset_dir(const PipelineConfig& config) {
  return config.data_dir.empty() ? fs::path(config.out_dir) / "dataset"
                                 : fs::path(config.data_dir);
}

std::vector<VideoEntry> load_videos(const PipelineConfig& config) {
  return read_videos_csv(fs::path(config.out_dir) / "ingested" / "videos.csv");
}

AuRecording load_normalized_recording(const PipelineConfig& config,
                                      const VideoEntry& entry) {
  AuRecording rec;
  rec.video_id = entry.meta.video_id;
  rec.label = entry.meta.label;
  rec.pair_id = entry.meta.pair_id;
  rec.emotion_flag = entry.meta.emotion_flag;
  rec.valence = entry.meta.valence;
  rec.frames = ingest::parse_au_csv_file(
      (fs::path(config.out_dir) / "ingested" / "normalized" /
       (entry.meta.video_id + ".csv"))
          .string());
  return rec;
}

std::vector<AuRecording> load_normalized(
    const PipelineConfig& config, const std::vector<VideoEntry>& entries) {
  std::vector<AuRecording> recordings;
  recordings.reserve(entries.size());
  for (const auto& entry : entries) {
    recordings.push_back(load_normalized_recording(config, entry));
  }
  return recordings;
}

nmf::RepresentativeSet load_reps(const PipelineConfig& config) {
  const auto doc = json::parse(
      read_text(fs::path(config.out_dir) / "nmf" / "representatives.json"));
  nmf::RepresentativeSet reps;
  for (const auto& name : doc.at("representative_aus")) {
    reps.au_name.push_back(name.get<std::string>());
    reps.au_index.push_back(au_index(reps.au_name.back()));
  }
  return reps;
}

feat::FeatureMatrix load_features(const PipelineConfig& config) {
  return feat::feature_matrix_from_csv(read_text(
      fs::path(config.out_dir) / "features" / "features_imputed.csv"));
}

std::vector<std::string> load_selected(const PipelineConfig& config) {
  const auto doc = json::parse(
      read_text(fs::path(config.out_dir) / "select" / "selected.json"));
  return doc.at("confirmed").get<std::vector<std::string>>();
}

/// Joins feature rows to video metadata as a learn::Dataset.
learn::Dataset make_dataset(const feat::FeatureMatrix& features,
                            const std::vector<VideoEntry>& entries,
                            const std::vector<std::string>& feature_subset,
                            bool valence_target) {
  std::map<std::string, const VideoEntry*> by_id;
  for (const auto& entry : entries) by_id[entry.meta.video_id] = &entry;

  std::vector<std::size_t> columns;
  for (const auto& name : feature_subset) {
    const auto idx = features.column(name);
    if (!idx) throw DataError("selected feature not in matrix: " + name);
    columns.push_back(*idx);
  }

  learn::Dataset data;
  data.feature_names = feature_subset;
  data.class_labels = valence_target
                          ? std::vector<std::string>{"positive", "neutral",
                                                     "negative"}
                          : std::vector<std::string>{"real", "fake"};
  for (std::size_t r = 0; r < features.n_rows(); ++r) {
    const auto it = by_id.find(features.row_ids[r]);
    if (it == by_id.end()) continue;
    const auto& meta = it->second->meta;
    data.ids.push_back(meta.video_id);
    data.y.push_back(valence_target ? static_cast<int>(meta.valence)
                                    : (meta.label == Label::kFake ? 1 : 0));
    for (auto c : columns) data.x.push_back(features.at(r, c));
  }
  return data;
}

std::vector<VideoEntry> filter_entries(const std::vector<VideoEntry>& entries,
                                       ingest::SplitSide side) {
  std::vector<VideoEntry> out;
  for (const auto& entry : entries) {
    if (entry.split == side) out.push_back(entry);
  }
  return out;
}

ordered_json ci_json(const stats::Ci& ci) {
  return {{"lo", ci.lo}, {"hi", ci.hi}, {"level", ci.level},
          {"method", ci.method}};
}

ordered_json test_json(const stats::TestResult& test) {
  return {{"statistic", test.statistic},
          {"p", test.p_value},
          {"p_formatted", stats::format_p(test.p_value)},
          {"sidedness", test.sidedness},
          {"correction", test.correction}};
}

/// Binary evaluation block mirroring the headline table layout.
ordered_json binary_eval_json(const learn::PredictionSet& predictions,
                              bool paper_compat) {
  stats::ConfusionBinary cm;
  for (const auto& item : predictions.items) {
    const bool positive = item.true_class == 1;
    const bool called_positive = item.predicted == 1;
    if (positive && called_positive) ++cm.tp;
    if (positive && !called_positive) ++cm.fn;
    if (!positive && called_positive) ++cm.fp;
    if (!positive && !called_positive) ++cm.tn;
  }
  const auto metrics = stats::binary_metrics(cm);
  const double n = static_cast<double>(cm.total());
  const double n_pos = static_cast<double>(cm.tp + cm.fn);
  const double n_neg = static_cast<double>(cm.tn + cm.fp);

  ordered_json out;
  out["n"] = cm.total();
  out["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn},
                      {"tn", cm.tn}, {"positive_class", "fake"}};
  const auto scores = predictions.scores();
  const auto labels = predictions.binary_labels();
  const auto auc = stats::delong(scores, labels);
  out["roc_auc"] = {{"estimate", auc.auc},
                    {"ci", ci_json(auc.ci)},
                    {"variance", auc.variance}};
  out["accuracy"] = {
      {"estimate", metrics.accuracy},
      {"ci", ci_json(stats::wilson_ci(cm.correct(), n))},
      {"test_vs_nir", test_json(stats::one_prop_test(cm.correct(), n, 0.5))}};
  out["mcc"] = metrics.mcc;
  // the published table's class-metric intervals are consistent with the
  // full test n; paper_compat reproduces that
  const double sens_n = paper_compat ? n : n_pos;
  const double spec_n = paper_compat ? n : n_neg;
  out["sensitivity"] = {
      {"estimate", metrics.sensitivity},
      {"ci", ci_json(stats::wilson_ci(metrics.sensitivity * sens_n, sens_n))}};
  out["specificity"] = {
      {"estimate", metrics.specificity},
      {"ci", ci_json(stats::wilson_ci(metrics.specificity * spec_n, spec_n))}};
  return out;
}

learn::PredictionSet load_predictions(const fs::path& path) {
  const auto table = csv::read_file(path.string());
  learn::PredictionSet predictions;
  predictions.class_labels = {"real", "fake"};
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    learn::Prediction p;
    p.id = row[0];
    p.true_class = row[1] == "fake" ? 1 : 0;
    p.predicted = row[2] == "fake" ? 1 : 0;
    const double score = csv::to_double(row[3], r, "score");
    p.proba = {1.0 - score, score};
    predictions.items.push_back(std::move(p));
  }
  return predictions;
}

void write_predictions(const fs::path& path,
                       const learn::PredictionSet& predictions) {
  std::ostringstream out;
  csv::write_row(out, {"id", "true", "pred", "score"});
  for (const auto& item : predictions.items) {
    csv::write_row(out,
                   {item.id, predictions.class_labels[item.true_class],
                    predictions.class_labels[item.predicted],
                    csv::format_double(item.score())});
  }
  write_text(path, out.str());
}

learn::ClassifierSpec spec_for(const PipelineConfig& config,
                               learn::Algorithm algorithm) {
  learn::ClassifierSpec spec;
  spec.algorithm = algorithm;
  spec.hp.trees = config.train.trees;
  spec.seed = derive_seed(config.seed, 0x7ea1,
                          static_cast<std::uint64_t>(algorithm));
  return spec;
}

// ---------------------------------------------------------------------------
// config json
// ---------------------------------------------------------------------------

template <typename T>
void maybe(const json& doc, const char* key, T& value) {
  if (doc.contains(key)) value = doc.at(key).get<T>();
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  PipelineConfig config;
  maybe(doc, "seed", config.seed);
  maybe(doc, "out_dir", config.out_dir);
  maybe(doc, "data_dir", config.data_dir);
  if (doc.contains("synth")) {
    const auto& s = doc.at("synth");
    maybe(s, "n_pairs", config.synth_profile.n_pairs);
    maybe(s, "emotive_fraction", config.synth_profile.emotive_fraction);
    maybe(s, "positive_share", config.synth_profile.positive_share);
    maybe(s, "observation_noise_sd", config.synth_profile.observation_noise_sd);
    if (s.contains("degradation")) {
      const auto& d = s.at("degradation");
      maybe(d, "velocity_jitter_sd",
            config.synth_profile.degradation.velocity_jitter_sd);
      maybe(d, "shift_probability",
            config.synth_profile.degradation.shift_probability);
      maybe(d, "shift_scale", config.synth_profile.degradation.shift_scale);
      maybe(d, "emotive_burst_only",
            config.synth_profile.degradation.emotive_burst_only);
    }
    if (s.contains("burst")) {
      const auto& b = s.at("burst");
      maybe(b, "rate_per_video", config.synth_profile.burst.rate_per_video);
      maybe(b, "amplitude", config.synth_profile.burst.amplitude);
      maybe(b, "duration_mean_frames",
            config.synth_profile.burst.duration_mean_frames);
      maybe(b, "duration_sd_frames",
            config.synth_profile.burst.duration_sd_frames);
    }
  }
  if (doc.contains("preprocess")) {
    const auto& p = doc.at("preprocess");
    maybe(p, "smooth_window", config.preprocess.smooth_window);
    maybe(p, "confidence_threshold", config.preprocess.confidence_threshold);
    maybe(p, "success_threshold", config.preprocess.success_threshold);
    maybe(p, "split_ratio", config.preprocess.split_ratio);
  }
  if (doc.contains("nmf")) {
    const auto& n = doc.at("nmf");
    maybe(n, "rank", config.nmf.rank);
    maybe(n, "restarts", config.nmf.restarts);
    maybe(n, "max_iter", config.nmf.max_iter);
    maybe(n, "tol", config.nmf.tol);
    maybe(n, "scan", config.nmf.scan);
    maybe(n, "scan_lo", config.nmf.scan_lo);
    maybe(n, "scan_hi", config.nmf.scan_hi);
  }
  if (doc.contains("features")) {
    const auto& f = doc.at("features");
    maybe(f, "include_permutation_entropy",
          config.features.include_permutation_entropy);
    maybe(f, "window", config.features.window);
  }
  if (doc.contains("select")) {
    const auto& s = doc.at("select");
    maybe(s, "max_runs", config.select.max_runs);
    maybe(s, "alpha", config.select.alpha);
    maybe(s, "forest_trees", config.select.forest_trees);
  }
  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    maybe(t, "trees", config.train.trees);
    maybe(t, "cv_folds", config.train.cv_folds);
    maybe(t, "cv_repeats", config.train.cv_repeats);
    if (t.contains("algorithms")) {
      config.train.algorithms.clear();
      for (const auto& name : t.at("algorithms")) {
        config.train.algorithms.push_back(
            learn::algorithm_from_string(name.get<std::string>()));
      }
    }
  }
  if (doc.contains("eval")) {
    const auto& e = doc.at("eval");
    maybe(e, "paper_compat", config.eval.paper_compat);
    maybe(e, "strata_emotion", config.eval.strata_emotion);
  }
  if (doc.contains("human")) {
    const auto& h = doc.at("human");
    maybe(h, "enabled", config.human.enabled);
    maybe(h, "ratings_path", config.human.ratings_path);
    std::string model = "feature_linked";
    maybe(h, "model", model);
    config.human.model = model == "random" ? synth::JudgmentModel::kRandom
                                           : synth::JudgmentModel::kFeatureLinked;
    maybe(h, "link_feature", config.human.link_feature);
    maybe(h, "weight", config.human.weight);
    maybe(h, "bias", config.human.bias);
    maybe(h, "participants", config.human.participants);
    maybe(h, "subset_size", config.human.subset_size);
  }
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json_text(buffer.str());
}

std::string config_to_json(const PipelineConfig& config) {
  ordered_json doc;
  doc["seed"] = config.seed;
  doc["out_dir"] = config.out_dir;
  doc["data_dir"] = config.data_dir;
  doc["synth"] = {
      {"n_pairs", config.synth_profile.n_pairs},
      {"emotive_fraction", config.synth_profile.emotive_fraction},
      {"positive_share", config.synth_profile.positive_share},
      {"observation_noise_sd", config.synth_profile.observation_noise_sd},
      {"degradation",
       {{"velocity_jitter_sd",
         config.synth_profile.degradation.velocity_jitter_sd},
        {"shift_probability",
         config.synth_profile.degradation.shift_probability},
        {"shift_scale", config.synth_profile.degradation.shift_scale},
        {"emotive_burst_only",
         config.synth_profile.degradation.emotive_burst_only}}},
      {"burst",
       {{"rate_per_video", config.synth_profile.burst.rate_per_video},
        {"amplitude", config.synth_profile.burst.amplitude},
        {"duration_mean_frames",
         config.synth_profile.burst.duration_mean_frames},
        {"duration_sd_frames",
         config.synth_profile.burst.duration_sd_frames}}}};
  doc["preprocess"] = {
      {"smooth_window", config.preprocess.smooth_window},
      {"confidence_threshold", config.preprocess.confidence_threshold},
      {"success_threshold", config.preprocess.success_threshold},
      {"split_ratio", config.preprocess.split_ratio}};
  doc["nmf"] = {{"rank", config.nmf.rank},
                {"restarts", config.nmf.restarts},
                {"max_iter", config.nmf.max_iter},
                {"tol", config.nmf.tol},
                {"scan", config.nmf.scan},
                {"scan_lo", config.nmf.scan_lo},
                {"scan_hi", config.nmf.scan_hi}};
  doc["features"] = {{"include_permutation_entropy",
                      config.features.include_permutation_entropy},
                     {"window", config.features.window}};
  doc["select"] = {{"max_runs", config.select.max_runs},
                   {"alpha", config.select.alpha},
                   {"forest_trees", config.select.forest_trees}};
  ordered_json algorithms = ordered_json::array();
  for (auto algorithm : config.train.algorithms) {
    algorithms.push_back(learn::to_string(algorithm));
  }
  doc["train"] = {{"algorithms", algorithms},
                  {"trees", config.train.trees},
                  {"cv_folds", config.train.cv_folds},
                  {"cv_repeats", config.train.cv_repeats}};
  doc["eval"] = {{"paper_compat", config.eval.paper_compat},
                 {"strata_emotion", config.eval.strata_emotion}};
  doc["human"] = {
      {"enabled", config.human.enabled},
      {"ratings_path", config.human.ratings_path},
      {"model", config.human.model == synth::JudgmentModel::kRandom
                    ? "random"
                    : "feature_linked"},
      {"link_feature", config.human.link_feature},
      {"weight", config.human.weight},
      {"bias", config.human.bias},
      {"participants", config.human.participants},
      {"subset_size", config.human.subset_size}};
  return doc.dump(2);
}

std::string config_hash(const PipelineConfig& config) {
  // artifact location is not an analysis parameter
  PipelineConfig hashed = config;
  hashed.out_dir.clear();
  const std::string canonical = config_to_json(hashed);
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << hash;
  return out.str();
}

// ---------------------------------------------------------------------------
// stages
// ---------------------------------------------------------------------------

void run_synth(const PipelineConfig& config) {
  synth::SynthProfile profile = config.synth_profile;
  profile.seed = derive_seed(config.seed, 0x5f17);
  const auto dataset = synth::generate_dataset(profile);
  synth::write_dataset(dataset, (fs::path(config.out_dir) / "dataset").string());
}

void run_ingest(const PipelineConfig& config) {
  const fs::path source = dataset_dir(config);
  const auto manifest =
      ingest::parse_manifest_file((source / "manifest.csv").string());

  // load raw recordings
  std::vector<AuRecording> recordings;
  std::vector<ingest::ExclusionRecord> short_exclusions;
  std::set<std::string> short_pairs;
  for (const auto& meta : manifest) {
    AuRecording rec;
    rec.video_id = meta.video_id;
    rec.label = meta.label;
    rec.pair_id = meta.pair_id;
    rec.emotion_flag = meta.emotion_flag;
    rec.valence = meta.valence;
    rec.frames = ingest::parse_au_csv_file((source / meta.path).string());
    if (rec.frames.size() < static_cast<std::size_t>(kFrameTarget)) {
      short_exclusions.push_back(
          {meta.video_id, "fewer than " + std::to_string(kFrameTarget) +
                              " frames (" +
                              std::to_string(rec.frames.size()) + ")"});
      short_pairs.insert(meta.pair_id);
      continue;
    }
    recordings.push_back(std::move(rec));
  }
  // short videos take their pairs with them
  std::vector<AuRecording> complete;
  for (auto& rec : recordings) {
    if (short_pairs.count(rec.pair_id)) {
      short_exclusions.push_back(
          {rec.video_id, "pair partner shorter than target"});
    } else {
      complete.push_back(std::move(rec));
    }
  }

  auto filtered =
      ingest::quality_filter(complete, config.preprocess.confidence_threshold,
                             config.preprocess.success_threshold);

  for (auto& rec : filtered.kept) {
    ingest::truncate_frames(rec);
    ingest::smooth_recording(rec, config.preprocess.smooth_window);
  }

  // pair-preserving stratified split
  std::map<std::string, ingest::PairInfo> pair_info;
  for (const auto& rec : filtered.kept) {
    auto& info = pair_info[rec.pair_id];
    info.pair_id = rec.pair_id;
    info.emotion_flag = rec.emotion_flag;
    info.valence = rec.valence;
  }
  std::vector<ingest::PairInfo> pairs;
  for (const auto& [id, info] : pair_info) pairs.push_back(info);
  const auto split =
      ingest::split_pairs(pairs, config.preprocess.split_ratio,
                          derive_seed(config.seed, 0x5b1e));

  std::vector<AuRecording> train_side;
  for (const auto& rec : filtered.kept) {
    if (split.side(rec.pair_id) == ingest::SplitSide::kTrain) {
      train_side.push_back(rec);
    }
  }
  if (train_side.empty()) throw DataError("ingest: empty training split");
  const auto params = ingest::fit_normalization(train_side);

  long clamped = 0;
  std::vector<VideoEntry> entries;
  std::map<std::string, std::string> scene_by_id;
  for (const auto& meta : manifest) scene_by_id[meta.video_id] = meta.scene_keywords;
  for (auto& rec : filtered.kept) {
    const bool is_train = split.side(rec.pair_id) == ingest::SplitSide::kTrain;
    clamped += ingest::normalize(rec, params, is_train).clamped_cells;
    std::ostringstream out;
    ingest::write_au_csv(out, rec.frames);
    write_text(fs::path(config.out_dir) / "ingested" / "normalized" /
                   (rec.video_id + ".csv"),
               out.str());
    VideoEntry entry;
    entry.meta.video_id = rec.video_id;
    entry.meta.path = rec.video_id + ".csv";
    entry.meta.label = rec.label;
    entry.meta.pair_id = rec.pair_id;
    entry.meta.scene_keywords = scene_by_id[rec.video_id];
    entry.meta.emotion_flag = rec.emotion_flag;
    entry.meta.valence = rec.valence;
    entry.split = is_train ? ingest::SplitSide::kTrain
                           : ingest::SplitSide::kTest;
    entries.push_back(std::move(entry));
  }
  write_videos_csv(fs::path(config.out_dir) / "ingested" / "videos.csv",
                   entries);

  ordered_json report;
  report["config_hash"] = config_hash(config);
  report["seed"] = config.seed;
  report["global_min_z"] = params.global_min_z;
  report["smooth_window"] = config.preprocess.smooth_window;
  report["confidence_threshold"] = config.preprocess.confidence_threshold;
  report["success_threshold"] = config.preprocess.success_threshold;
  report["split_ratio"] = config.preprocess.split_ratio;
  report["clamped_cells_off_train"] = clamped;
  report["degraded_stratification"] = split.degraded_stratification;
  report["kept_videos"] = entries.size();
  auto& exclusions = report["exclusions"] = ordered_json::array();
  for (const auto& e : short_exclusions) {
    exclusions.push_back({{"video_id", e.video_id}, {"reason", e.reason}});
  }
  for (const auto& e : filtered.excluded) {
    exclusions.push_back({{"video_id", e.video_id}, {"reason", e.reason}});
  }
  write_text(fs::path(config.out_dir) / "ingested" / "ingest.json",
             report.dump(2));
}

void run_nmf(const PipelineConfig& config) {
  const auto entries = load_videos(config);
  const auto train_entries = filter_entries(entries, ingest::SplitSide::kTrain);
  const auto train = load_normalized(config, train_entries);
  const auto assembled = nmf::assemble_v(train);

  nmf::FitOptions options;
  options.max_iter = config.nmf.max_iter;
  options.tol = config.nmf.tol;

  // best of restarts at the configured rank
  nmf::NmfModel best;
  bool have_best = false;
  for (int restart = 0; restart < config.nmf.restarts; ++restart) {
    nmf::FitOptions fit_options = options;
    fit_options.seed = derive_seed(config.seed, 0x43f, restart);
    auto model = nmf::nmf_fit(assembled.v, config.nmf.rank, fit_options);
    if (!have_best || model.train_mse < best.train_mse) {
      best = std::move(model);
      have_best = true;
    }
  }

  write_text(fs::path(config.out_dir) / "nmf" / "model.json",
             nmf::serialize_model(best, assembled.video_ids,
                                  assembled.frames_per_video));
  write_text(fs::path(config.out_dir) / "nmf" / "basis_heatmap.csv",
             nmf::basis_heatmap_csv(best));
  write_text(fs::path(config.out_dir) / "nmf" / "basis_heatmap.svg",
             nmf::basis_heatmap_svg(best));

  const auto reps = nmf::representative_aus(best.w, best.d);
  ordered_json reps_doc;
  reps_doc["config_hash"] = config_hash(config);
  reps_doc["seed"] = config.seed;
  reps_doc["representative_aus"] = reps.au_name;
  write_text(fs::path(config.out_dir) / "nmf" / "representatives.json",
             reps_doc.dump(2));

  // reconstruction diagnostics on train and (projected) test
  ordered_json r2_doc;
  r2_doc["config_hash"] = config_hash(config);
  const auto train_r2 = nmf::reconstruction_r2(assembled.v, best.wd(), best.h);
  ordered_json train_block;
  train_block["overall"] = train_r2.overall;
  for (int a = 0; a < kAuCount; ++a) {
    train_block[kAuNames[a]] =
        train_r2.defined[a] ? ordered_json(train_r2.per_au[a])
                            : ordered_json("undefined");
  }
  r2_doc["train"] = std::move(train_block);

  const auto test_entries = filter_entries(entries, ingest::SplitSide::kTest);
  if (!test_entries.empty()) {
    const auto test = load_normalized(config, test_entries);
    const auto assembled_test = nmf::assemble_v(test);
    const auto h_test = nmf::project_h(assembled_test.v, best.w, best.d);
    const auto test_r2 =
        nmf::reconstruction_r2(assembled_test.v, best.wd(), h_test);
    ordered_json test_block;
    test_block["overall"] = test_r2.overall;
    for (int a = 0; a < kAuCount; ++a) {
      test_block[kAuNames[a]] =
          test_r2.defined[a] ? ordered_json(test_r2.per_au[a])
                             : ordered_json("undefined");
    }
    r2_doc["test"] = std::move(test_block);
  }
  write_text(fs::path(config.out_dir) / "nmf" / "r2.json", r2_doc.dump(2));

  if (config.nmf.scan) {
    const auto entries_scan =
        nmf::rank_scan(assembled.v, config.nmf.scan_lo, config.nmf.scan_hi,
                       config.nmf.restarts, derive_seed(config.seed, 0x5ca),
                       options);
    std::ostringstream out;
    csv::write_row(out, {"rank", "mse"});
    for (const auto& entry : entries_scan) {
      csv::write_row(out, {std::to_string(entry.rank),
                           csv::format_double(entry.mse)});
    }
    write_text(fs::path(config.out_dir) / "nmf" / "rank_scan.csv", out.str());
  }
}

void run_features(const PipelineConfig& config) {
  const auto entries = load_videos(config);
  const auto reps = load_reps(config);
  const auto recordings = load_normalized(config, entries);

  feat::ExtractOptions options;
  options.include_permutation_entropy =
      config.features.include_permutation_entropy;
  options.window = config.features.window;
  auto matrix = feat::extract_features(recordings, reps, options);
  write_text(fs::path(config.out_dir) / "features" / "features.csv",
             matrix.to_csv());

  // training-row bookkeeping for fit-time decisions
  std::set<std::string> train_ids;
  for (const auto& entry : entries) {
    if (entry.split == ingest::SplitSide::kTrain) {
      train_ids.insert(entry.meta.video_id);
    }
  }
  std::vector<std::size_t> train_rows;
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    if (train_ids.count(matrix.row_ids[r])) train_rows.push_back(r);
  }
  feat::drop_zero_variance(matrix, train_rows);

  feat::ImputeOptions impute_options;
  impute_options.seed = derive_seed(config.seed, 0x1234);
  const auto impute_report = feat::impute_nonfinite(matrix, impute_options);
  write_text(fs::path(config.out_dir) / "features" / "features_imputed.csv",
             matrix.to_csv());

  ordered_json meta;
  meta["config_hash"] = config_hash(config);
  meta["seed"] = config.seed;
  meta["columns"] = matrix.n_cols();
  meta["impute_iterations"] = impute_report.iterations;
  meta["impute_oob_nrmse"] = impute_report.final_oob_nrmse;
  meta["imputed_cells"] = impute_report.imputed_cells;
  auto& dropped = meta["dropped"] = ordered_json::array();
  for (const auto& d : matrix.dropped) {
    dropped.push_back({{"name", d.name}, {"reason", d.reason}});
  }
  write_text(fs::path(config.out_dir) / "features" / "features_meta.json",
             meta.dump(2));

  // transition-event summaries (thresholds from the training pool)
  std::vector<AuRecording> train;
  for (const auto& rec : recordings) {
    if (train_ids.count(rec.video_id)) train.push_back(rec);
  }
  const auto thresholds = feat::transition_thresholds(train, reps);
  std::ostringstream events_csv;
  csv::write_row(events_csv,
                 {"video_id", "event_count", "transition_fraction",
                  "mean_duration", "max_duration", "mean_velocity_magnitude",
                  "max_velocity_magnitude", "velocity_range"});
  for (const auto& rec : recordings) {
    const auto summary = feat::transition_events(rec, reps, thresholds);
    csv::write_row(events_csv,
                   {summary.video_id, std::to_string(summary.event_count),
                    csv::format_double(summary.transition_fraction),
                    csv::format_double(summary.mean_duration),
                    csv::format_double(summary.max_duration),
                    csv::format_double(summary.mean_velocity_magnitude),
                    csv::format_double(summary.max_velocity_magnitude),
                    csv::format_double(summary.velocity_range)});
  }
  write_text(fs::path(config.out_dir) / "features" / "transition_events.csv",
             events_csv.str());
}

void run_select(const PipelineConfig& config) {
  const auto entries = load_videos(config);
  const auto matrix = load_features(config);
  const auto train_entries = filter_entries(entries, ingest::SplitSide::kTrain);
  const auto data = make_dataset(matrix, train_entries, matrix.column_names,
                                 /*valence_target=*/false);

  select::BorutaOptions options;
  options.max_runs = config.select.max_runs;
  options.alpha = config.select.alpha;
  options.forest_trees = config.select.forest_trees;
  options.seed = derive_seed(config.seed, 0xb04a);
  auto decision = select::boruta(data, options);
  decision = select::tentative_rough_fix(std::move(decision));

  write_text(fs::path(config.out_dir) / "select" / "boruta.csv",
             decision.to_csv());
  ordered_json doc;
  doc["config_hash"] = config_hash(config);
  doc["seed"] = config.seed;
  doc["runs_completed"] = decision.runs_completed;
  doc["confirmed"] = decision.confirmed_names();
  write_text(fs::path(config.out_dir) / "select" / "selected.json",
             doc.dump(2));
}

void run_train(const PipelineConfig& config) {
  const auto entries = load_videos(config);
  const auto matrix = load_features(config);
  auto selected = load_selected(config);
  if (selected.empty()) {
    // nothing confirmed: fall back to the full matrix so later stages can
    // still run; the report records the fallback
    selected = matrix.column_names;
  }
  const auto train_entries = filter_entries(entries, ingest::SplitSide::kTrain);
  const auto data = make_dataset(matrix, train_entries, selected,
                                 /*valence_target=*/false);

  ordered_json cv_doc;
  cv_doc["config_hash"] = config_hash(config);
  cv_doc["seed"] = config.seed;
  cv_doc["features"] = selected;
  auto& per_algorithm = cv_doc["cv"] = ordered_json::array();
  for (auto algorithm : config.train.algorithms) {
    const auto spec = spec_for(config, algorithm);
    learn::CvResult cv;
    const auto model = learn::train_with_cv(spec, data, config.train.cv_folds,
                                            config.train.cv_repeats, &cv);
    write_text(fs::path(config.out_dir) / "train" /
                   ("model_" + learn::to_string(algorithm) + ".json"),
               learn::serialize_classifier(model));
    per_algorithm.push_back(
        {{"algorithm", learn::to_string(algorithm)},
         {"resamples", cv.summary.resamples},
         {"mean_accuracy", cv.summary.mean_accuracy},
         {"sd_accuracy", cv.summary.sd_accuracy},
         {"mean_auc", std::isfinite(cv.summary.mean_auc)
                          ? ordered_json(cv.summary.mean_auc)
                          : ordered_json(nullptr)}});
  }
  write_text(fs::path(config.out_dir) / "train" / "cv_report.json",
             cv_doc.dump(2));
}

void run_eval(const PipelineConfig& config) {
  const auto entries = load_videos(config);
  const auto matrix = load_features(config);
  const auto selected = load_selected(config);
  const auto features =
      selected.empty() ? matrix.column_names : selected;
  const auto test_entries = filter_entries(entries, ingest::SplitSide::kTest);
  const auto test = make_dataset(matrix, test_entries, features,
                                 /*valence_target=*/false);

  std::map<std::string, bool> emotion_by_id;
  for (const auto& entry : test_entries) {
    emotion_by_id[entry.meta.video_id] = entry.meta.emotion_flag;
  }

  ordered_json doc;
  doc["config_hash"] = config_hash(config);
  doc["seed"] = config.seed;
  doc["paper_compat"] = config.eval.paper_compat;
  auto& models = doc["models"] = ordered_json::array();

  for (auto algorithm : config.train.algorithms) {
    const auto name = learn::to_string(algorithm);
    const auto model = learn::deserialize_classifier(
        read_text(fs::path(config.out_dir) / "train" /
                  ("model_" + name + ".json")));
    const auto predictions = model.predict(test);
    write_predictions(fs::path(config.out_dir) / "eval" /
                          ("predictions_" + name + ".csv"),
                      predictions);

    // ROC points export
    {
      const auto curve =
          stats::roc_auc(predictions.scores(), predictions.binary_labels());
      std::ostringstream out;
      csv::write_row(out, {"threshold", "fpr", "tpr"});
      for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
        csv::write_row(out, {csv::format_double(curve.thresholds[i]),
                             csv::format_double(curve.fpr[i]),
                             csv::format_double(curve.tpr[i])});
      }
      write_text(fs::path(config.out_dir) / "eval" / ("roc_" + name + ".csv"),
                 out.str());
    }

    ordered_json block;
    block["algorithm"] = name;
    block["overall"] = binary_eval_json(predictions, config.eval.paper_compat);

    if (config.eval.strata_emotion) {
      learn::PredictionSet emotive, neutral;
      emotive.class_labels = predictions.class_labels;
      neutral.class_labels = predictions.class_labels;
      for (const auto& item : predictions.items) {
        (emotion_by_id.at(item.id) ? emotive : neutral)
            .items.push_back(item);
      }
      ordered_json strata;
      if (!emotive.items.empty()) {
        strata["emotion"] =
            binary_eval_json(emotive, config.eval.paper_compat);
      }
      if (!neutral.items.empty()) {
        strata["no_emotion"] =
            binary_eval_json(neutral, config.eval.paper_compat);
      }
      if (!emotive.items.empty() && !neutral.items.empty()) {
        // between-strata accuracy difference (Fisher) and AUC difference
        long e_correct = 0, n_correct = 0;
        for (const auto& item : emotive.items) {
          e_correct += item.predicted == item.true_class ? 1 : 0;
        }
        for (const auto& item : neutral.items) {
          n_correct += item.predicted == item.true_class ? 1 : 0;
        }
        const long e_wrong = static_cast<long>(emotive.items.size()) - e_correct;
        const long n_wrong = static_cast<long>(neutral.items.size()) - n_correct;
        if (e_correct + n_correct > 0 && e_wrong + n_wrong > 0) {
          const auto fisher_p = stats::fisher_exact_2x2(
              {{{e_correct, e_wrong}, {n_correct, n_wrong}}});
          strata["fisher_accuracy_p"] = fisher_p;
          strata["fisher_accuracy_p_formatted"] = stats::format_p(fisher_p);
        } else {
          // a zero margin (every video right or wrong in both strata)
          // leaves the exact test undefined
          strata["fisher_accuracy_p"] = nullptr;
        }
        bool both_classes = true;
        for (const auto* set : {&emotive, &neutral}) {
          const auto labels = set->binary_labels();
          if (std::count(labels.begin(), labels.end(), 1) == 0 ||
              std::count(labels.begin(), labels.end(), 0) == 0) {
            both_classes = false;
          }
        }
        if (both_classes) {
          const auto cmp = stats::delong_compare(
              emotive.scores(), emotive.binary_labels(), neutral.scores(),
              neutral.binary_labels());
          strata["delong_auc_delta"] = cmp.delta_auc;
          strata["delong_z"] = cmp.z;
          strata["delong_p"] = cmp.p_value;
          strata["delong_p_formatted"] = stats::format_p(cmp.p_value);
        }
      }
      block["strata"] = std::move(strata);
    }
    models.push_back(std::move(block));
  }
  write_text(fs::path(config.out_dir) / "eval" / "metrics.json", doc.dump(2));
}

void run_valence(const PipelineConfig& config) {
  const auto entries = load_videos(config);
  const auto matrix = load_features(config);

  // real training videos only, classes balanced by downsampling
  std::vector<VideoEntry> train_real;
  for (const auto& entry : entries) {
    if (entry.split == ingest::SplitSide::kTrain &&
        entry.meta.label == Label::kReal) {
      train_real.push_back(entry);
    }
  }
  auto train = make_dataset(matrix, train_real, matrix.column_names,
                            /*valence_target=*/true);
  std::set<int> present(train.y.begin(), train.y.end());
  if (present.size() < 2) {
    throw DataError("valence: training set lacks class variety");
  }
  const auto balanced =
      learn::downsample_balance(train, derive_seed(config.seed, 0xba1));

  learn::ClassifierSpec spec;
  spec.algorithm = learn::Algorithm::kRandomForest;
  spec.hp.trees = config.train.trees;
  spec.seed = derive_seed(config.seed, 0x7a1e);
  const auto model = learn::TrainedClassifier::fit(spec, balanced);

  ordered_json doc;
  doc["config_hash"] = config_hash(config);
  doc["seed"] = config.seed;
  doc["train_per_class"] = balanced.n_rows() / 3;

  const auto evaluate_side = [&](Label label) {
    std::vector<VideoEntry> side;
    for (const auto& entry : entries) {
      if (entry.split == ingest::SplitSide::kTest &&
          entry.meta.label == label) {
        side.push_back(entry);
      }
    }
    const auto data = make_dataset(matrix, side, matrix.column_names,
                                   /*valence_target=*/true);
    const auto predictions = model.predict(data);

    stats::ConfusionMulti cm;
    cm.class_order = {"positive", "neutral", "negative"};
    cm.counts.assign(9, 0);
    std::vector<std::vector<double>> score_rows;
    std::vector<int> true_classes;
    for (const auto& item : predictions.items) {
      cm.at(item.true_class, item.predicted) += 1;
      score_rows.push_back(item.proba);
      true_classes.push_back(item.true_class);
    }
    const auto metrics =
        stats::multiclass_metrics(cm, &score_rows, &true_classes);
    const auto report =
        stats::nir_test(cm.correct(), cm.row_totals(),
                        stats::NirMode::kEmpirical);

    ordered_json block;
    block["n"] = cm.total();
    block["accuracy"] = metrics.accuracy;
    block["accuracy_ci"] = ci_json(stats::wilson_ci(
        cm.correct(), static_cast<double>(cm.total())));
    block["nir_test"] = test_json(*report.test);
    block["mcc"] = metrics.mcc;
    if (metrics.macro_ovr_auc) {
      block["macro_ovr_auc"] = *metrics.macro_ovr_auc;
    }
    ordered_json sens;
    for (int c = 0; c < cm.k(); ++c) {
      sens[cm.class_order[c]] =
          metrics.sensitivity_defined[c]
              ? ordered_json(metrics.sensitivity[c])
              : ordered_json("undefined");
    }
    block["sensitivity"] = std::move(sens);
    ordered_json counts = ordered_json::array();
    for (int i = 0; i < 3; ++i) {
      counts.push_back({cm.at(i, 0), cm.at(i, 1), cm.at(i, 2)});
    }
    block["confusion"] = std::move(counts);
    return std::make_pair(block, metrics);
  };

  const auto [real_block, real_metrics] = evaluate_side(Label::kReal);
  const auto [fake_block, fake_metrics] = evaluate_side(Label::kFake);
  doc["real"] = real_block;
  doc["fake"] = fake_block;
  doc["delta_real_minus_fake"] = {
      {"accuracy", real_metrics.accuracy - fake_metrics.accuracy},
      {"mcc", real_metrics.mcc - fake_metrics.mcc}};
  write_text(fs::path(config.out_dir) / "valence" / "valence_report.json",
             doc.dump(2));
}

void run_human(const PipelineConfig& config) {
  const auto entries = load_videos(config);
  const auto matrix = load_features(config);
  const auto selected = load_selected(config);
  const auto test_entries = filter_entries(entries, ingest::SplitSide::kTest);

  // deterministic balanced rater subset of the test split
  std::vector<const VideoEntry*> real_side, fake_side;
  for (const auto& entry : test_entries) {
    (entry.meta.label == Label::kReal ? real_side : fake_side)
        .push_back(&entry);
  }
  const auto by_id = [](const VideoEntry* a, const VideoEntry* b) {
    return a->meta.video_id < b->meta.video_id;
  };
  std::sort(real_side.begin(), real_side.end(), by_id);
  std::sort(fake_side.begin(), fake_side.end(), by_id);
  const std::size_t per_class = std::min<std::size_t>(
      {static_cast<std::size_t>(config.human.subset_size / 2),
       real_side.size(), fake_side.size()});
  std::vector<VideoEntry> subset;
  for (std::size_t i = 0; i < per_class; ++i) {
    subset.push_back(*real_side[i]);
    subset.push_back(*fake_side[i]);
  }
  if (subset.size() < 4) throw DataError("human: test subset too small");

  // ratings: load or synthesize against the link feature
  std::vector<synth::HumanRating> ratings;
  if (!config.human.ratings_path.empty()) {
    const auto table = csv::read_file(config.human.ratings_path);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      ratings.push_back({table.rows[r][0], table.rows[r][1],
                         csv::to_double(table.rows[r][2], r, "rating")});
    }
  } else {
    const auto link_column = matrix.column(config.human.link_feature);
    if (!link_column) {
      throw ConfigError("human.link_feature not present: " +
                        config.human.link_feature);
    }
    std::map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
      row_of[matrix.row_ids[r]] = r;
    }
    std::vector<synth::VideoForJudgment> for_judgment;
    for (const auto& entry : subset) {
      for_judgment.push_back(
          {entry.meta.video_id,
           matrix.at(row_of.at(entry.meta.video_id), *link_column)});
    }
    synth::JudgmentOptions options;
    options.model = config.human.model;
    options.weight = config.human.weight;
    options.bias = config.human.bias;
    options.n_participants = config.human.participants;
    options.seed = derive_seed(config.seed, 0x4a7e5);
    ratings = synth::generate_judgments(for_judgment, options);
    synth::write_ratings(ratings,
                         (fs::path(config.out_dir) / "human" / "ratings.csv")
                             .string());
  }

  // model predictions on the subset come from the eval stage
  const auto rf_predictions = load_predictions(
      fs::path(config.out_dir) / "eval" / "predictions_random_forest.csv");
  std::map<std::string, Label> model_calls;
  std::map<std::string, bool> model_correct_by_id;
  for (const auto& item : rf_predictions.items) {
    model_calls[item.id] = item.predicted == 1 ? Label::kFake : Label::kReal;
    model_correct_by_id[item.id] = item.predicted == item.true_class;
  }

  const auto votes = human::consensus(ratings);
  std::map<std::string, Label> human_calls;
  for (const auto& [video_id, entry] : votes) {
    human_calls[video_id] = entry.judgment;
  }

  // restrict model calls to rated videos
  std::map<std::string, Label> model_on_subset;
  for (const auto& [video_id, call] : human_calls) {
    const auto it = model_calls.find(video_id);
    if (it == model_calls.end()) {
      throw DataError("human: no model prediction for rated video " +
                      video_id);
    }
    model_on_subset[video_id] = it->second;
  }

  ordered_json doc;
  doc["config_hash"] = config_hash(config);
  doc["seed"] = config.seed;
  doc["subset_size"] = human_calls.size();

  const auto agreement_json = [](const human::AgreementReport& report) {
    return ordered_json{
        {"stratum", report.stratum},
        {"agreement_rate", report.agreement_rate},
        {"chi_square", report.chi.statistic},
        {"df", report.chi.df},
        {"p", report.chi.p_value},
        {"p_formatted", stats::format_p(report.chi.p_value)},
        {"phi", report.chi.effect},
        {"contingency",
         {{report.contingency[0][0], report.contingency[0][1]},
          {report.contingency[1][0], report.contingency[1][1]}}}};
  };
  try {
    doc["agreement"] =
        agreement_json(human::agreement(model_on_subset, human_calls, "all"));
  } catch (const std::invalid_argument& e) {
    doc["agreement"] = {{"degenerate", e.what()}};
  }

  // per-emotion strata
  std::map<std::string, bool> emotion_by_id;
  std::map<std::string, Label> truth_by_id;
  for (const auto& entry : subset) {
    emotion_by_id[entry.meta.video_id] = entry.meta.emotion_flag;
    truth_by_id[entry.meta.video_id] = entry.meta.label;
  }
  for (const bool emotive : {true, false}) {
    std::map<std::string, Label> model_stratum, human_stratum;
    for (const auto& [video_id, call] : model_on_subset) {
      if (emotion_by_id.at(video_id) != emotive) continue;
      model_stratum[video_id] = call;
      human_stratum[video_id] = human_calls.at(video_id);
    }
    if (model_stratum.size() >= 4) {
      try {
        doc[emotive ? "agreement_emotion" : "agreement_no_emotion"] =
            agreement_json(human::agreement(model_stratum, human_stratum,
                                            emotive ? "emotion"
                                                    : "no_emotion"));
      } catch (const std::invalid_argument&) {
        // degenerate stratum margin; skip the block
      }
    }
  }

  // correctness correspondence
  std::vector<bool> model_correct, human_correct;
  std::vector<std::vector<double>> feature_rows;
  std::vector<std::string> strat_features;
  for (const auto& name : selected) {
    strat_features.push_back(name);
    if (strat_features.size() == 2) break;
  }
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    row_of[matrix.row_ids[r]] = r;
  }
  for (const auto& [video_id, human_call] : human_calls) {
    model_correct.push_back(model_correct_by_id.at(video_id));
    human_correct.push_back(human_call == truth_by_id.at(video_id));
    std::vector<double> row;
    for (const auto& name : strat_features) {
      row.push_back(matrix.at(row_of.at(video_id), *matrix.column(name)));
    }
    feature_rows.push_back(std::move(row));
  }
  try {
    doc["correctness_correspondence"] = agreement_json(
        human::correctness_correspondence(model_correct, human_correct));
  } catch (const std::invalid_argument& e) {
    doc["correctness_correspondence"] = {{"degenerate", e.what()}};
  }
  {
    double human_accuracy = 0.0;
    for (bool correct : human_correct) human_accuracy += correct ? 1 : 0;
    doc["human_consensus_accuracy"] = human_accuracy / human_correct.size();
  }

  if (!strat_features.empty()) {
    const auto strat = human::feature_stratified_accuracy(
        strat_features, feature_rows, model_correct, human_correct);
    ordered_json groups = ordered_json::array();
    for (const auto& group : strat.groups) {
      ordered_json g;
      g["model_correct"] = group.model_correct;
      g["human_correct"] = group.human_correct;
      g["count"] = group.count;
      for (std::size_t f = 0; f < strat.feature_names.size(); ++f) {
        g[strat.feature_names[f]] = {
            {"mean", std::isfinite(group.feature_mean[f])
                         ? ordered_json(group.feature_mean[f])
                         : ordered_json(nullptr)},
            {"se", std::isfinite(group.feature_se[f])
                       ? ordered_json(group.feature_se[f])
                       : ordered_json(nullptr)}};
      }
      groups.push_back(std::move(g));
    }
    doc["feature_stratification"] = std::move(groups);
  }

  // predicting individual judgments from video features
  learn::Dataset video_features = make_dataset(
      matrix, subset, selected.empty() ? matrix.column_names : selected,
      /*valence_target=*/false);
  learn::ClassifierSpec spec;
  spec.algorithm = learn::Algorithm::kRandomForest;
  spec.hp.trees = 100;
  spec.seed = derive_seed(config.seed, 0x109);
  for (const auto scheme :
       {human::HumanCvScheme::kLopo, human::HumanCvScheme::kLoso}) {
    const auto report =
        human::predict_human(video_features, ratings, scheme, spec);
    ordered_json block;
    block["accuracy"] = report.accuracy;
    block["kappa"] = report.kappa;
    block["sensitivity"] = report.sensitivity;
    block["specificity"] = report.specificity;
    block["rows"] = report.predictions.items.size();
    doc[scheme == human::HumanCvScheme::kLopo ? "predict_human_lopo"
                                              : "predict_human_loso"] =
        std::move(block);
  }

  write_text(fs::path(config.out_dir) / "human" / "human_report.json",
             doc.dump(2));
}

void run_pipeline(const PipelineConfig& config) {
  ordered_json summary;
  summary["config_hash"] = config_hash(config);
  summary["seed"] = config.seed;
  {
    PipelineConfig canonical = config;
    canonical.out_dir.clear();
    summary["config"] = json::parse(config_to_json(canonical));
  }
  ordered_json stages = ordered_json::array();
  if (config.data_dir.empty()) {
    run_synth(config);
    stages.push_back("synth");
  }
  run_ingest(config);
  stages.push_back("ingest");
  run_nmf(config);
  stages.push_back("nmf");
  run_features(config);
  stages.push_back("features");
  run_select(config);
  stages.push_back("select");
  run_train(config);
  stages.push_back("train");
  run_eval(config);
  stages.push_back("eval");
  run_valence(config);
  stages.push_back("valence");
  if (config.human.enabled) {
    run_human(config);
    stages.push_back("human");
  }
  run_report(config);
  stages.push_back("report");
  summary["stages"] = std::move(stages);
  write_text(fs::path(config.out_dir) / "pipeline_summary.json",
             summary.dump(2));
}

}  // namespace facedyn::pipeline
