#include "facedyn/humancmp.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "facedyn/errors.hpp"

namespace facedyn::human {

Label binarize(double rating) {
  if (rating < 0.0 || rating > 100.0) {
    throw std::invalid_argument("rating outside [0,100]: " +
                                std::to_string(rating));
  }
  return rating >= 50.0 ? Label::kFake : Label::kReal;
}

std::map<std::string, ConsensusEntry> consensus(
    const std::vector<synth::HumanRating>& ratings) {
  std::map<std::string, ConsensusEntry> by_video;
  for (const auto& rating : ratings) {
    auto& entry = by_video[rating.video_id];
    if (binarize(rating.rating) == Label::kFake) {
      entry.fake_votes += 1;
    } else {
      entry.real_votes += 1;
    }
  }
  for (auto& [video_id, entry] : by_video) {
    entry.tie = entry.fake_votes == entry.real_votes;
    entry.judgment =
        entry.fake_votes > entry.real_votes ? Label::kFake : Label::kReal;
  }
  return by_video;
}

namespace {

AgreementReport report_from_contingency(
    const std::array<std::array<long, 2>, 2>& table,
    const std::string& stratum) {
  AgreementReport report;
  report.stratum = stratum;
  report.contingency = table;
  const long n = table[0][0] + table[0][1] + table[1][0] + table[1][1];
  report.agreement_rate =
      n > 0 ? static_cast<double>(table[0][0] + table[1][1]) / n : 0.0;
  report.chi = stats::chi_square(
      {{table[0][0], table[0][1]}, {table[1][0], table[1][1]}});
  return report;
}

}  // namespace

AgreementReport agreement(const std::map<std::string, Label>& model_calls,
                          const std::map<std::string, Label>& human_calls,
                          const std::string& stratum) {
  std::ostringstream mismatch;
  for (const auto& [id, label] : model_calls) {
    if (!human_calls.count(id)) mismatch << ' ' << id;
  }
  for (const auto& [id, label] : human_calls) {
    if (!model_calls.count(id)) mismatch << ' ' << id;
  }
  if (mismatch.tellp() > 0) {
    throw DataError("agreement: unmatched video ids:" + mismatch.str());
  }
  std::array<std::array<long, 2>, 2> table{};
  for (const auto& [id, model_label] : model_calls) {
    const int m = model_label == Label::kFake ? 1 : 0;
    const int h = human_calls.at(id) == Label::kFake ? 1 : 0;
    table[m][h] += 1;
  }
  return report_from_contingency(table, stratum);
}

AgreementReport correctness_correspondence(
    const std::vector<bool>& model_correct,
    const std::vector<bool>& human_correct) {
  if (model_correct.size() != human_correct.size()) {
    throw std::invalid_argument("correctness vectors must align");
  }
  std::array<std::array<long, 2>, 2> table{};
  for (std::size_t i = 0; i < model_correct.size(); ++i) {
    table[model_correct[i] ? 1 : 0][human_correct[i] ? 1 : 0] += 1;
  }
  return report_from_contingency(table, "correctness");
}

FeatureStratification feature_stratified_accuracy(
    const std::vector<std::string>& feature_names,
    const std::vector<std::vector<double>>& feature_rows,
    const std::vector<bool>& model_correct,
    const std::vector<bool>& human_correct) {
  if (feature_rows.size() != model_correct.size() ||
      feature_rows.size() != human_correct.size()) {
    throw std::invalid_argument("feature_stratified_accuracy: misaligned");
  }
  FeatureStratification out;
  out.feature_names = feature_names;
  for (int m = 0; m < 2; ++m) {
    for (int h = 0; h < 2; ++h) {
      OutcomeGroupStats group;
      group.model_correct = m == 1;
      group.human_correct = h == 1;
      std::vector<std::vector<double>> member_values(feature_names.size());
      for (std::size_t i = 0; i < feature_rows.size(); ++i) {
        if ((model_correct[i] ? 1 : 0) != m) continue;
        if ((human_correct[i] ? 1 : 0) != h) continue;
        ++group.count;
        for (std::size_t f = 0; f < feature_names.size(); ++f) {
          member_values[f].push_back(feature_rows[i][f]);
        }
      }
      for (std::size_t f = 0; f < feature_names.size(); ++f) {
        const auto& values = member_values[f];
        if (values.empty()) {
          group.feature_mean.push_back(
              std::numeric_limits<double>::quiet_NaN());
          group.feature_se.push_back(
              std::numeric_limits<double>::quiet_NaN());
          continue;
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double sd =
            values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
        group.feature_mean.push_back(mean);
        group.feature_se.push_back(
            sd / std::sqrt(static_cast<double>(values.size())));
      }
      out.groups.push_back(std::move(group));
    }
  }
  return out;
}

HumanPredictionReport predict_human(
    const learn::Dataset& video_features,
    const std::vector<synth::HumanRating>& ratings, HumanCvScheme scheme,
    const learn::ClassifierSpec& spec) {
  std::map<std::string, std::size_t> video_row;
  for (std::size_t r = 0; r < video_features.n_rows(); ++r) {
    video_row[video_features.ids[r]] = r;
  }

  learn::Dataset joined;
  joined.feature_names = video_features.feature_names;
  joined.class_labels = {"judged_real", "judged_fake"};
  std::vector<std::string> groups;
  for (const auto& rating : ratings) {
    const auto it = video_row.find(rating.video_id);
    if (it == video_row.end()) {
      throw DataError("predict_human: rating references unknown video " +
                      rating.video_id);
    }
    const std::size_t r = it->second;
    joined.ids.push_back(rating.participant_id + ":" + rating.video_id);
    joined.y.push_back(binarize(rating.rating) == Label::kFake ? 1 : 0);
    joined.x.insert(joined.x.end(), video_features.row(r),
                    video_features.row(r) + video_features.n_cols());
    groups.push_back(scheme == HumanCvScheme::kLopo ? rating.participant_id
                                                    : rating.video_id);
  }

  HumanPredictionReport report;
  report.predictions = learn::grouped_cv(joined, groups, spec);

  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& item : report.predictions.items) {
    if (item.true_class == 1) {
      (item.predicted == 1 ? tp : fn) += 1;
    } else {
      (item.predicted == 1 ? fp : tn) += 1;
    }
  }
  const double n = static_cast<double>(tp + fp + fn + tn);
  report.accuracy = (tp + tn) / n;
  report.sensitivity = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  report.specificity = (tn + fp) > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
  const double pe = ((tp + fn) * (tp + fp) + (tn + fp) * (tn + fn)) / (n * n);
  report.kappa = pe < 1.0 ? (report.accuracy - pe) / (1.0 - pe) : 0.0;
  return report;
}

}  // namespace facedyn::human
