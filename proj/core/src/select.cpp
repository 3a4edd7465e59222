#include "facedyn/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "facedyn/rng.hpp"
#include "facedyn/stats.hpp"

namespace facedyn::select {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Exact two-sided binomial p at p0 = 0.5 (point-probability method).
double binom_two_sided_half(int hits, int runs) {
  const int tail = std::min(hits, runs - hits);
  double p = 0.0;
  for (int k = 0; k <= tail; ++k) {
    p += std::exp(stats::log_choose(runs, k) - runs * std::log(2.0));
  }
  double upper = 0.0;
  for (int k = runs - tail; k <= runs; ++k) {
    upper += std::exp(stats::log_choose(runs, k) - runs * std::log(2.0));
  }
  return std::min(1.0, hits * 2 == runs ? 1.0 : p + upper);
}

double median_of(std::vector<double> values) {
  if (values.empty()) return kNan;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::string to_string(BorutaStatus status) {
  switch (status) {
    case BorutaStatus::kConfirmed: return "confirmed";
    case BorutaStatus::kTentative: return "tentative";
    case BorutaStatus::kRejected: return "rejected";
  }
  return "unknown";
}

std::vector<std::string> BorutaDecision::confirmed_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (status[i] == BorutaStatus::kConfirmed) {
      names.push_back(feature_names[i]);
    }
  }
  return names;
}

double BorutaDecision::median_importance(std::size_t feature) const {
  std::vector<double> history;
  for (const auto& run : importance_history) {
    if (std::isfinite(run[feature])) history.push_back(run[feature]);
  }
  return median_of(std::move(history));
}

std::string BorutaDecision::to_csv() const {
  std::ostringstream out;
  out << "feature,status,median_importance,hit_count\n";
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    out << feature_names[i] << ',' << to_string(status[i]) << ','
        << median_importance(i) << ',' << hit_counts[i] << '\n';
  }
  return out.str();
}

BorutaDecision boruta(const learn::Dataset& data,
                      const BorutaOptions& options) {
  const std::size_t n = data.n_rows(), p = data.n_cols();
  if (n == 0 || p == 0) throw std::invalid_argument("boruta: empty data");
  {
    std::set<int> classes(data.y.begin(), data.y.end());
    if (classes.size() < 2) {
      throw std::invalid_argument("boruta: labels contain a single class");
    }
  }

  BorutaDecision decision;
  decision.feature_names = data.feature_names;
  decision.status.assign(p, BorutaStatus::kTentative);
  decision.hit_counts.assign(p, 0);
  decision.params = options;

  std::vector<double> targets(data.y.begin(), data.y.end());

  for (int run = 0; run < options.max_runs; ++run) {
    bool any_undecided = false;
    for (auto s : decision.status) {
      if (s == BorutaStatus::kTentative) {
        any_undecided = true;
        break;
      }
    }
    if (!any_undecided) break;

    // design: every original feature plus one fresh shadow shuffle per
    // feature. Keeping rejected features and their shadows in the contest
    // holds the shadow-max bar steady across runs.
    const std::size_t a = p;
    const std::size_t n_shadow = std::max<std::size_t>(a, 5);
    const std::size_t width = a + n_shadow;
    std::vector<double> design(n * width);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < a; ++j) {
        design[r * width + j] = data.row(r)[j];
      }
    }
    Rng shadow_rng(derive_seed(options.seed, 0x5d0, run));
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < n_shadow; ++j) {
      const std::size_t source = j % a;
      std::iota(perm.begin(), perm.end(), 0);
      shadow_rng.shuffle(perm);
      for (std::size_t r = 0; r < n; ++r) {
        design[r * width + a + j] = data.row(perm[r])[source];
      }
    }

    forest::Options forest_options;
    forest_options.n_trees = options.forest_trees;
    forest_options.seed = derive_seed(options.seed, 0xb07a, run);
    forest_options.compute_importance = true;
    forest_options.compute_oob = true;
    const auto rf = forest::RandomForest::fit(
        {design.data(), n, width}, targets,
        forest::RandomForest::Task::kClassify, data.n_classes(),
        forest_options);

    const auto& z = rf.importance_mean();
    double shadow_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n_shadow; ++j) {
      shadow_max = std::max(shadow_max, z[a + j]);
    }
    decision.shadow_max_history.push_back(shadow_max);

    std::vector<double> run_importance(p, kNan);
    for (std::size_t j = 0; j < a; ++j) {
      run_importance[j] = z[j];
      if (z[j] > shadow_max) decision.hit_counts[j] += 1;
    }
    decision.importance_history.push_back(std::move(run_importance));
    decision.runs_completed = run + 1;

    // binomial decisions with Bonferroni over the original feature count
    const double bonferroni = static_cast<double>(p);
    for (std::size_t j = 0; j < p; ++j) {
      if (decision.status[j] != BorutaStatus::kTentative) continue;
      const double p_two =
          binom_two_sided_half(decision.hit_counts[j], decision.runs_completed);
      if (p_two * bonferroni < options.alpha) {
        decision.status[j] = 2 * decision.hit_counts[j] >
                                     decision.runs_completed
                                 ? BorutaStatus::kConfirmed
                                 : BorutaStatus::kRejected;
      }
    }
  }
  return decision;
}

BorutaDecision tentative_rough_fix(BorutaDecision decision) {
  const double shadow_median = median_of(decision.shadow_max_history);
  for (std::size_t i = 0; i < decision.feature_names.size(); ++i) {
    if (decision.status[i] != BorutaStatus::kTentative) continue;
    const double feature_median = decision.median_importance(i);
    decision.status[i] = std::isfinite(feature_median) &&
                                 feature_median > shadow_median
                             ? BorutaStatus::kConfirmed
                             : BorutaStatus::kRejected;
  }
  return decision;
}

PcaResult pca_select(const learn::Dataset& data, PcaCriterion criterion,
                     double cumvar_threshold) {
  const std::size_t n = data.n_rows();
  if (n < 2) throw std::invalid_argument("pca_select: need >= 2 rows");

  PcaResult result;
  auto& model = result.model;

  // standardize, dropping constant columns
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < data.n_cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += data.row(r)[c];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = data.row(r)[c] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd > 0.0) {
      kept.push_back(c);
      model.feature_names.push_back(data.feature_names[c]);
      model.means.conservativeResize(model.means.size() + 1);
      model.sds.conservativeResize(model.sds.size() + 1);
      model.means(model.means.size() - 1) = mean;
      model.sds(model.sds.size() - 1) = sd;
    } else {
      model.dropped_constant.push_back(data.feature_names[c]);
    }
  }
  const std::size_t p = kept.size();
  if (p == 0) throw std::invalid_argument("pca_select: all columns constant");

  Eigen::MatrixXd z(n, p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) {
      z(r, j) = (data.row(r)[kept[j]] - model.means(j)) / model.sds(j);
    }
  }
  const Eigen::MatrixXd corr =
      z.transpose() * z / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  // ascending from Eigen; flip to descending
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    values(i) = std::max(0.0, values(i));
  }
  model.eigenvalues = values;
  model.loadings = vectors;

  const double total = values.sum();
  double running = 0.0;
  model.retained_95 = static_cast<int>(p);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    running += values(i);
    model.cumulative_variance.push_back(total > 0.0 ? running / total : 1.0);
    if (model.retained_95 == static_cast<int>(p) &&
        model.cumulative_variance.back() >= cumvar_threshold) {
      model.retained_95 = static_cast<int>(i) + 1;
    }
    if (values(i) > 1.0) model.retained_kaiser = static_cast<int>(i) + 1;
  }

  result.retained = criterion == PcaCriterion::kKaiser
                        ? std::max(1, model.retained_kaiser)
                        : model.retained_95;
  result.scores = z * vectors.leftCols(result.retained);
  return result;
}

}  // namespace facedyn::select
