#include "facedyn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "facedyn/errors.hpp"

namespace facedyn::stats {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Regularized lower incomplete gamma P(a, x) by series expansion (x < a+1)
/// or continued fraction (otherwise).
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // series
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q, return 1 - Q
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

double sample_variance(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(n - 1);
}

double sample_covariance(const std::vector<double>& a,
                         const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(n - 1);
}

/// Placement values for DeLong: V10[i] = mean_j psi(x_i, y_j) over negatives,
/// V01[j] = mean_i psi(x_i, y_j) over positives.
struct Placements {
  std::vector<double> v10;  // one per positive
  std::vector<double> v01;  // one per negative
  double auc = 0.0;
};

Placements placements(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("DeLong/AUC needs both classes present");
  }
  Placements out;
  out.v10.assign(pos.size(), 0.0);
  out.v01.assign(neg.size(), 0.0);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = 0; j < neg.size(); ++j) {
      double psi = 0.5;
      if (pos[i] > neg[j]) psi = 1.0;
      else if (pos[i] < neg[j]) psi = 0.0;
      out.v10[i] += psi;
      out.v01[j] += psi;
    }
  }
  for (auto& v : out.v10) v /= static_cast<double>(neg.size());
  for (auto& v : out.v01) v /= static_cast<double>(pos.size());
  out.auc = std::accumulate(out.v10.begin(), out.v10.end(), 0.0) /
            static_cast<double>(pos.size());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distribution primitives
// ---------------------------------------------------------------------------

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double norm_quantile(double p) {
  // Wichura's algorithm AS241 (PPND16).
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

double chi_sq_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return 1.0 - gamma_p(df / 2.0, x / 2.0);
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::string format_p(double p) {
  if (p < 0.001) return "< .001";
  std::ostringstream out;
  out.precision(3);
  out << std::fixed << p;
  std::string s = out.str();
  // journal style: ".035" not "0.035"
  if (s.rfind("0.", 0) == 0) s = s.substr(1);
  return s;
}

// ---------------------------------------------------------------------------
// Confusion matrices
// ---------------------------------------------------------------------------

long& ConfusionMulti::at(int true_class, int predicted) {
  return counts[static_cast<std::size_t>(true_class) * class_order.size() +
                predicted];
}

long ConfusionMulti::at(int true_class, int predicted) const {
  return counts[static_cast<std::size_t>(true_class) * class_order.size() +
                predicted];
}

long ConfusionMulti::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

long ConfusionMulti::correct() const {
  long c = 0;
  for (int i = 0; i < k(); ++i) c += at(i, i);
  return c;
}

std::vector<long> ConfusionMulti::row_totals() const {
  std::vector<long> totals(k(), 0);
  for (int i = 0; i < k(); ++i) {
    for (int j = 0; j < k(); ++j) totals[i] += at(i, j);
  }
  return totals;
}

BinaryMetrics binary_metrics(const ConfusionBinary& cm) {
  if (cm.total() <= 0) throw std::invalid_argument("empty confusion matrix");
  BinaryMetrics m;
  const double tp = cm.tp, fp = cm.fp, fn = cm.fn, tn = cm.tn;
  m.accuracy = (tp + tn) / static_cast<double>(cm.total());
  m.sensitivity = (tp + fn) > 0 ? tp / (tp + fn) : kNan;
  m.specificity = (tn + fp) > 0 ? tn / (tn + fp) : kNan;
  const double denom =
      std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  m.mcc = denom > 0.0 ? (tp * tn - fp * fn) / denom : 0.0;
  return m;
}

MulticlassMetrics multiclass_metrics(
    const ConfusionMulti& cm, const std::vector<std::vector<double>>* score_rows,
    const std::vector<int>* true_classes) {
  const int k = cm.k();
  if (k < 2) throw std::invalid_argument("multiclass metrics need K >= 2");
  MulticlassMetrics m;
  const long n = cm.total();
  m.accuracy = n > 0 ? static_cast<double>(cm.correct()) / n : kNan;

  const auto rows = cm.row_totals();
  m.sensitivity.resize(k);
  m.sensitivity_defined.resize(k);
  for (int i = 0; i < k; ++i) {
    m.sensitivity_defined[i] = rows[i] > 0;
    m.sensitivity[i] =
        rows[i] > 0 ? static_cast<double>(cm.at(i, i)) / rows[i] : kNan;
  }

  // Gorodkin's generalization of MCC.
  double trace = cm.correct();
  double sum_pt = 0.0, sum_pp = 0.0, sum_tt = 0.0;
  for (int i = 0; i < k; ++i) {
    double t_i = 0.0, p_i = 0.0;
    for (int j = 0; j < k; ++j) {
      t_i += cm.at(i, j);
      p_i += cm.at(j, i);
    }
    sum_pt += t_i * p_i;
    sum_tt += t_i * t_i;
    sum_pp += p_i * p_i;
  }
  const double nn = static_cast<double>(n);
  const double denom =
      std::sqrt(nn * nn - sum_pp) * std::sqrt(nn * nn - sum_tt);
  m.mcc = denom > 0.0 ? (trace * nn - sum_pt) / denom : 0.0;

  if (score_rows && true_classes && !score_rows->empty()) {
    double auc_sum = 0.0;
    int auc_count = 0;
    for (int c = 0; c < k; ++c) {
      std::vector<double> scores;
      std::vector<int> labels;
      for (std::size_t i = 0; i < score_rows->size(); ++i) {
        scores.push_back((*score_rows)[i][c]);
        labels.push_back((*true_classes)[i] == c ? 1 : 0);
      }
      const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
      const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
      if (!has_pos || !has_neg) continue;
      auc_sum += roc_auc(scores, labels).auc;
      ++auc_count;
    }
    if (auc_count > 0) m.macro_ovr_auc = auc_sum / auc_count;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Proportion inference
// ---------------------------------------------------------------------------

Ci wilson_ci(double successes, double n, double level) {
  if (n <= 0.0 || successes < 0.0 || successes > n) {
    throw std::invalid_argument("wilson_ci: need 0 <= successes <= n, n > 0");
  }
  const double z = norm_quantile(1.0 - (1.0 - level) / 2.0);
  const double p_hat = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p_hat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom;
  Ci ci;
  ci.lo = std::max(0.0, center - half);
  ci.hi = std::min(1.0, center + half);
  ci.level = level;
  ci.method = "wilson";
  return ci;
}

TestResult one_prop_test(double successes, double n, double p0) {
  if (n <= 0.0) throw std::invalid_argument("one_prop_test: n must be > 0");
  if (p0 <= 0.0 || p0 >= 1.0) {
    throw std::invalid_argument("one_prop_test: p0 must lie in (0,1)");
  }
  TestResult r;
  const double sd = std::sqrt(n * p0 * (1.0 - p0));
  r.statistic = (successes - n * p0 - 0.5) / sd;
  r.p_value = norm_sf(r.statistic);
  r.sidedness = "greater";
  r.correction = "continuity";
  return r;
}

MetricReport nir_test(long correct, const std::vector<long>& class_counts,
                      NirMode mode, double p0_fixed) {
  const long n = std::accumulate(class_counts.begin(), class_counts.end(), 0L);
  if (n <= 0) throw std::invalid_argument("nir_test: empty class counts");
  double p0 = p0_fixed;
  if (mode == NirMode::kEmpirical) {
    const long largest = *std::max_element(class_counts.begin(),
                                           class_counts.end());
    p0 = static_cast<double>(largest) / static_cast<double>(n);
  }
  MetricReport report;
  report.metric = "accuracy_vs_nir";
  report.estimate = static_cast<double>(correct) / static_cast<double>(n);
  report.ci = wilson_ci(static_cast<double>(correct), static_cast<double>(n));
  report.test = one_prop_test(static_cast<double>(correct),
                              static_cast<double>(n), p0);
  return report;
}

// ---------------------------------------------------------------------------
// ROC / AUC
// ---------------------------------------------------------------------------

RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("roc_auc: scores/labels size mismatch");
  }
  long n_pos = 0, n_neg = 0;
  for (int y : labels) (y ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  double auc = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    long tied_pos = 0, tied_neg = 0;
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] ? tied_pos : tied_neg) += 1;
      ++i;
    }
    // trapezoid over the tied block == 0.5 credit per tied (pos,neg) pair
    auc += static_cast<double>(tied_pos) * fp +
           0.5 * static_cast<double>(tied_pos) * tied_neg;
    tp += tied_pos;
    fp += tied_neg;
    curve.thresholds.push_back(threshold);
    curve.fpr.push_back(static_cast<double>(fp) / n_neg);
    curve.tpr.push_back(static_cast<double>(tp) / n_pos);
  }
  // accumulated pairs where positive ranked BELOW negative; flip to AUC
  curve.auc = 1.0 - auc / (static_cast<double>(n_pos) * n_neg);
  return curve;
}

DelongResult delong(const std::vector<double>& scores,
                    const std::vector<int>& labels, double level) {
  const auto pl = placements(scores, labels);
  DelongResult r;
  r.auc = pl.auc;
  r.variance = sample_variance(pl.v10) / static_cast<double>(pl.v10.size()) +
               sample_variance(pl.v01) / static_cast<double>(pl.v01.size());
  const double z = norm_quantile(1.0 - (1.0 - level) / 2.0);
  const double half = z * std::sqrt(std::max(0.0, r.variance));
  r.ci.lo = std::max(0.0, r.auc - half);
  r.ci.hi = std::min(1.0, r.auc + half);
  r.ci.level = level;
  r.ci.method = "delong";
  return r;
}

namespace {

DelongComparison finish_comparison(double delta, double variance) {
  DelongComparison c;
  c.delta_auc = delta;
  if (variance <= 0.0) {
    c.z = 0.0;
    c.p_value = delta == 0.0 ? 1.0 : 0.0;
    return c;
  }
  c.z = delta / std::sqrt(variance);
  c.p_value = 2.0 * norm_sf(std::fabs(c.z));
  return c;
}

}  // namespace

DelongComparison delong_compare(const std::vector<double>& scores_a,
                                const std::vector<int>& labels_a,
                                const std::vector<double>& scores_b,
                                const std::vector<int>& labels_b) {
  const auto a = delong(scores_a, labels_a);
  const auto b = delong(scores_b, labels_b);
  return finish_comparison(a.auc - b.auc, a.variance + b.variance);
}

DelongComparison delong_compare_paired(const std::vector<double>& scores_a,
                                       const std::vector<double>& scores_b,
                                       const std::vector<int>& labels) {
  const auto pa = placements(scores_a, labels);
  const auto pb = placements(scores_b, labels);
  const double m = static_cast<double>(pa.v10.size());
  const double n = static_cast<double>(pa.v01.size());
  const double var = sample_variance(pa.v10) / m + sample_variance(pb.v10) / m +
                     sample_variance(pa.v01) / n + sample_variance(pb.v01) / n -
                     2.0 * sample_covariance(pa.v10, pb.v10) / m -
                     2.0 * sample_covariance(pa.v01, pb.v01) / n;
  return finish_comparison(pa.auc - pb.auc, var);
}

// ---------------------------------------------------------------------------
// Contingency tables
// ---------------------------------------------------------------------------

double fisher_exact_2x2(const std::array<std::array<long, 2>, 2>& table) {
  const long a = table[0][0], b = table[0][1], c = table[1][0], d = table[1][1];
  if (a < 0 || b < 0 || c < 0 || d < 0) {
    throw std::invalid_argument("fisher_exact_2x2: negative count");
  }
  const long r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
  if (n == 0 || r1 == 0 || r2 == 0 || c1 == 0 || (b + d) == 0) {
    throw std::invalid_argument("fisher_exact_2x2: degenerate margins");
  }
  const auto log_pmf = [&](long x) {
    return log_choose(r1, x) + log_choose(r2, c1 - x) - log_choose(n, c1);
  };
  const double log_p_obs = log_pmf(a);
  const long lo = std::max(0L, c1 - r2);
  const long hi = std::min(r1, c1);
  double p = 0.0;
  for (long x = lo; x <= hi; ++x) {
    const double lp = log_pmf(x);
    if (lp <= log_p_obs + 1e-7) p += std::exp(lp);
  }
  return std::min(1.0, p);
}

ChiSquareResult chi_square(const std::vector<std::vector<long>>& table,
                           std::optional<bool> yates) {
  const std::size_t rows = table.size();
  if (rows < 2) throw std::invalid_argument("chi_square: need >= 2 rows");
  const std::size_t cols = table[0].size();
  if (cols < 2) throw std::invalid_argument("chi_square: need >= 2 columns");

  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (table[i].size() != cols) {
      throw std::invalid_argument("chi_square: ragged table");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      n += table[i][j];
    }
  }
  for (double s : row_sum) {
    if (s == 0.0) throw std::invalid_argument("chi_square: zero row margin");
  }
  for (double s : col_sum) {
    if (s == 0.0) throw std::invalid_argument("chi_square: zero column margin");
  }

  ChiSquareResult r;
  const bool is_2x2 = rows == 2 && cols == 2;
  r.yates = is_2x2 && yates.value_or(true);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double expected = row_sum[i] * col_sum[j] / n;
      double diff = std::fabs(table[i][j] - expected);
      if (r.yates) diff = std::max(0.0, diff - 0.5);
      r.statistic += diff * diff / expected;
    }
  }
  r.df = static_cast<double>((rows - 1) * (cols - 1));
  r.p_value = chi_sq_sf(r.statistic, r.df);
  const std::size_t min_dim = std::min(rows, cols);
  r.effect = is_2x2 ? std::sqrt(r.statistic / n)
                    : std::sqrt(r.statistic / (n * (min_dim - 1)));
  return r;
}

// ---------------------------------------------------------------------------
// Effect size and power
// ---------------------------------------------------------------------------

PowerResult cohens_h_power(double p1, double p2, double n1, double n2,
                           double alpha) {
  if (p1 <= 0.0 || p1 >= 1.0 || p2 <= 0.0 || p2 >= 1.0) {
    throw std::invalid_argument("cohens_h_power: proportions must be in (0,1)");
  }
  if (n1 <= 0.0 || n2 <= 0.0) {
    throw std::invalid_argument("cohens_h_power: sample sizes must be > 0");
  }
  PowerResult r;
  r.h = 2.0 * std::asin(std::sqrt(p1)) - 2.0 * std::asin(std::sqrt(p2));
  const double se = std::sqrt(1.0 / n1 + 1.0 / n2);
  const double z_crit = norm_quantile(1.0 - alpha / 2.0);
  const double shift = std::fabs(r.h) / se;
  r.power = norm_cdf(shift - z_crit) + norm_cdf(-shift - z_crit);
  if (r.h != 0.0) {
    const double z_power = norm_quantile(0.80);
    r.n_per_group_for_80 =
        static_cast<long>(std::ceil(std::pow((z_crit + z_power) / r.h, 2.0)));
  }
  return r;
}

}  // namespace facedyn::stats
