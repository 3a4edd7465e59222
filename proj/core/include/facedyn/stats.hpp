#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace facedyn::stats {

// ---------------------------------------------------------------------------
// Distribution primitives
// ---------------------------------------------------------------------------

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal survival function 1 - Phi(x).
double norm_sf(double x);

/// Standard normal quantile (Wichura's AS241, double precision).
double norm_quantile(double p);

/// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi_sq_sf(double x, double df);

/// log C(n, k) via lgamma.
double log_choose(double n, double k);

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

struct Ci {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  std::string method;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string sidedness;   // "greater" | "two-sided"
  std::string correction;  // "continuity" | "yates" | "none" | ...
};

struct MetricReport {
  std::string metric;
  double estimate = 0.0;
  std::optional<Ci> ci;
  std::optional<TestResult> test;
};

/// p-values below 0.001 are reported as "< .001", mirroring journal tables.
std::string format_p(double p);

// ---------------------------------------------------------------------------
// Confusion matrices and point metrics
// ---------------------------------------------------------------------------

struct ConfusionBinary {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  std::string positive_class = "fake";

  long total() const { return tp + fp + fn + tn; }
  long correct() const { return tp + tn; }
};

struct ConfusionMulti {
  std::vector<std::string> class_order;
  std::vector<long> counts;  // row-major, rows = true class, cols = predicted

  int k() const { return static_cast<int>(class_order.size()); }
  long& at(int true_class, int predicted);
  long at(int true_class, int predicted) const;
  long total() const;
  long correct() const;
  std::vector<long> row_totals() const;
};

struct BinaryMetrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double mcc = 0.0;
};

/// Standard definitions; MCC is 0 when any marginal is empty.
BinaryMetrics binary_metrics(const ConfusionBinary& cm);

struct MulticlassMetrics {
  double accuracy = 0.0;
  std::vector<double> sensitivity;           // per class, NaN if class row empty
  std::vector<bool> sensitivity_defined;
  double mcc = 0.0;                          // generalized (Gorodkin) form
  std::optional<double> macro_ovr_auc;       // needs per-class scores
};

/// scores, if given, holds one probability row per item (class order matches
/// cm.class_order) together with true class indices, enabling macro OvR AUC.
MulticlassMetrics multiclass_metrics(
    const ConfusionMulti& cm,
    const std::vector<std::vector<double>>* score_rows = nullptr,
    const std::vector<int>* true_classes = nullptr);

// ---------------------------------------------------------------------------
// Proportion inference
// ---------------------------------------------------------------------------

/// Wilson score interval. successes may be fractional: the paper-compat mode
/// evaluates the interval at p-hat = successes/n without integer rounding.
Ci wilson_ci(double successes, double n, double level = 0.95);

/// One-sided (greater) one-proportion z-test with continuity correction:
/// z = (x - n*p0 - 0.5) / sqrt(n*p0*(1-p0)), p = 1 - Phi(z).
TestResult one_prop_test(double successes, double n, double p0);

enum class NirMode { kFixed, kEmpirical };

/// Tests accuracy against the no-information rate. In empirical mode p0 is
/// the largest class share; in fixed mode it is p0_fixed.
MetricReport nir_test(long correct, const std::vector<long>& class_counts,
                      NirMode mode, double p0_fixed = 0.5);

// ---------------------------------------------------------------------------
// ROC / AUC
// ---------------------------------------------------------------------------

struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

/// Trapezoidal AUC over all distinct thresholds; tied scores contribute 0.5
/// per pair (Mann-Whitney equivalence). labels are 0 (negative) / 1 (positive).
RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels);

struct DelongResult {
  double auc = 0.0;
  double variance = 0.0;
  Ci ci;
};

DelongResult delong(const std::vector<double>& scores,
                    const std::vector<int>& labels, double level = 0.95);

struct DelongComparison {
  double delta_auc = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

/// Unpaired comparison between two independent score sets.
DelongComparison delong_compare(const std::vector<double>& scores_a,
                                const std::vector<int>& labels_a,
                                const std::vector<double>& scores_b,
                                const std::vector<int>& labels_b);

/// Paired comparison: two scorings of the same items (same labels).
DelongComparison delong_compare_paired(const std::vector<double>& scores_a,
                                       const std::vector<double>& scores_b,
                                       const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Contingency tables
// ---------------------------------------------------------------------------

/// Two-sided Fisher's exact p for a 2x2 table by the point-probability
/// method: sums hypergeometric probabilities <= that of the observed table.
double fisher_exact_2x2(const std::array<std::array<long, 2>, 2>& table);

struct ChiSquareResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  double effect = 0.0;  // phi for 2x2, Cramér's V otherwise
  bool yates = false;
};

/// Pearson chi-square test of independence. Yates correction defaults to on
/// for 2x2 tables and is ignored for larger ones.
ChiSquareResult chi_square(const std::vector<std::vector<long>>& table,
                           std::optional<bool> yates = std::nullopt);

// ---------------------------------------------------------------------------
// Effect size and power for two proportions
// ---------------------------------------------------------------------------

struct PowerResult {
  double h = 0.0;
  double power = 0.0;
  long n_per_group_for_80 = 0;
};

/// Cohen's h = 2*asin(sqrt(p1)) - 2*asin(sqrt(p2)); power of the two-sided
/// two-proportion arcsine test at level alpha.
PowerResult cohens_h_power(double p1, double p2, double n1, double n2,
                           double alpha = 0.05);

}  // namespace facedyn::stats
