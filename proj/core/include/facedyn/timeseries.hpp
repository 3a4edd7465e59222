#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace facedyn::ts {

// Degenerate inputs (constant series where a metric is undefined) return
// non-finite sentinels; downstream feature assembly routes those to
// imputation rather than failing.

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);  // sample variance (n-1)
double sd(const std::vector<double>& x);
double median(std::vector<double> x);

/// First or second temporal difference; output is shorter by `order`.
std::vector<double> difference(const std::vector<double>& x, int order);

/// Autocorrelations r_1..r_max_lag with the full-series mean and
/// denominator. Zero-variance input yields NaN entries.
std::vector<double> acf(const std::vector<double>& x, int max_lag);

double acf1(const std::vector<double>& x);

/// Sum of squared autocorrelations at lags 1..10.
double acf10(const std::vector<double>& x);

/// Partial autocorrelations phi_kk for k = 1..max_lag (Durbin-Levinson).
std::vector<double> pacf(const std::vector<double>& x, int max_lag);

/// Sum of squared partial autocorrelations at lags 1..5.
double pacf5(const std::vector<double>& x);

/// Variance of tiled non-overlapping window variances of the standardized
/// series. Zero for constant input.
double lumpiness(const std::vector<double>& x, int window = 24);

/// Variance of tiled window means of the standardized series.
double stability(const std::vector<double>& x, int window = 24);

struct KlShift {
  double max_kl = 0.0;
  std::size_t argmax_time = 0;  // boundary index between the two windows
};

/// Largest KL divergence between kernel density estimates of two adjacent
/// sliding windows. One shared Silverman bandwidth and a shared 100-point
/// grid over the series range keep window densities comparable.
KlShift max_kl_shift(const std::vector<double>& x, int window = 24);

/// Largest jump in adjacent-window means / variances (slide step 1).
double max_level_shift(const std::vector<double>& x, int window = 24);
double max_var_shift(const std::vector<double>& x, int window = 24);

// --- entropy family ---

struct EntropySuite {
  double shannon = 0.0;      // differential, KDE-based; -inf when degenerate
  double approximate = 0.0;  // ApEn(m=2, r=0.2*sd)
  double sample = 0.0;       // SampEn(m=2, r=0.2*sd)
  double spectral = 0.0;     // normalized periodogram entropy in [0,1]
};

EntropySuite entropy_suite(const std::vector<double>& x);

double shannon_entropy_kde(const std::vector<double>& x);
double approx_entropy(const std::vector<double>& x, int m = 2,
                      double r_fraction = 0.2);
double sample_entropy(const std::vector<double>& x, int m = 2,
                      double r_fraction = 0.2);
double spectral_entropy(const std::vector<double>& x);

/// Normalized permutation entropy of order-pattern frequencies.
double permutation_entropy(const std::vector<double>& x, int order = 4);

// --- long-range / trend family ---

struct LongRangeSuite {
  double hurst = 0.0;          // NaN for constant input
  double trend_strength = 0.0;
  double kpss_stat = 0.0;
  double lz_complexity = 0.0;
  double stability = 0.0;
};

LongRangeSuite long_range_suite(const std::vector<double>& x);

/// Rescaled-range Hurst exponent over dyadic block sizes with the
/// Anis-Lloyd-Peters small-sample correction.
double hurst_rs(const std::vector<double>& x);

/// max(0, 1 - var(linear-detrend residuals) / var(x)).
double trend_strength(const std::vector<double>& x);

/// Coefficients of the first/second orthogonal polynomial in a quadratic
/// trend fit.
double linearity(const std::vector<double>& x);
double curvature(const std::vector<double>& x);

/// Variance of leave-one-out variances of the linear-detrend residuals.
double spikiness(const std::vector<double>& x);

/// KPSS level-stationarity statistic with Bartlett-kernel long-run variance.
double kpss_stat(const std::vector<double>& x);

/// LZ76 phrase count of the median-binarized series, normalized by
/// n / log2(n). Zero for constant input.
double lz_complexity(const std::vector<double>& x);

/// Number of median crossings.
double crossing_points(const std::vector<double>& x);

/// Longest run within one decile bin of the value range.
double flat_spots(const std::vector<double>& x);

double skewness(const std::vector<double>& x);
double excess_kurtosis(const std::vector<double>& x);

}  // namespace facedyn::ts
