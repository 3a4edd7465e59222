#include "facedyn/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace facedyn::ts {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

bool is_constant(const std::vector<double>& x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *lo == *hi;
}

double silverman_bandwidth(const std::vector<double>& x) {
  const double s = sd(x);
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(s, iqr / 1.34);
  if (spread <= 0.0) spread = s;
  return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

std::vector<double> standardized(const std::vector<double>& x) {
  const double m = mean(x);
  const double s = sd(x);
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = s > 0.0 ? (x[i] - m) / s : 0.0;
  }
  return z;
}

/// Per-window statistics of non-overlapping tiles; remainder frames dropped.
std::vector<double> tiled_stat(const std::vector<double>& z, int window,
                               bool use_variance) {
  const std::size_t tiles = z.size() / static_cast<std::size_t>(window);
  std::vector<double> out;
  out.reserve(tiles);
  for (std::size_t t = 0; t < tiles; ++t) {
    std::vector<double> tile(z.begin() + t * window,
                             z.begin() + (t + 1) * window);
    out.push_back(use_variance ? variance(tile) : mean(tile));
  }
  return out;
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};

LinearFit fit_linear(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double t_mean = (n - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0;
  const double x_mean = mean(x);
  for (std::size_t t = 0; t < x.size(); ++t) {
    sxy += (t - t_mean) * (x[t] - x_mean);
    sxx += (t - t_mean) * (t - t_mean);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = x_mean - f.slope * t_mean;
  return f;
}

std::vector<double> linear_residuals(const std::vector<double>& x) {
  const auto f = fit_linear(x);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    r[t] = x[t] - (f.intercept + f.slope * t);
  }
  return r;
}

/// Orthogonal polynomial regressors of degree 1 and 2 over t = 0..n-1,
/// normalized to unit length (same construction as poly()).
void orthogonal_poly(std::size_t n, std::vector<double>& p1,
                     std::vector<double>& p2) {
  p1.resize(n);
  p2.resize(n);
  const double t_mean = (n - 1.0) / 2.0;
  double norm1 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    p1[t] = t - t_mean;
    norm1 += p1[t] * p1[t];
  }
  norm1 = std::sqrt(norm1);
  for (auto& v : p1) v /= norm1;

  double dot = 0.0, sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    p2[t] = (t - t_mean) * (t - t_mean);
    sum += p2[t];
  }
  for (auto& v : p2) v -= sum / n;
  for (std::size_t t = 0; t < n; ++t) dot += p2[t] * p1[t];
  double norm2 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    p2[t] -= dot * p1[t];
    norm2 += p2[t] * p2[t];
  }
  norm2 = std::sqrt(norm2);
  if (norm2 > 0.0) {
    for (auto& v : p2) v /= norm2;
  }
}

}  // namespace

double mean(const std::vector<double>& x) {
  if (x.empty()) return kNan;
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sd(const std::vector<double>& x) { return std::sqrt(variance(x)); }

double median(std::vector<double> x) {
  if (x.empty()) return kNan;
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + mid, x.end());
  if (x.size() % 2 == 1) return x[mid];
  const double hi = x[mid];
  std::nth_element(x.begin(), x.begin() + mid - 1, x.end());
  return 0.5 * (x[mid - 1] + hi);
}

std::vector<double> difference(const std::vector<double>& x, int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("difference: order must be 1 or 2");
  }
  if (x.size() <= static_cast<std::size_t>(order)) {
    throw std::invalid_argument("difference: series too short for order " +
                                std::to_string(order));
  }
  std::vector<double> d(x.size() - 1);
  for (std::size_t t = 0; t + 1 < x.size(); ++t) d[t] = x[t + 1] - x[t];
  if (order == 1) return d;
  return difference(d, 1);
}

std::vector<double> acf(const std::vector<double>& x, int max_lag) {
  if (max_lag < 1 || static_cast<std::size_t>(max_lag) >= x.size()) {
    throw std::invalid_argument("acf: max_lag out of range");
  }
  std::vector<double> r(max_lag);
  if (is_constant(x)) {
    std::fill(r.begin(), r.end(), kNan);
    return r;
  }
  const double m = mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  if (denom <= 0.0) {
    std::fill(r.begin(), r.end(), kNan);
    return r;
  }
  for (int k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < x.size(); ++t) {
      num += (x[t] - m) * (x[t + k] - m);
    }
    r[k - 1] = num / denom;
  }
  return r;
}

double acf1(const std::vector<double>& x) {
  if (x.size() < 2) return kNan;
  return acf(x, 1)[0];
}

double acf10(const std::vector<double>& x) {
  const int max_lag = std::min<int>(10, static_cast<int>(x.size()) - 1);
  if (max_lag < 1) return kNan;
  const auto r = acf(x, max_lag);
  double sum = 0.0;
  for (double v : r) sum += v * v;
  return sum;
}

std::vector<double> pacf(const std::vector<double>& x, int max_lag) {
  const auto r = acf(x, max_lag);
  std::vector<double> phi_kk(max_lag, kNan);
  if (!std::isfinite(r[0])) return phi_kk;

  // Durbin-Levinson recursion
  std::vector<double> phi_prev(max_lag + 1, 0.0), phi_cur(max_lag + 1, 0.0);
  double variance_k = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double num = r[k - 1];
    for (int j = 1; j < k; ++j) num -= phi_prev[j] * r[k - 1 - j];
    const double reflect = variance_k > 0.0 ? num / variance_k : 0.0;
    phi_cur[k] = reflect;
    for (int j = 1; j < k; ++j) {
      phi_cur[j] = phi_prev[j] - reflect * phi_prev[k - j];
    }
    variance_k *= (1.0 - reflect * reflect);
    phi_kk[k - 1] = reflect;
    phi_prev = phi_cur;
  }
  return phi_kk;
}

double pacf5(const std::vector<double>& x) {
  const int max_lag = std::min<int>(5, static_cast<int>(x.size()) - 1);
  if (max_lag < 1) return kNan;
  const auto phi = pacf(x, max_lag);
  double sum = 0.0;
  for (double v : phi) {
    if (!std::isfinite(v)) return kNan;
    sum += v * v;
  }
  return sum;
}

double lumpiness(const std::vector<double>& x, int window) {
  if (window < 1 || x.size() < 2 * static_cast<std::size_t>(window)) {
    throw std::invalid_argument("lumpiness: series shorter than two windows");
  }
  if (is_constant(x)) return 0.0;
  return variance(tiled_stat(standardized(x), window, /*use_variance=*/true));
}

double stability(const std::vector<double>& x, int window) {
  if (window < 1 || x.size() < 2 * static_cast<std::size_t>(window)) {
    throw std::invalid_argument("stability: series shorter than two windows");
  }
  if (is_constant(x)) return 0.0;
  return variance(tiled_stat(standardized(x), window, /*use_variance=*/false));
}

KlShift max_kl_shift(const std::vector<double>& x, int window) {
  const std::size_t w = static_cast<std::size_t>(window);
  if (window < 2 || x.size() < 2 * w) {
    throw std::invalid_argument("max_kl_shift: series shorter than two windows");
  }
  KlShift result;
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *min_it, hi = *max_it;
  if (hi <= lo) return result;  // constant: identical distributions

  constexpr int kGrid = 100;
  constexpr double kFloor = 1e-12;
  double bandwidth = silverman_bandwidth(x);
  if (!(bandwidth > 0.0)) bandwidth = (hi - lo) * 1e-8;

  // kernel table: contribution of each sample to each grid point
  std::vector<double> grid(kGrid);
  for (int g = 0; g < kGrid; ++g) {
    grid[g] = lo + (hi - lo) * g / (kGrid - 1);
  }
  std::vector<std::vector<double>> kernel(x.size(),
                                          std::vector<double>(kGrid));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int g = 0; g < kGrid; ++g) {
      const double u = (x[i] - grid[g]) / bandwidth;
      kernel[i][g] = std::exp(-0.5 * u * u);
    }
  }

  std::vector<double> dens_p(kGrid, 0.0), dens_q(kGrid, 0.0);
  for (std::size_t i = 0; i < w; ++i) {
    for (int g = 0; g < kGrid; ++g) {
      dens_p[g] += kernel[i][g];
      dens_q[g] += kernel[i + w][g];
    }
  }

  const auto kl = [&]() {
    double sum_p = 0.0, sum_q = 0.0;
    for (int g = 0; g < kGrid; ++g) {
      sum_p += dens_p[g];
      sum_q += dens_q[g];
    }
    double div = 0.0;
    for (int g = 0; g < kGrid; ++g) {
      const double p = std::max(dens_p[g] / sum_p, kFloor);
      const double q = std::max(dens_q[g] / sum_q, kFloor);
      div += p * std::log(p / q);
    }
    return div;
  };

  result.max_kl = kl();
  result.argmax_time = w;
  for (std::size_t t = 1; t + 2 * w <= x.size(); ++t) {
    for (int g = 0; g < kGrid; ++g) {
      dens_p[g] += kernel[t + w - 1][g] - kernel[t - 1][g];
      dens_q[g] += kernel[t + 2 * w - 1][g] - kernel[t + w - 1][g];
    }
    const double div = kl();
    if (div > result.max_kl) {
      result.max_kl = div;
      result.argmax_time = t + w;
    }
  }
  result.max_kl = std::max(0.0, result.max_kl);
  return result;
}

namespace {

double max_window_shift(const std::vector<double>& x, int window,
                        bool use_variance) {
  const std::size_t w = static_cast<std::size_t>(window);
  if (window < 2 || x.size() < 2 * w) {
    throw std::invalid_argument("window shift: series shorter than two windows");
  }
  double best = 0.0;
  for (std::size_t t = 0; t + 2 * w <= x.size(); ++t) {
    std::vector<double> a(x.begin() + t, x.begin() + t + w);
    std::vector<double> b(x.begin() + t + w, x.begin() + t + 2 * w);
    const double shift = use_variance ? std::fabs(variance(b) - variance(a))
                                      : std::fabs(mean(b) - mean(a));
    best = std::max(best, shift);
  }
  return best;
}

}  // namespace

double max_level_shift(const std::vector<double>& x, int window) {
  return max_window_shift(x, window, false);
}

double max_var_shift(const std::vector<double>& x, int window) {
  return max_window_shift(x, window, true);
}

double shannon_entropy_kde(const std::vector<double>& x) {
  if (x.size() < 2 || is_constant(x)) return kNegInf;
  const double h = silverman_bandwidth(x);
  if (!(h > 0.0)) return kNegInf;
  const double n = static_cast<double>(x.size());
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * kPi));
  double entropy = 0.0;
  for (double xi : x) {
    double density = 0.0;
    for (double xj : x) {
      const double u = (xi - xj) / h;
      density += std::exp(-0.5 * u * u);
    }
    density *= norm;
    entropy -= std::log(density);
  }
  return entropy / n;
}

namespace {

/// Fraction of template pairs of length m within tolerance r (Chebyshev
/// metric). self=true keeps self-matches (ApEn); false drops them (SampEn).
double template_count(const std::vector<double>& x, int m, double r,
                      bool include_self, bool log_average) {
  const long n = static_cast<long>(x.size());
  const long count = n - m + 1;
  if (count <= 0) return kNan;
  double acc = 0.0;
  long pair_count = 0;
  for (long i = 0; i < count; ++i) {
    long matches = 0;
    for (long j = 0; j < count; ++j) {
      if (!include_self && j == i) continue;
      bool ok = true;
      for (int k = 0; k < m; ++k) {
        if (std::fabs(x[i + k] - x[j + k]) > r) {
          ok = false;
          break;
        }
      }
      matches += ok ? 1 : 0;
    }
    if (log_average) {
      // ApEn: average of log(C_i), C_i includes the self-match so > 0
      acc += std::log(static_cast<double>(matches) / count);
    } else {
      acc += matches;
      pair_count += count - 1;
    }
  }
  if (log_average) return acc / count;
  return pair_count > 0 ? acc / static_cast<double>(pair_count) : kNan;
}

}  // namespace

double approx_entropy(const std::vector<double>& x, int m, double r_fraction) {
  if (x.size() < static_cast<std::size_t>(m + 2)) return kNan;
  const double r = r_fraction * sd(x);
  const double phi_m = template_count(x, m, r, true, true);
  const double phi_m1 = template_count(x, m + 1, r, true, true);
  return phi_m - phi_m1;
}

double sample_entropy(const std::vector<double>& x, int m, double r_fraction) {
  if (x.size() < static_cast<std::size_t>(m + 2)) return kNan;
  const double r = r_fraction * sd(x);
  const double b = template_count(x, m, r, false, false);
  const double a = template_count(x, m + 1, r, false, false);
  if (!(b > 0.0) || !(a > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return -std::log(a / b);
}

double spectral_entropy(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 16) return kNan;
  if (is_constant(x)) return kNan;

  // Welch estimate: averaging segment periodograms tames the chi-squared
  // scatter of raw ordinates, so a flat spectrum actually scores near 1.
  std::size_t segments = n >= 512 ? 8 : (n >= 128 ? 4 : 1);
  const std::size_t seg_len = n / segments;
  const std::size_t n_freq = seg_len / 2;
  const double m = mean(x);

  std::vector<double> power(n_freq, 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t offset = s * seg_len;
    for (std::size_t k = 1; k <= n_freq; ++k) {
      double re = 0.0, im = 0.0;
      const double w = 2.0 * kPi * static_cast<double>(k) / seg_len;
      for (std::size_t t = 0; t < seg_len; ++t) {
        const double centered = x[offset + t] - m;
        re += centered * std::cos(w * t);
        im -= centered * std::sin(w * t);
      }
      power[k - 1] += re * re + im * im;
      total += re * re + im * im;
    }
  }
  if (total <= 0.0) return kNan;
  double entropy = 0.0;
  for (double p : power) {
    const double prob = p / total;
    if (prob > 0.0) entropy -= prob * std::log(prob);
  }
  return entropy / std::log(static_cast<double>(n_freq));
}

double permutation_entropy(const std::vector<double>& x, int order) {
  const std::size_t n = x.size();
  if (order < 2 || n < static_cast<std::size_t>(order) + 1) return kNan;
  if (is_constant(x)) return kNan;

  long factorial = 1;
  for (int i = 2; i <= order; ++i) factorial *= i;
  std::vector<long> counts(factorial, 0);
  std::vector<int> rank(order);
  const std::size_t windows = n - order + 1;
  for (std::size_t t = 0; t < windows; ++t) {
    for (int i = 0; i < order; ++i) rank[i] = i;
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
      return x[t + a] < x[t + b];
    });
    // Lehmer code gives each permutation a unique index in [0, order!)
    long code = 0;
    for (int i = 0; i < order; ++i) {
      int smaller = 0;
      for (int j = i + 1; j < order; ++j) {
        if (rank[j] < rank[i]) ++smaller;
      }
      code = code * (order - i) + smaller;
    }
    counts[code] += 1;
  }
  double entropy = 0.0;
  for (long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / windows;
    entropy -= p * std::log(p);
  }
  return entropy / std::log(static_cast<double>(factorial));
}

EntropySuite entropy_suite(const std::vector<double>& x) {
  if (x.size() < 10) {
    throw std::invalid_argument("entropy_suite: series too short");
  }
  EntropySuite out;
  if (is_constant(x)) {
    out.shannon = kNegInf;
    out.approximate = 0.0;
    out.sample = 0.0;
    out.spectral = kNan;
    return out;
  }
  out.shannon = shannon_entropy_kde(x);
  out.approximate = approx_entropy(x);
  out.sample = sample_entropy(x);
  out.spectral = spectral_entropy(x);
  return out;
}

double hurst_rs(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 32 || is_constant(x)) return kNan;

  std::vector<double> log_size, log_rs_corrected;
  for (std::size_t block = 8; block <= n / 2; block *= 2) {
    const std::size_t blocks = n / block;
    double rs_sum = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto begin = x.begin() + b * block;
      std::vector<double> seg(begin, begin + block);
      const double m = mean(seg);
      double cum = 0.0, lo = 0.0, hi = 0.0, ss = 0.0;
      for (double v : seg) {
        cum += v - m;
        lo = std::min(lo, cum);
        hi = std::max(hi, cum);
        ss += (v - m) * (v - m);
      }
      const double s = std::sqrt(ss / static_cast<double>(block));
      if (s > 0.0) {
        rs_sum += (hi - lo) / s;
        ++used;
      }
    }
    if (used == 0) continue;
    const double rs = rs_sum / static_cast<double>(used);

    // Anis-Lloyd expected R/S under independence, with Peters' factor
    const double mm = static_cast<double>(block);
    double tail = 0.0;
    for (std::size_t i = 1; i < block; ++i) {
      tail += std::sqrt((mm - i) / static_cast<double>(i));
    }
    double expected;
    if (block <= 340) {
      expected = std::exp(std::lgamma((mm - 1.0) / 2.0) -
                          std::lgamma(mm / 2.0)) /
                 std::sqrt(kPi) * tail;
    } else {
      expected = tail / std::sqrt(mm * kPi / 2.0);
    }
    expected *= (mm - 0.5) / mm;

    log_size.push_back(std::log2(mm));
    log_rs_corrected.push_back(std::log2(rs) - std::log2(expected));
  }
  if (log_size.size() < 2) return kNan;
  const double mx = mean(log_size), my = mean(log_rs_corrected);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_size.size(); ++i) {
    sxy += (log_size[i] - mx) * (log_rs_corrected[i] - my);
    sxx += (log_size[i] - mx) * (log_size[i] - mx);
  }
  return 0.5 + sxy / sxx;
}

double trend_strength(const std::vector<double>& x) {
  const double total = variance(x);
  if (total <= 0.0) return 0.0;
  return std::max(0.0, 1.0 - variance(linear_residuals(x)) / total);
}

double linearity(const std::vector<double>& x) {
  if (x.size() < 3 || is_constant(x)) return 0.0;
  std::vector<double> p1, p2;
  orthogonal_poly(x.size(), p1, p2);
  double coef = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) coef += p1[t] * x[t];
  return coef;
}

double curvature(const std::vector<double>& x) {
  if (x.size() < 3 || is_constant(x)) return 0.0;
  std::vector<double> p1, p2;
  orthogonal_poly(x.size(), p1, p2);
  double coef = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) coef += p2[t] * x[t];
  return coef;
}

double spikiness(const std::vector<double>& x) {
  if (x.size() < 4 || is_constant(x)) return 0.0;
  const auto resid = linear_residuals(x);
  const double n = static_cast<double>(resid.size());
  double sum = 0.0, ss = 0.0;
  for (double r : resid) {
    sum += r;
    ss += r * r;
  }
  std::vector<double> loo_vars(resid.size());
  for (std::size_t i = 0; i < resid.size(); ++i) {
    const double s = sum - resid[i];
    const double s2 = ss - resid[i] * resid[i];
    const double m = s / (n - 1.0);
    loo_vars[i] = (s2 - (n - 1.0) * m * m) / (n - 2.0);
  }
  return variance(loo_vars);
}

double kpss_stat(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 8 || is_constant(x)) return 0.0;
  const double m = mean(x);
  std::vector<double> e(n);
  for (std::size_t t = 0; t < n; ++t) e[t] = x[t] - m;

  double s_cum = 0.0, num = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    s_cum += e[t];
    num += s_cum * s_cum;
  }
  num /= static_cast<double>(n) * n;

  const int lags = static_cast<int>(
      std::trunc(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  double lrv = 0.0;
  for (std::size_t t = 0; t < n; ++t) lrv += e[t] * e[t];
  lrv /= static_cast<double>(n);
  for (int j = 1; j <= lags; ++j) {
    double gamma_j = 0.0;
    for (std::size_t t = 0; t + j < n; ++t) gamma_j += e[t] * e[t + j];
    gamma_j /= static_cast<double>(n);
    lrv += 2.0 * (1.0 - static_cast<double>(j) / (lags + 1.0)) * gamma_j;
  }
  return lrv > 0.0 ? num / lrv : 0.0;
}

double lz_complexity(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return kNan;
  if (is_constant(x)) return 0.0;
  const double med = median(x);
  std::vector<char> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = x[i] > med ? 1 : 0;

  // LZ76 phrase counting (Kaspar-Schuster scan)
  std::size_t phrases = 1;
  std::size_t i = 0, k = 1, l = 1, k_max = 1;
  while (true) {
    if (s[i + k - 1] == s[l + k - 1]) {
      ++k;
      if (l + k > n) {
        ++phrases;
        break;
      }
    } else {
      k_max = std::max(k_max, k);
      ++i;
      if (i == l) {
        ++phrases;
        l += k_max;
        if (l + 1 > n) break;
        i = 0;
        k = 1;
        k_max = 1;
      } else {
        k = 1;
      }
    }
  }
  return static_cast<double>(phrases) * std::log2(static_cast<double>(n)) /
         static_cast<double>(n);
}

double crossing_points(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double med = median(x);
  double crossings = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const bool above_prev = x[t - 1] > med;
    const bool above_now = x[t] > med;
    if (above_prev != above_now) crossings += 1.0;
  }
  return crossings;
}

double flat_spots(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *min_it, hi = *max_it;
  if (hi <= lo) return static_cast<double>(x.size());
  const auto bin_of = [&](double v) {
    int b = static_cast<int>((v - lo) / (hi - lo) * 10.0);
    return std::min(b, 9);
  };
  std::size_t best = 1, run = 1;
  for (std::size_t t = 1; t < x.size(); ++t) {
    if (bin_of(x[t]) == bin_of(x[t - 1])) {
      ++run;
      best = std::max(best, run);
    } else {
      run = 1;
    }
  }
  return static_cast<double>(best);
}

double skewness(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 3) return kNan;
  const double m = mean(x);
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 <= 0.0) return kNan;
  return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return kNan;
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) return kNan;
  return m4 / (m2 * m2) - 3.0;
}

LongRangeSuite long_range_suite(const std::vector<double>& x) {
  if (x.size() < 64) {
    throw std::invalid_argument("long_range_suite: series too short");
  }
  LongRangeSuite out;
  if (is_constant(x)) {
    out.hurst = kNan;
    return out;  // others stay 0
  }
  out.hurst = hurst_rs(x);
  out.trend_strength = trend_strength(x);
  out.kpss_stat = kpss_stat(x);
  out.lz_complexity = lz_complexity(x);
  out.stability = stability(x);
  return out;
}

}  // namespace facedyn::ts
