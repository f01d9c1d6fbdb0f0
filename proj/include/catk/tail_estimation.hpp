#pragma once

// Empirical tail machinery: CCDFs at order statistics, quantile- or
// sigma-windowed log-log least squares fits, Hill's estimator as an
// independent cross-check, per-group standardization, and the imbalance
// proportionality regression.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "catk/errors.hpp"

namespace catk {

namespace detail {

inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) throw ZeroVariance("standard deviation needs >= 2 points");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double sample_mean(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  return mean / static_cast<double>(v.size());
}

}  // namespace detail

enum class TailSide : int { Right, Left };

/// One tail of an empirical distribution. Left tails are handled by
/// negation, so downstream analysis is always of a right tail. The CCDF
/// at the i-th order statistic (1-based, ascending) is (n - i) / n; the
/// maximum therefore carries CCDF 0 and never enters log fits.
class EmpiricalTail {
 public:
  EmpiricalTail(std::vector<double> sample, TailSide side) : side_(side), values_(std::move(sample)) {
    if (values_.empty()) throw InsufficientData("EmpiricalTail: empty sample");
    sd_ = values_.size() >= 2 ? detail::sample_sd(values_) : 0.0;
    if (side_ == TailSide::Left)
      for (double& v : values_) v = -v;
    std::sort(values_.begin(), values_.end());
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  TailSide side() const { return side_; }

  /// CCDF at the 0-based index into values(): (n - (i+1)) / n.
  double ccdf_at(std::size_t i) const {
    return static_cast<double>(values_.size() - (i + 1)) / static_cast<double>(values_.size());
  }

  /// Value whose empirical CCDF first drops to q or below.
  double quantile_at_ccdf(double q) const {
    const auto n = static_cast<double>(values_.size());
    auto idx = static_cast<long long>(std::ceil(n - 1.0 - q * n));
    idx = std::clamp<long long>(idx, 0, static_cast<long long>(values_.size()) - 1);
    return values_[static_cast<std::size_t>(idx)];
  }

  /// Standard deviation of the signed sample as constructed (pre-negation),
  /// used by sigma-threshold fit windows.
  double sample_sd() const { return sd_; }

 private:
  TailSide side_;
  std::vector<double> values_;  // ascending; negated for left tails
  double sd_ = 0.0;
};

/// Fit window between the q_start- and q_stop-CCDF quantiles of a bounding
/// sample (the tail itself when `bound` is null). For placement fits the
/// bounding side is the one limiting price formation: the buy side for
/// right tails, the sell side for left tails.
struct QuantileWindow {
  double q_start = 0.05;
  double q_stop = 0.001;
  const EmpiricalTail* bound = nullptr;
};

/// Fit window [threshold * sd, max]; with standardized merged samples this
/// is simply [threshold, max].
struct SigmaWindow {
  double threshold = 2.0;
};

using FitWindow = std::variant<QuantileWindow, SigmaWindow>;

struct TailFit {
  double exponent = 0.0;   // -slope of log10 CCDF vs log10 value
  double intercept = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::string window_kind;  // "quantile" or "sigma"
  std::size_t points = 0;
  double r_squared = 0.0;
  double residual_rms = 0.0;
};

struct LogLogFitOptions {
  bool binned = false;       // log-spaced binning to de-weight dense regions
  int bin_count = 32;
};

inline TailFit loglog_fit(const EmpiricalTail& tail, const FitWindow& window,
                          const LogLogFitOptions& options = {}) {
  double x_lo = 0.0;
  double x_hi = std::numeric_limits<double>::infinity();
  std::string kind;
  if (const auto* qw = std::get_if<QuantileWindow>(&window)) {
    if (!(qw->q_stop < qw->q_start)) throw Error("loglog_fit: q_stop must be below q_start");
    const EmpiricalTail& bound = qw->bound ? *qw->bound : tail;
    x_lo = bound.quantile_at_ccdf(qw->q_start);
    x_hi = bound.quantile_at_ccdf(qw->q_stop);
    kind = "quantile";
  } else {
    const auto& sw = std::get<SigmaWindow>(window);
    x_lo = sw.threshold * tail.sample_sd();
    kind = "sigma";
  }
  if (!(x_lo > 0.0)) throw NonPositiveValues("loglog_fit: window lower edge is not positive");
  if (!(x_hi > x_lo)) throw InsufficientTailData("loglog_fit: empty fit window");

  std::vector<double> lx, ly;
  const auto& v = tail.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = tail.ccdf_at(i);
    if (v[i] < x_lo || v[i] > x_hi || c <= 0.0) continue;
    lx.push_back(std::log10(v[i]));
    ly.push_back(std::log10(c));
  }
  if (lx.size() < 10) throw InsufficientTailData("loglog_fit: fewer than 10 points in the window");

  if (options.binned) {
    const double lo = lx.front();
    const double hi = lx.back();
    const double width = (hi - lo) / options.bin_count;
    std::vector<double> bx, by;
    if (width > 0.0) {
      std::vector<double> sx(options.bin_count, 0.0), sy(options.bin_count, 0.0);
      std::vector<int> cnt(options.bin_count, 0);
      for (std::size_t i = 0; i < lx.size(); ++i) {
        int b = std::min(options.bin_count - 1, static_cast<int>((lx[i] - lo) / width));
        sx[b] += lx[i];
        sy[b] += ly[i];
        ++cnt[b];
      }
      for (int b = 0; b < options.bin_count; ++b) {
        if (cnt[b] == 0) continue;
        bx.push_back(sx[b] / cnt[b]);
        by.push_back(sy[b] / cnt[b]);
      }
    }
    if (bx.size() >= 3) {
      lx = std::move(bx);
      ly = std::move(by);
    }
  }

  const auto n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientTailData("loglog_fit: degenerate abscissa");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    rss += r * r;
  }

  TailFit fit;
  fit.exponent = -slope;
  fit.intercept = intercept;
  fit.window_lo = x_lo;
  fit.window_hi = std::isfinite(x_hi) ? x_hi : tail.values().back();
  fit.window_kind = kind;
  fit.points = lx.size();
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  fit.residual_rms = std::sqrt(rss / n);
  return fit;
}

/// Hill's estimator over the top k order statistics: the reciprocal of the
/// mean log-spacing relative to x_(n-k). Returns +infinity when the top-k
/// block is constant.
inline double hill_estimate(const EmpiricalTail& tail, std::size_t k) {
  const auto& v = tail.values();
  const std::size_t n = v.size();
  if (k < 2 || k >= n) throw std::domain_error("hill_estimate: need 2 <= k < n");
  const double pivot = v[n - 1 - k];
  if (!(pivot > 0.0)) throw NonPositiveValues("hill_estimate: pivot order statistic is not positive");
  double mean = 0.0;
  for (std::size_t i = 1; i <= k; ++i) mean += std::log(v[n - i] / pivot);
  mean /= static_cast<double>(k);
  if (mean == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / mean;
}

/// Divide each group by its own sample standard deviation (the mean is not
/// subtracted unless `demean` is set) and concatenate.
inline std::vector<double> standardize_and_merge(const std::vector<std::vector<double>>& groups,
                                                 bool demean = false) {
  std::vector<double> merged;
  for (const auto& g : groups) {
    if (g.size() < 2) throw ZeroVariance("standardize_and_merge: group needs >= 2 points");
    const double sd = detail::sample_sd(g);
    if (!(sd > 0.0)) throw ZeroVariance("standardize_and_merge: constant group");
    const double shift = demean ? detail::sample_mean(g) : 0.0;
    for (double x : g) merged.push_back((x - shift) / sd);
  }
  return merged;
}

struct ImbalanceRegression {
  double c_hat = 0.0;
  double intercept = 0.0;
  std::size_t points_used = 0;
  std::size_t points_removed = 0;
};

/// OLS of Delta on (N_A - N_B) after removing points where either
/// coordinate lies more than four sample standard deviations from its mean.
inline ImbalanceRegression estimate_c(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw InsufficientData("estimate_c: need at least 2 points");
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (const auto& [x, y] : points) {
    xs.push_back(x);
    ys.push_back(y);
  }
  const double mx = detail::sample_mean(xs);
  const double my = detail::sample_mean(ys);
  const double sx = detail::sample_sd(xs);
  const double sy = detail::sample_sd(ys);

  std::vector<std::pair<double, double>> kept;
  kept.reserve(points.size());
  for (const auto& [x, y] : points) {
    const bool out_x = sx > 0.0 && std::abs(x - mx) > 4.0 * sx;
    const bool out_y = sy > 0.0 && std::abs(y - my) > 4.0 * sy;
    if (!out_x && !out_y) kept.emplace_back(x, y);
  }
  if (kept.size() < 10) throw InsufficientData("estimate_c: fewer than 10 points after outlier removal");

  double kmx = 0.0, kmy = 0.0;
  for (const auto& [x, y] : kept) {
    kmx += x;
    kmy += y;
  }
  kmx /= static_cast<double>(kept.size());
  kmy /= static_cast<double>(kept.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : kept) {
    sxx += (x - kmx) * (x - kmx);
    sxy += (x - kmx) * (y - kmy);
  }
  if (!(sxx > 0.0)) throw InsufficientData("estimate_c: no variation in the imbalance");

  ImbalanceRegression reg;
  reg.c_hat = sxy / sxx;
  reg.intercept = kmy - reg.c_hat * kmx;
  reg.points_used = kept.size();
  reg.points_removed = points.size() - kept.size();
  return reg;
}

}  // namespace catk
