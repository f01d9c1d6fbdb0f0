#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "catk/analytic.hpp"  // detail::round_away_from_zero
#include "catk/errors.hpp"
#include "catk/rng.hpp"

namespace catk {

struct CountsDraw {
  int sell_count = 0;  // N_A
  int buy_count = 0;   // N_B
  int imbalance = 0;   // Delta = M_B - M_A
};

/// Joint law of (N_A, N_B, Delta): a pmf over {1..N}^2 conditioned on
/// N_A != N_B, with Delta = round-away-from-zero(c (N_A - N_B)). The
/// resulting Delta is a nonzero integer in (-N_B, N_A) with the sign of
/// the limit order imbalance.
class CountsModel {
 public:
  CountsModel(int cap, std::vector<double> pmf, double c) : cap_(cap), pmf_(std::move(pmf)), c_(c) {
    if (cap_ < 1) throw std::domain_error("CountsModel: cap must be >= 1");
    if (!(c_ > 0.0 && c_ < 1.0)) throw std::domain_error("CountsModel: c must be in (0, 1)");
    if (pmf_.size() != static_cast<std::size_t>(cap_) * cap_)
      throw std::domain_error("CountsModel: pmf must have cap^2 entries");
    double total = 0.0;
    for (double p : pmf_) {
      if (!(p >= 0.0)) throw std::domain_error("CountsModel: pmf entries must be non-negative");
      total += p;
    }
    if (!(total > 0.0)) throw std::domain_error("CountsModel: pmf must have positive mass");
    cdf_.resize(pmf_.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) {
      cum += pmf_[i] / total;
      cdf_[i] = cum;
    }
    cdf_.back() = 1.0;
  }

  /// Uniform pmf over all of {1..cap}^2 (the diagonal is excluded at
  /// sampling time by resampling).
  static CountsModel uniform(int cap, double c) {
    return CountsModel(cap, std::vector<double>(static_cast<std::size_t>(cap) * cap, 1.0), c);
  }

  /// Uniform pmf over the pairs whose imbalance is exactly proportional:
  /// c (N_A - N_B) a nonzero integer. This is the support on which the
  /// with-market-orders exponent law is derived; the rounding rule is the
  /// identity on it.
  static CountsModel proportional_feasible(int cap, double c) {
    std::vector<double> pmf(static_cast<std::size_t>(cap) * cap, 0.0);
    bool any = false;
    for (int n = 1; n <= cap; ++n) {
      for (int m = 1; m <= cap; ++m) {
        if (n == m) continue;
        const double v = c * (n - m);
        if (std::abs(v - std::nearbyint(v)) < 1e-9 * std::max(1.0, std::abs(v))) {
          pmf[static_cast<std::size_t>(n - 1) * cap + (m - 1)] = 1.0;
          any = true;
        }
      }
    }
    if (!any) throw std::domain_error("CountsModel: no exactly-proportional pairs for this (cap, c)");
    return CountsModel(cap, std::move(pmf), c);
  }

  CountsDraw sample(SplitMix64& rng) const {
    for (int attempt = 0; attempt < kResampleBudget; ++attempt) {
      const double u = rng.next_unit();
      const std::size_t idx =
          std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
      const int n = static_cast<int>(idx / cap_) + 1;
      const int m = static_cast<int>(idx % cap_) + 1;
      if (n == m) continue;  // P(Delta = 0) = 0
      const int d = static_cast<int>(detail::round_away_from_zero(c_ * (n - m)));
      CountsDraw draw{n, m, d};
      if (!(d != 0 && d > -m && d < n)) throw SimulationError("CountsModel: imbalance invariant violated");
      return draw;
    }
    throw SimulationError("CountsModel: resampling budget exhausted (pmf concentrated on the diagonal)");
  }

  int cap() const { return cap_; }
  double c() const { return c_; }
  const std::vector<double>& pmf() const { return pmf_; }

 private:
  static constexpr int kResampleBudget = 100000;

  int cap_;
  std::vector<double> pmf_;
  double c_;
  std::vector<double> cdf_;
};

/// Draw (N_A, N_B, Delta) from the model.
inline CountsDraw sample_counts(const CountsModel& model, SplitMix64& rng) { return model.sample(rng); }

/// E[N_B 1{N_A = 1}] over the pmf as given (no diagonal exclusion): the
/// constant multiplying T_A(M) T_B(M) in the unconditional
/// no-market-orders tail.
inline double no_market_orders_tail_constant(const CountsModel& model) {
  const int cap = model.cap();
  double total = 0.0;
  for (double p : model.pmf()) total += p;
  double c = 0.0;
  for (int m = 1; m <= cap; ++m) c += m * model.pmf()[static_cast<std::size_t>(m - 1)];
  return c / total;
}

}  // namespace catk
