#pragma once

// Exact and asymptotic distribution theory of the lower clearing price.
//
// Conditional on (N_A, N_B) sell/buy limit order counts with placement CDFs
// F_A, F_B and market order imbalance Delta, the survival function of the
// lower clearing price at threshold M is the double sum
//
//   P(X > M) = sum_{k=0..N_A} sum_{l=max(k-Delta+1,0)..N_B}
//              C(N_A,k) C(N_B,l) (1-pA)^(N_A-k) pA^k (1-pB)^l pB^(N_B-l)
//
// with pA = F_A(M), pB = F_B(M) and the 0^0 = 1 convention. Equivalently it
// is P( Bin(N_B, 1-pB) >= Bin(N_A, pA) - Delta + 1 ) with independent
// binomials, which is how the sum is organized here (suffix sums over the
// buy-side pmf; O(N_A + N_B) instead of O(N_A * N_B)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "catk/placement.hpp"

namespace catk {

namespace detail {

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Binomial pmf over 0..n, terms computed in log space; p in {0,1} handled
/// as point masses so the 0^0 = 1 convention holds at the boundary.
inline std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf[static_cast<std::size_t>(n)] = 1.0;
    return pmf;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  for (int k = 0; k <= n; ++k)
    pmf[static_cast<std::size_t>(k)] = std::exp(log_choose(n, k) + k * lp + (n - k) * lq);
  return pmf;
}

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

constexpr int kExactCountCap = 10000;  // beyond this use the asymptotics

inline void validate_counts(int n_a, int n_b) {
  if (n_a < 1 || n_b < 1) throw std::domain_error("survival: order counts must be >= 1");
  if (n_a > kExactCountCap || n_b > kExactCountCap)
    throw std::domain_error("survival: counts exceed the exact-evaluation cap");
}

inline void validate_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error(std::string("survival: ") + name + " outside [0, 1]");
}

}  // namespace detail

/// P(lower clearing price > M | N_A, N_B, Delta) given pA = F_A(M) and
/// pB = F_B(M). Non-decreasing in delta; delta may be any integer (the
/// model's theorems additionally assume delta in (-N_B, N_A)).
inline double survival_lower_delta(double p_a, double p_b, int n_a, int n_b, int delta) {
  detail::validate_probability(p_a, "pA");
  detail::validate_probability(p_b, "pB");
  detail::validate_counts(n_a, n_b);

  const auto pmf_a = detail::binomial_pmf(n_a, p_a);        // D_A(M) = sells at or below M
  const auto pmf_b = detail::binomial_pmf(n_b, 1.0 - p_b);  // D_B(M) = buys above M

  // suffix[j] = P(D_B >= j), j = 0..n_b+1
  std::vector<double> suffix(static_cast<std::size_t>(n_b) + 2, 0.0);
  detail::KahanSum tail_mass;
  for (int j = n_b; j >= 0; --j) {
    tail_mass.add(pmf_b[static_cast<std::size_t>(j)]);
    suffix[static_cast<std::size_t>(j)] = tail_mass.sum;
  }

  detail::KahanSum acc;
  for (int k = 0; k <= n_a; ++k) {
    const long long lo = std::max<long long>(static_cast<long long>(k) - delta + 1, 0);
    if (lo > n_b) continue;
    acc.add(pmf_a[static_cast<std::size_t>(k)] * suffix[static_cast<std::size_t>(lo)]);
  }
  return std::clamp(acc.sum, 0.0, 1.0);
}

/// Survival of the lower clearing price without market orders (delta = 0).
inline double survival_lower(double p_a, double p_b, int n_a, int n_b) {
  return survival_lower_delta(p_a, p_b, n_a, n_b, 0);
}

/// Leading-order conditional tail without market orders:
/// N_B * T_B(M) * T_A(M)^N_A.
inline double asymptote_conditional(double m, const PlacementModel& model_a,
                                    const PlacementModel& model_b, int n_a, int n_b) {
  if (n_a < 1 || n_b < 1) throw std::domain_error("asymptote: order counts must be >= 1");
  return n_b * model_b.tail(m) * std::pow(model_a.tail(m), n_a);
}

/// Leading-order conditional tail with market order imbalance delta. With
/// d = delta - 1 this is K * T_B(M)^max(-d,0) * T_A(M)^(N_A - max(d,0)),
/// K = C(N_A, d) for d > 0 and C(N_B, -d) otherwise.
inline double asymptote_conditional_delta(double m, const PlacementModel& model_a,
                                          const PlacementModel& model_b, int n_a, int n_b,
                                          int delta) {
  if (n_a < 1 || n_b < 1) throw std::domain_error("asymptote: order counts must be >= 1");
  if (!(delta > -n_b && delta <= n_a))
    throw std::domain_error("asymptote: delta outside (-N_B, N_A]");
  const int d = delta - 1;
  const double k = d > 0 ? detail::choose(n_a, d) : detail::choose(n_b, -d);
  const int d_plus = std::max(d, 0);
  const int d_minus = std::max(-d, 0);
  return k * std::pow(model_b.tail(m), d_minus) * std::pow(model_a.tail(m), n_a - d_plus);
}

/// Predicted tail exponents of the closing auction return distribution for
/// placement tail exponents a_A (heavier side) and a_B, and imbalance
/// proportionality constant c. Left-tail predictions follow by calling with
/// the two exponents swapped.
struct ExponentPrediction {
  double no_market_orders = 0.0;       // a_A + a_B
  double with_market_orders = 0.0;     // min((c+1) a_A / c, a_A + 2 a_B)
  bool heavier_without_market_orders = false;  // c <= a_A / a_B
};

inline ExponentPrediction predict_exponents(double a_a, double a_b, double c) {
  if (!(a_a > 0.0) || !(a_b > 0.0)) throw std::domain_error("predict_exponents: exponents must be positive");
  if (!(c > 0.0 && c <= 1.0)) throw std::domain_error("predict_exponents: c must be in (0, 1]");
  ExponentPrediction out;
  out.no_market_orders = a_a + a_b;
  out.with_market_orders = std::min(a_a * (1.0 / c + 1.0), a_a + 2.0 * a_b);
  out.heavier_without_market_orders = c <= a_a / a_b;
  return out;
}

namespace detail {

/// Round away from zero to the nearest integer not closer to zero, with a
/// snap so that proportionality products that are integers up to floating
/// point noise round to that integer.
inline long long round_away_from_zero(double x) {
  const double r = std::nearbyint(x);
  if (std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(x))) return static_cast<long long>(r);
  return static_cast<long long>(x > 0.0 ? std::ceil(x) : std::floor(x));
}

}  // namespace detail

/// Grid minimization behind the with-market-orders exponent. For every
/// counts cell (n, m) in {1..N}^2 the reachable integer imbalance is
/// d = round-away-from-zero(c (n - m)); the decay exponent of that cell's
/// slowest term, evaluated at the smallest sell count compatible with the
/// exact proportionality n = d/c + 1, is
///
///   F(d) = a_A ((1/c - 1) d + 2)   for d >= 1   (all buy-side mass erased)
///   F(d) = a_A - (d - 1) a_B       for d <= -1  (extra buy-side factors)
///
/// The minimum over the grid is the predicted exponent; it serves as an
/// independent check that the closed form picks the optimal imbalance.
inline double exponent_bruteforce(double a_a, double a_b, double c, int cap) {
  if (!(a_b > a_a && a_a > 0.0)) throw std::domain_error("exponent_bruteforce: need a_B > a_A > 0");
  if (!(c > 0.0 && c <= 1.0)) throw std::domain_error("exponent_bruteforce: c must be in (0, 1]");
  if (cap < 2) throw std::domain_error("exponent_bruteforce: N must be >= 2");
  double best = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= cap; ++n) {
    for (int m = 1; m <= cap; ++m) {
      if (n == m) continue;
      const long long d = detail::round_away_from_zero(c * (n - m));
      const double dd = static_cast<double>(d);
      const double value = d >= 1 ? a_a * ((1.0 / c - 1.0) * dd + 2.0) : a_a - (dd - 1.0) * a_b;
      best = std::min(best, value);
    }
  }
  return best;
}

}  // namespace catk
