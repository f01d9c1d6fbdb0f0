#pragma once

// Deterministic mechanics of a single call auction: supply/demand step
// curves, the interval of volume-maximizing clearing prices, and the
// closest-to-reference price selection used by Euronext-style closing
// auctions (Rule 4401/3: among admissible prices, the one closest to the
// reference is taken).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "catk/errors.hpp"

namespace catk {

enum class Side : std::uint8_t { Buy, Sell };

/// One limit order. Prices are on whatever axis the book uses (log-return
/// relative to the reference price, or integer tick offsets in gridded
/// mode). Sizes are share counts; the stochastic model uses unit sizes.
struct LimitOrder {
  Side side = Side::Buy;
  double price = 0.0;
  double size = 1.0;
};

/// All orders of one auction. Market orders never carry a price; they act
/// on clearing only through the imbalance delta() = M_B - M_A, since
/// matched market volume executes against itself.
struct OrderBookSnapshot {
  std::vector<LimitOrder> sell_orders;
  std::vector<LimitOrder> buy_orders;
  double market_sell_volume = 0.0;  // M_A
  double market_buy_volume = 0.0;   // M_B
  double reference_price = 1.0;     // x_0, in price units (pipeline metadata)
  std::optional<double> tick_size;  // absent = continuous price axis

  double delta() const { return market_buy_volume - market_sell_volume; }
  double total_sell_volume() const {
    double s = 0.0;
    for (const auto& o : sell_orders) s += o.size;
    return s;
  }
  double total_buy_volume() const {
    double s = 0.0;
    for (const auto& o : buy_orders) s += o.size;
    return s;
  }
};

enum class CurveDirection : std::uint8_t { Increasing, Decreasing };

/// Right-continuous step function given by its jump locations. The value
/// below the first breakpoint is base_value(); at and after breakpoint i
/// (until the next one) it is breakpoints()[i].second.
class StepCurve {
 public:
  StepCurve(CurveDirection direction, double base_value,
            std::vector<std::pair<double, double>> breakpoints)
      : direction_(direction), base_(base_value), breakpoints_(std::move(breakpoints)) {
    double prev_price = -std::numeric_limits<double>::infinity();
    double prev_value = base_;
    for (const auto& [price, value] : breakpoints_) {
      if (!(price > prev_price)) throw Error("StepCurve: breakpoint prices must be strictly increasing");
      const bool ok = direction_ == CurveDirection::Increasing ? value >= prev_value : value <= prev_value;
      if (!ok) throw Error("StepCurve: values must be monotone in the stated direction");
      prev_price = price;
      prev_value = value;
    }
  }

  double operator()(double x) const {
    // greatest breakpoint with price <= x
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x,
                               [](double v, const auto& bp) { return v < bp.first; });
    if (it == breakpoints_.begin()) return base_;
    return std::prev(it)->second;
  }

  CurveDirection direction() const { return direction_; }
  double base_value() const { return base_; }
  const std::vector<std::pair<double, double>>& breakpoints() const { return breakpoints_; }

 private:
  CurveDirection direction_;
  double base_;
  std::vector<std::pair<double, double>> breakpoints_;
};

/// Half-open interval [lower, upper) of volume-maximizing prices. When
/// lower == upper the crossing is unique and the clearing price is lower.
struct ClearingInterval {
  double lower = 0.0;
  double upper = 0.0;

  bool degenerate() const { return lower == upper; }
};

struct ClearingOutcome {
  ClearingInterval interval;
  double closing_price = 0.0;
  double executed_volume = 0.0;
  double remaining_imbalance = 0.0;  // (D_B + M_B) - (D_A + M_A) at the closing price
};

namespace detail {

// (price, size) levels aggregated per side, ascending by price.
inline std::vector<std::pair<double, double>> aggregate_levels(const std::vector<LimitOrder>& orders,
                                                               Side expected) {
  std::map<double, double> levels;
  for (const auto& o : orders) {
    if (o.side != expected) throw Error("order book side mismatch");
    if (!(o.size > 0.0)) throw Error("order size must be positive");
    if (!std::isfinite(o.price)) throw Error("order price must be finite");
    levels[o.price] += o.size;
  }
  return {levels.begin(), levels.end()};
}

// Cumulative sell volume at price <= x, evaluated on aggregated levels.
inline double supply_at(const std::vector<std::pair<double, double>>& sells, double x) {
  double s = 0.0;
  for (const auto& [p, v] : sells) {
    if (p > x) break;
    s += v;
  }
  return s;
}

// Cumulative buy volume at price > x.
inline double demand_at(const std::vector<std::pair<double, double>>& buys, double x) {
  double s = 0.0;
  for (auto it = buys.rbegin(); it != buys.rend(); ++it) {
    if (it->first <= x) break;
    s += it->second;
  }
  return s;
}

}  // namespace detail

/// Build the supply curve (cumulative sell volume priced <= x) and the
/// demand curve (cumulative buy volume priced > x). Both are
/// right-continuous; empty sides give identically-zero curves.
inline std::pair<StepCurve, StepCurve> build_curves(const OrderBookSnapshot& book) {
  const auto sells = detail::aggregate_levels(book.sell_orders, Side::Sell);
  const auto buys = detail::aggregate_levels(book.buy_orders, Side::Buy);

  std::vector<std::pair<double, double>> supply_bp;
  supply_bp.reserve(sells.size());
  double cum = 0.0;
  for (const auto& [p, v] : sells) {
    cum += v;
    supply_bp.emplace_back(p, cum);
  }

  double total_buy = 0.0;
  for (const auto& [p, v] : buys) total_buy += v;
  std::vector<std::pair<double, double>> demand_bp;
  demand_bp.reserve(buys.size());
  double below = 0.0;
  for (const auto& [p, v] : buys) {
    below += v;
    demand_bp.emplace_back(p, total_buy - below);
  }

  return {StepCurve(CurveDirection::Increasing, 0.0, std::move(supply_bp)),
          StepCurve(CurveDirection::Decreasing, total_buy, std::move(demand_bp))};
}

/// Clearing interval, or nullopt when no finite crossing exists. The
/// excess-supply function g(x) = D_A(x) - D_B(x) - delta is right-continuous
/// and non-decreasing; lower is the first price with g >= 0 and upper the
/// first with g > 0. A finite solution needs -total_buy < delta < total_sell.
inline std::optional<ClearingInterval> try_clearing_interval(const OrderBookSnapshot& book) {
  const auto sells = detail::aggregate_levels(book.sell_orders, Side::Sell);
  const auto buys = detail::aggregate_levels(book.buy_orders, Side::Buy);
  if (book.market_sell_volume < 0.0 || book.market_buy_volume < 0.0)
    throw Error("market order volumes must be non-negative");

  const double delta = book.delta();
  double total_sell = 0.0, total_buy = 0.0;
  for (const auto& [p, v] : sells) total_sell += v;
  for (const auto& [p, v] : buys) total_buy += v;
  if (!(delta < total_sell) || !(delta > -total_buy)) return std::nullopt;

  // Merge breakpoints; g is constant between consecutive ones.
  std::vector<double> grid;
  grid.reserve(sells.size() + buys.size());
  for (const auto& [p, v] : sells) grid.push_back(p);
  for (const auto& [p, v] : buys) grid.push_back(p);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double supply = 0.0;
  std::size_t si = 0;
  std::size_t bi = 0;
  double demand_above = total_buy;
  for (double p : grid) {
    while (si < sells.size() && sells[si].first <= p) supply += sells[si++].second;
    while (bi < buys.size() && buys[bi].first <= p) demand_above -= buys[bi++].second;
    const double g = supply - demand_above - delta;
    if (std::isnan(lower) && g >= 0.0) lower = p;
    if (g > 0.0) {
      upper = p;
      break;
    }
  }
  if (std::isnan(lower) || std::isnan(upper)) return std::nullopt;  // not reachable when admissible
  return ClearingInterval{lower, upper};
}

inline ClearingInterval clearing_interval(const OrderBookSnapshot& book) {
  auto iv = try_clearing_interval(book);
  if (!iv) throw FailedAuction("no finite clearing price: imbalance outside (-total_buy, total_sell)");
  return *iv;
}

namespace detail {

// Smallest integer k with k*tick >= x, robust at exact grid boundaries.
inline long long grid_ceil(double x, double tick) {
  long long k = static_cast<long long>(std::ceil(x / tick));
  while (static_cast<double>(k - 1) * tick >= x) --k;
  while (static_cast<double>(k) * tick < x) ++k;
  return k;
}

// Largest integer k with k*tick < x.
inline long long grid_floor_strict(double x, double tick) {
  long long k = static_cast<long long>(std::floor(x / tick));
  while (static_cast<double>(k) * tick >= x) --k;
  while (static_cast<double>(k + 1) * tick < x) ++k;
  return k;
}

}  // namespace detail

/// Price actually traded, given the interval and a reference price.
///
/// Gridded mode (tick_size set): among grid prices p = k*tick with
/// lower <= p < upper -- plus lower itself when the interval is degenerate
/// or contains no grid point -- return the one closest to the reference;
/// equidistant candidates resolve to the lower price. Continuous mode:
/// the reference clamped into the interval (degenerate intervals return
/// lower; references at or above upper return upper, the supremum of
/// admissible prices).
inline double closing_price(const ClearingInterval& interval, double reference,
                            std::optional<double> tick_size = std::nullopt) {
  if (!(interval.lower <= interval.upper)) throw Error("invalid clearing interval");
  if (!tick_size) {
    return std::min(std::max(reference, interval.lower), interval.upper);
  }
  const double tick = *tick_size;
  if (!(tick > 0.0)) throw Error("tick size must be positive");
  if (interval.degenerate()) return interval.lower;
  const long long k_lo = detail::grid_ceil(interval.lower, tick);
  const long long k_hi = detail::grid_floor_strict(interval.upper, tick);
  if (k_lo > k_hi) return interval.lower;  // no grid point inside
  // Closest grid index to the reference, ties resolved downward.
  const double q = reference / tick;
  long long k = static_cast<long long>(std::ceil(q - 0.5));
  while (static_cast<double>(k) - q > 0.5) --k;
  while (q - static_cast<double>(k) > 0.5) ++k;
  k = std::clamp(k, k_lo, k_hi);
  return static_cast<double>(k) * tick;
}

/// Full clearing of a book: interval, traded price against `reference`
/// (same axis as the order prices), executed volume and the signed
/// leftover imbalance at that price.
inline ClearingOutcome clear_auction(const OrderBookSnapshot& book, double reference = 0.0) {
  const ClearingInterval iv = clearing_interval(book);
  const double price = closing_price(iv, reference, book.tick_size);
  const auto sells = detail::aggregate_levels(book.sell_orders, Side::Sell);
  const auto buys = detail::aggregate_levels(book.buy_orders, Side::Buy);
  const double supply = detail::supply_at(sells, price) + book.market_sell_volume;
  const double demand = detail::demand_at(buys, price) + book.market_buy_volume;
  return ClearingOutcome{iv, price, std::min(supply, demand), demand - supply};
}

/// Clearing price of the book with all market orders removed (only limit
/// orders participate). Throws FailedAuction when the limit-only book has
/// no finite crossing.
inline double alternative_closing_price(const OrderBookSnapshot& book, double reference = 0.0) {
  OrderBookSnapshot limit_only = book;
  limit_only.market_sell_volume = 0.0;
  limit_only.market_buy_volume = 0.0;
  return closing_price(clearing_interval(limit_only), reference, book.tick_size);
}

}  // namespace catk
