#pragma once

// Order-level ingestion and the report pipeline: reference prices from
// trades (5-minute VWAP with a last-price fallback), tick-relative order
// placement samples, per-auction clearing with and without market orders,
// per-stock tail/imbalance estimation and paper-table-style reports.
//
// File schemas (delimiter ',', mandatory header, times ISO-8601):
//   orders:   stock,date,time,type,side,price,size   (price empty for market)
//   trades:   stock,date,time,price,size
//   metadata: stock,exchange,mcap_eur_bn
//
// Currency prices are parsed as exact decimals (micros) and scaled by the
// tick size to integer tick indices before clearing, so step boundaries
// are never misclassified by floating point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "catk/analytic.hpp"
#include "catk/auction.hpp"
#include "catk/errors.hpp"
#include "catk/tail_estimation.hpp"

namespace catk {

enum class OrderType : std::uint8_t { Limit, Market };

struct RawOrderRecord {
  std::string stock;
  std::string date;
  std::int64_t time_us = 0;                // microseconds since midnight
  OrderType type = OrderType::Limit;
  Side side = Side::Buy;
  std::optional<std::int64_t> price_micro; // absent for market orders
  double size = 0.0;                       // shares
};

struct TradeRecord {
  std::string stock;
  std::string date;
  std::int64_t time_us = 0;
  std::int64_t price_micro = 0;
  double size = 0.0;
};

struct StockMeta {
  std::string stock;
  std::string exchange;
  double mcap_eur_bn = 0.0;
};

struct TimeWindow {
  std::int64_t begin_us = 0;
  std::int64_t end_us = 0;  // inclusive
};

namespace detail {

constexpr std::int64_t kMicro = 1000000;  // scale for both time-of-day and price decimals
constexpr std::int64_t kFiveMinutesUs = 5LL * 60 * kMicro;

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  return out;
}

/// Exact decimal parse to micros (6 fractional digits).
inline std::int64_t parse_micros(const std::string& s) {
  if (s.empty()) throw DataFormatError("empty decimal field");
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  std::int64_t whole = 0;
  bool any = false;
  for (; i < s.size() && s[i] != '.'; ++i) {
    if (s[i] < '0' || s[i] > '9') throw DataFormatError("bad decimal: " + s);
    whole = whole * 10 + (s[i] - '0');
    any = true;
  }
  std::int64_t frac = 0;
  int digits = 0;
  if (i < s.size() && s[i] == '.') {
    for (++i; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw DataFormatError("bad decimal: " + s);
      if (digits < 6) {
        frac = frac * 10 + (s[i] - '0');
        ++digits;
      } else if (s[i] != '0') {
        throw DataFormatError("more than 6 decimal places: " + s);
      }
      any = true;
    }
  }
  if (!any) throw DataFormatError("bad decimal: " + s);
  while (digits < 6) {
    frac *= 10;
    ++digits;
  }
  const std::int64_t v = whole * kMicro + frac;
  return neg ? -v : v;
}

/// ISO-8601 time of day (an optional leading date + 'T' is skipped).
inline std::int64_t parse_time_us(const std::string& raw) {
  std::string s = raw;
  if (auto pos = s.find('T'); pos != std::string::npos) s = s.substr(pos + 1);
  if (s.size() < 8 || s[2] != ':' || s[5] != ':') throw DataFormatError("bad time: " + raw);
  auto digits2 = [&](std::size_t at) {
    if (s[at] < '0' || s[at] > '9' || s[at + 1] < '0' || s[at + 1] > '9')
      throw DataFormatError("bad time: " + raw);
    return (s[at] - '0') * 10 + (s[at + 1] - '0');
  };
  const int hh = digits2(0);
  const int mm = digits2(3);
  const int ss = digits2(6);
  if (hh > 23 || mm > 59 || ss > 60) throw DataFormatError("bad time: " + raw);
  std::int64_t us = (static_cast<std::int64_t>(hh) * 3600 + mm * 60 + ss) * kMicro;
  if (s.size() > 8) {
    if (s[8] != '.') throw DataFormatError("bad time: " + raw);
    std::int64_t frac = 0;
    int d = 0;
    for (std::size_t i = 9; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw DataFormatError("bad time: " + raw);
      if (d < 6) {
        frac = frac * 10 + (s[i] - '0');
        ++d;
      }
    }
    while (d < 6) {
      frac *= 10;
      ++d;
    }
    us += frac;
  }
  return us;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw DataFormatError("bad number: " + s);
    return v;
  } catch (const std::invalid_argument&) {
    throw DataFormatError("bad number: " + s);
  } catch (const std::out_of_range&) {
    throw DataFormatError("number out of range: " + s);
  }
}

/// round-half-away-from-zero of diff/tick in exact integer arithmetic.
inline std::int64_t ticks_of_micros(std::int64_t diff_micro, std::int64_t tick_micro) {
  const std::int64_t n = diff_micro < 0 ? -diff_micro : diff_micro;
  const std::int64_t q = (2 * n + tick_micro) / (2 * tick_micro);
  return diff_micro < 0 ? -q : q;
}

inline void expect_header(std::istream& in, const std::string& expected, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw DataFormatError(what + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw DataFormatError(what + ": expected header '" + expected + "', got '" + line + "'");
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string format_opt(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace detail

/// Volume weighted average price over trades inside the window (inclusive).
inline double vwap_reference(const std::vector<TradeRecord>& trades, const TimeWindow& window) {
  double notional = 0.0;
  double volume = 0.0;
  for (const auto& t : trades) {
    if (t.time_us < window.begin_us || t.time_us > window.end_us) continue;
    notional += static_cast<double>(t.price_micro) / detail::kMicro * t.size;
    volume += t.size;
  }
  if (!(volume > 0.0)) throw NoTradesInWindow("vwap_reference: no trades in window");
  return notional / volume;
}

/// Tick offset of a price from the reference: round-half-away-from-zero of
/// (price - reference) / tick_size.
inline long long to_ticks(double price, double reference, double tick_size) {
  if (!(tick_size > 0.0)) throw std::domain_error("to_ticks: tick size must be positive");
  const double q = (price - reference) / tick_size;
  const double r = std::nearbyint(q);
  if (std::abs(q - r) < 1e-9 * std::max(1.0, std::abs(q))) return static_cast<long long>(r);
  const double f = q - std::floor(q);
  if (std::abs(f - 0.5) < 1e-9)
    return q > 0.0 ? static_cast<long long>(std::floor(q)) + 1 : static_cast<long long>(std::ceil(q)) - 1;
  return std::llround(q);
}

/// One auction's inputs, clearing results and placement samples.
struct AuctionAggregate {
  std::string stock;
  std::string date;
  double reference_price = 0.0;  // x_0, currency
  double tick_size = 0.0;
  double sell_limit_volume = 0.0;   // N_A, shares
  double buy_limit_volume = 0.0;    // N_B, shares
  double market_sell_volume = 0.0;  // M_A
  double market_buy_volume = 0.0;   // M_B
  double imbalance = 0.0;           // Delta = M_B - M_A
  std::optional<double> closing_price;       // currency
  std::optional<double> closing_return;      // X = log C - log x_0
  std::optional<double> alternative_price;   // market orders removed
  std::optional<double> alternative_return;  // X~
  std::optional<double> executed_volume;
  std::optional<double> remaining_imbalance;
  std::vector<long long> sell_tick_offsets;  // one entry per limit order
  std::vector<long long> buy_tick_offsets;
  std::string status = "ok";  // ok | failed_with_mo | failed_without_mo | failed_both | no_reference
};

/// Which price the closest-to-reference rule measures distance from. The
/// exchange rule speaks of the last traded price while returns are always
/// measured against the VWAP reference; both readings are offered.
enum class TieBreakReference : std::uint8_t { Vwap, LastTrade };

/// Assemble and clear one auction from its raw orders and the day's trades.
/// All orders must share one (stock, date). Clearing failures flag the row
/// instead of dropping it.
inline AuctionAggregate aggregate_auction(const std::vector<RawOrderRecord>& orders,
                                          const std::vector<TradeRecord>& trades, double tick_size,
                                          TieBreakReference tie_break = TieBreakReference::Vwap) {
  if (orders.empty()) throw InsufficientData("aggregate_auction: no orders");
  if (!(tick_size > 0.0)) throw std::domain_error("aggregate_auction: tick size must be positive");
  const std::int64_t tick_micro = std::llround(tick_size * detail::kMicro);
  if (tick_micro <= 0) throw std::domain_error("aggregate_auction: tick size below 1e-6");

  AuctionAggregate agg;
  agg.stock = orders.front().stock;
  agg.date = orders.front().date;
  agg.tick_size = tick_size;
  for (const auto& o : orders) {
    if (o.stock != agg.stock || o.date != agg.date)
      throw DataFormatError("aggregate_auction: orders span multiple (stock, date) keys");
  }

  // Reference price: 5-minute VWAP anchored at the last trade, falling back
  // to the last traded price, else the row is flagged.
  std::optional<double> x0;
  std::optional<double> last_price;
  if (!trades.empty()) {
    std::int64_t t_end = trades.front().time_us;
    const TradeRecord* last = &trades.front();
    for (const auto& t : trades) {
      if (t.time_us >= t_end) {
        t_end = t.time_us;
        last = &t;
      }
    }
    last_price = static_cast<double>(last->price_micro) / detail::kMicro;
    try {
      x0 = vwap_reference(trades, TimeWindow{t_end - detail::kFiveMinutesUs, t_end});
    } catch (const NoTradesInWindow&) {
      x0 = last_price;
    }
  }
  if (!x0 || !(*x0 > 0.0)) {
    agg.status = "no_reference";
    for (const auto& o : orders) {
      const double sz = o.size;
      if (o.type == OrderType::Market) {
        (o.side == Side::Sell ? agg.market_sell_volume : agg.market_buy_volume) += sz;
      } else {
        (o.side == Side::Sell ? agg.sell_limit_volume : agg.buy_limit_volume) += sz;
      }
    }
    agg.imbalance = agg.market_buy_volume - agg.market_sell_volume;
    return agg;
  }
  agg.reference_price = *x0;
  const double tie_break_price = tie_break == TieBreakReference::LastTrade ? *last_price : *x0;
  const double ref_ticks = tie_break_price / tick_size;

  OrderBookSnapshot book;
  book.reference_price = *x0;
  book.tick_size = 1.0;  // the book lives on the absolute tick-index axis
  for (const auto& o : orders) {
    if (!(o.size > 0.0)) throw DataFormatError("aggregate_auction: order size must be positive");
    if (o.type == OrderType::Market) {
      if (o.price_micro) throw DataFormatError("aggregate_auction: market order carries a price");
      (o.side == Side::Sell ? agg.market_sell_volume : agg.market_buy_volume) += o.size;
      (o.side == Side::Sell ? book.market_sell_volume : book.market_buy_volume) += o.size;
      continue;
    }
    if (!o.price_micro) throw DataFormatError("aggregate_auction: limit order without a price");
    const auto tick_index = static_cast<double>(detail::ticks_of_micros(*o.price_micro, tick_micro));
    const double price = static_cast<double>(*o.price_micro) / detail::kMicro;
    if (o.side == Side::Sell) {
      agg.sell_limit_volume += o.size;
      book.sell_orders.push_back({Side::Sell, tick_index, o.size});
      agg.sell_tick_offsets.push_back(to_ticks(price, *x0, tick_size));
    } else {
      agg.buy_limit_volume += o.size;
      book.buy_orders.push_back({Side::Buy, tick_index, o.size});
      agg.buy_tick_offsets.push_back(to_ticks(price, *x0, tick_size));
    }
  }
  agg.imbalance = agg.market_buy_volume - agg.market_sell_volume;

  bool with_failed = false;
  bool without_failed = false;
  try {
    const ClearingOutcome out = clear_auction(book, ref_ticks);
    const double price = out.closing_price * tick_size;
    agg.closing_price = price;
    agg.closing_return = std::log(price) - std::log(*x0);
    agg.executed_volume = out.executed_volume;
    agg.remaining_imbalance = out.remaining_imbalance;
  } catch (const FailedAuction&) {
    with_failed = true;
  }
  try {
    const double alt_ticks = alternative_closing_price(book, ref_ticks);
    const double price = alt_ticks * tick_size;
    agg.alternative_price = price;
    agg.alternative_return = std::log(price) - std::log(*x0);
  } catch (const FailedAuction&) {
    without_failed = true;
  }
  if (with_failed && without_failed)
    agg.status = "failed_both";
  else if (with_failed)
    agg.status = "failed_with_mo";
  else if (without_failed)
    agg.status = "failed_without_mo";
  return agg;
}

struct StockReportRow {
  std::string stock;
  std::string exchange;
  std::optional<double> mcap_eur_bn;
  std::optional<double> a_a_left, a_b_left;   // sell/buy placement exponents, left tails
  std::optional<double> a_a_right, a_b_right; // right tails
  std::optional<double> c_hat;
  std::optional<double> pred_left_no_mo, pred_left_mo;
  std::optional<double> pred_right_no_mo, pred_right_mo;
  std::string status = "ok";
};

struct GroupSummaryRow {
  std::string group;  // all | small_caps | large_caps
  std::optional<double> left_mo_predicted, left_mo_realized;
  std::optional<double> left_no_mo_predicted, left_no_mo_realized;
  std::optional<double> right_mo_predicted, right_mo_realized;
  std::optional<double> right_no_mo_predicted, right_no_mo_realized;
};

struct PipelineReports {
  std::vector<StockReportRow> per_stock;
  std::vector<GroupSummaryRow> groups;
  // plot name -> (log10 x, log10 CCDF) points
  std::map<std::string, std::vector<std::pair<double, double>>> plot_data;
};

namespace detail {

inline std::vector<std::pair<double, double>> loglog_points(const EmpiricalTail& tail) {
  std::vector<std::pair<double, double>> pts;
  const auto& v = tail.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = tail.ccdf_at(i);
    if (v[i] <= 0.0 || c <= 0.0) continue;
    pts.emplace_back(std::log10(v[i]), std::log10(c));
  }
  return pts;
}

struct GroupAccumulator {
  std::vector<std::vector<double>> with_mo;     // per-stock return samples
  std::vector<std::vector<double>> without_mo;
  std::vector<double> pred_l_mo, pred_l_no, pred_r_mo, pred_r_no;
};

inline std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::optional<double> realized_exponent(const std::vector<std::vector<double>>& groups,
                                               TailSide side,
                                               std::vector<std::pair<double, double>>* plot) {
  std::vector<std::vector<double>> usable;
  for (const auto& g : groups)
    if (g.size() >= 2) usable.push_back(g);
  if (usable.empty()) return std::nullopt;
  try {
    const auto merged = standardize_and_merge(usable);
    EmpiricalTail tail(merged, side);
    if (plot) *plot = loglog_points(tail);
    return loglog_fit(tail, SigmaWindow{2.0}).exponent;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Per-stock rows and market-cap group summaries from per-auction
/// aggregates. Rows with insufficient data keep their recoverable fields
/// and carry a reason code.
inline PipelineReports build_reports(const std::vector<AuctionAggregate>& aggregates,
                                     const std::vector<StockMeta>& metadata) {
  std::map<std::string, StockMeta> meta;
  for (const auto& m : metadata) meta[m.stock] = m;

  std::map<std::string, std::vector<const AuctionAggregate*>> by_stock;
  for (const auto& a : aggregates) by_stock[a.stock].push_back(&a);

  PipelineReports reports;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> stock_returns;  // X, X~
  std::map<std::string, StockReportRow*> row_of;

  for (const auto& [stock, rows] : by_stock) {
    StockReportRow row;
    row.stock = stock;
    if (auto it = meta.find(stock); it != meta.end()) {
      row.exchange = it->second.exchange;
      row.mcap_eur_bn = it->second.mcap_eur_bn;
    } else {
      row.status = "no_metadata";
    }

    std::vector<double> sell_offsets, buy_offsets;
    std::vector<std::pair<double, double>> c_points;
    auto& [with_mo_returns, without_mo_returns] = stock_returns[stock];
    for (const auto* a : rows) {
      for (long long t : a->sell_tick_offsets) sell_offsets.push_back(static_cast<double>(t));
      for (long long t : a->buy_tick_offsets) buy_offsets.push_back(static_cast<double>(t));
      c_points.emplace_back(a->sell_limit_volume - a->buy_limit_volume, a->imbalance);
      if (a->closing_return) with_mo_returns.push_back(*a->closing_return);
      if (a->alternative_return) without_mo_returns.push_back(*a->alternative_return);
    }

    std::string reason;
    if (!sell_offsets.empty() && !buy_offsets.empty()) {
      EmpiricalTail sell_right(sell_offsets, TailSide::Right);
      EmpiricalTail buy_right(buy_offsets, TailSide::Right);
      EmpiricalTail sell_left(sell_offsets, TailSide::Left);
      EmpiricalTail buy_left(buy_offsets, TailSide::Left);
      // Right tails: the buy side bounds price formation, so its quantiles
      // set the window; left tails mirror with the sell side as the bound.
      try {
        row.a_a_right = loglog_fit(sell_right, QuantileWindow{0.05, 0.001, &buy_right}).exponent;
        row.a_b_right = loglog_fit(buy_right, QuantileWindow{0.05, 0.001, &buy_right}).exponent;
      } catch (const Error&) {
        reason = "insufficient_right_tail";
      }
      try {
        row.a_a_left = loglog_fit(sell_left, QuantileWindow{0.05, 0.001, &sell_left}).exponent;
        row.a_b_left = loglog_fit(buy_left, QuantileWindow{0.05, 0.001, &sell_left}).exponent;
      } catch (const Error&) {
        reason = reason.empty() ? "insufficient_left_tail" : "insufficient_both_tails";
      }
      reports.plot_data["placement_" + stock + "_sell_right"] = detail::loglog_points(sell_right);
      reports.plot_data["placement_" + stock + "_buy_right"] = detail::loglog_points(buy_right);
      reports.plot_data["placement_" + stock + "_sell_left"] = detail::loglog_points(sell_left);
      reports.plot_data["placement_" + stock + "_buy_left"] = detail::loglog_points(buy_left);
    } else {
      reason = "no_placement_data";
    }

    try {
      row.c_hat = estimate_c(c_points).c_hat;
    } catch (const Error&) {
      reason = reason.empty() ? "insufficient_imbalance_data" : reason;
    }

    if (row.a_a_right && row.a_b_right && row.a_a_left && row.a_b_left && row.c_hat) {
      if (*row.c_hat > 0.0 && *row.c_hat <= 1.0 && *row.a_a_right > 0.0 && *row.a_b_right > 0.0 &&
          *row.a_a_left > 0.0 && *row.a_b_left > 0.0) {
        const auto right = predict_exponents(*row.a_a_right, *row.a_b_right, *row.c_hat);
        row.pred_right_no_mo = right.no_market_orders;
        row.pred_right_mo = right.with_market_orders;
        // Left tails swap the placement roles: the buy side is the heavy one.
        const auto left = predict_exponents(*row.a_b_left, *row.a_a_left, *row.c_hat);
        row.pred_left_no_mo = left.no_market_orders;
        row.pred_left_mo = left.with_market_orders;
      } else {
        reason = reason.empty() ? "estimates_out_of_range" : reason;
      }
    }
    if (!reason.empty() && row.status == "ok") row.status = reason;
    reports.per_stock.push_back(std::move(row));
  }
  for (auto& row : reports.per_stock) row_of[row.stock] = &row;

  // Market-cap halves: ascending by (mcap, name); lower half gets the
  // extra stock when the count is odd.
  std::vector<const StockReportRow*> with_mcap;
  for (const auto& row : reports.per_stock)
    if (row.mcap_eur_bn) with_mcap.push_back(&row);
  std::sort(with_mcap.begin(), with_mcap.end(), [](const StockReportRow* a, const StockReportRow* b) {
    return std::tie(*a->mcap_eur_bn, a->stock) < std::tie(*b->mcap_eur_bn, b->stock);
  });
  const std::size_t small_count = (with_mcap.size() + 1) / 2;

  auto group_members = [&](const std::string& name) {
    std::vector<std::string> members;
    if (name == "all") {
      for (const auto& row : reports.per_stock) members.push_back(row.stock);
    } else {
      const bool small = name == "small_caps";
      for (std::size_t i = 0; i < with_mcap.size(); ++i)
        if ((i < small_count) == small) members.push_back(with_mcap[i]->stock);
    }
    return members;
  };

  for (const std::string& name : {std::string("all"), std::string("small_caps"), std::string("large_caps")}) {
    detail::GroupAccumulator acc;
    for (const auto& stock : group_members(name)) {
      const auto& [x, x_alt] = stock_returns[stock];
      acc.with_mo.push_back(x);
      acc.without_mo.push_back(x_alt);
      const StockReportRow* row = row_of[stock];
      if (row->pred_left_mo) acc.pred_l_mo.push_back(*row->pred_left_mo);
      if (row->pred_left_no_mo) acc.pred_l_no.push_back(*row->pred_left_no_mo);
      if (row->pred_right_mo) acc.pred_r_mo.push_back(*row->pred_right_mo);
      if (row->pred_right_no_mo) acc.pred_r_no.push_back(*row->pred_right_no_mo);
    }
    GroupSummaryRow g;
    g.group = name;
    g.left_mo_predicted = detail::mean_of(acc.pred_l_mo);
    g.left_no_mo_predicted = detail::mean_of(acc.pred_l_no);
    g.right_mo_predicted = detail::mean_of(acc.pred_r_mo);
    g.right_no_mo_predicted = detail::mean_of(acc.pred_r_no);
    std::vector<std::pair<double, double>> plot;
    g.right_mo_realized = detail::realized_exponent(acc.with_mo, TailSide::Right, &plot);
    reports.plot_data["returns_" + name + "_right_mo"] = plot;
    g.left_mo_realized = detail::realized_exponent(acc.with_mo, TailSide::Left, &plot);
    reports.plot_data["returns_" + name + "_left_mo"] = plot;
    g.right_no_mo_realized = detail::realized_exponent(acc.without_mo, TailSide::Right, &plot);
    reports.plot_data["returns_" + name + "_right_no_mo"] = plot;
    g.left_no_mo_realized = detail::realized_exponent(acc.without_mo, TailSide::Left, &plot);
    reports.plot_data["returns_" + name + "_left_no_mo"] = plot;
    reports.groups.push_back(std::move(g));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// File I/O

inline std::vector<RawOrderRecord> read_orders_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open orders file: " + path);
  detail::expect_header(in, "stock,date,time,type,side,price,size", "orders");
  std::vector<RawOrderRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw DataFormatError("orders: expected 7 fields, got line '" + line + "'");
    RawOrderRecord r;
    r.stock = f[0];
    r.date = f[1];
    r.time_us = detail::parse_time_us(f[2]);
    if (f[3] == "limit")
      r.type = OrderType::Limit;
    else if (f[3] == "market")
      r.type = OrderType::Market;
    else
      throw DataFormatError("orders: bad type '" + f[3] + "'");
    if (f[4] == "buy")
      r.side = Side::Buy;
    else if (f[4] == "sell")
      r.side = Side::Sell;
    else
      throw DataFormatError("orders: bad side '" + f[4] + "'");
    if (r.type == OrderType::Limit) {
      r.price_micro = detail::parse_micros(f[5]);
      if (*r.price_micro <= 0) throw DataFormatError("orders: limit price must be positive");
    } else if (!f[5].empty()) {
      throw DataFormatError("orders: market order with a price");
    }
    r.size = detail::parse_double(f[6]);
    if (!(r.size > 0.0)) throw DataFormatError("orders: size must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TradeRecord> read_trades_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open trades file: " + path);
  detail::expect_header(in, "stock,date,time,price,size", "trades");
  std::vector<TradeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 5) throw DataFormatError("trades: expected 5 fields, got line '" + line + "'");
    TradeRecord r;
    r.stock = f[0];
    r.date = f[1];
    r.time_us = detail::parse_time_us(f[2]);
    r.price_micro = detail::parse_micros(f[3]);
    r.size = detail::parse_double(f[4]);
    if (r.price_micro <= 0 || !(r.size > 0.0)) throw DataFormatError("trades: price and size must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<StockMeta> read_metadata_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open metadata file: " + path);
  detail::expect_header(in, "stock,exchange,mcap_eur_bn", "metadata");
  std::vector<StockMeta> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3) throw DataFormatError("metadata: expected 3 fields, got line '" + line + "'");
    out.push_back({f[0], f[1], detail::parse_double(f[2])});
  }
  return out;
}

inline void write_per_stock_csv(const PipelineReports& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path);
  out << "stock,exchange,mcap_eur_bn,a_A_left,a_B_left,a_A_right,a_B_right,c,"
         "abar_left_no_mo,abar_left_mo,abar_right_no_mo,abar_right_mo,status\n";
  for (const auto& r : reports.per_stock) {
    out << r.stock << ',' << r.exchange << ',' << detail::format_opt(r.mcap_eur_bn) << ','
        << detail::format_opt(r.a_a_left) << ',' << detail::format_opt(r.a_b_left) << ','
        << detail::format_opt(r.a_a_right) << ',' << detail::format_opt(r.a_b_right) << ','
        << detail::format_opt(r.c_hat) << ',' << detail::format_opt(r.pred_left_no_mo) << ','
        << detail::format_opt(r.pred_left_mo) << ',' << detail::format_opt(r.pred_right_no_mo) << ','
        << detail::format_opt(r.pred_right_mo) << ',' << r.status << '\n';
  }
}

inline void write_groups_csv(const PipelineReports& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path);
  out << "group,left_mo_predicted,left_mo_realized,left_no_mo_predicted,left_no_mo_realized,"
         "right_mo_predicted,right_mo_realized,right_no_mo_predicted,right_no_mo_realized\n";
  for (const auto& g : reports.groups) {
    out << g.group << ',' << detail::format_opt(g.left_mo_predicted) << ','
        << detail::format_opt(g.left_mo_realized) << ',' << detail::format_opt(g.left_no_mo_predicted) << ','
        << detail::format_opt(g.left_no_mo_realized) << ',' << detail::format_opt(g.right_mo_predicted) << ','
        << detail::format_opt(g.right_mo_realized) << ',' << detail::format_opt(g.right_no_mo_predicted)
        << ',' << detail::format_opt(g.right_no_mo_realized) << '\n';
  }
}

inline void write_plot_csvs(const PipelineReports& reports, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, points] : reports.plot_data) {
    std::ofstream out(dir + "/" + name + ".csv", std::ios::binary);
    if (!out) throw DataFormatError("cannot write plot file " + name);
    out << "log10_x,log10_ccdf\n";
    for (const auto& [x, y] : points)
      out << detail::format_number(x) << ',' << detail::format_number(y) << '\n';
  }
}

struct PipelineSummary {
  std::size_t stocks = 0;
  std::size_t auctions = 0;
  std::size_t rows_ok = 0;
  std::size_t rows_flagged = 0;
  std::vector<std::string> outputs;
};

/// End-to-end run: read the three input files, aggregate every (stock, date)
/// auction, build reports, and write per_stock.csv, groups.csv and plot-data
/// CSVs under `out_dir`.
inline PipelineSummary run_pipeline(const std::string& orders_path, const std::string& trades_path,
                                    const std::string& metadata_path, const std::string& out_dir,
                                    double tick_size,
                                    TieBreakReference tie_break = TieBreakReference::Vwap) {
  const auto orders = read_orders_csv(orders_path);
  const auto trades = read_trades_csv(trades_path);
  const auto metadata = read_metadata_csv(metadata_path);
  if (orders.empty()) throw InsufficientData("pipeline: orders file has no records");

  std::map<std::pair<std::string, std::string>, std::vector<RawOrderRecord>> orders_by_key;
  for (const auto& o : orders) orders_by_key[{o.stock, o.date}].push_back(o);
  std::map<std::pair<std::string, std::string>, std::vector<TradeRecord>> trades_by_key;
  for (const auto& t : trades) trades_by_key[{t.stock, t.date}].push_back(t);

  std::vector<AuctionAggregate> aggregates;
  aggregates.reserve(orders_by_key.size());
  for (const auto& [key, key_orders] : orders_by_key) {
    static const std::vector<TradeRecord> kNoTrades;
    const auto it = trades_by_key.find(key);
    aggregates.push_back(aggregate_auction(key_orders, it == trades_by_key.end() ? kNoTrades : it->second,
                                           tick_size, tie_break));
  }

  PipelineReports reports = build_reports(aggregates, metadata);

  std::filesystem::create_directories(out_dir);
  const std::string per_stock_path = out_dir + "/per_stock.csv";
  const std::string groups_path = out_dir + "/groups.csv";
  write_per_stock_csv(reports, per_stock_path);
  write_groups_csv(reports, groups_path);
  write_plot_csvs(reports, out_dir + "/plots");

  PipelineSummary summary;
  summary.stocks = reports.per_stock.size();
  summary.auctions = aggregates.size();
  for (const auto& a : aggregates) (a.status == "ok" ? summary.rows_ok : summary.rows_flagged)++;
  summary.outputs = {per_stock_path, groups_path, out_dir + "/plots"};
  return summary;
}

}  // namespace catk
