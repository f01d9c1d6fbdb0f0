#pragma once

// Monte Carlo generation of auctions under the stochastic model: i.i.d.
// placement draws on both sides, correlated (N_A, N_B, Delta) counts, and
// clearing through the deterministic auction engine. Auctions are
// independent work items on per-index RNG substreams, so results are
// identical for any worker count.

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "catk/auction.hpp"
#include "catk/counts.hpp"
#include "catk/placement.hpp"
#include "catk/rng.hpp"

namespace catk {

/// Frozen (N_A, N_B, Delta) for conditional-law studies.
struct FixedCounts {
  int sell_count = 1;
  int buy_count = 1;
  int imbalance = 0;
};

using CountsSpec = std::variant<CountsModel, FixedCounts>;

enum class SimulationMode : std::uint8_t { WithMarketOrders, WithoutMarketOrders };
enum class SimulationOutput : std::uint8_t { LowerClearingPrice, ClosingPrice };

struct SimulationConfig {
  SimulationConfig(PlacementModel sell, PlacementModel buy, CountsSpec counts_spec)
      : sell_placement(std::move(sell)), buy_placement(std::move(buy)), counts(std::move(counts_spec)) {}

  PlacementModel sell_placement;  // F_A
  PlacementModel buy_placement;   // F_B
  CountsSpec counts;
  std::size_t auctions = 0;
  std::uint64_t seed = 0;
  SimulationMode mode = SimulationMode::WithMarketOrders;
  SimulationOutput output = SimulationOutput::LowerClearingPrice;
  double reference = 0.0;           // Euronext-rule tie-break, return-axis units
  std::optional<double> tick_size;  // gridded closing price when set
  int threads = 1;
};

struct ReturnSample {
  std::vector<double> values;
  std::size_t requested = 0;
  std::size_t failures = 0;
  std::uint64_t seed = 0;
  SimulationMode mode = SimulationMode::WithMarketOrders;
  std::uint64_t config_hash = 0;
};

/// n i.i.d. draws via the model's quantile function.
inline std::vector<double> sample_placement(const PlacementModel& model, std::size_t n, SplitMix64& rng) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(model.quantile(rng.next_unit()));
  return out;
}

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a_double(std::uint64_t h, double v) {
  return fnv1a(h, std::bit_cast<std::uint64_t>(v));
}

inline std::uint64_t hash_placement(std::uint64_t h, const PlacementModel& m) {
  h = fnv1a(h, static_cast<std::uint64_t>(m.family()));
  if (m.family() != PlacementModel::Family::Point) h = fnv1a_double(h, m.tail_exponent());
  return fnv1a_double(h, m.tail_scale());
}

}  // namespace detail

inline std::uint64_t config_hash(const SimulationConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = detail::hash_placement(h, cfg.sell_placement);
  h = detail::hash_placement(h, cfg.buy_placement);
  if (const auto* cm = std::get_if<CountsModel>(&cfg.counts)) {
    h = detail::fnv1a(h, static_cast<std::uint64_t>(cm->cap()));
    h = detail::fnv1a_double(h, cm->c());
    for (double p : cm->pmf()) h = detail::fnv1a_double(h, p);
  } else {
    const auto& fc = std::get<FixedCounts>(cfg.counts);
    h = detail::fnv1a(h, static_cast<std::uint64_t>(fc.sell_count));
    h = detail::fnv1a(h, static_cast<std::uint64_t>(fc.buy_count));
    h = detail::fnv1a(h, static_cast<std::uint64_t>(fc.imbalance + (1LL << 32)));
  }
  h = detail::fnv1a(h, cfg.auctions);
  h = detail::fnv1a(h, cfg.seed);
  h = detail::fnv1a(h, static_cast<std::uint64_t>(cfg.mode));
  h = detail::fnv1a(h, static_cast<std::uint64_t>(cfg.output));
  return h;
}

/// One simulated auction before clearing. The same draw backs both modes:
/// "without" only zeroes the market order volumes.
struct AuctionDraw {
  CountsDraw counts;
  std::vector<double> sell_prices;
  std::vector<double> buy_prices;
};

inline AuctionDraw draw_auction(const SimulationConfig& cfg, std::uint64_t index) {
  SplitMix64 rng = substream(cfg.seed, index);
  CountsDraw counts;
  if (const auto* cm = std::get_if<CountsModel>(&cfg.counts)) {
    counts = cm->sample(rng);
  } else {
    const auto& fc = std::get<FixedCounts>(cfg.counts);
    counts = CountsDraw{fc.sell_count, fc.buy_count, fc.imbalance};
  }
  AuctionDraw draw;
  draw.counts = counts;
  draw.sell_prices = sample_placement(cfg.sell_placement, static_cast<std::size_t>(counts.sell_count), rng);
  draw.buy_prices = sample_placement(cfg.buy_placement, static_cast<std::size_t>(counts.buy_count), rng);
  return draw;
}

inline OrderBookSnapshot book_from_draw(const AuctionDraw& draw, SimulationMode mode,
                                        std::optional<double> tick_size) {
  OrderBookSnapshot book;
  book.tick_size = tick_size;
  book.sell_orders.reserve(draw.sell_prices.size());
  for (double p : draw.sell_prices) book.sell_orders.push_back({Side::Sell, p, 1.0});
  book.buy_orders.reserve(draw.buy_prices.size());
  for (double p : draw.buy_prices) book.buy_orders.push_back({Side::Buy, p, 1.0});
  if (mode == SimulationMode::WithMarketOrders) {
    const int d = draw.counts.imbalance;
    book.market_buy_volume = d > 0 ? static_cast<double>(d) : 0.0;
    book.market_sell_volume = d < 0 ? static_cast<double>(-d) : 0.0;
  }
  return book;
}

/// Simulate auction `index`; nullopt when the auction fails to clear.
inline std::optional<double> simulate_single(const SimulationConfig& cfg, std::uint64_t index) {
  const AuctionDraw draw = draw_auction(cfg, index);
  const OrderBookSnapshot book = book_from_draw(draw, cfg.mode, cfg.tick_size);
  const auto interval = try_clearing_interval(book);
  if (!interval) return std::nullopt;
  if (cfg.output == SimulationOutput::LowerClearingPrice) return interval->lower;
  return closing_price(*interval, cfg.reference, cfg.tick_size);
}

/// Run the configured number of auctions. Failed auctions are counted and
/// dropped. Results are assembled by auction index, so any `threads`
/// setting yields the identical ReturnSample.
inline ReturnSample simulate_auctions(const SimulationConfig& cfg) {
  const std::size_t n = cfg.auctions;
  std::vector<double> values(n);
  std::vector<std::uint8_t> ok(n, 0);

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (auto v = simulate_single(cfg, i)) {
        values[i] = *v;
        ok[i] = 1;
      }
    }
  };

  const int workers = std::max(1, cfg.threads);
  if (workers == 1 || n < 2) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  ReturnSample sample;
  sample.requested = n;
  sample.seed = cfg.seed;
  sample.mode = cfg.mode;
  sample.config_hash = config_hash(cfg);
  sample.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i])
      sample.values.push_back(values[i]);
    else
      ++sample.failures;
  }
  return sample;
}

}  // namespace catk
