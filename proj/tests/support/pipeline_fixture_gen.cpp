// Generates the synthetic order/trade/metadata fixture used by the pipeline
// golden test. Two stocks with planted placement tail exponents and an
// exactly proportional market order imbalance, so the pipeline's estimates
// have known targets:
//
//   ALPHA: a_A(r)=1.0, a_B(r)=2.0, a_A(l)=2.2, a_B(l)=1.1, c=0.4
//   BRAVO: a_A(r)=1.2, a_B(r)=1.8, a_A(l)=2.0, a_B(l)=0.9, c=0.5
//
// The generator derives the reference price exactly as the pipeline does
// (5-minute VWAP of its own trades), places limit prices on the absolute
// tick grid at planted tick offsets, and sets market order volumes to
// c * (N_A - N_B) plus a matched pad on both sides.
//
// Usage: pipeline_fixture_gen <output_dir>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "catk/counts.hpp"
#include "catk/data_pipeline.hpp"
#include "catk/placement.hpp"
#include "catk/rng.hpp"

namespace {

struct StockSpec {
  std::string name;
  std::string exchange;
  double mcap = 0.0;
  double c = 0.0;
  double a_right_sell = 0.0, a_right_buy = 0.0;
  double a_left_sell = 0.0, a_left_buy = 0.0;
  double start_mid = 0.0;
  std::uint64_t seed = 0;
};

constexpr double kTick = 0.01;
constexpr double kOffsetScale = 12.0;  // tail onset in ticks
constexpr int kDays = 400;
constexpr int kCountsCap = 160;
constexpr int kMatchedPad = 3;

double gaussian_ish(catk::SplitMix64& rng) {
  double z = 0.0;
  for (int i = 0; i < 12; ++i) z += rng.next_unit();
  return z - 6.0;
}

std::string date_of(int day_index) {
  // synthetic calendar: 31-day months starting 2021-01
  const int month = day_index / 31;
  const int day = day_index % 31 + 1;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", 2021 + month / 12, month % 12 + 1, day);
  return buf;
}

std::string time_of(std::int64_t us) {
  const long long s = static_cast<long long>(us / 1000000);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld", s / 3600, (s / 60) % 60, s % 60);
  return buf;
}

std::string price_str(std::int64_t micros) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld", static_cast<long long>(micros / 1000000),
                static_cast<long long>((micros % 1000000) / 10000));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: pipeline_fixture_gen <output_dir>\n";
    return 2;
  }
  const std::filesystem::path out_dir = argv[1];
  std::filesystem::create_directories(out_dir);

  const std::vector<StockSpec> stocks{
      {"ALPHA", "AMS", 4.2, 0.4, 1.0, 2.0, 2.2, 1.1, 60.0, 1001},
      {"BRAVO", "PAR", 11.5, 0.5, 1.2, 1.8, 2.0, 0.9, 140.0, 2002},
  };

  std::ofstream orders(out_dir / "orders.csv", std::ios::binary);
  std::ofstream trades(out_dir / "trades.csv", std::ios::binary);
  std::ofstream meta(out_dir / "metadata.csv", std::ios::binary);
  orders << "stock,date,time,type,side,price,size\n";
  trades << "stock,date,time,price,size\n";
  meta << "stock,exchange,mcap_eur_bn\n";

  for (const auto& spec : stocks) {
    meta << spec.name << ',' << spec.exchange << ',' << spec.mcap << '\n';
    catk::SplitMix64 rng(spec.seed);
    const auto counts = catk::CountsModel::proportional_feasible(kCountsCap, spec.c);
    const auto right_sell = catk::PlacementModel::pareto(spec.a_right_sell, kOffsetScale);
    const auto right_buy = catk::PlacementModel::pareto(spec.a_right_buy, kOffsetScale);
    const auto left_sell = catk::PlacementModel::pareto(spec.a_left_sell, kOffsetScale);
    const auto left_buy = catk::PlacementModel::pareto(spec.a_left_buy, kOffsetScale);

    double mid = spec.start_mid;
    for (int day = 0; day < kDays; ++day) {
      const std::string date = date_of(day);
      mid *= std::exp(0.004 * gaussian_ish(rng));

      // continuous-session trades; the last five minutes define the VWAP
      std::vector<catk::TradeRecord> day_trades;
      for (int t = 0; t < 20; ++t) {
        const std::int64_t time_us = (16LL * 3600 + 50 * 60 + t * 29) * 1000000;
        const double px = mid * (1.0 + 0.0004 * gaussian_ish(rng));
        const std::int64_t px_micro = std::llround(px / kTick) * std::llround(kTick * 1e6);
        const double size = 50.0 + static_cast<double>(rng.next_below(450));
        day_trades.push_back({spec.name, date, time_us, px_micro, size});
        trades << spec.name << ',' << date << ',' << time_of(time_us) << ',' << price_str(px_micro)
               << ',' << size << '\n';
      }
      const std::int64_t t_end = day_trades.back().time_us;
      const double x0 = catk::vwap_reference(day_trades, {t_end - 5LL * 60 * 1000000, t_end});
      const long long ref_tick = std::llround(x0 / kTick);

      const auto draw = counts.sample(rng);
      auto emit_limit = [&](catk::Side side, long long offset, std::int64_t time_us) {
        const long long tick_index = ref_tick + offset;
        const std::int64_t px_micro = tick_index * std::llround(kTick * 1e6);
        orders << spec.name << ',' << date << ',' << time_of(time_us) << ",limit,"
               << (side == catk::Side::Sell ? "sell" : "buy") << ',' << price_str(px_micro) << ",1\n";
      };
      auto draw_offset = [&](const catk::PlacementModel& right, const catk::PlacementModel& left) {
        for (;;) {
          const bool up = rng.next_unit() < 0.5;
          const long long off = up ? std::llround(right.quantile(rng.next_unit()))
                                   : -std::llround(left.quantile(rng.next_unit()));
          if (ref_tick + off > 0) return off;  // price floor at zero
        }
      };
      std::int64_t order_time = (17LL * 3600 + 30 * 60 + 30) * 1000000;
      for (int i = 0; i < draw.sell_count; ++i)
        emit_limit(catk::Side::Sell, draw_offset(right_sell, left_sell), order_time += 97000);
      for (int i = 0; i < draw.buy_count; ++i)
        emit_limit(catk::Side::Buy, draw_offset(right_buy, left_buy), order_time += 97000);

      const int delta = draw.imbalance;
      const int market_buy = std::max(delta, 0) + kMatchedPad;
      const int market_sell = std::max(-delta, 0) + kMatchedPad;
      orders << spec.name << ',' << date << ",17:30:05,market,buy,," << market_buy << '\n';
      orders << spec.name << ',' << date << ",17:30:06,market,sell,," << market_sell << '\n';
    }
  }
  std::cout << "fixture written to " << out_dir.string() << "\n";
  return 0;
}
