// catk -- call auction toolkit CLI.
//
// Subcommands:
//   simulate   Monte Carlo auction runs from a declarative config file
//   analytic   exact survival values, tail asymptotes, exponent predictions
//   fit        tail-exponent fits on a one-column CSV sample
//   pipeline   order/trade ingestion and paper-table-style reports
//
// Every command is deterministic given its inputs; --seed is the only
// entropy source. JSON goes to stdout, human logs to stderr.
// Exit codes: 0 ok, 2 usage or config error, 3 data error, 4 numeric error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "catk/analytic.hpp"
#include "catk/data_pipeline.hpp"
#include "catk/simulate.hpp"
#include "catk/tail_estimation.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit(const json& payload, const std::string& format) {
  if (format == "csv") {
    std::string header, row;
    for (auto it = payload.begin(); it != payload.end(); ++it) {
      if (!it->is_primitive()) continue;
      if (!header.empty()) {
        header += ',';
        row += ',';
      }
      header += it.key();
      row += it->is_string() ? it->get<std::string>() : it->dump();
    }
    std::cout << header << '\n' << row << '\n';
  } else {
    std::cout << payload.dump(2) << '\n';
  }
}

// --- simulate config ------------------------------------------------------

struct SimFileConfig {
  std::map<std::string, std::string> kv;

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() || it->second.empty() ? fallback : it->second;
  }
  std::optional<std::string> maybe(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }
};

SimFileConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw catk::DataFormatError("cannot open config file: " + path);
  SimFileConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("config: expected 'key = value', got '" + line + "'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    cfg.kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + s + "'");
  }
}

long long to_int(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + s + "'");
  }
}

catk::PlacementModel placement_from(const SimFileConfig& cfg, const std::string& prefix) {
  const std::string family = cfg.get(prefix + "_family", "pareto");
  if (family == "point") return catk::PlacementModel::point(to_double(cfg.get(prefix + "_value", "0"), prefix));
  const double exponent = to_double(cfg.get(prefix + "_exponent", "1.0"), prefix + "_exponent");
  const double scale = to_double(cfg.get(prefix + "_scale", "1.0"), prefix + "_scale");
  if (family == "pareto") return catk::PlacementModel::pareto(exponent, scale);
  if (family == "lomax") return catk::PlacementModel::lomax(exponent, scale);
  throw ConfigError("config: unknown placement family '" + family + "'");
}

catk::SimulationConfig build_sim_config(const SimFileConfig& cfg) {
  catk::CountsSpec counts = catk::FixedCounts{};
  const std::string kind = cfg.get("counts", "uniform");
  if (kind == "fixed") {
    catk::FixedCounts fc;
    fc.sell_count = static_cast<int>(to_int(cfg.get("fixed_sell", "1"), "fixed_sell"));
    fc.buy_count = static_cast<int>(to_int(cfg.get("fixed_buy", "1"), "fixed_buy"));
    fc.imbalance = static_cast<int>(to_int(cfg.get("fixed_delta", "0"), "fixed_delta"));
    counts = fc;
  } else {
    const int cap = static_cast<int>(to_int(cfg.get("counts_cap", "6"), "counts_cap"));
    const double c = to_double(cfg.get("counts_c", "0.25"), "counts_c");
    try {
      if (kind == "uniform")
        counts = catk::CountsModel::uniform(cap, c);
      else if (kind == "proportional")
        counts = catk::CountsModel::proportional_feasible(cap, c);
      else
        throw ConfigError("config: unknown counts kind '" + kind + "'");
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  catk::SimulationConfig sim{placement_from(cfg, "sell"), placement_from(cfg, "buy"), counts};
  sim.auctions = static_cast<std::size_t>(to_int(cfg.get("n", "0"), "n"));
  sim.seed = static_cast<std::uint64_t>(to_int(cfg.get("seed", "0"), "seed"));
  const std::string mode = cfg.get("mode", "with");
  if (mode == "with")
    sim.mode = catk::SimulationMode::WithMarketOrders;
  else if (mode == "without")
    sim.mode = catk::SimulationMode::WithoutMarketOrders;
  else
    throw ConfigError("config: mode must be 'with' or 'without'");
  const std::string output = cfg.get("output", "lower");
  if (output == "lower")
    sim.output = catk::SimulationOutput::LowerClearingPrice;
  else if (output == "closing")
    sim.output = catk::SimulationOutput::ClosingPrice;
  else
    throw ConfigError("config: output must be 'lower' or 'closing'");
  sim.reference = to_double(cfg.get("reference", "0"), "reference");
  if (auto tick = cfg.maybe("tick_size")) sim.tick_size = to_double(*tick, "tick_size");
  sim.threads = static_cast<int>(to_int(cfg.get("threads", "1"), "threads"));
  return sim;
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& out_csv, const std::string& meta_path, const std::string& format,
                 std::optional<std::uint64_t> seed_flag, std::optional<int> threads_flag) {
  SimFileConfig file_cfg = load_sim_config(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    file_cfg.kv[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  catk::SimulationConfig sim = build_sim_config(file_cfg);
  if (seed_flag) sim.seed = *seed_flag;
  if (threads_flag) sim.threads = *threads_flag;
  const std::string sidecar = meta_path.empty() ? out_csv + ".meta.json" : meta_path;

  const catk::ReturnSample sample = catk::simulate_auctions(sim);

  {
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw catk::DataFormatError("cannot write " + out_csv);
    out << "return\n";
    for (double v : sample.values) out << format_value(v) << '\n';
  }

  json meta{{"schema", "catk/simulate/v1"},
            {"n_requested", sample.requested},
            {"n_recorded", sample.values.size()},
            {"failures", sample.failures},
            {"seed", sample.seed},
            {"mode", sim.mode == catk::SimulationMode::WithMarketOrders ? "with" : "without"},
            {"output", sim.output == catk::SimulationOutput::LowerClearingPrice ? "lower" : "closing"},
            {"config_hash", sample.config_hash},
            {"csv", out_csv}};
  {
    std::ofstream out(sidecar, std::ios::binary);
    if (!out) throw catk::DataFormatError("cannot write " + sidecar);
    out << meta.dump(2) << '\n';
  }
  std::cerr << "simulated " << sample.requested << " auctions, recorded " << sample.values.size()
            << ", failures " << sample.failures << ", seed " << sample.seed << "\n";
  emit(meta, format);
  return kExitOk;
}

// --- fit ------------------------------------------------------------------

std::vector<double> read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw catk::DataFormatError("cannot open sample file: " + path);
  std::vector<double> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
      out.push_back(v);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header line
      }
      throw catk::DataFormatError("bad sample value: '" + line + "'");
    }
    first = false;
  }
  if (out.empty()) throw catk::InsufficientData("sample file has no values: " + path);
  return out;
}

// --- command wiring ---------------------------------------------------------

int dispatch(int argc, char** argv) {
  CLI::App app{"call auction toolkit"};
  app.require_subcommand(1);
  std::string format = "json";
  app.add_option("--format", format, "payload format: json or csv")->check(CLI::IsMember({"json", "csv"}));
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "seed override");
  std::optional<int> threads_flag;
  app.add_option("--threads", threads_flag, "worker budget override");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run Monte Carlo auctions from a config file");
  std::string sim_config, sim_out = "sample.csv", sim_meta;
  std::vector<std::string> sim_sets;
  sim->add_option("--config", sim_config, "key=value config file")->required();
  sim->add_option("--out", sim_out, "output CSV path");
  sim->add_option("--meta", sim_meta, "metadata JSON sidecar path");
  sim->add_option("--set", sim_sets, "config override key=value (repeatable)");

  // analytic
  auto* analytic = app.add_subcommand("analytic", "closed-form evaluations");
  analytic->require_subcommand(1);
  auto* surv = analytic->add_subcommand("survival", "P(lower clearing price > M)");
  double s_pa = 0, s_pb = 0;
  int s_na = 1, s_nb = 1;
  std::optional<int> s_delta;
  surv->add_option("--pa", s_pa, "F_A(M)")->required();
  surv->add_option("--pb", s_pb, "F_B(M)")->required();
  surv->add_option("--na", s_na, "sell order count")->required();
  surv->add_option("--nb", s_nb, "buy order count")->required();
  surv->add_option("--delta", s_delta, "market order imbalance");

  auto* asym = analytic->add_subcommand("asymptote", "leading-order conditional tail");
  double a_m = 0, a_sell_exp = 1, a_sell_scale = 1, a_buy_exp = 2, a_buy_scale = 1;
  int a_na = 1, a_nb = 1;
  std::optional<int> a_delta;
  asym->add_option("--m", a_m, "threshold M")->required();
  asym->add_option("--na", a_na)->required();
  asym->add_option("--nb", a_nb)->required();
  asym->add_option("--delta", a_delta);
  asym->add_option("--sell-exponent", a_sell_exp)->required();
  asym->add_option("--sell-scale", a_sell_scale);
  asym->add_option("--buy-exponent", a_buy_exp)->required();
  asym->add_option("--buy-scale", a_buy_scale);

  auto* expo = analytic->add_subcommand("exponents", "predicted return tail exponents");
  double e_aa = 0, e_ab = 0, e_c = 0;
  std::optional<int> e_grid;
  expo->add_option("--aa", e_aa, "sell placement tail exponent")->required();
  expo->add_option("--ab", e_ab, "buy placement tail exponent")->required();
  expo->add_option("--c", e_c, "imbalance proportionality constant")->required();
  expo->add_option("--grid-cap", e_grid, "also run the grid minimization up to this cap");

  // fit
  auto* fit = app.add_subcommand("fit", "tail exponent fit on a one-column CSV");
  std::string fit_input, fit_bound, fit_plot, fit_side = "right";
  double fit_qstart = 0.05, fit_qstop = 0.001;
  std::optional<double> fit_sigma;
  std::optional<std::size_t> fit_hill_k;
  bool fit_binned = false;
  fit->add_option("--input", fit_input, "sample CSV")->required();
  fit->add_option("--side", fit_side, "right or left")->check(CLI::IsMember({"right", "left"}));
  fit->add_option("--q-start", fit_qstart, "window start CCDF level");
  fit->add_option("--q-stop", fit_qstop, "window stop CCDF level");
  fit->add_option("--bound", fit_bound, "bounding sample CSV for the window quantiles");
  fit->add_option("--sigma", fit_sigma, "sigma-threshold window instead of quantiles");
  fit->add_flag("--binned", fit_binned, "use 32 log-spaced bins");
  fit->add_option("--hill-k", fit_hill_k, "also report the Hill estimate at this k");
  fit->add_option("--plot-out", fit_plot, "write (log10 x, log10 ccdf) points here");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "order-level ingestion and reports");
  std::string p_orders, p_trades, p_meta, p_out, p_tie = "vwap";
  double p_tick = 0.01;
  pipe->add_option("--orders", p_orders, "orders CSV")->required();
  pipe->add_option("--trades", p_trades, "trades CSV")->required();
  pipe->add_option("--metadata", p_meta, "metadata CSV")->required();
  pipe->add_option("--out", p_out, "output directory")->required();
  pipe->add_option("--tick-size", p_tick, "tick size in currency units");
  pipe->add_option("--tie-break", p_tie, "closest-to-reference anchor: vwap or last")
      ->check(CLI::IsMember({"vwap", "last"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (sim->parsed()) return cmd_simulate(sim_config, sim_sets, sim_out, sim_meta, format, seed_flag, threads_flag);

  if (surv->parsed()) {
    const double value = s_delta ? catk::survival_lower_delta(s_pa, s_pb, s_na, s_nb, *s_delta)
                                 : catk::survival_lower(s_pa, s_pb, s_na, s_nb);
    json payload{{"schema", "catk/analytic/v1"}, {"kind", "survival"}, {"value", value},
                 {"pa", s_pa},  {"pb", s_pb},    {"na", s_na},         {"nb", s_nb}};
    if (s_delta) payload["delta"] = *s_delta;
    emit(payload, format);
    return kExitOk;
  }
  if (asym->parsed()) {
    const auto model_a = catk::PlacementModel::pareto(a_sell_exp, a_sell_scale);
    const auto model_b = catk::PlacementModel::pareto(a_buy_exp, a_buy_scale);
    const double value = a_delta
                             ? catk::asymptote_conditional_delta(a_m, model_a, model_b, a_na, a_nb, *a_delta)
                             : catk::asymptote_conditional(a_m, model_a, model_b, a_na, a_nb);
    json payload{{"schema", "catk/analytic/v1"}, {"kind", "asymptote"}, {"value", value}, {"m", a_m},
                 {"na", a_na},  {"nb", a_nb}};
    if (a_delta) payload["delta"] = *a_delta;
    emit(payload, format);
    return kExitOk;
  }
  if (expo->parsed()) {
    const auto pred = catk::predict_exponents(e_aa, e_ab, e_c);
    json payload{{"schema", "catk/analytic/v1"},
                 {"kind", "exponents"},
                 {"no_mo", pred.no_market_orders},
                 {"with_mo", pred.with_market_orders},
                 {"heavier_without_mo", pred.heavier_without_market_orders},
                 {"aa", e_aa},
                 {"ab", e_ab},
                 {"c", e_c}};
    if (e_grid) payload["bruteforce"] = catk::exponent_bruteforce(e_aa, e_ab, e_c, *e_grid);
    emit(payload, format);
    return kExitOk;
  }
  if (fit->parsed()) {
    const auto sample = read_sample_csv(fit_input);
    const auto side = fit_side == "left" ? catk::TailSide::Left : catk::TailSide::Right;
    catk::EmpiricalTail tail(sample, side);
    std::optional<catk::EmpiricalTail> bound;
    if (!fit_bound.empty()) bound.emplace(read_sample_csv(fit_bound), side);
    catk::FitWindow window = fit_sigma ? catk::FitWindow(catk::SigmaWindow{*fit_sigma})
                                       : catk::FitWindow(catk::QuantileWindow{
                                             fit_qstart, fit_qstop, bound ? &*bound : nullptr});
    catk::LogLogFitOptions options;
    options.binned = fit_binned;
    const catk::TailFit result = catk::loglog_fit(tail, window, options);
    if (!fit_plot.empty()) {
      std::ofstream out(fit_plot, std::ios::binary);
      if (!out) throw catk::DataFormatError("cannot write " + fit_plot);
      out << "log10_x,log10_ccdf\n";
      const auto& v = tail.values();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = tail.ccdf_at(i);
        if (v[i] <= 0.0 || c <= 0.0) continue;
        out << format_value(std::log10(v[i])) << ',' << format_value(std::log10(c)) << '\n';
      }
    }
    json payload{{"schema", "catk/fit/v1"},
                 {"exponent", result.exponent},
                 {"intercept", result.intercept},
                 {"window_lo", result.window_lo},
                 {"window_hi", result.window_hi},
                 {"window_kind", result.window_kind},
                 {"points", result.points},
                 {"r_squared", result.r_squared},
                 {"residual_rms", result.residual_rms},
                 {"side", fit_side}};
    if (fit_hill_k) payload["hill"] = catk::hill_estimate(tail, *fit_hill_k);
    emit(payload, format);
    return kExitOk;
  }
  if (pipe->parsed()) {
    const auto tie_break = p_tie == "last" ? catk::TieBreakReference::LastTrade
                                           : catk::TieBreakReference::Vwap;
    const catk::PipelineSummary summary =
        catk::run_pipeline(p_orders, p_trades, p_meta, p_out, p_tick, tie_break);
    json payload{{"schema", "catk/pipeline/v1"},
                 {"stocks", summary.stocks},
                 {"auctions", summary.auctions},
                 {"rows_ok", summary.rows_ok},
                 {"rows_flagged", summary.rows_flagged},
                 {"outputs", summary.outputs}};
    emit(payload, format);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const catk::DataFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const catk::NoTradesInWindow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const catk::InsufficientTailData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const catk::InsufficientData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const catk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
