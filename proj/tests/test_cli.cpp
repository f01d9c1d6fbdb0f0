#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CATK_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "catk_cli_test";
  fs::create_directories(dir);
  return dir;
}

// Minimal schema check: every "required" property must be present.
void check_against_schema(const json& payload, const std::string& schema_name) {
  const fs::path schema_path = fs::path(CATK_SOURCE_DIR) / "schemas" / schema_name;
  std::ifstream in(schema_path);
  REQUIRE_MESSAGE(in.good(), "missing schema: ", schema_path.string());
  json schema = json::parse(in);
  for (const auto& key : schema.at("required")) {
    CAPTURE(key.get<std::string>());
    CHECK(payload.contains(key.get<std::string>()));
  }
}

}  // namespace

TEST_CASE("missing config file fails with a usage/data diagnostic") {
  const auto r = run_cli("simulate --config /nonexistent/sim.cfg");
  CHECK(r.exit_code != 0);
}

TEST_CASE("unknown flags exit with the usage code") {
  const auto r = run_cli("analytic exponents --nonsense 1");
  CHECK(r.exit_code == 2);
}

TEST_CASE("an empty run writes an empty csv and exits cleanly") {
  const auto dir = scratch_dir();
  {
    std::ofstream cfg(dir / "empty.cfg");
    cfg << "n = 0\nsell_family = pareto\nsell_exponent = 1.0\nbuy_family = pareto\n"
           "buy_exponent = 2.5\ncounts = uniform\ncounts_cap = 4\ncounts_c = 0.3\nmode = without\n";
  }
  const auto out_csv = (dir / "empty.csv").string();
  const auto r = run_cli("simulate --config " + (dir / "empty.cfg").string() + " --out " + out_csv);
  CHECK(r.exit_code == 0);
  std::ifstream check(out_csv);
  std::string header;
  std::getline(check, header);
  CHECK(header == "return");
  std::string rest;
  CHECK_FALSE(std::getline(check, rest));
  const json payload = json::parse(r.out);
  CHECK(payload["n_recorded"] == 0);
  check_against_schema(payload, "simulate_meta.schema.json");
}

TEST_CASE("config overrides change the run") {
  const auto dir = scratch_dir();
  {
    std::ofstream cfg(dir / "small.cfg");
    cfg << "n = 5\nseed = 3\nsell_exponent = 1.0\nbuy_exponent = 2.5\ncounts = uniform\n"
           "counts_cap = 4\ncounts_c = 0.3\n";
  }
  const auto r = run_cli("simulate --config " + (dir / "small.cfg").string() + " --out " +
                         (dir / "s.csv").string() + " --set n=17 --set mode=without");
  CHECK(r.exit_code == 0);
  const json payload = json::parse(r.out);
  CHECK(payload["n_requested"] == 17);
  CHECK(payload["mode"] == "without");
}

TEST_CASE("analytic exponents reproduces the reference values") {
  const auto r = run_cli("analytic exponents --aa 1.07 --ab 2.37 --c 0.329");
  REQUIRE(r.exit_code == 0);
  const json payload = json::parse(r.out);
  CHECK(std::abs(payload["no_mo"].get<double>() - 3.44) < 0.005);
  CHECK(std::abs(payload["with_mo"].get<double>() - 4.32) < 0.005);
  CHECK(payload["heavier_without_mo"] == true);
  check_against_schema(payload, "analytic_result.schema.json");
}

TEST_CASE("analytic survival handles the trivial and imbalance cases") {
  auto r = run_cli("analytic survival --pa 0 --pb 0 --na 3 --nb 3");
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out)["value"] == 1.0);

  r = run_cli("analytic survival --pa 0.5 --pb 0.5 --na 2 --nb 2 --delta 1");
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out)["value"].get<double>() == doctest::Approx(0.6875).epsilon(1e-12));

  r = run_cli("analytic survival --pa 1.5 --pb 0 --na 1 --nb 1");
  CHECK(r.exit_code == 4);  // numeric domain error
}

TEST_CASE("analytic asymptote evaluates the conditional leading order") {
  const auto r = run_cli("analytic asymptote --m 10 --na 2 --nb 3 --sell-exponent 1 --buy-exponent 2");
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out)["value"].get<double>() == doctest::Approx(3e-4).epsilon(1e-12));
}

TEST_CASE("fit mirrors the library on a synthetic power law") {
  const auto dir = scratch_dir();
  const auto csv = (dir / "power.csv").string();
  {
    std::ofstream out(csv);
    out << "value\n";
    const int n = 5000;
    for (int i = 1; i <= n; ++i) {
      const double ccdf = static_cast<double>(n - i) / n;
      out << (ccdf > 0.0 ? std::pow(ccdf, -1.0 / 3.0) : std::pow(0.5 / n, -1.0 / 3.0)) << "\n";
    }
  }
  const auto r = run_cli("fit --input " + csv + " --q-start 0.9 --q-stop 0.001 --plot-out " +
                         (dir / "plot.csv").string());
  REQUIRE(r.exit_code == 0);
  const json payload = json::parse(r.out);
  CHECK(payload["exponent"].get<double>() == doctest::Approx(3.0).epsilon(1e-6));
  check_against_schema(payload, "tailfit_result.schema.json");
  std::ifstream plot(dir / "plot.csv");
  std::string header;
  std::getline(plot, header);
  CHECK(header == "log10_x,log10_ccdf");
}

TEST_CASE("pipeline on the shipped fixture emits the summary payload") {
  const fs::path fixtures = fs::path(CATK_SOURCE_DIR) / "tests" / "fixtures";
  const auto dir = scratch_dir();
  const auto r = run_cli("pipeline --orders " + (fixtures / "orders.csv").string() + " --trades " +
                         (fixtures / "trades.csv").string() + " --metadata " +
                         (fixtures / "metadata.csv").string() + " --out " + (dir / "pipe").string() +
                         " --tick-size 0.01");
  REQUIRE(r.exit_code == 0);
  const json payload = json::parse(r.out);
  CHECK(payload["stocks"] == 2);
  CHECK(payload["rows_ok"].get<int>() > 0);
  check_against_schema(payload, "pipeline_summary.schema.json");
  CHECK(fs::exists(dir / "pipe" / "per_stock.csv"));
  CHECK(fs::exists(dir / "pipe" / "groups.csv"));
}

TEST_CASE("pipeline with an empty orders file is a data error") {
  const auto dir = scratch_dir();
  {
    std::ofstream orders(dir / "empty_orders.csv");
    orders << "stock,date,time,type,side,price,size\n";
    std::ofstream trades(dir / "empty_trades.csv");
    trades << "stock,date,time,price,size\n";
    std::ofstream meta(dir / "empty_meta.csv");
    meta << "stock,exchange,mcap_eur_bn\n";
  }
  const auto r = run_cli("pipeline --orders " + (dir / "empty_orders.csv").string() + " --trades " +
                         (dir / "empty_trades.csv").string() + " --metadata " +
                         (dir / "empty_meta.csv").string() + " --out " + (dir / "pipe_empty").string());
  CHECK(r.exit_code == 3);
}

TEST_CASE("same seed and flags reproduce the sample byte for byte") {
  const auto dir = scratch_dir();
  {
    std::ofstream cfg(dir / "det.cfg");
    cfg << "n = 2000\nseed = 11\nsell_exponent = 1.0\nbuy_exponent = 2.5\ncounts = uniform\n"
           "counts_cap = 5\ncounts_c = 0.3\n";
  }
  const auto a = (dir / "det_a.csv").string();
  const auto b = (dir / "det_b.csv").string();
  REQUIRE(run_cli("simulate --config " + (dir / "det.cfg").string() + " --out " + a).exit_code == 0);
  REQUIRE(run_cli("--threads 3 simulate --config " + (dir / "det.cfg").string() + " --out " + b).exit_code == 0);
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(sa.size() > 2000 * 2);
}

TEST_CASE("the demo config recovers its predicted exponent") {
  const auto dir = scratch_dir();
  const auto demo = (fs::path(CATK_SOURCE_DIR) / "configs" / "demo.cfg").string();
  const auto csv = (dir / "demo.csv").string();
  auto r = run_cli("simulate --config " + demo + " --out " + csv + " --set n=300000");
  REQUIRE(r.exit_code == 0);
  const json meta = json::parse(r.out);
  CHECK(meta["mode"] == "without");
  CHECK(fs::exists(csv + ".meta.json"));

  r = run_cli("fit --input " + csv + " --q-start 1e-3 --q-stop 3e-5");
  REQUIRE(r.exit_code == 0);
  const double fitted = json::parse(r.out)["exponent"].get<double>();
  CHECK(std::abs(fitted - 3.5) <= 0.15 * 3.5);  // predicted a_A + a_B without market orders
}

TEST_CASE("csv format emits a flat header and row") {
  const auto r = run_cli("--format csv analytic exponents --aa 1.0 --ab 3.0 --c 0.25");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("no_mo") != std::string::npos);
  CHECK(r.out.find("exponents") != std::string::npos);
  CHECK(r.out.find(",4.0,") != std::string::npos);  // no_mo = 4
}
