#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvasicek/calibration.hpp"
#include "mvasicek/model.hpp"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

const mvasicek::ModelParams kExample1{0.12, 1.9, 0.35, 0.034, 0.12, 0.02};

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(MVASICEK_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    RunResult r;
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::map<std::string, double> key_values(const std::string& text) {
    std::map<std::string, double> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = std::strtod(line.c_str() + eq + 1, nullptr);
    }
    return kv;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::string data(const std::string& name) { return std::string(MVASICEK_DATA_DIR) + "/" + name; }

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("mvasicek_cli_" + name); }

TEST(Cli, BondMatchesLibrary) {
    const auto r = run_cli("bond --T 1");
    ASSERT_EQ(r.code, 0);
    const auto kv = key_values(r.out);
    EXPECT_EQ(kv.at("price"), mvasicek::bond_price(1.0, kExample1));
    EXPECT_EQ(kv.at("yield"), mvasicek::yield_at(1.0, kExample1));
}

TEST(Cli, OptionPrintsBreakdown) {
    const auto r = run_cli("option --a 0.08 --b 1.5 --sigma 0.3 --p 0.07 --q 0.08 --r0 0.025 --S 0.5 --T 1 --K 0.3");
    ASSERT_EQ(r.code, 0);
    const auto kv = key_values(r.out);
    EXPECT_NEAR(kv.at("call"), 0.6719154520, 1e-9);
    EXPECT_NEAR(kv.at("sigma_sq"), 0.002701327168157295, 1e-15);
    for (const char* k : {"put", "d_plus", "d_minus", "bond_S", "bond_T"}) EXPECT_TRUE(kv.count(k)) << k;
}

TEST(Cli, PdeSweepWithinHalfPercent) {
    const auto r = run_cli("--config " + data("example1_config.json") + " pde-price");
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"r0", "pde_value", "exact_value"}));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double r0 = std::stod(rows[i][0]);
        EXPECT_NEAR(r0, 0.01 * static_cast<double>(i - 1), 1e-15);
        const double pde = std::stod(rows[i][1]), exact = std::stod(rows[i][2]);
        EXPECT_LT(std::fabs(pde - exact) / exact, 5e-3);
    }
}

TEST(Cli, CalibrateRoundTrip) {
    const auto r = run_cli("calibrate --quotes " + data("synthetic_dec2007_quotes.csv"));
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    for (const char* k : {"a", "b", "sigma", "p", "q", "r0", "sse", "converged", "residuals"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
    EXPECT_LT(j["sse"].get<double>(), 1e-10);
    EXPECT_EQ(j["residuals"].size(), 10u);
}

TEST(Cli, PercentFlagMatchesDecimalQuotes) {
    const auto dec = json::parse(run_cli("calibrate --n-restarts 2 --quotes " + data("synthetic_dec2007_quotes.csv")).out);
    const auto pct = json::parse(
        run_cli("calibrate --n-restarts 2 --percent --quotes " + data("synthetic_dec2007_quotes_percent.csv")).out);
    EXPECT_NEAR(dec["a"].get<double>(), pct["a"].get<double>(), 1e-6);
    EXPECT_NEAR(dec["r0"].get<double>(), pct["r0"].get<double>(), 1e-8);
    EXPECT_LT(pct["sse"].get<double>(), 1e-10);
}

TEST(Cli, CurveRowsReproduceBondPrices) {
    const auto r = run_cli("curve --n-points 40 --quotes " + data("synthetic_dec2007_quotes.csv"));
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"T", "Y_model", "y_market"}));
    int market_rows = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double T = std::stod(rows[i][0]), Y = std::stod(rows[i][1]);
        EXPECT_LT(std::fabs(std::exp(-T * Y) / mvasicek::bond_price(T, kExample1) - 1.0), 1e-14);
        if (!rows[i][2].empty()) ++market_rows;
    }
    EXPECT_EQ(market_rows, 10);
}

TEST(Cli, CurveWithFitsAndSvg) {
    const auto svg = temp_file("curve.svg");
    const auto r = run_cli("curve --n-points 10 --fit --vasicek-fit --n-restarts 3 --quotes " +
                           data("synthetic_dec2007_quotes.csv") + " --svg " + svg.string());
    ASSERT_EQ(r.code, 0);
    const auto rows = csv_rows(r.out);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"T", "Y_model", "Y_vasicek_fit", "y_market"}));
    // Fitted model reproduces the market column.
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i][3].empty()) EXPECT_NEAR(std::stod(rows[i][1]), std::stod(rows[i][3]), 1e-6);
    }
    std::ifstream f(svg);
    std::string head;
    std::getline(f, head);
    EXPECT_EQ(head.rfind("<svg", 0), 0u);
    fs::remove(svg);
}

TEST(Cli, SimulateReproducibleAcrossThreads) {
    const auto a = run_cli("simulate --n-paths 3000 --n-steps 64 --threads 1");
    const auto b = run_cli("simulate --n-paths 3000 --n-steps 64 --threads 4");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const auto kv = key_values(a.out);
    EXPECT_LT(std::fabs(kv.at("z")), 4.0);
    EXPECT_GT(kv.at("std_error"), 0.0);
}

TEST(Cli, SimulateWritesPaths) {
    const auto path = temp_file("paths.csv");
    const auto r = run_cli("simulate --n-paths 3 --n-steps 8 --paths-out " + path.string());
    ASSERT_EQ(r.code, 0);
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    EXPECT_EQ(line, "t,path_id,r,u,int_r");
    int rows = 0;
    while (std::getline(f, line)) ++rows;
    EXPECT_EQ(rows, 27);
    fs::remove(path);
}

TEST(Cli, DumpedConfigReproducesOutput) {
    const auto cfg_path = temp_file("dump.json");
    const std::string flags = "option --K 0.9 --S 0.25 --sigma 0.2";
    const auto dumped = run_cli("--dump-config " + flags);
    ASSERT_EQ(dumped.code, 0);
    {
        std::ofstream f(cfg_path);
        f << dumped.out;
    }
    const auto direct = run_cli(flags);
    const auto replay = run_cli("--config " + cfg_path.string() + " option");
    ASSERT_EQ(direct.code, 0);
    EXPECT_EQ(direct.out, replay.out);
    fs::remove(cfg_path);
}

TEST(Cli, FlagsOverrideConfig) {
    const auto r = run_cli("--config " + data("example1_config.json") + " bond --T 2");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(key_values(r.out).at("price"), mvasicek::bond_price(2.0, kExample1));
}

TEST(Cli, InputErrorsExitTwo) {
    EXPECT_EQ(run_cli("bond --b -1").code, 2);
    EXPECT_EQ(run_cli("bond --T 0").code, 2);
    EXPECT_EQ(run_cli("calibrate --quotes /nonexistent.csv").code, 2);
    EXPECT_EQ(run_cli("calibrate").code, 2);
    EXPECT_EQ(run_cli("bond --no-such-flag 1").code, 2);
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("option --S 2 --T 1").code, 2);
    EXPECT_EQ(run_cli("simulate --scheme milstein").code, 2);
    const auto bad_cfg = temp_file("bad.json");
    {
        std::ofstream f(bad_cfg);
        f << R"({"model": {"alpha": 1.0}})";
    }
    EXPECT_EQ(run_cli("--config " + bad_cfg.string() + " bond").code, 2);
    {
        std::ofstream f(bad_cfg);
        f << "{not json";
    }
    EXPECT_EQ(run_cli("--config " + bad_cfg.string() + " bond").code, 2);
    fs::remove(bad_cfg);
}

TEST(Cli, NumericalFailureExitsThree) {
    EXPECT_EQ(run_cli("simulate --sigma 1e308 --b 1e308 --n-paths 1 --n-steps 4").code, 3);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli("--help").code, 0); }

} // namespace
