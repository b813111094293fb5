// Copyright 2026 The qtoksim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.h"
#include "oracle.h"

namespace fs = std::filesystem;
using namespace qtoksim::cli;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "qtoksim");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

size_t count_lines(const std::string &s) { return static_cast<size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qtoksim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    void write(const std::string &name, const std::string &text) const {
        std::ofstream(dir_ / name) << text;
    }

    fs::path dir_;
};

}  // namespace

TEST(CliGrid, parse) {
    auto g = parse_grid("0:0.3:0.05");
    ASSERT_EQ(g.size(), 7u);
    EXPECT_DOUBLE_EQ(g.front(), 0.0);
    EXPECT_DOUBLE_EQ(g[3], 0.15);
    EXPECT_DOUBLE_EQ(g.back(), 0.3);
    EXPECT_EQ(parse_grid("0.5"), std::vector<double>{0.5});
    EXPECT_EQ(parse_grid("1:2:0.5").size(), 3u);
    for (const char *bad : {"", "a:b:c", "0:1", "0:1:0", "1:0:0.1", "0:1:-0.1", "0:1:0.1:2"}) {
        EXPECT_THROW(parse_grid(bad), UsageError) << bad;
    }
}

TEST(CliSeed, precedence) {
    ::unsetenv("QTOKSIM_SEED");
    EXPECT_EQ(resolve_seed(std::nullopt), 0u);
    ::setenv("QTOKSIM_SEED", "99", 1);
    EXPECT_EQ(resolve_seed(std::nullopt), 99u);
    EXPECT_EQ(resolve_seed(5), 5u);
    ::setenv("QTOKSIM_SEED", "junk", 1);
    EXPECT_THROW(resolve_seed(std::nullopt), UsageError);
    ::unsetenv("QTOKSIM_SEED");
}

TEST(CliDephasing, curve_matches_analytic_law) {
    auto rows = dephasing_curve(108.6, 100.0, 11, 100000, 1);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_DOUBLE_EQ(rows[0].t_us, 0.0);
    EXPECT_LE(rows[0].flip_rate, 3.0 / 100000);
    EXPECT_DOUBLE_EQ(rows[1].t_us, 10.0);
    EXPECT_NEAR(rows[1].analytic_p, 0.044, 5e-4);
    for (const auto &r : rows) {
        double p = 0.5 * (1 - std::exp(-r.t_us / 108.6));
        EXPECT_NEAR(r.analytic_p, p, 1e-15);
        EXPECT_NEAR(r.flip_rate, p, 4 * oracle::rate_sigma(p, 100000) + 1e-12) << "t = " << r.t_us;
    }
    auto csv = dephasing_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_us,flip_rate,analytic_p");
    EXPECT_EQ(count_lines(csv), 12u);
    EXPECT_THROW(dephasing_curve(108.6, 100.0, 1, 10, 1), UsageError);
    EXPECT_THROW(dephasing_curve(-1.0, 100.0, 3, 10, 1), UsageError);
}

TEST(CliSweep, collision_rates_non_increasing) {
    auto rows = epsilon_sweep(2, parse_grid("0:0.3:0.05"), Estimator::collision, 0.1, 1000, 3);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_DOUBLE_EQ(rows[0].rate, 1.0);
    for (size_t i = 1; i < rows.size(); i++) {
        EXPECT_LE(rows[i].rate, rows[i - 1].rate);
    }
}

TEST_F(CliTest, help_and_usage_errors) {
    EXPECT_EQ(invoke({"--help"}).code, kExitOk);
    EXPECT_EQ(invoke({}).code, kExitUsage);
    EXPECT_EQ(invoke({"no-such-command"}).code, kExitUsage);
    auto r = invoke({"qrpuf-enroll", "--out", path("crt.json")});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_FALSE(r.err.empty());
    EXPECT_FALSE(fs::exists(path("crt.json")));
    EXPECT_EQ(invoke({"uupuf-estimate", "--epsilon-grid", "0:1:0"}).code, kExitUsage);
    EXPECT_EQ(invoke({"dephasing-curve", "--points", "1"}).code, kExitUsage);
    EXPECT_EQ(invoke({"hmp4-run", "--t", "4", "--out", path("m.json")}).code, kExitUsage);
    EXPECT_FALSE(fs::exists(path("m.json")));
    EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(CliTest, bad_config_exits_two_without_output) {
    write("bad.json", R"({"protocol": "hmp4", "t": 10})");
    auto r = invoke({"scenario", "--config", path("bad.json"), "--out", path("m.json"), "--csv", path("m.csv")});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_FALSE(fs::exists(path("m.json")));
    EXPECT_FALSE(fs::exists(path("m.csv")));
    auto missing = invoke({"scenario", "--config", path("absent.json"), "--out", path("m.json")});
    EXPECT_NE(missing.code, kExitOk);
    EXPECT_FALSE(fs::exists(path("m.json")));
}

TEST_F(CliTest, scenario_is_reproducible_under_seed) {
    write("cfg.json", R"({"protocol": "hmp4", "trials": 50, "adversary": "random_guess"})");
    for (const char *tag : {"a", "b"}) {
        auto r = invoke({"scenario", "--config", path("cfg.json"), "--seed", "7", "--out",
                         path(std::string(tag) + ".json"), "--csv", path(std::string(tag) + ".csv")});
        ASSERT_EQ(r.code, kExitOk) << r.err;
        EXPECT_FALSE(r.out.empty());
    }
    EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    auto j = nlohmann::json::parse(slurp(path("a.json")));
    EXPECT_EQ(j.at("seed"), 7);
    EXPECT_EQ(count_lines(slurp(path("a.csv"))), 51u);
    auto other = invoke({"scenario", "--config", path("cfg.json"), "--seed", "8", "--csv", path("c.csv")});
    ASSERT_EQ(other.code, kExitOk);
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(CliTest, scenario_flags_override_config) {
    write("cfg.json", R"({"protocol": "qrpuf", "lambda": 2, "trials": 5, "seed": 4})");
    auto r = invoke({"scenario", "--config", path("cfg.json"), "--lambda", "3", "--trials", "9", "--parallel", "2",
                     "--out", path("m.json")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto j = nlohmann::json::parse(slurp(path("m.json")));
    EXPECT_EQ(j.at("trials"), 9);
    EXPECT_EQ(j.at("seed"), 4);
    EXPECT_EQ(j.at("config").at("lambda"), 3);
}

TEST_F(CliTest, estimate_grid_gives_seven_rows) {
    auto r = invoke({"uupuf-estimate", "--lambda", "2", "--epsilon-grid", "0:0.3:0.05", "--trials", "200", "--seed",
                     "1", "--out", path("est.csv")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto csv = slurp(path("est.csv"));
    EXPECT_EQ(count_lines(csv), 8u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,epsilon,delta,trials,rate,seed");
    auto again = invoke({"uupuf-estimate", "--lambda", "2", "--epsilon-grid", "0:0.3:0.05", "--trials", "200",
                         "--seed", "1"});
    EXPECT_EQ(again.out, csv);
}

TEST_F(CliTest, enroll_then_verify) {
    auto e = invoke({"qrpuf-enroll", "--lambda", "3", "--challenges", "4", "--out", path("crt.json"), "--puf-out",
                     path("puf.json"), "--seed", "2"});
    ASSERT_EQ(e.code, kExitOk) << e.err;
    auto v = invoke({"qrpuf-verify", "--crt", path("crt.json"), "--puf", path("puf.json"), "--out", path("v.json"),
                     "--seed", "2"});
    ASSERT_EQ(v.code, kExitOk) << v.err;
    auto j = nlohmann::json::parse(slurp(path("v.json")));
    EXPECT_EQ(j.at("accepts"), 4);
    auto crt = nlohmann::json::parse(slurp(path("crt.json")));
    EXPECT_EQ(crt.at("entries").size(), 4u);
    EXPECT_EQ(crt.at("entries")[0].at("y").get<std::string>().size(), 2u * 8u * 3u + 3u);
}

TEST_F(CliTest, rejects_bad_mode_and_malformed_files) {
    EXPECT_EQ(invoke({"qrpuf-enroll", "--lambda", "2", "--mode", "guess", "--out", path("crt.json")}).code,
              kExitUsage);
    EXPECT_FALSE(fs::exists(path("crt.json")));
    write("junk.json", "{");
    EXPECT_EQ(invoke({"qrpuf-verify", "--crt", path("junk.json"), "--puf", path("junk.json")}).code, kExitUsage);
}

TEST_F(CliTest, hmp4_run_and_dephasing_outputs) {
    auto h = invoke({"hmp4-run", "--trials", "20", "--seed", "3", "--out", path("h.json"), "--csv", path("h.csv")});
    ASSERT_EQ(h.code, kExitOk) << h.err;
    auto j = nlohmann::json::parse(slurp(path("h.json")));
    EXPECT_EQ(j.at("honest_accept_rate"), 1.0);
    auto d = invoke({"dephasing-curve", "--points", "3", "--shots", "1000", "--seed", "1"});
    ASSERT_EQ(d.code, kExitOk) << d.err;
    EXPECT_EQ(count_lines(d.out), 4u);
}
