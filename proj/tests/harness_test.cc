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
#include <numbers>

#include <json.hpp>

#include "oracle.h"
#include "qtoksim/harness/channel.h"
#include "qtoksim/harness/event_loop.h"
#include "qtoksim/harness/scenario.h"
#include "qtoksim/ops.h"

using namespace qtoksim;
using namespace qtoksim::harness;

namespace {

Payload msg(std::string kind, std::string to, size_t tag = 0) {
    Payload p;
    p.kind = std::move(kind);
    p.from = "test";
    p.to = std::move(to);
    p.tag = tag;
    return p;
}

ScenarioConfig noisy(ScenarioConfig cfg, double latency_us) {
    cfg.channel.latency_us = latency_us;
    cfg.channel.noise = NoiseParams{};
    return cfg;
}

ScenarioConfig hmp_config(Adversary adv, size_t trials, uint64_t seed) {
    ScenarioConfig cfg;
    cfg.protocol = Protocol::hmp4;
    cfg.adversary = adv;
    cfg.trials = trials;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

// --- Event loop ---------------------------------------------------------------

TEST(EventLoop, empty_run_gives_empty_trace) {
    EventLoop loop;
    EXPECT_TRUE(loop.run().empty());
}

TEST(EventLoop, equal_times_run_in_seq_order) {
    EventLoop loop;
    std::vector<size_t> order;
    loop.add_node({"a", Role::user, "honest"}, [&](const Event &e, EventLoop &) { order.push_back(e.payload.tag); });
    loop.schedule(5.0, msg("ping", "a", 2));
    loop.schedule(5.0, msg("ping", "a", 1));
    loop.schedule(1.0, msg("ping", "a", 3));
    loop.schedule(5.0, msg("ping", "a", 0));
    loop.run();
    EXPECT_EQ(order, (std::vector<size_t>{3, 2, 1, 0}));
}

TEST(EventLoop, handlers_schedule_followups_and_clock_is_monotone) {
    EventLoop loop;
    loop.add_node({"a", Role::user, ""}, [](const Event &e, EventLoop &l) {
        if (e.payload.tag < 5) {
            l.schedule_after(static_cast<double>(e.payload.tag), msg("ping", "b", e.payload.tag + 1));
        }
    });
    loop.add_node({"b", Role::verifier, ""}, [](const Event &e, EventLoop &l) {
        l.annotate("b", "note", "seen");
        l.schedule_after(0.5, msg("pong", "a", e.payload.tag));
    });
    loop.schedule(0.0, msg("ping", "a", 0));
    const auto &trace = loop.run();
    ASSERT_FALSE(trace.empty());
    for (size_t i = 1; i < trace.size(); i++) {
        EXPECT_LE(trace[i - 1].time_us, trace[i].time_us);
    }
    EXPECT_GT(loop.now(), 0.0);
}

TEST(EventLoop, errors) {
    EventLoop loop;
    loop.add_node({"a", Role::user, ""}, [](const Event &, EventLoop &) { throw std::runtime_error("boom"); });
    EXPECT_THROW(loop.add_node({"a", Role::user, ""}, [](const Event &, EventLoop &) {}), std::invalid_argument);
    EXPECT_THROW(loop.add_node({"", Role::user, ""}, [](const Event &, EventLoop &) {}), std::invalid_argument);
    EXPECT_THROW(loop.schedule(-1.0, msg("x", "a")), std::invalid_argument);
    EXPECT_THROW(loop.schedule(std::nan(""), msg("x", "a")), std::invalid_argument);
    loop.schedule(2.0, msg("x", "a"));
    try {
        loop.run();
        FAIL() << "expected ScenarioAborted";
    } catch (const ScenarioAborted &e) {
        EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
    }
}

TEST(EventLoop, unknown_destination_aborts) {
    EventLoop loop;
    loop.schedule(0.0, msg("x", "nobody"));
    EXPECT_THROW(loop.run(), ScenarioAborted);
}

TEST(EventLoop, loss_entries_carry_quantum_flag) {
    EventLoop loop;
    auto p = msg("challenge", "a");
    p.quantum = QuantumState{StateVector::basis(2, 0)};
    loop.record_loss(p);
    ASSERT_EQ(loop.trace().size(), 1u);
    EXPECT_EQ(loop.trace()[0].outcome, "lost");
    EXPECT_TRUE(loop.trace()[0].quantum);
}

// --- Channel ----------------------------------------------------------------------

TEST(Channel, ideal_is_identity) {
    RngStream r(1, 0);
    QuantumChannel ch;
    auto s = QuantumState{haar_state(4, r)};
    auto t = transmit_quantum(ch, s, r);
    ASSERT_FALSE(t.lost);
    EXPECT_EQ(std::get<StateVector>(*t.state).amplitudes(), std::get<StateVector>(s).amplitudes());
}

TEST(Channel, full_loss) {
    RngStream r(2, 0);
    QuantumChannel ch;
    ch.loss_prob = 1.0;
    for (int i = 0; i < 100; i++) {
        auto t = transmit_quantum(ch, QuantumState{StateVector::basis(2, 0)}, r);
        EXPECT_TRUE(t.lost);
        EXPECT_FALSE(t.state.has_value());
    }
}

TEST(Channel, plus_state_coherence_after_ten_microseconds) {
    RngStream r(3, 0);
    QuantumChannel ch;
    ch.latency_us = 10.0;
    ch.noise = NoiseParams{};
    ch.noise->idle_depolarize_prob = 0.0;
    auto plus = make_single_qubit_state(std::numbers::pi / 4, 0);
    auto t = transmit_quantum(ch, QuantumState{plus}, r);
    ASSERT_FALSE(t.lost);
    EXPECT_DOUBLE_EQ(t.arrival_delta_us, 10.0);
    auto rho = std::get<DensityMatrix>(*t.state);
    double scale = std::abs(rho.matrix()(0, 1)) / 0.5;
    EXPECT_NEAR(scale, std::exp(-10.0 / 108.6), 1e-12);
    EXPECT_NEAR(scale, 0.912, 5e-4);
}

TEST(Channel, validation) {
    QuantumChannel ch;
    ch.latency_us = -1;
    EXPECT_THROW(ch.validate(), std::invalid_argument);
    ch = QuantumChannel{};
    ch.loss_prob = 2;
    EXPECT_THROW(ch.validate(), std::invalid_argument);
}

TEST(Channel, intercept_resend_single_qubit_statistics) {
    // |0> survives a Z measurement and becomes |+> or |-> under X, so the
    // resent state is |0> with probability 3/4 when measured in Z.
    RngStream r(4, 0);
    int zeros = 0;
    const int n = 20000;
    for (int i = 0; i < n; i++) {
        auto s = intercept_resend(QuantumState{StateVector::basis(2, 0)}, r);
        zeros += std::norm(s[0]) > 0.99 ? 1 : 0;
        ASSERT_NEAR(s.amplitudes().norm(), 1.0, 1e-12);
    }
    EXPECT_NEAR(zeros / double(n), 0.5, 4 * oracle::rate_sigma(0.5, n));
}

// --- Scenario configuration ----------------------------------------------------------

TEST(ScenarioConfig, parse_defaults_and_roundtrip) {
    auto cfg = parse_scenario_config(R"({"protocol": "hmp4", "trials": 10, "seed": 3})");
    EXPECT_EQ(cfg.protocol, Protocol::hmp4);
    EXPECT_EQ(cfg.t, 12u);
    EXPECT_EQ(cfg.registers, 16u);
    // The echo records the threshold actually applied.
    auto echoed = parse_scenario_config(config_to_json(cfg));
    EXPECT_EQ(config_to_json(echoed), config_to_json(cfg));
    EXPECT_EQ(echoed.effective_hamming_threshold(), cfg.effective_hamming_threshold());
    auto n = parse_scenario_config(R"({"protocol": "qrpuf", "channel": {"latency_us": 5, "noise": true}})");
    ASSERT_TRUE(n.channel.noise.has_value());
    EXPECT_DOUBLE_EQ(n.channel.noise->t2_us, 108.6);
    EXPECT_EQ(n.effective_hamming_threshold(), 1u);
    auto custom = parse_scenario_config(R"({"protocol": "qrpuf", "channel": {"noise": {"t2_us": 50}}})");
    EXPECT_DOUBLE_EQ(custom.channel.noise->t2_us, 50.0);
    EXPECT_THROW(parse_scenario_config(R"({"trials": 10})"), ConfigError);
}

TEST(ScenarioConfig, inconsistencies_are_rejected) {
    const char *bad[] = {
        R"({"protocol": "qrpuf", "bogus": 1})",
        R"({"protocol": "nope"})",
        R"({"protocol": "qrpuf", "trials": 0})",
        R"({"protocol": "qrpuf", "trials": -3})",
        R"({"protocol": "qrpuf", "trials": "ten"})",
        R"({"protocol": "qrpuf", "adversary": "token_clone"})",
        R"({"protocol": "qrpuf", "adversary": "emulation"})",
        R"({"protocol": "hmp4", "adversary": "emulation", "adversary_knows_unitary": true})",
        R"({"protocol": "hmp4", "t": 10})",
        R"({"protocol": "hmp4", "t": 18, "registers": 16})",
        R"({"protocol": "uupuf", "tau": 1.5})",
        R"({"protocol": "uupuf", "lambda": 13})",
        R"({"protocol": "qrpuf", "lambda": 0})",
        R"({"protocol": "qrpuf", "challenges": 2, "challenges_per_session": 3})",
        R"({"protocol": "qrpuf", "channel": {"loss_prob": 1.5}})",
        R"({"protocol": "qrpuf", "channel": {"latency_us": -1}})",
        R"({"protocol": "qrpuf", "enroll_mode": "tomography", "enroll_shots": 2})",
        R"([1, 2])",
        R"(not json)",
    };
    for (const char *text : bad) {
        EXPECT_THROW(parse_scenario_config(text), ConfigError) << text;
    }
    ScenarioConfig cfg;
    cfg.trials = 0;
    EXPECT_THROW(run_scenario(cfg), ConfigError);
}

TEST(ScenarioConfig, enum_names) {
    for (auto a : {Adversary::none, Adversary::emulation, Adversary::intercept_resend, Adversary::random_guess,
                   Adversary::token_clone}) {
        EXPECT_EQ(parse_adversary(to_string(a)), a);
    }
    for (auto p : {Protocol::qrpuf, Protocol::uupuf, Protocol::hmp4}) {
        EXPECT_EQ(parse_protocol(to_string(p)), p);
    }
}

// --- Scenarios ------------------------------------------------------------------------

TEST(Scenario, qrpuf_honest_and_emulation_accept) {
    ScenarioConfig cfg;
    cfg.trials = 100;
    cfg.seed = 1;
    auto honest = run_scenario(cfg);
    EXPECT_EQ(honest.accepts, 100u);
    ASSERT_TRUE(honest.honest_accept_rate.has_value());
    EXPECT_DOUBLE_EQ(*honest.honest_accept_rate, 1.0);
    EXPECT_FALSE(honest.adversary_accept_rate.has_value());
    cfg.adversary = Adversary::emulation;
    cfg.adversary_knows_unitary = true;
    auto emu = run_scenario(cfg);
    ASSERT_TRUE(emu.adversary_accept_rate.has_value());
    EXPECT_DOUBLE_EQ(*emu.adversary_accept_rate, 1.0);
}

TEST(Scenario, qrpuf_intercept_below_baseline) {
    ScenarioConfig cfg;
    cfg.trials = 1000;
    cfg.seed = 2;
    auto base = run_scenario(cfg);
    cfg.adversary = Adversary::intercept_resend;
    auto ir = run_scenario(cfg);
    EXPECT_LT(*ir.adversary_accept_rate, *base.honest_accept_rate);
}

TEST(Scenario, uupuf_random_guess_rarely_accepts) {
    ScenarioConfig cfg;
    cfg.protocol = Protocol::uupuf;
    cfg.lambda = 3;
    cfg.adversary = Adversary::random_guess;
    cfg.trials = 300;
    cfg.seed = 3;
    auto m = run_scenario(cfg);
    EXPECT_LT(*m.adversary_accept_rate, 0.01);
    cfg.adversary = Adversary::none;
    EXPECT_DOUBLE_EQ(*run_scenario(cfg).honest_accept_rate, 1.0);
}

TEST(Scenario, hmp4_random_guess_matches_oracle) {
    auto m = run_scenario(hmp_config(Adversary::random_guess, 1000, 4));
    const double p = std::pow(0.5, 8);
    EXPECT_NEAR(*m.adversary_accept_rate, p, 3 * oracle::rate_sigma(p, 1000));
}

TEST(Scenario, hmp4_token_clone_matches_oracle) {
    // Right matching guessed with probability 1/2 (always passes), otherwise
    // a random answer passes with probability 1/2.
    auto m = run_scenario(hmp_config(Adversary::token_clone, 1000, 5));
    const double p = std::pow(0.75, 8);
    EXPECT_NEAR(*m.adversary_accept_rate, p, 4 * oracle::rate_sigma(p, 1000));
}

TEST(Scenario, hmp4_intercept_matches_oracle) {
    double per_register = oracle::intercept_resend_pass_probability();
    const double p = std::pow(per_register, 8);
    auto m = run_scenario(hmp_config(Adversary::intercept_resend, 2000, 6));
    RecordProperty("intercept_register_pass", std::to_string(per_register));
    EXPECT_NEAR(*m.adversary_accept_rate, p, 4 * oracle::rate_sigma(p, 2000));
}

TEST(Scenario, hmp4_records_error_metric) {
    auto m = run_scenario(hmp_config(Adversary::none, 50, 7));
    EXPECT_DOUBLE_EQ(*m.honest_accept_rate, 1.0);
    for (const auto &r : m.records) {
        EXPECT_EQ(r.error_metric, 0.0);
        EXPECT_EQ(r.seed, trial_seed(7, r.trial));
    }
}

// Property: a noiseless channel never does worse than a noisy one.
TEST(ScenarioProperty, baseline_ordering) {
    for (auto proto : {Protocol::qrpuf, Protocol::uupuf, Protocol::hmp4}) {
        ScenarioConfig cfg;
        cfg.protocol = proto;
        cfg.lambda = 3;
        cfg.trials = 200;
        cfg.seed = 8;
        cfg.hamming_threshold = 0;
        cfg.memory_dwell_us = 20.0;
        auto clean = run_scenario(cfg);
        auto dirty = run_scenario(noisy(cfg, 10.0));
        EXPECT_GE(*clean.honest_accept_rate, *dirty.honest_accept_rate) << to_string(proto);
    }
}

// Property: QR-PUF honest acceptance is non-increasing in channel dwell.
TEST(ScenarioProperty, qrpuf_acceptance_non_increasing_in_dwell) {
    ScenarioConfig cfg;
    cfg.trials = 1000;
    cfg.seed = 9;
    cfg.hamming_threshold = 0;
    double prev = 2.0;
    for (double latency : {0.0, 5.0, 10.0, 20.0, 40.0, 80.0}) {
        auto m = run_scenario(noisy(cfg, latency));
        double rate = *m.honest_accept_rate;
        EXPECT_LE(rate, prev + 3 * oracle::rate_sigma(std::max(rate, 0.01), 1000)) << "latency " << latency;
        prev = rate;
    }
    EXPECT_LT(prev, 0.9);
}

// Property: every quantum message is delivered or lost exactly once.
TEST(ScenarioProperty, conservation_audit) {
    for (auto proto : {Protocol::qrpuf, Protocol::uupuf, Protocol::hmp4}) {
        for (auto adv : {Adversary::none, Adversary::intercept_resend}) {
            ScenarioConfig cfg;
            cfg.protocol = proto;
            cfg.lambda = 2;
            cfg.adversary = adv;
            cfg.channel.loss_prob = 0.02;
            cfg.channel.latency_us = 1.0;
            cfg.trials = 20;
            cfg.seed = 10;
            cfg.validate();
            for (size_t t = 0; t < cfg.trials; t++) {
                auto out = run_trial(cfg, t);
                EXPECT_EQ(out.quantum_sent, out.quantum_delivered + out.quantum_lost);
                size_t delivered = 0, lost = 0;
                for (const auto &e : out.trace) {
                    if (e.quantum && e.outcome == "delivered") {
                        delivered++;
                    }
                    if (e.quantum && e.outcome == "lost") {
                        lost++;
                    }
                }
                EXPECT_EQ(delivered, out.quantum_delivered);
                EXPECT_EQ(lost, out.quantum_lost);
                EXPECT_EQ(out.record.lost, out.quantum_lost > 0);
                if (out.quantum_lost > 0 && proto != Protocol::hmp4) {
                    EXPECT_FALSE(out.record.accepted);
                }
            }
        }
    }
}

// Property: traces are time-ordered and runs are reproducible.
TEST(ScenarioProperty, clock_monotone_and_deterministic) {
    ScenarioConfig cfg = noisy(hmp_config(Adversary::none, 5, 11), 3.0);
    cfg.memory_dwell_us = 7.0;
    for (size_t t = 0; t < cfg.trials; t++) {
        auto a = run_trial(cfg, t);
        auto b = run_trial(cfg, t);
        EXPECT_EQ(a.trace, b.trace);
        EXPECT_EQ(a.record, b.record);
        for (size_t i = 1; i < a.trace.size(); i++) {
            EXPECT_LE(a.trace[i - 1].time_us, a.trace[i].time_us);
        }
    }
}

TEST(ScenarioProperty, parallel_matches_serial) {
    for (auto proto : {Protocol::qrpuf, Protocol::uupuf, Protocol::hmp4}) {
        ScenarioConfig cfg = noisy(ScenarioConfig{}, 5.0);
        cfg.protocol = proto;
        cfg.lambda = 2;
        cfg.trials = 40;
        cfg.seed = 12;
        auto serial = run_scenario(cfg, 1);
        auto parallel = run_scenario(cfg, 3);
        EXPECT_EQ(metrics_to_json(cfg, serial), metrics_to_json(cfg, parallel));
        EXPECT_EQ(metrics_to_csv(cfg, serial), metrics_to_csv(cfg, parallel));
    }
}

TEST(Scenario, different_seeds_differ) {
    ScenarioConfig cfg = noisy(hmp_config(Adversary::none, 30, 13), 5.0);
    cfg.memory_dwell_us = 50.0;
    auto a = run_scenario(cfg);
    cfg.seed = 14;
    auto b = run_scenario(cfg);
    EXPECT_NE(metrics_to_csv(cfg, a), metrics_to_csv(cfg, b));
}

TEST(Scenario, output_formats) {
    ScenarioConfig cfg = hmp_config(Adversary::random_guess, 3, 15);
    auto m = run_scenario(cfg);
    auto j = nlohmann::json::parse(metrics_to_json(cfg, m));
    EXPECT_EQ(j.at("protocol"), "hmp4");
    EXPECT_EQ(j.at("adversary"), "random_guess");
    EXPECT_EQ(j.at("trials"), 3);
    EXPECT_TRUE(j.contains("adversary_accept_rate"));
    EXPECT_TRUE(j.contains("config"));
    auto csv = metrics_to_csv(cfg, m);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,protocol,adversary,accepted,error_metric,dwell_us,seed");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
