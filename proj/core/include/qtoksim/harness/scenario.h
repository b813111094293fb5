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

#ifndef QTOKSIM_HARNESS_SCENARIO_H
#define QTOKSIM_HARNESS_SCENARIO_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qtoksim/harness/channel.h"
#include "qtoksim/harness/event_loop.h"
#include "qtoksim/qrpuf.h"

namespace qtoksim::harness {

/// Inconsistent or malformed scenario configuration.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

enum class Protocol { qrpuf, uupuf, hmp4 };
enum class Adversary { none, emulation, intercept_resend, random_guess, token_clone };

std::string to_string(Protocol p);
std::string to_string(Adversary a);
Protocol parse_protocol(std::string_view text);
Adversary parse_adversary(std::string_view text);

struct ScenarioConfig {
    Protocol protocol = Protocol::qrpuf;
    size_t lambda = 4;

    // QR-PUF and unknown-unitary PUF.
    /// CRT size.
    size_t challenges = 8;
    /// CRT entries consumed (without replacement) by one session; the session
    /// accepts only if every one of them passes.
    size_t challenges_per_session = 2;
    unsigned quant_bits = qrpuf::kDefaultShifterBits;
    qrpuf::EnrollMode enroll_mode = qrpuf::EnrollMode::analytic;
    size_t enroll_shots = 3000;
    /// Unset means 0 on a noiseless channel and ceil(0.1 * lambda) otherwise.
    std::optional<size_t> hamming_threshold;
    size_t shots_per_qubit = 1;

    // Unknown-unitary PUF.
    size_t k1 = 50;
    size_t k2 = 50;
    double tau = 0.9;

    // HMP4 token.
    size_t registers = 16;
    size_t control_registers = 0;
    size_t t = 12;
    size_t error_tolerance = 0;
    double memory_dwell_us = 0.0;

    QuantumChannel channel;
    Adversary adversary = Adversary::none;
    bool adversary_knows_unitary = false;
    size_t trials = 100;
    uint64_t seed = 0;

    /// Throws ConfigError on any inconsistency.
    void validate() const;
    size_t effective_hamming_threshold() const;
    bool operator==(const ScenarioConfig &) const = default;
};

/// Parses and validates a JSON object. Unknown keys are rejected.
ScenarioConfig parse_scenario_config(std::string_view json_text);
std::string config_to_json(const ScenarioConfig &cfg);

struct TrialRecord {
    size_t trial = 0;
    bool accepted = false;
    bool lost = false;
    /// Total Hamming weight (qrpuf), lowest f_hat (uupuf) or error count (hmp4).
    double error_metric = 0.0;
    double dwell_us = 0.0;
    /// Seed of the trial's own stream; replays the trial on its own.
    uint64_t seed = 0;

    bool operator==(const TrialRecord &) const = default;
};

struct TrialOutcome {
    TrialRecord record;
    std::vector<TraceEntry> trace;
    size_t quantum_sent = 0;
    size_t quantum_delivered = 0;
    size_t quantum_lost = 0;
};

struct Metrics {
    size_t trials = 0;
    size_t accepts = 0;
    size_t lost = 0;
    double accept_rate = 0.0;
    /// Set when no adversary is configured.
    std::optional<double> honest_accept_rate;
    /// Set when an adversary is configured.
    std::optional<double> adversary_accept_rate;
    std::vector<TrialRecord> records;
};

uint64_t trial_seed(uint64_t scenario_seed, size_t trial);

/// One session on its own event loop. `cfg` must already be valid.
TrialOutcome run_trial(const ScenarioConfig &cfg, size_t trial);

/// Validates, then runs every trial. With workers > 1 trials are spread
/// across threads; results are merged by trial index, so the output does not
/// depend on the worker count.
Metrics run_scenario(const ScenarioConfig &cfg, size_t workers = 1);

std::string metrics_to_json(const ScenarioConfig &cfg, const Metrics &m);
/// Header: trial,protocol,adversary,accepted,error_metric,dwell_us,seed
std::string metrics_to_csv(const ScenarioConfig &cfg, const Metrics &m);

}  // namespace qtoksim::harness

#endif
