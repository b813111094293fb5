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

#ifndef QTOKSIM_HARNESS_CHANNEL_H
#define QTOKSIM_HARNESS_CHANNEL_H

#include <optional>

#include "qtoksim/noise.h"
#include "qtoksim/rng.h"
#include "qtoksim/state.h"

namespace qtoksim::harness {

/// One-way quantum link. Without `noise` the link is ideal apart from loss.
struct QuantumChannel {
    double latency_us = 0.0;
    std::optional<NoiseParams> noise;
    double loss_prob = 0.0;

    /// Throws std::invalid_argument on a negative latency or bad probability.
    void validate() const;
    bool operator==(const QuantumChannel &) const = default;
};

struct Transmission {
    bool lost = false;
    std::optional<QuantumState> state;
    double arrival_delta_us = 0.0;
};

/// Loses the state with probability loss_prob. Otherwise every qubit dephases
/// for latency_us and, for a non-zero latency, takes one idle depolarizing
/// step. Noiseless channels deliver the input object unchanged.
Transmission transmit_quantum(const QuantumChannel &channel, const QuantumState &state, RngStream &rng);

/// Measures every qubit in an independently chosen Z or X basis and returns
/// the collapsed product state.
StateVector intercept_resend(const QuantumState &state, RngStream &rng);

}  // namespace qtoksim::harness

#endif
