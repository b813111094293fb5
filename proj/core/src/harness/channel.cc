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

#include "qtoksim/harness/channel.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qtoksim/measurement.h"
#include "qtoksim/ops.h"

namespace qtoksim::harness {

void QuantumChannel::validate() const {
    if (!(latency_us >= 0.0) || !std::isfinite(latency_us)) {
        throw std::invalid_argument("channel latency_us must be a non-negative number");
    }
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) {
        throw std::invalid_argument("channel loss_prob must lie in [0, 1]");
    }
    if (noise) {
        noise->validate();
    }
}

Transmission transmit_quantum(const QuantumChannel &channel, const QuantumState &state, RngStream &rng) {
    if (rng.bernoulli(channel.loss_prob)) {
        return Transmission{true, std::nullopt, channel.latency_us};
    }
    if (!channel.noise || channel.latency_us == 0.0) {
        return Transmission{false, state, channel.latency_us};
    }
    DensityMatrix rho = dephase_all(to_density(state), channel.latency_us, channel.noise->t2_us);
    for (size_t q = 0; q < rho.num_qubits(); q++) {
        rho = depolarize_qubit(rho, q, channel.noise->idle_depolarize_prob);
    }
    return Transmission{false, QuantumState{std::move(rho)}, channel.latency_us};
}

StateVector intercept_resend(const QuantumState &state, RngStream &rng) {
    const size_t n = qubit_count_for_dim(state_dim(state));
    std::vector<bool> x_basis(n);
    QuantumState rotated = state;
    for (size_t q = 0; q < n; q++) {
        x_basis[q] = rng.below(2) == 1;
        if (x_basis[q]) {
            rotated = apply_to_qubit(UnitaryOp::hadamard(), q, rotated);
        }
    }
    const size_t outcome = sample_index(computational_probabilities(rotated), rng);
    std::vector<StateVector> parts;
    parts.reserve(n);
    for (size_t q = 0; q < n; q++) {
        size_t bit = (outcome >> (n - 1 - q)) & 1;
        StateVector s = StateVector::basis(2, bit);
        parts.push_back(x_basis[q] ? apply_unitary(UnitaryOp::hadamard(), s) : s);
    }
    return tensor_states(parts);
}

}  // namespace qtoksim::harness
