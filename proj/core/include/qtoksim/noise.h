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

#ifndef QTOKSIM_NOISE_H
#define QTOKSIM_NOISE_H

#include "qtoksim/rng.h"
#include "qtoksim/state.h"

namespace qtoksim {

/// Per-qubit noise model. Times are in microseconds.
///
/// Defaults are the averages reported for a superconducting backend: readout
/// error 1.581e-2, idle error 3.654e-4 per gate time, and T2 = 108.6 us, the
/// value for which |+> decays to |-> with probability 0.044 after 10 us.
struct NoiseParams {
    double t2_us = 108.6;
    double readout_flip_prob = 1.581e-2;
    double idle_depolarize_prob = 3.654e-4;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
    bool operator==(const NoiseParams &) const = default;
};

/// Probability that |+> is found as |-> after `dwell_us` of pure dephasing.
double dephasing_flip_probability(double dwell_us, double t2_us);

/// Single-qubit phase damping: off-diagonals scale by e^{-t/T2}, which is
/// the Z-twirl (1-p) rho + p Z rho Z with p = (1 - e^{-t/T2}) / 2.
DensityMatrix dephase(const DensityMatrix &rho, double dwell_us, double t2_us);
/// Same channel on one qubit of a multi-qubit state.
DensityMatrix dephase_qubit(const DensityMatrix &rho, size_t qubit, double dwell_us, double t2_us);
/// Independent dephasing on every qubit.
DensityMatrix dephase_all(const DensityMatrix &rho, double dwell_us, double t2_us);

/// (1-p) rho + p I/dim on the whole register.
DensityMatrix depolarize(const DensityMatrix &rho, double p);
/// (1-p) rho + p (I/2 (x) tr_q rho) on qubit `qubit`.
DensityMatrix depolarize_qubit(const DensityMatrix &rho, size_t qubit, double p);

/// Flips `bit` with probability `prob`. Draws one uniform unless prob is 0 or 1.
bool flip_readout(bool bit, double prob, RngStream &rng);

}  // namespace qtoksim

#endif
