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

#ifndef QTOKSIM_MEASUREMENT_H
#define QTOKSIM_MEASUREMENT_H

#include <array>
#include <functional>

#include "qtoksim/bitstring.h"
#include "qtoksim/rng.h"
#include "qtoksim/state.h"

namespace qtoksim {

struct MeasurementResult {
    Bitstring outcome;
    StateVector collapsed;
};

/// Born-rule sample of a basis index from a probability vector that sums to
/// one (up to roundoff). Uses exactly one uniform draw.
size_t sample_index(const Eigen::VectorXd &probabilities, RngStream &rng);

/// Probabilities of each computational basis outcome.
Eigen::VectorXd computational_probabilities(const QuantumState &s);

MeasurementResult measure_computational(const QuantumState &s, RngStream &rng);

/// Measures in the orthonormal basis given by the columns of `basis`:
/// rotate by basis^dagger, measure computationally, and report the basis
/// column that was hit as the collapsed state.
MeasurementResult measure_in_basis(const QuantumState &s, const UnitaryOp &basis, RngStream &rng);

/// Repeatable preparation of a single-qubit state (possibly noisy).
using StateSource = std::function<QuantumState()>;

struct TomographyResult {
    /// Empirical (<X>, <Y>, <Z>).
    std::array<double, 3> bloch;
    /// Pure state along the normalized Bloch direction.
    StateVector estimate;
};

/// Single-qubit tomography with shots/3 measurements in each of the X, Y and
/// Z bases. Requires shots >= 3.
TomographyResult tomography_single_qubit(const StateSource &prepare, size_t shots, RngStream &rng);

std::array<double, 3> bloch_vector(const QuantumState &qubit);
/// Pure state whose Bloch vector points along `direction` (need not be unit);
/// the zero vector maps to |0>.
StateVector state_from_bloch(const std::array<double, 3> &direction);

}  // namespace qtoksim

#endif
