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

#ifndef QTOKSIM_OPS_H
#define QTOKSIM_OPS_H

#include <span>

#include "qtoksim/rng.h"
#include "qtoksim/state.h"

namespace qtoksim {

/// cos(theta)|0> + e^{i phi} sin(theta)|1>, theta in [0, pi], phi in [0, 2pi].
///
/// This is the literal challenge parameterization, not the Bloch half-angle
/// one: (theta, phi) and (pi - theta, phi + pi) give the same ray.
StateVector make_single_qubit_state(double theta, double phi);

/// Kronecker product in list order; parts[0] becomes the most significant qubit.
StateVector tensor_states(std::span<const StateVector> parts);
UnitaryOp tensor_ops(std::span<const UnitaryOp> parts);

StateVector apply_unitary(const UnitaryOp &u, const StateVector &s);
DensityMatrix apply_unitary(const UnitaryOp &u, const DensityMatrix &rho);
QuantumState apply_unitary(const UnitaryOp &u, const QuantumState &s);

/// Applies a 2x2 unitary to qubit `qubit` (0 = most significant) without
/// building the full tensor product.
StateVector apply_to_qubit(const UnitaryOp &u, size_t qubit, const StateVector &s);
DensityMatrix apply_to_qubit(const UnitaryOp &u, size_t qubit, const DensityMatrix &rho);
QuantumState apply_to_qubit(const UnitaryOp &u, size_t qubit, const QuantumState &s);

/// Squared Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
/// Equals |<psi|phi>|^2 on pure states and is symmetric.
double fidelity(const DensityMatrix &a, const DensityMatrix &b);
double fidelity(const StateVector &a, const StateVector &b);
double fidelity(const StateVector &a, const DensityMatrix &b);
double fidelity(const QuantumState &a, const QuantumState &b);

/// 1/2 ||rho - sigma||_1.
double trace_distance(const DensityMatrix &a, const DensityMatrix &b);

/// Haar-distributed unitary: complex Ginibre matrix, QR, then the phases of
/// R's diagonal folded into Q so the result does not depend on the QR
/// implementation's sign convention.
UnitaryOp haar_unitary(size_t dim, RngStream &rng);
/// First column of a Haar unitary, sampled directly.
StateVector haar_state(size_t dim, RngStream &rng);

}  // namespace qtoksim

#endif
