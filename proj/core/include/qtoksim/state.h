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

#ifndef QTOKSIM_STATE_H
#define QTOKSIM_STATE_H

#include <Eigen/Dense>
#include <complex>
#include <variant>

namespace qtoksim {

using Complex = std::complex<double>;

/// Tolerance for algebraic identities (norms, hermiticity, unitarity).
inline constexpr double kAlgebraicTolerance = 1e-10;
/// Smallest eigenvalue a density matrix may have before it is rejected.
inline constexpr double kPsdTolerance = 1e-9;

bool is_power_of_two(size_t n);
/// log2 of a power of two.
size_t qubit_count_for_dim(size_t dim);

/// Pure state on a power-of-two dimensional Hilbert space.
///
/// Amplitudes are indexed in the computational basis with qubit 0 as the most
/// significant bit, so |q0 q1 ... q(n-1)> has index q0*2^(n-1) + ... + q(n-1).
class StateVector {
   public:
    /// Validates a power-of-two dimension and unit norm (within 1e-10).
    explicit StateVector(Eigen::VectorXcd amplitudes);

    /// Rescales to unit norm first; throws on a zero vector.
    static StateVector normalized(Eigen::VectorXcd amplitudes);
    static StateVector basis(size_t dim, size_t index);

    size_t dim() const { return static_cast<size_t>(amplitudes_.size()); }
    size_t num_qubits() const { return qubit_count_for_dim(dim()); }
    const Eigen::VectorXcd &amplitudes() const { return amplitudes_; }
    Complex operator[](size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

   private:
    Eigen::VectorXcd amplitudes_;
};

/// Mixed state. Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
   public:
    /// Validates every invariant; O(dim^3) because of the eigenvalue check.
    explicit DensityMatrix(Eigen::MatrixXcd matrix);

    static DensityMatrix from_pure(const StateVector &psi);
    static DensityMatrix maximally_mixed(size_t dim);

    /// Skips validation. Only for results of channel arithmetic that is
    /// known to preserve the invariants (unitary conjugation, convex mixing).
    static DensityMatrix trusted(Eigen::MatrixXcd matrix);

    size_t dim() const { return static_cast<size_t>(matrix_.rows()); }
    size_t num_qubits() const { return qubit_count_for_dim(dim()); }
    const Eigen::MatrixXcd &matrix() const { return matrix_; }
    double purity() const;
    /// Probability of computational basis outcome `index`.
    double population(size_t index) const;

   private:
    DensityMatrix() = default;
    Eigen::MatrixXcd matrix_;
};

/// Unitary operator; U^dagger U = I within Frobenius norm 1e-10.
class UnitaryOp {
   public:
    explicit UnitaryOp(Eigen::MatrixXcd matrix);

    /// Skips the O(dim^3) unitarity check; for products of unitaries.
    static UnitaryOp trusted(Eigen::MatrixXcd matrix);
    static UnitaryOp identity(size_t dim);
    static UnitaryOp pauli_x();
    static UnitaryOp pauli_y();
    static UnitaryOp pauli_z();
    static UnitaryOp hadamard();
    /// Basis change whose columns are the Y eigenstates (|0> +- i|1>)/sqrt2.
    static UnitaryOp y_basis();

    size_t dim() const { return static_cast<size_t>(matrix_.rows()); }
    const Eigen::MatrixXcd &matrix() const { return matrix_; }
    UnitaryOp adjoint() const;
    /// Operator product; `(*this) * other` applies `other` first.
    UnitaryOp operator*(const UnitaryOp &other) const;

   private:
    UnitaryOp() = default;
    Eigen::MatrixXcd matrix_;
};

/// A state that may have been made mixed by noise.
using QuantumState = std::variant<StateVector, DensityMatrix>;

size_t state_dim(const QuantumState &s);
DensityMatrix to_density(const QuantumState &s);
bool is_pure_vector(const QuantumState &s);

}  // namespace qtoksim

#endif
