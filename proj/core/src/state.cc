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

#include "qtoksim/state.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qtoksim {

bool is_power_of_two(size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

size_t qubit_count_for_dim(size_t dim) {
    if (!is_power_of_two(dim)) {
        throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
    }
    size_t n = 0;
    while ((size_t{1} << n) < dim) {
        n++;
    }
    return n;
}

StateVector::StateVector(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (!is_power_of_two(dim())) {
        throw std::invalid_argument("StateVector: dimension must be a power of two");
    }
    double n2 = amplitudes_.squaredNorm();
    if (!(std::abs(n2 - 1.0) <= kAlgebraicTolerance)) {
        throw std::invalid_argument("StateVector: amplitudes are not normalized");
    }
}

StateVector StateVector::normalized(Eigen::VectorXcd amplitudes) {
    double n = amplitudes.norm();
    if (!(n > 1e-300) || !std::isfinite(n)) {
        throw std::invalid_argument("StateVector: cannot normalize a zero vector");
    }
    amplitudes /= n;
    return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(size_t dim, size_t index) {
    if (index >= dim) {
        throw std::out_of_range("StateVector::basis: index out of range");
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v));
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) {
        throw std::invalid_argument("DensityMatrix: matrix must be square");
    }
    if (!is_power_of_two(dim())) {
        throw std::invalid_argument("DensityMatrix: dimension must be a power of two");
    }
    if ((matrix_ - matrix_.adjoint()).norm() > kAlgebraicTolerance) {
        throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex(1.0, 0.0)) > kAlgebraicTolerance) {
        throw std::invalid_argument("DensityMatrix: trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTolerance) {
        throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
    }
}

DensityMatrix DensityMatrix::from_pure(const StateVector &psi) {
    return trusted(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(size_t dim) {
    if (!is_power_of_two(dim)) {
        throw std::invalid_argument("DensityMatrix: dimension must be a power of two");
    }
    auto d = static_cast<Eigen::Index>(dim);
    return trusted(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::trusted(Eigen::MatrixXcd matrix) {
    DensityMatrix out;
    out.matrix_ = std::move(matrix);
    return out;
}

double DensityMatrix::purity() const {
    // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    return matrix_.squaredNorm();
}

double DensityMatrix::population(size_t index) const {
    auto i = static_cast<Eigen::Index>(index);
    return std::max(0.0, matrix_(i, i).real());
}

UnitaryOp::UnitaryOp(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
        throw std::invalid_argument("UnitaryOp: matrix must be square and non-empty");
    }
    auto d = matrix_.rows();
    if ((matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(d, d)).norm() > kAlgebraicTolerance) {
        throw std::invalid_argument("UnitaryOp: matrix is not unitary");
    }
}

UnitaryOp UnitaryOp::trusted(Eigen::MatrixXcd matrix) {
    UnitaryOp out;
    out.matrix_ = std::move(matrix);
    return out;
}

UnitaryOp UnitaryOp::identity(size_t dim) {
    auto d = static_cast<Eigen::Index>(dim);
    return trusted(Eigen::MatrixXcd::Identity(d, d));
}

UnitaryOp UnitaryOp::pauli_x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return trusted(m);
}

UnitaryOp UnitaryOp::pauli_y() {
    Eigen::Matrix2cd m;
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return trusted(m);
}

UnitaryOp UnitaryOp::pauli_z() {
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return trusted(m);
}

UnitaryOp UnitaryOp::hadamard() {
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::Matrix2cd m;
    m << r, r, r, -r;
    return trusted(m);
}

UnitaryOp UnitaryOp::y_basis() {
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::Matrix2cd m;
    m << r, r, Complex(0, r), Complex(0, -r);
    return trusted(m);
}

UnitaryOp UnitaryOp::adjoint() const {
    return trusted(matrix_.adjoint());
}

UnitaryOp UnitaryOp::operator*(const UnitaryOp &other) const {
    if (other.dim() != dim()) {
        throw std::invalid_argument("UnitaryOp: dimension mismatch in product");
    }
    return trusted(matrix_ * other.matrix_);
}

size_t state_dim(const QuantumState &s) {
    return std::visit([](const auto &v) { return v.dim(); }, s);
}

DensityMatrix to_density(const QuantumState &s) {
    if (const auto *psi = std::get_if<StateVector>(&s)) {
        return DensityMatrix::from_pure(*psi);
    }
    return std::get<DensityMatrix>(s);
}

bool is_pure_vector(const QuantumState &s) {
    return std::holds_alternative<StateVector>(s);
}

}  // namespace qtoksim
