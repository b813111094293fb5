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

#include "qtoksim/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <stdexcept>

namespace qtoksim {

namespace {

constexpr double kAngleSlack = 1e-12;

void require_same_dim(size_t a, size_t b, const char *what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
    }
}

void require_qubit(const UnitaryOp &u, size_t qubit, size_t dim) {
    if (u.dim() != 2) {
        throw std::invalid_argument("apply_to_qubit: operator must be 2x2");
    }
    if (qubit >= qubit_count_for_dim(dim)) {
        throw std::out_of_range("apply_to_qubit: qubit index out of range");
    }
}

// Eigenvalues at or below this are treated as exact zeros before taking
// square roots; roundoff on a zero eigenvalue is ~1e-17 and its square root
// would otherwise leak ~1e-9 into the fidelity.
constexpr double kEigenFloor = 1e-14;

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); i++) {
        ev(i) = ev(i) > kEigenFloor ? std::sqrt(ev(i)) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Returns the principal eigenvector when `rho` is pure to within roundoff.
std::optional<Eigen::VectorXcd> pure_component(const DensityMatrix &rho) {
    if (std::abs(rho.purity() - 1.0) > 1e-12) {
        return std::nullopt;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix());
    return es.eigenvectors().col(es.eigenvectors().cols() - 1);
}

double clamp_unit(double x) {
    return std::clamp(x, 0.0, 1.0);
}

}  // namespace

StateVector make_single_qubit_state(double theta, double phi) {
    if (!(theta >= -kAngleSlack && theta <= std::numbers::pi + kAngleSlack)) {
        throw std::domain_error("make_single_qubit_state: theta must lie in [0, pi]");
    }
    if (!(phi >= -kAngleSlack && phi <= 2.0 * std::numbers::pi + kAngleSlack)) {
        throw std::domain_error("make_single_qubit_state: phi must lie in [0, 2pi]");
    }
    Eigen::VectorXcd v(2);
    v(0) = std::cos(theta);
    v(1) = std::polar(std::sin(theta), phi);
    return StateVector(std::move(v));
}

StateVector tensor_states(std::span<const StateVector> parts) {
    if (parts.empty()) {
        throw std::domain_error("tensor_states: empty list");
    }
    Eigen::VectorXcd acc = parts[0].amplitudes();
    for (size_t k = 1; k < parts.size(); k++) {
        const auto &p = parts[k].amplitudes();
        Eigen::VectorXcd next(acc.size() * p.size());
        for (Eigen::Index i = 0; i < acc.size(); i++) {
            next.segment(i * p.size(), p.size()) = acc(i) * p;
        }
        acc = std::move(next);
    }
    return StateVector::normalized(std::move(acc));
}

UnitaryOp tensor_ops(std::span<const UnitaryOp> parts) {
    if (parts.empty()) {
        throw std::domain_error("tensor_ops: empty list");
    }
    Eigen::MatrixXcd acc = parts[0].matrix();
    for (size_t k = 1; k < parts.size(); k++) {
        const auto &p = parts[k].matrix();
        Eigen::MatrixXcd next(acc.rows() * p.rows(), acc.cols() * p.cols());
        for (Eigen::Index i = 0; i < acc.rows(); i++) {
            for (Eigen::Index j = 0; j < acc.cols(); j++) {
                next.block(i * p.rows(), j * p.cols(), p.rows(), p.cols()) = acc(i, j) * p;
            }
        }
        acc = std::move(next);
    }
    return UnitaryOp::trusted(std::move(acc));
}

StateVector apply_unitary(const UnitaryOp &u, const StateVector &s) {
    require_same_dim(u.dim(), s.dim(), "apply_unitary");
    return StateVector::normalized(u.matrix() * s.amplitudes());
}

DensityMatrix apply_unitary(const UnitaryOp &u, const DensityMatrix &rho) {
    require_same_dim(u.dim(), rho.dim(), "apply_unitary");
    Eigen::MatrixXcd m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    // Re-symmetrize so roundoff never accumulates into non-Hermiticity.
    Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    return DensityMatrix::trusted(std::move(h));
}

QuantumState apply_unitary(const UnitaryOp &u, const QuantumState &s) {
    return std::visit([&](const auto &v) -> QuantumState { return apply_unitary(u, v); }, s);
}

StateVector apply_to_qubit(const UnitaryOp &u, size_t qubit, const StateVector &s) {
    require_qubit(u, qubit, s.dim());
    const auto &m = u.matrix();
    const size_t n = s.num_qubits();
    const size_t stride = size_t{1} << (n - 1 - qubit);
    Eigen::VectorXcd a = s.amplitudes();
    for (size_t i = 0; i < s.dim(); i++) {
        if (i & stride) {
            continue;
        }
        auto i0 = static_cast<Eigen::Index>(i);
        auto i1 = static_cast<Eigen::Index>(i | stride);
        Complex a0 = a(i0);
        Complex a1 = a(i1);
        a(i0) = m(0, 0) * a0 + m(0, 1) * a1;
        a(i1) = m(1, 0) * a0 + m(1, 1) * a1;
    }
    return StateVector::normalized(std::move(a));
}

DensityMatrix apply_to_qubit(const UnitaryOp &u, size_t qubit, const DensityMatrix &rho) {
    require_qubit(u, qubit, rho.dim());
    const auto &m = u.matrix();
    const size_t n = rho.num_qubits();
    const size_t stride = size_t{1} << (n - 1 - qubit);
    const auto d = static_cast<Eigen::Index>(rho.dim());
    Eigen::MatrixXcd r = rho.matrix();
    // Left multiply: rows i0/i1 mix.
    for (size_t i = 0; i < rho.dim(); i++) {
        if (i & stride) {
            continue;
        }
        auto i0 = static_cast<Eigen::Index>(i);
        auto i1 = static_cast<Eigen::Index>(i | stride);
        for (Eigen::Index c = 0; c < d; c++) {
            Complex x0 = r(i0, c);
            Complex x1 = r(i1, c);
            r(i0, c) = m(0, 0) * x0 + m(0, 1) * x1;
            r(i1, c) = m(1, 0) * x0 + m(1, 1) * x1;
        }
    }
    // Right multiply by U^dagger: columns i0/i1 mix.
    for (size_t i = 0; i < rho.dim(); i++) {
        if (i & stride) {
            continue;
        }
        auto i0 = static_cast<Eigen::Index>(i);
        auto i1 = static_cast<Eigen::Index>(i | stride);
        for (Eigen::Index row = 0; row < d; row++) {
            Complex x0 = r(row, i0);
            Complex x1 = r(row, i1);
            r(row, i0) = x0 * std::conj(m(0, 0)) + x1 * std::conj(m(0, 1));
            r(row, i1) = x0 * std::conj(m(1, 0)) + x1 * std::conj(m(1, 1));
        }
    }
    return DensityMatrix::trusted(std::move(r));
}

QuantumState apply_to_qubit(const UnitaryOp &u, size_t qubit, const QuantumState &s) {
    return std::visit([&](const auto &v) -> QuantumState { return apply_to_qubit(u, qubit, v); }, s);
}

double fidelity(const StateVector &a, const StateVector &b) {
    require_same_dim(a.dim(), b.dim(), "fidelity");
    return clamp_unit(std::norm(a.amplitudes().dot(b.amplitudes())));
}

double fidelity(const StateVector &a, const DensityMatrix &b) {
    require_same_dim(a.dim(), b.dim(), "fidelity");
    Complex v = a.amplitudes().dot(b.matrix() * a.amplitudes());
    return clamp_unit(v.real());
}

double fidelity(const DensityMatrix &a, const DensityMatrix &b) {
    require_same_dim(a.dim(), b.dim(), "fidelity");
    if (auto psi = pure_component(a)) {
        return fidelity(StateVector::normalized(*psi), b);
    }
    if (auto psi = pure_component(b)) {
        return fidelity(StateVector::normalized(*psi), a);
    }
    // Nuclear norm of sqrt(a) sqrt(b) equals tr sqrt(sqrt(a) b sqrt(a)) and,
    // computed from singular values, is symmetric in its arguments.
    Eigen::MatrixXcd prod = psd_sqrt(a.matrix()) * psd_sqrt(b.matrix());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(prod);
    double root = svd.singularValues().sum();
    return clamp_unit(root * root);
}

double fidelity(const QuantumState &a, const QuantumState &b) {
    const auto *pa = std::get_if<StateVector>(&a);
    const auto *pb = std::get_if<StateVector>(&b);
    if (pa && pb) {
        return fidelity(*pa, *pb);
    }
    if (pa) {
        return fidelity(*pa, std::get<DensityMatrix>(b));
    }
    if (pb) {
        return fidelity(*pb, std::get<DensityMatrix>(a));
    }
    return fidelity(std::get<DensityMatrix>(a), std::get<DensityMatrix>(b));
}

double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
    require_same_dim(a.dim(), b.dim(), "trace_distance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

UnitaryOp haar_unitary(size_t dim, RngStream &rng) {
    if (dim == 0) {
        throw std::invalid_argument("haar_unitary: dim must be positive");
    }
    auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXcd z(d, d);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index j = 0; j < d; j++) {
        for (Eigen::Index i = 0; i < d; i++) {
            z(i, j) = rng.complex_normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; j++) {
        Complex diag = r(j, j);
        double mag = std::abs(diag);
        Complex phase = mag > 0 ? diag / mag : Complex(1.0, 0.0);
        q.col(j) *= phase;
    }
    return UnitaryOp::trusted(std::move(q));
}

StateVector haar_state(size_t dim, RngStream &rng) {
    auto d = static_cast<Eigen::Index>(dim);
    Eigen::VectorXcd v(d);
    for (Eigen::Index i = 0; i < d; i++) {
        v(i) = rng.complex_normal();
    }
    return StateVector::normalized(std::move(v));
}

}  // namespace qtoksim
