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

#include "qtoksim/measurement.h"

#include <cmath>
#include <stdexcept>

#include "qtoksim/ops.h"

namespace qtoksim {

size_t sample_index(const Eigen::VectorXd &probabilities, RngStream &rng) {
    double u = rng.uniform() * probabilities.sum();
    double acc = 0.0;
    Eigen::Index last_nonzero = 0;
    for (Eigen::Index i = 0; i < probabilities.size(); i++) {
        if (probabilities(i) <= 0.0) {
            continue;
        }
        last_nonzero = i;
        acc += probabilities(i);
        if (u < acc) {
            return static_cast<size_t>(i);
        }
    }
    return static_cast<size_t>(last_nonzero);
}

Eigen::VectorXd computational_probabilities(const QuantumState &s) {
    if (const auto *psi = std::get_if<StateVector>(&s)) {
        return psi->amplitudes().cwiseAbs2();
    }
    const auto &rho = std::get<DensityMatrix>(s);
    return rho.matrix().diagonal().real().cwiseMax(0.0);
}

MeasurementResult measure_computational(const QuantumState &s, RngStream &rng) {
    size_t dim = state_dim(s);
    size_t n = qubit_count_for_dim(dim);
    size_t j = sample_index(computational_probabilities(s), rng);
    return MeasurementResult{Bitstring::from_uint(j, n), StateVector::basis(dim, j)};
}

MeasurementResult measure_in_basis(const QuantumState &s, const UnitaryOp &basis, RngStream &rng) {
    if (basis.dim() != state_dim(s)) {
        throw std::invalid_argument("measure_in_basis: dimension mismatch");
    }
    auto rotated = apply_unitary(basis.adjoint(), s);
    auto r = measure_computational(rotated, rng);
    auto j = static_cast<Eigen::Index>(r.outcome.to_uint());
    return MeasurementResult{std::move(r.outcome), StateVector::normalized(basis.matrix().col(j))};
}

std::array<double, 3> bloch_vector(const QuantumState &qubit) {
    if (state_dim(qubit) != 2) {
        throw std::invalid_argument("bloch_vector: expected a single qubit");
    }
    auto rho = to_density(qubit).matrix();
    return {2.0 * rho(1, 0).real(), 2.0 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

StateVector state_from_bloch(const std::array<double, 3> &direction) {
    double r = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]);
    if (r < 1e-15) {
        return StateVector::basis(2, 0);
    }
    double z = std::clamp(direction[2] / r, -1.0, 1.0);
    double polar = std::acos(z);
    double azimuth = std::atan2(direction[1], direction[0]);
    Eigen::VectorXcd v(2);
    v(0) = std::cos(polar / 2.0);
    v(1) = std::polar(std::sin(polar / 2.0), azimuth);
    return StateVector::normalized(std::move(v));
}

TomographyResult tomography_single_qubit(const StateSource &prepare, size_t shots, RngStream &rng) {
    if (shots < 3) {
        throw std::invalid_argument("tomography_single_qubit: need at least 3 shots");
    }
    const size_t per_basis = shots / 3;
    const UnitaryOp bases[3] = {UnitaryOp::hadamard(), UnitaryOp::y_basis(), UnitaryOp::identity(2)};
    std::array<double, 3> bloch{};
    for (size_t axis = 0; axis < 3; axis++) {
        const auto rot = bases[axis].adjoint();
        long plus = 0;
        for (size_t shot = 0; shot < per_basis; shot++) {
            auto s = prepare();
            if (state_dim(s) != 2) {
                throw std::invalid_argument("tomography_single_qubit: source is not a single qubit");
            }
            double p0 = computational_probabilities(apply_unitary(rot, s))(0);
            plus += rng.bernoulli(p0) ? 1 : -1;
        }
        bloch[axis] = static_cast<double>(plus) / static_cast<double>(per_basis);
    }
    return TomographyResult{bloch, state_from_bloch(bloch)};
}

}  // namespace qtoksim
