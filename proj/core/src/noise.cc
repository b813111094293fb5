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

#include "qtoksim/noise.h"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "qtoksim/ops.h"

namespace qtoksim {

namespace {

void require_probability(double p, const char *what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

void require_dwell(double dwell_us, double t2_us) {
    if (!(dwell_us >= 0.0)) {
        throw std::invalid_argument("dephase: dwell time must be non-negative");
    }
    if (!(t2_us > 0.0)) {
        throw std::invalid_argument("dephase: T2 must be positive");
    }
}

}  // namespace

void NoiseParams::validate() const {
    if (!(t2_us > 0.0) || !std::isfinite(t2_us)) {
        throw std::invalid_argument("NoiseParams: t2_us must be positive");
    }
    require_probability(readout_flip_prob, "NoiseParams: readout_flip_prob");
    require_probability(idle_depolarize_prob, "NoiseParams: idle_depolarize_prob");
}

double dephasing_flip_probability(double dwell_us, double t2_us) {
    require_dwell(dwell_us, t2_us);
    return 0.5 * (1.0 - std::exp(-dwell_us / t2_us));
}

DensityMatrix dephase(const DensityMatrix &rho, double dwell_us, double t2_us) {
    if (rho.dim() != 2) {
        throw std::invalid_argument("dephase: expected a single-qubit density matrix");
    }
    return dephase_qubit(rho, 0, dwell_us, t2_us);
}

DensityMatrix dephase_qubit(const DensityMatrix &rho, size_t qubit, double dwell_us, double t2_us) {
    require_dwell(dwell_us, t2_us);
    const size_t n = rho.num_qubits();
    if (qubit >= n) {
        throw std::out_of_range("dephase_qubit: qubit index out of range");
    }
    const double decay = std::exp(-dwell_us / t2_us);
    const size_t mask = size_t{1} << (n - 1 - qubit);
    Eigen::MatrixXcd m = rho.matrix();
    for (Eigen::Index i = 0; i < m.rows(); i++) {
        for (Eigen::Index j = 0; j < m.cols(); j++) {
            if ((static_cast<size_t>(i) ^ static_cast<size_t>(j)) & mask) {
                m(i, j) *= decay;
            }
        }
    }
    return DensityMatrix::trusted(std::move(m));
}

DensityMatrix dephase_all(const DensityMatrix &rho, double dwell_us, double t2_us) {
    require_dwell(dwell_us, t2_us);
    const double decay = std::exp(-dwell_us / t2_us);
    Eigen::MatrixXcd m = rho.matrix();
    for (Eigen::Index i = 0; i < m.rows(); i++) {
        for (Eigen::Index j = 0; j < m.cols(); j++) {
            auto differing = std::popcount(static_cast<size_t>(i) ^ static_cast<size_t>(j));
            if (differing) {
                m(i, j) *= std::pow(decay, differing);
            }
        }
    }
    return DensityMatrix::trusted(std::move(m));
}

DensityMatrix depolarize(const DensityMatrix &rho, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("depolarize: p must lie in [0, 1]");
    }
    auto d = static_cast<Eigen::Index>(rho.dim());
    Eigen::MatrixXcd m =
        (1.0 - p) * rho.matrix() + (p / static_cast<double>(d)) * Eigen::MatrixXcd::Identity(d, d);
    return DensityMatrix::trusted(std::move(m));
}

DensityMatrix depolarize_qubit(const DensityMatrix &rho, size_t qubit, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("depolarize_qubit: p must lie in [0, 1]");
    }
    if (p == 0.0) {
        return rho;
    }
    // Pauli twirl: (1 - 3p/4) rho + p/4 (X rho X + Y rho Y + Z rho Z).
    auto x = apply_to_qubit(UnitaryOp::pauli_x(), qubit, rho).matrix();
    auto y = apply_to_qubit(UnitaryOp::pauli_y(), qubit, rho).matrix();
    auto z = apply_to_qubit(UnitaryOp::pauli_z(), qubit, rho).matrix();
    Eigen::MatrixXcd m = (1.0 - 0.75 * p) * rho.matrix() + (0.25 * p) * (x + y + z);
    return DensityMatrix::trusted(std::move(m));
}

bool flip_readout(bool bit, double prob, RngStream &rng) {
    require_probability(prob, "flip_readout: prob");
    return rng.bernoulli(prob) ? !bit : bit;
}

}  // namespace qtoksim
