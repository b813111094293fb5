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

#ifndef QTOKSIM_QRPUF_H
#define QTOKSIM_QRPUF_H

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtoksim/bitstring.h"
#include "qtoksim/responder.h"
#include "qtoksim/rng.h"
#include "qtoksim/state.h"

/// Quantum-readout PUF: a tensor product of hidden single-qubit gates, a
/// classical challenge-response table built with measurement "shifters", and
/// verification of a remote responder against that table.
namespace qtoksim::qrpuf {

class QrPuf {
   public:
    /// One 2x2 unitary per qubit; qubit 0 is the most significant.
    explicit QrPuf(std::vector<UnitaryOp> gates);

    size_t lambda() const { return gates_.size(); }
    const std::vector<UnitaryOp> &gates() const { return gates_; }

   private:
    std::vector<UnitaryOp> gates_;
};

/// lambda independent Haar-random single-qubit gates.
QrPuf qgen_qr(size_t lambda, RngStream &rng);

struct Challenge {
    size_t index = 0;
    /// (theta, phi) per qubit, in the cos(theta)|0> + e^{i phi} sin(theta)|1> form.
    std::vector<std::pair<double, double>> angles;
    Bitstring label;

    size_t lambda() const { return angles.size(); }
    StateVector qubit_state(size_t k) const;
    StateVector state() const;
};

/// Width n = ceil(log2 N), at least 1, of challenge labels for N challenges.
size_t label_width(size_t count);

/// `count` separable challenges with cos(theta) and phi uniform per qubit.
/// Labels enumerate 0..count-1 in binary. No pair of challenges is orthogonal.
std::vector<Challenge> select_challenges(size_t count, size_t lambda, RngStream &rng);

StateVector evaluate_qr(const QrPuf &puf, const Challenge &c);
/// Per-qubit outputs Phi_k |psi_k>; their tensor product is evaluate_qr.
std::vector<StateVector> evaluate_qubits(const QrPuf &puf, const Challenge &c);

/// Fixed-point codes for the shifter angles, each `bits` wide.
struct ShifterCode {
    uint32_t theta = 0;
    uint32_t phi = 0;
    bool operator==(const ShifterCode &) const = default;
};

struct Shifter {
    UnitaryOp exact;
    ShifterCode code;
};

/// Rotation with rows [cos t, e^{-ip} sin t], [-e^{ip} sin t, cos t]; sends
/// cos t|0> + e^{ip} sin t|1> to |0>.
UnitaryOp shifter_from_angles(double theta, double phi);

/// Exact shifter for `output_qubit` plus its quantized code:
/// (round(theta/pi * (2^b - 1)), round(phi/2pi * (2^b - 1))).
Shifter derive_shifter(const StateVector &output_qubit, unsigned bits);

/// The unitary the certifier can actually realize from a code.
UnitaryOp dequantize_shifter(ShifterCode code, unsigned bits);

/// Upper bound on the per-qubit infidelity of a dequantized shifter:
/// ((pi/2) 2^{1-b})^2 + (pi 2^{1-b})^2.
double quantization_infidelity_bound(unsigned bits);

/// w string: per qubit, theta code then phi code, each most significant bit
/// first. Length 2 * bits * lambda.
Bitstring encode_shifters(std::span<const ShifterCode> codes, unsigned bits);
std::vector<ShifterCode> decode_shifters(const Bitstring &w, size_t lambda, unsigned bits);

struct ShifterConfig {
    std::vector<UnitaryOp> exact_ops;
    std::vector<ShifterCode> quantized;
    Bitstring w;
};

/// Shifters for a list of (estimated) output qubits.
ShifterConfig derive_shifter_config(std::span<const StateVector> output_qubits, unsigned bits);

enum class EnrollMode { analytic, tomography };

std::string to_string(EnrollMode mode);
EnrollMode parse_enroll_mode(std::string_view text);

struct CrtEntry {
    Challenge challenge;
    Bitstring w;
    Bitstring o;
    /// w || o.
    Bitstring y;
};

struct ChallengeResponseTable {
    size_t lambda = 0;
    size_t n = 0;
    unsigned bits = 0;
    EnrollMode mode = EnrollMode::analytic;
    std::vector<CrtEntry> entries;

    /// Dequantized shifters recorded for `entry_index`.
    std::vector<UnitaryOp> shifters(size_t entry_index) const;
};

inline constexpr unsigned kDefaultShifterBits = 8;

/// Builds the CRT. Analytic mode reads each output qubit exactly and takes the
/// most likely outcome after shifting, so noiseless o strings are all zero.
/// Tomography mode estimates each output qubit from `shots` queries and takes
/// the majority of shots/3 measurements after shifting.
ChallengeResponseTable enroll(const QrPuf &puf, std::span<const Challenge> challenges, EnrollMode mode,
                              size_t shots, unsigned bits, RngStream &rng);

Responder honest_responder(QrPuf puf);

struct VerifyOptions {
    size_t hamming_threshold = 0;
    /// Number of independent queries; each qubit's bit is the majority vote
    /// (ties count as 1). Use 1 for a responder that cannot be re-queried.
    size_t shots_per_qubit = 1;
    double readout_flip_prob = 0.0;
};

enum class VerifyStatus { ok, dimension_mismatch, lost };

struct VerifyResult {
    bool accept = false;
    Bitstring observed_o;
    /// Hamming weight of observed_o XOR the stored o.
    size_t hamming_weight = 0;
    VerifyStatus status = VerifyStatus::ok;
};

VerifyResult verify(const ChallengeResponseTable &crt, size_t entry_index, const Responder &responder,
                    const VerifyOptions &options, RngStream &rng);
VerifyResult verify(const ChallengeResponseTable &crt, size_t entry_index, const Responder &responder,
                    size_t hamming_threshold, size_t shots_per_qubit, RngStream &rng);

/// Verification half that runs after the responses are collected; the harness
/// uses it when replies travel through its event loop.
VerifyResult verify_responses(const ChallengeResponseTable &crt, size_t entry_index,
                              std::span<const std::optional<QuantumState>> responses, const VerifyOptions &options,
                              RngStream &rng);

std::string crt_to_json(const ChallengeResponseTable &crt);
ChallengeResponseTable crt_from_json(std::string_view text);

std::string puf_to_json(const QrPuf &puf);
QrPuf puf_from_json(std::string_view text);

}  // namespace qtoksim::qrpuf

#endif
