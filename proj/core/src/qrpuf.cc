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

#include "qtoksim/qrpuf.h"

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <set>
#include <stdexcept>

#include "qtoksim/measurement.h"
#include "qtoksim/noise.h"
#include "qtoksim/ops.h"

namespace qtoksim::qrpuf {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

void require_bits(unsigned bits) {
    if (bits < 1 || bits > 24) {
        throw std::invalid_argument("shifter bits must lie in [1, 24]");
    }
}

double code_scale(unsigned bits) {
    return static_cast<double>((uint64_t{1} << bits) - 1);
}

// Product-state overlap; zero iff some qubit pair is orthogonal.
double product_fidelity(const Challenge &a, const Challenge &b) {
    double f = 1.0;
    for (size_t k = 0; k < a.lambda(); k++) {
        f *= fidelity(a.qubit_state(k), b.qubit_state(k));
    }
    return f;
}

std::pair<double, double> random_angles(RngStream &rng) {
    double c = rng.uniform(-1.0, 1.0);
    double theta = std::acos(c);
    double phi = rng.uniform(0.0, 2.0 * kPi);
    return {theta, phi};
}

}  // namespace

QrPuf::QrPuf(std::vector<UnitaryOp> gates) : gates_(std::move(gates)) {
    if (gates_.empty()) {
        throw std::invalid_argument("QrPuf: lambda must be at least 1");
    }
    for (const auto &g : gates_) {
        if (g.dim() != 2) {
            throw std::invalid_argument("QrPuf: every gate must act on one qubit");
        }
        // Re-validate unitarity; gates may come from deserialized input.
        UnitaryOp checked(g.matrix());
        (void)checked;
    }
}

QrPuf qgen_qr(size_t lambda, RngStream &rng) {
    if (lambda == 0) {
        throw std::invalid_argument("qgen_qr: lambda must be at least 1");
    }
    std::vector<UnitaryOp> gates;
    gates.reserve(lambda);
    for (size_t k = 0; k < lambda; k++) {
        gates.push_back(haar_unitary(2, rng));
    }
    return QrPuf(std::move(gates));
}

StateVector Challenge::qubit_state(size_t k) const {
    return make_single_qubit_state(angles.at(k).first, angles.at(k).second);
}

StateVector Challenge::state() const {
    std::vector<StateVector> parts;
    parts.reserve(lambda());
    for (size_t k = 0; k < lambda(); k++) {
        parts.push_back(qubit_state(k));
    }
    return tensor_states(parts);
}

size_t label_width(size_t count) {
    size_t n = 1;
    while (n < 64 && (uint64_t{1} << n) < count) {
        n++;
    }
    return n;
}

std::vector<Challenge> select_challenges(size_t count, size_t lambda, RngStream &rng) {
    if (count == 0) {
        throw std::invalid_argument("select_challenges: need at least one challenge");
    }
    if (lambda == 0) {
        throw std::invalid_argument("select_challenges: lambda must be at least 1");
    }
    const size_t n = label_width(count);
    std::vector<Challenge> out;
    out.reserve(count);
    for (size_t i = 0; i < count; i++) {
        Challenge c;
        c.index = i;
        c.label = Bitstring::from_uint(i, n);
        for (int attempt = 0;; attempt++) {
            c.angles.clear();
            for (size_t k = 0; k < lambda; k++) {
                c.angles.push_back(random_angles(rng));
            }
            bool orthogonal = false;
            for (const auto &prev : out) {
                if (product_fidelity(prev, c) < 1e-12) {
                    orthogonal = true;
                    break;
                }
            }
            if (!orthogonal) {
                break;
            }
            if (attempt > 1000) {
                throw std::runtime_error("select_challenges: could not avoid orthogonal challenges");
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<StateVector> evaluate_qubits(const QrPuf &puf, const Challenge &c) {
    if (c.lambda() != puf.lambda()) {
        throw std::invalid_argument("evaluate_qr: challenge and PUF have different lambda");
    }
    std::vector<StateVector> out;
    out.reserve(puf.lambda());
    for (size_t k = 0; k < puf.lambda(); k++) {
        out.push_back(apply_unitary(puf.gates()[k], c.qubit_state(k)));
    }
    return out;
}

StateVector evaluate_qr(const QrPuf &puf, const Challenge &c) {
    auto parts = evaluate_qubits(puf, c);
    return tensor_states(parts);
}

UnitaryOp shifter_from_angles(double theta, double phi) {
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    Eigen::Matrix2cd m;
    m << ct, std::polar(st, -phi), -std::polar(st, phi), ct;
    return UnitaryOp::trusted(m);
}

Shifter derive_shifter(const StateVector &output_qubit, unsigned bits) {
    require_bits(bits);
    if (output_qubit.dim() != 2) {
        throw std::invalid_argument("derive_shifter: expected a single-qubit state");
    }
    const Complex a = output_qubit[0];
    const Complex b = output_qubit[1];
    const double theta = std::atan2(std::abs(b), std::abs(a));
    double phi = 0.0;
    if (std::abs(b) > 1e-15) {
        phi = std::arg(b) - (std::abs(a) > 1e-15 ? std::arg(a) : 0.0);
        phi = std::fmod(phi, 2.0 * kPi);
        if (phi < 0) {
            phi += 2.0 * kPi;
        }
    }
    // The shifter of the rephased state e^{-i arg a}|psi> is also a shifter of
    // |psi> up to global phase.
    const double scale = code_scale(bits);
    ShifterCode code{
        static_cast<uint32_t>(std::lround(theta / kPi * scale)),
        static_cast<uint32_t>(std::lround(phi / (2.0 * kPi) * scale)),
    };
    return Shifter{shifter_from_angles(theta, phi), code};
}

UnitaryOp dequantize_shifter(ShifterCode code, unsigned bits) {
    require_bits(bits);
    const double scale = code_scale(bits);
    if (code.theta > scale || code.phi > scale) {
        throw std::invalid_argument("dequantize_shifter: code does not fit in the bit width");
    }
    return shifter_from_angles(code.theta * kPi / scale, code.phi * 2.0 * kPi / scale);
}

double quantization_infidelity_bound(unsigned bits) {
    require_bits(bits);
    const double step = std::ldexp(1.0, 1 - static_cast<int>(bits));
    const double a = (kPi / 2.0) * step;
    const double b = kPi * step;
    return a * a + b * b;
}

Bitstring encode_shifters(std::span<const ShifterCode> codes, unsigned bits) {
    require_bits(bits);
    Bitstring w;
    for (const auto &c : codes) {
        w = w + Bitstring::from_uint(c.theta, bits) + Bitstring::from_uint(c.phi, bits);
    }
    return w;
}

std::vector<ShifterCode> decode_shifters(const Bitstring &w, size_t lambda, unsigned bits) {
    require_bits(bits);
    if (w.size() != 2 * bits * lambda) {
        throw std::invalid_argument("decode_shifters: w has the wrong length");
    }
    std::vector<ShifterCode> out;
    out.reserve(lambda);
    auto read = [&](size_t offset) {
        uint32_t v = 0;
        for (size_t i = 0; i < bits; i++) {
            v = (v << 1) | (w[offset + i] ? 1u : 0u);
        }
        return v;
    };
    for (size_t k = 0; k < lambda; k++) {
        size_t base = 2 * bits * k;
        out.push_back(ShifterCode{read(base), read(base + bits)});
    }
    return out;
}

ShifterConfig derive_shifter_config(std::span<const StateVector> output_qubits, unsigned bits) {
    ShifterConfig cfg;
    for (const auto &q : output_qubits) {
        auto s = derive_shifter(q, bits);
        cfg.exact_ops.push_back(std::move(s.exact));
        cfg.quantized.push_back(s.code);
    }
    cfg.w = encode_shifters(cfg.quantized, bits);
    return cfg;
}

std::string to_string(EnrollMode mode) {
    return mode == EnrollMode::analytic ? "analytic" : "tomography";
}

EnrollMode parse_enroll_mode(std::string_view text) {
    if (text == "analytic") {
        return EnrollMode::analytic;
    }
    if (text == "tomography") {
        return EnrollMode::tomography;
    }
    throw std::invalid_argument("unknown enrollment mode '" + std::string(text) + "'");
}

std::vector<UnitaryOp> ChallengeResponseTable::shifters(size_t entry_index) const {
    const auto &e = entries.at(entry_index);
    auto codes = decode_shifters(e.w, lambda, bits);
    std::vector<UnitaryOp> out;
    out.reserve(codes.size());
    for (auto c : codes) {
        out.push_back(dequantize_shifter(c, bits));
    }
    return out;
}

ChallengeResponseTable enroll(const QrPuf &puf, std::span<const Challenge> challenges, EnrollMode mode,
                              size_t shots, unsigned bits, RngStream &rng) {
    require_bits(bits);
    if (mode == EnrollMode::tomography && shots < 3) {
        throw std::invalid_argument("enroll: tomography mode needs at least 3 shots");
    }
    ChallengeResponseTable crt;
    crt.lambda = puf.lambda();
    crt.bits = bits;
    crt.mode = mode;
    crt.n = label_width(challenges.size());
    std::set<size_t> seen;
    for (const auto &c : challenges) {
        if (!seen.insert(c.index).second) {
            throw std::invalid_argument("enroll: duplicate challenge index");
        }
        auto truth = evaluate_qubits(puf, c);
        std::vector<StateVector> estimates;
        if (mode == EnrollMode::analytic) {
            estimates = truth;
        } else {
            for (size_t k = 0; k < truth.size(); k++) {
                const UnitaryOp &gate = puf.gates()[k];
                const StateVector input = c.qubit_state(k);
                StateSource source = [&gate, &input]() -> QuantumState { return apply_unitary(gate, input); };
                estimates.push_back(tomography_single_qubit(source, shots, rng).estimate);
            }
        }
        auto cfg = derive_shifter_config(estimates, bits);
        Bitstring o(puf.lambda());
        for (size_t k = 0; k < truth.size(); k++) {
            auto shifted = apply_unitary(dequantize_shifter(cfg.quantized[k], bits), truth[k]);
            double p1 = std::norm(shifted[1]);
            if (mode == EnrollMode::analytic) {
                o.set(k, p1 > 0.5);
            } else {
                size_t reps = std::max<size_t>(1, shots / 3);
                size_t ones = 0;
                for (size_t r = 0; r < reps; r++) {
                    ones += rng.bernoulli(p1) ? 1 : 0;
                }
                o.set(k, 2 * ones >= reps);
            }
        }
        CrtEntry e{c, cfg.w, o, cfg.w + o};
        crt.entries.push_back(std::move(e));
    }
    return crt;
}

Responder honest_responder(QrPuf puf) {
    return [puf = std::move(puf)](const StateVector &challenge, RngStream &) -> std::optional<QuantumState> {
        if (challenge.num_qubits() != puf.lambda()) {
            throw std::invalid_argument("honest_responder: challenge has the wrong number of qubits");
        }
        StateVector out = challenge;
        for (size_t k = 0; k < puf.lambda(); k++) {
            out = apply_to_qubit(puf.gates()[k], k, out);
        }
        return QuantumState{std::move(out)};
    };
}

VerifyResult verify_responses(const ChallengeResponseTable &crt, size_t entry_index,
                              std::span<const std::optional<QuantumState>> responses, const VerifyOptions &options,
                              RngStream &rng) {
    if (entry_index >= crt.entries.size()) {
        throw std::out_of_range("verify: no such CRT entry");
    }
    if (responses.empty()) {
        throw std::invalid_argument("verify: need at least one response");
    }
    const auto &entry = crt.entries[entry_index];
    const size_t lambda = crt.lambda;
    VerifyResult result;
    result.observed_o = Bitstring(lambda);

    const auto shifters = crt.shifters(entry_index);
    std::vector<size_t> ones(lambda, 0);
    for (const auto &resp : responses) {
        if (!resp) {
            result.status = VerifyStatus::lost;
            result.hamming_weight = lambda;
            return result;
        }
        if (state_dim(*resp) != (size_t{1} << lambda)) {
            result.status = VerifyStatus::dimension_mismatch;
            result.hamming_weight = lambda;
            return result;
        }
        QuantumState s = *resp;
        for (size_t k = 0; k < lambda; k++) {
            s = apply_to_qubit(shifters[k], k, s);
        }
        auto outcome = measure_computational(s, rng).outcome;
        for (size_t k = 0; k < lambda; k++) {
            bool bit = flip_readout(outcome[k], options.readout_flip_prob, rng);
            ones[k] += bit ? 1 : 0;
        }
    }
    const size_t shots = responses.size();
    for (size_t k = 0; k < lambda; k++) {
        result.observed_o.set(k, 2 * ones[k] >= shots);
    }
    result.hamming_weight = (result.observed_o ^ entry.o).hamming_weight();
    result.accept = result.hamming_weight <= options.hamming_threshold;
    return result;
}

VerifyResult verify(const ChallengeResponseTable &crt, size_t entry_index, const Responder &responder,
                    const VerifyOptions &options, RngStream &rng) {
    if (entry_index >= crt.entries.size()) {
        throw std::out_of_range("verify: no such CRT entry");
    }
    if (options.shots_per_qubit == 0) {
        throw std::invalid_argument("verify: shots_per_qubit must be positive");
    }
    const StateVector challenge = crt.entries[entry_index].challenge.state();
    std::vector<std::optional<QuantumState>> responses;
    responses.reserve(options.shots_per_qubit);
    for (size_t s = 0; s < options.shots_per_qubit; s++) {
        responses.push_back(responder(challenge, rng));
    }
    return verify_responses(crt, entry_index, responses, options, rng);
}

VerifyResult verify(const ChallengeResponseTable &crt, size_t entry_index, const Responder &responder,
                    size_t hamming_threshold, size_t shots_per_qubit, RngStream &rng) {
    VerifyOptions opts;
    opts.hamming_threshold = hamming_threshold;
    opts.shots_per_qubit = shots_per_qubit;
    return verify(crt, entry_index, responder, opts, rng);
}

std::string crt_to_json(const ChallengeResponseTable &crt) {
    json j;
    j["lambda"] = crt.lambda;
    j["n"] = crt.n;
    j["b"] = crt.bits;
    j["mode"] = to_string(crt.mode);
    json entries = json::array();
    for (const auto &e : crt.entries) {
        json angles = json::array();
        for (const auto &[theta, phi] : e.challenge.angles) {
            angles.push_back({theta, phi});
        }
        entries.push_back({
            {"index", e.challenge.index},
            {"angles", angles},
            {"w", e.w.str()},
            {"o", e.o.str()},
            {"y", e.y.str()},
        });
    }
    j["entries"] = std::move(entries);
    return j.dump(2);
}

ChallengeResponseTable crt_from_json(std::string_view text) {
    json j = json::parse(text);
    ChallengeResponseTable crt;
    crt.lambda = j.at("lambda").get<size_t>();
    crt.n = j.at("n").get<size_t>();
    crt.bits = j.at("b").get<unsigned>();
    require_bits(crt.bits);
    crt.mode = parse_enroll_mode(j.at("mode").get<std::string>());
    std::set<size_t> seen;
    for (const auto &je : j.at("entries")) {
        CrtEntry e;
        e.challenge.index = je.at("index").get<size_t>();
        if (!seen.insert(e.challenge.index).second) {
            throw std::invalid_argument("CRT: duplicate challenge index");
        }
        e.challenge.label = Bitstring::from_uint(e.challenge.index, crt.n);
        for (const auto &a : je.at("angles")) {
            e.challenge.angles.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
        }
        if (e.challenge.lambda() != crt.lambda) {
            throw std::invalid_argument("CRT: entry angle count differs from lambda");
        }
        e.w = Bitstring::parse(je.at("w").get<std::string>());
        e.o = Bitstring::parse(je.at("o").get<std::string>());
        e.y = Bitstring::parse(je.at("y").get<std::string>());
        if (e.w.size() != 2 * crt.bits * crt.lambda || e.o.size() != crt.lambda || !(e.y == e.w + e.o)) {
            throw std::invalid_argument("CRT: inconsistent w/o/y strings");
        }
        crt.entries.push_back(std::move(e));
    }
    return crt;
}

std::string puf_to_json(const QrPuf &puf) {
    json gates = json::array();
    for (const auto &g : puf.gates()) {
        json m = json::array();
        for (Eigen::Index r = 0; r < 2; r++) {
            json row = json::array();
            for (Eigen::Index c = 0; c < 2; c++) {
                row.push_back({g.matrix()(r, c).real(), g.matrix()(r, c).imag()});
            }
            m.push_back(std::move(row));
        }
        gates.push_back(std::move(m));
    }
    json j{{"lambda", puf.lambda()}, {"gates", std::move(gates)}};
    return j.dump(2);
}

QrPuf puf_from_json(std::string_view text) {
    json j = json::parse(text);
    std::vector<UnitaryOp> gates;
    for (const auto &jg : j.at("gates")) {
        Eigen::Matrix2cd m;
        for (Eigen::Index r = 0; r < 2; r++) {
            for (Eigen::Index c = 0; c < 2; c++) {
                const auto &z = jg.at(r).at(c);
                m(r, c) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
            }
        }
        gates.emplace_back(m);
    }
    if (gates.size() != j.at("lambda").get<size_t>()) {
        throw std::invalid_argument("PUF: gate count differs from lambda");
    }
    return QrPuf(std::move(gates));
}

}  // namespace qtoksim::qrpuf
