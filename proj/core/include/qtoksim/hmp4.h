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

#ifndef QTOKSIM_HMP4_H
#define QTOKSIM_HMP4_H

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtoksim/bitstring.h"
#include "qtoksim/noise.h"
#include "qtoksim/rng.h"
#include "qtoksim/state.h"

/// Multi-factor token built on the size-4 hidden matching problem. A 4-bit
/// string x is stored as the 2-qubit state 1/2 sum_i (-1)^{x_i} |i>; the
/// holder proves possession by measuring in one of two pair matchings, which
/// reveals one parity of x.
///
/// Strings are 1-indexed in the protocol (x_1..x_4) and map to basis states
/// |00>, |01>, |10>, |11>.
namespace qtoksim::hmp4 {

/// Misuse of the protocol itself (e.g. running out of registers).
class ProtocolError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct HmpMatching {
    int m = 0;
    /// 1-based index pairs; pairs[a] is the pair measured when the outcome is a.
    std::array<std::pair<int, int>, 2> pairs;
};

/// m = 0 -> (1,2),(3,4); m = 1 -> (1,3),(2,4). These are the only pairings
/// consistent with b = x1 ^ x_{2+m} (a = 0) and b = x_{3-m} ^ x4 (a = 1).
HmpMatching matching(int m);

struct HmpOutcome {
    int a = 0;
    int b = 0;
    bool operator==(const HmpOutcome &) const = default;
};

StateVector encode_hmp4(const Bitstring &x);
/// Separable control state |s1> (x) |s2> with s1 = x1^x3, s2 = x1^x2, where
/// |s> = (|0> + (-1)^s |1>)/sqrt2. It coincides with encode_hmp4(x) whenever
/// x4 = x1^x2^x3 and is used only for noise comparisons.
StateVector encode_hmp4_control(const Bitstring &x);

/// Born probabilities of (a, b), indexed 2a + b.
Eigen::Vector4d outcome_probabilities(const QuantumState &state, int m);
HmpOutcome measure_hmp4(const QuantumState &state, int m, RngStream &rng);

bool hmp_check(const Bitstring &x, int m, int a, int b);

enum class Encoding { entangled, product_control };

struct ServerRegister {
    Bitstring x;
    bool used = false;
    Encoding encoding = Encoding::entangled;
};

struct ServerRecord {
    Bitstring token_id;
    std::vector<ServerRegister> registers;

    size_t unused_entangled() const;
};

struct HmpRegister {
    QuantumState state;
    bool used = false;
    double stored_at_us = 0.0;
    Encoding encoding = Encoding::entangled;
};

/// Holder copy. Never contains the x strings.
struct HmpToken {
    Bitstring token_id;
    std::vector<HmpRegister> registers;
};

struct Issued {
    ServerRecord server;
    HmpToken holder;
};

inline constexpr size_t kTokenIdBits = 64;

/// R registers with uniformly random x (entangled encoding), followed by
/// `control_registers` product-state controls that never enter validation.
Issued issue(size_t register_count, RngStream &rng, size_t control_registers = 0);

/// Server -> holder: indices L_s and one basis per index.
struct ValidationRequest {
    Bitstring token_id;
    std::vector<size_t> indices;
    std::vector<int> bases;
};

/// Holder -> server: the chosen subset L_d and one (a, b) per element.
struct ValidationReply {
    Bitstring token_id;
    std::vector<size_t> chosen;
    std::vector<HmpOutcome> outcomes;
};

struct ValidationTranscript {
    std::vector<size_t> l_s;
    std::vector<size_t> l_d;
    std::map<size_t, int> bases;
    std::map<size_t, HmpOutcome> replies;
    bool accept = false;
    size_t error_count = 0;
    /// Reply violated the message contract and was rejected outright.
    bool malformed = false;
};

/// Draws t unused entangled registers and their bases, then marks them used.
/// t must be a positive multiple of 3.
ValidationRequest make_request(ServerRecord &server, size_t t, RngStream &rng);

/// Accepts iff the reply is well formed and at most `error_tolerance` of the
/// chosen registers fail hmp_check.
ValidationTranscript check_reply(const ServerRecord &server, const ValidationRequest &request,
                                 const ValidationReply &reply, size_t error_tolerance);

/// Anything that answers a validation request.
class Holder {
   public:
    virtual ~Holder() = default;
    virtual ValidationReply respond(const ValidationRequest &request, RngStream &rng) = 0;
};

/// Measures its stored registers. Registers dephase in memory for
/// (now - stored_at) and readout flips hit a and b when `memory` is set.
class HonestHolder : public Holder {
   public:
    explicit HonestHolder(HmpToken token, std::optional<NoiseParams> memory = std::nullopt);

    void set_time(double now_us) { now_us_ = now_us; }
    const HmpToken &token() const { return token_; }
    ValidationReply respond(const ValidationRequest &request, RngStream &rng) override;

   private:
    HmpToken token_;
    std::optional<NoiseParams> memory_;
    double now_us_ = 0.0;
};

/// Uniform 2t/3-subset of the request indices, in ascending order.
std::vector<size_t> choose_subset(const ValidationRequest &request, RngStream &rng);

/// State of a register after `dwell_us` in memory: per-qubit dephasing, then
/// one idle depolarizing step per qubit.
QuantumState age_register(const QuantumState &state, double dwell_us, const NoiseParams &memory);

/// make_request, holder round trip, check_reply.
ValidationTranscript validate(ServerRecord &server, Holder &holder, size_t t, size_t error_tolerance,
                              RngStream &rng);

std::string request_to_json(const ValidationRequest &r);
ValidationRequest request_from_json(std::string_view text);
std::string reply_to_json(const ValidationReply &r);
/// Throws std::invalid_argument on structurally invalid JSON.
ValidationReply reply_from_json(std::string_view text);
std::string transcript_to_json(const ValidationTranscript &t);
std::string server_record_to_json(const ServerRecord &s);
std::string token_to_json(const HmpToken &t);

}  // namespace qtoksim::hmp4

#endif
