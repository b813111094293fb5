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

#include "qtoksim/hmp4.h"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <set>

#include "qtoksim/measurement.h"

namespace qtoksim::hmp4 {

namespace {

using nlohmann::json;

void require_x(const Bitstring &x) {
    if (x.size() != 4) {
        throw std::invalid_argument("HMP4 strings must have exactly 4 bits");
    }
}

void require_m(int m) {
    if (m != 0 && m != 1) {
        throw std::invalid_argument("HMP4 matching must be 0 or 1");
    }
}

const char *encoding_name(Encoding e) {
    return e == Encoding::entangled ? "entangled" : "product_control";
}

json state_to_json(const QuantumState &s) {
    json amps = json::array();
    if (const auto *psi = std::get_if<StateVector>(&s)) {
        for (Eigen::Index i = 0; i < psi->amplitudes().size(); i++) {
            amps.push_back({psi->amplitudes()(i).real(), psi->amplitudes()(i).imag()});
        }
        return json{{"kind", "vector"}, {"amplitudes", amps}};
    }
    const auto &m = std::get<DensityMatrix>(s).matrix();
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        amps.push_back(std::move(row));
    }
    return json{{"kind", "density"}, {"matrix", amps}};
}

}  // namespace

HmpMatching matching(int m) {
    require_m(m);
    if (m == 0) {
        return HmpMatching{0, {{{1, 2}, {3, 4}}}};
    }
    return HmpMatching{1, {{{1, 3}, {2, 4}}}};
}

StateVector encode_hmp4(const Bitstring &x) {
    require_x(x);
    Eigen::VectorXcd v(4);
    for (Eigen::Index i = 0; i < 4; i++) {
        v(i) = x[static_cast<size_t>(i)] ? -0.5 : 0.5;
    }
    return StateVector(std::move(v));
}

StateVector encode_hmp4_control(const Bitstring &x) {
    require_x(x);
    const bool s1 = x[0] ^ x[2];
    const bool s2 = x[0] ^ x[1];
    Eigen::VectorXcd v(4);
    for (Eigen::Index i = 0; i < 4; i++) {
        bool q0 = (i >> 1) & 1;
        bool q1 = i & 1;
        bool sign = (q0 && s1) ^ (q1 && s2);
        v(i) = sign ? -0.5 : 0.5;
    }
    return StateVector(std::move(v));
}

Eigen::Vector4d outcome_probabilities(const QuantumState &state, int m) {
    require_m(m);
    if (state_dim(state) != 4) {
        throw std::invalid_argument("HMP4 registers are 2-qubit states");
    }
    const auto mt = matching(m);
    Eigen::Vector4d p;
    if (const auto *psi = std::get_if<StateVector>(&state)) {
        for (int a = 0; a < 2; a++) {
            auto [i, j] = mt.pairs[static_cast<size_t>(a)];
            Complex ai = (*psi)[static_cast<size_t>(i - 1)];
            Complex aj = (*psi)[static_cast<size_t>(j - 1)];
            p(2 * a + 0) = 0.5 * std::norm(ai + aj);
            p(2 * a + 1) = 0.5 * std::norm(ai - aj);
        }
    } else {
        const auto &rho = std::get<DensityMatrix>(state).matrix();
        for (int a = 0; a < 2; a++) {
            auto [i, j] = mt.pairs[static_cast<size_t>(a)];
            double diag = 0.5 * (rho(i - 1, i - 1).real() + rho(j - 1, j - 1).real());
            double coh = rho(i - 1, j - 1).real();
            p(2 * a + 0) = std::max(0.0, diag + coh);
            p(2 * a + 1) = std::max(0.0, diag - coh);
        }
    }
    return p;
}

HmpOutcome measure_hmp4(const QuantumState &state, int m, RngStream &rng) {
    auto p = outcome_probabilities(state, m);
    auto k = static_cast<int>(sample_index(p, rng));
    return HmpOutcome{k / 2, k % 2};
}

bool hmp_check(const Bitstring &x, int m, int a, int b) {
    require_x(x);
    require_m(m);
    if ((a != 0 && a != 1) || (b != 0 && b != 1)) {
        return false;
    }
    // 1-based: a = 0 -> x1 ^ x_{2+m}; a = 1 -> x_{3-m} ^ x4.
    bool expected = a == 0 ? (x[0] ^ x[static_cast<size_t>(1 + m)]) : (x[static_cast<size_t>(2 - m)] ^ x[3]);
    return static_cast<bool>(b) == expected;
}

size_t ServerRecord::unused_entangled() const {
    return static_cast<size_t>(std::count_if(registers.begin(), registers.end(), [](const ServerRegister &r) {
        return !r.used && r.encoding == Encoding::entangled;
    }));
}

Issued issue(size_t register_count, RngStream &rng, size_t control_registers) {
    if (register_count == 0) {
        throw std::invalid_argument("issue: need at least one register");
    }
    Issued out;
    Bitstring id = Bitstring::from_uint(rng.next_u64(), kTokenIdBits);
    out.server.token_id = id;
    out.holder.token_id = id;
    const size_t total = register_count + control_registers;
    for (size_t i = 0; i < total; i++) {
        Bitstring x = Bitstring::from_uint(rng.below(16), 4);
        Encoding enc = i < register_count ? Encoding::entangled : Encoding::product_control;
        StateVector s = enc == Encoding::entangled ? encode_hmp4(x) : encode_hmp4_control(x);
        out.server.registers.push_back(ServerRegister{x, false, enc});
        out.holder.registers.push_back(HmpRegister{QuantumState{s}, false, 0.0, enc});
    }
    return out;
}

ValidationRequest make_request(ServerRecord &server, size_t t, RngStream &rng) {
    if (t == 0 || t % 3 != 0) {
        throw ProtocolError("validation size t must be a positive multiple of 3");
    }
    std::vector<size_t> eligible;
    for (size_t i = 0; i < server.registers.size(); i++) {
        const auto &r = server.registers[i];
        if (!r.used && r.encoding == Encoding::entangled) {
            eligible.push_back(i);
        }
    }
    if (eligible.size() < t) {
        throw ProtocolError("not enough unused registers for validation");
    }
    ValidationRequest req;
    req.token_id = server.token_id;
    for (size_t pick : rng.sample_without_replacement(eligible.size(), t)) {
        req.indices.push_back(eligible[pick]);
    }
    std::sort(req.indices.begin(), req.indices.end());
    for (size_t idx : req.indices) {
        req.bases.push_back(static_cast<int>(rng.below(2)));
        server.registers[idx].used = true;
    }
    return req;
}

ValidationTranscript check_reply(const ServerRecord &server, const ValidationRequest &request,
                                 const ValidationReply &reply, size_t error_tolerance) {
    ValidationTranscript tr;
    tr.l_s = request.indices;
    for (size_t i = 0; i < request.indices.size(); i++) {
        tr.bases[request.indices[i]] = request.bases.at(i);
    }
    const size_t want = 2 * request.indices.size() / 3;
    std::set<size_t> chosen(reply.chosen.begin(), reply.chosen.end());
    bool ok = reply.token_id == server.token_id && reply.chosen.size() == want && chosen.size() == want &&
              reply.outcomes.size() == reply.chosen.size();
    if (ok) {
        for (size_t idx : reply.chosen) {
            if (!tr.bases.contains(idx)) {
                ok = false;
                break;
            }
        }
    }
    if (ok) {
        for (const auto &o : reply.outcomes) {
            if ((o.a != 0 && o.a != 1) || (o.b != 0 && o.b != 1)) {
                ok = false;
                break;
            }
        }
    }
    if (!ok) {
        tr.malformed = true;
        tr.accept = false;
        return tr;
    }
    tr.l_d = std::vector<size_t>(chosen.begin(), chosen.end());
    for (size_t i = 0; i < reply.chosen.size(); i++) {
        size_t idx = reply.chosen[i];
        const auto &o = reply.outcomes[i];
        tr.replies[idx] = o;
        if (!hmp_check(server.registers.at(idx).x, tr.bases.at(idx), o.a, o.b)) {
            tr.error_count++;
        }
    }
    tr.accept = tr.error_count <= error_tolerance;
    return tr;
}

std::vector<size_t> choose_subset(const ValidationRequest &request, RngStream &rng) {
    const size_t want = 2 * request.indices.size() / 3;
    std::vector<size_t> out;
    for (size_t pick : rng.sample_without_replacement(request.indices.size(), want)) {
        out.push_back(request.indices[pick]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

QuantumState age_register(const QuantumState &state, double dwell_us, const NoiseParams &memory) {
    DensityMatrix rho = dephase_all(to_density(state), dwell_us, memory.t2_us);
    for (size_t q = 0; q < rho.num_qubits(); q++) {
        rho = depolarize_qubit(rho, q, memory.idle_depolarize_prob);
    }
    return rho;
}

HonestHolder::HonestHolder(HmpToken token, std::optional<NoiseParams> memory)
    : token_(std::move(token)), memory_(memory) {
    if (memory_) {
        memory_->validate();
    }
}

ValidationReply HonestHolder::respond(const ValidationRequest &request, RngStream &rng) {
    if (request.bases.size() != request.indices.size()) {
        throw ProtocolError("validation request has mismatched indices and bases");
    }
    ValidationReply reply;
    reply.token_id = token_.token_id;
    reply.chosen = choose_subset(request, rng);
    for (size_t idx : reply.chosen) {
        auto pos = std::find(request.indices.begin(), request.indices.end(), idx) - request.indices.begin();
        int m = request.bases[static_cast<size_t>(pos)];
        auto &reg = token_.registers.at(idx);
        if (reg.used) {
            throw ProtocolError("register " + std::to_string(idx) + " was already measured");
        }
        QuantumState s = reg.state;
        if (memory_) {
            s = age_register(s, std::max(0.0, now_us_ - reg.stored_at_us), *memory_);
        }
        HmpOutcome o = measure_hmp4(s, m, rng);
        if (memory_) {
            o.a = flip_readout(o.a != 0, memory_->readout_flip_prob, rng) ? 1 : 0;
            o.b = flip_readout(o.b != 0, memory_->readout_flip_prob, rng) ? 1 : 0;
        }
        reply.outcomes.push_back(o);
    }
    // The whole of L_s is consumed, measured or not.
    for (size_t idx : request.indices) {
        token_.registers.at(idx).used = true;
    }
    return reply;
}

ValidationTranscript validate(ServerRecord &server, Holder &holder, size_t t, size_t error_tolerance,
                              RngStream &rng) {
    ValidationRequest req = make_request(server, t, rng);
    ValidationReply reply = holder.respond(req, rng);
    return check_reply(server, req, reply, error_tolerance);
}

std::string request_to_json(const ValidationRequest &r) {
    json j{{"type", "validation_request"},
           {"token_id", r.token_id.str()},
           {"L_s", r.indices},
           {"bases", r.bases}};
    return j.dump();
}

ValidationRequest request_from_json(std::string_view text) {
    try {
        json j = json::parse(text);
        ValidationRequest r;
        r.token_id = Bitstring::parse(j.at("token_id").get<std::string>());
        r.indices = j.at("L_s").get<std::vector<size_t>>();
        r.bases = j.at("bases").get<std::vector<int>>();
        if (r.bases.size() != r.indices.size()) {
            throw std::invalid_argument("validation request: L_s and bases differ in length");
        }
        return r;
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("validation request: ") + e.what());
    }
}

std::string reply_to_json(const ValidationReply &r) {
    json outcomes = json::array();
    for (const auto &o : r.outcomes) {
        outcomes.push_back({o.a, o.b});
    }
    json j{{"type", "validation_reply"},
           {"token_id", r.token_id.str()},
           {"L_d", r.chosen},
           {"replies", outcomes}};
    return j.dump();
}

ValidationReply reply_from_json(std::string_view text) {
    try {
        json j = json::parse(text);
        ValidationReply r;
        r.token_id = Bitstring::parse(j.at("token_id").get<std::string>());
        r.chosen = j.at("L_d").get<std::vector<size_t>>();
        for (const auto &o : j.at("replies")) {
            r.outcomes.push_back(HmpOutcome{o.at(0).get<int>(), o.at(1).get<int>()});
        }
        return r;
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("validation reply: ") + e.what());
    }
}

std::string transcript_to_json(const ValidationTranscript &t) {
    json bases = json::object();
    for (auto [idx, m] : t.bases) {
        bases[std::to_string(idx)] = m;
    }
    json replies = json::object();
    for (const auto &[idx, o] : t.replies) {
        replies[std::to_string(idx)] = {o.a, o.b};
    }
    json j{{"L_s", t.l_s},         {"L_d", t.l_d},
           {"bases", bases},       {"replies", replies},
           {"accept", t.accept},   {"error_count", t.error_count},
           {"malformed", t.malformed}};
    return j.dump(2);
}

std::string server_record_to_json(const ServerRecord &s) {
    json regs = json::array();
    for (const auto &r : s.registers) {
        regs.push_back({{"x", r.x.str()}, {"used", r.used}, {"encoding", encoding_name(r.encoding)}});
    }
    json j{{"token_id", s.token_id.str()}, {"registers", regs}};
    return j.dump(2);
}

std::string token_to_json(const HmpToken &t) {
    json regs = json::array();
    for (const auto &r : t.registers) {
        regs.push_back({{"used", r.used},
                        {"stored_at_us", r.stored_at_us},
                        {"encoding", encoding_name(r.encoding)},
                        {"state", state_to_json(r.state)}});
    }
    json j{{"token_id", t.token_id.str()}, {"registers", regs}};
    return j.dump(2);
}

}  // namespace qtoksim::hmp4
