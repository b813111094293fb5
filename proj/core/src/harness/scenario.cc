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

#include "qtoksim/harness/scenario.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qtoksim/format.h"
#include "qtoksim/hmp4.h"
#include "qtoksim/ops.h"
#include "qtoksim/uupuf.h"

namespace qtoksim::harness {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr size_t kMaxQrLambda = 10;
constexpr size_t kMaxNoisyUuLambda = 10;

// ---------------------------------------------------------------------------
// Config parsing.

size_t get_size(const json &j, const char *key) {
    const auto &v = j.at(key);
    if (!v.is_number_unsigned()) {
        throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
    }
    return v.get<size_t>();
}

double get_number(const json &j, const char *key) {
    const auto &v = j.at(key);
    if (!v.is_number()) {
        throw ConfigError(std::string("'") + key + "' must be a number");
    }
    return v.get<double>();
}

bool get_bool(const json &j, const char *key) {
    const auto &v = j.at(key);
    if (!v.is_boolean()) {
        throw ConfigError(std::string("'") + key + "' must be true or false");
    }
    return v.get<bool>();
}

std::string get_string(const json &j, const char *key) {
    const auto &v = j.at(key);
    if (!v.is_string()) {
        throw ConfigError(std::string("'") + key + "' must be a string");
    }
    return v.get<std::string>();
}

void reject_unknown_keys(const json &j, std::initializer_list<const char *> known, const char *where) {
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto &[key, _] : j.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

NoiseParams parse_noise(const json &j) {
    NoiseParams n;
    if (j.is_boolean()) {
        return n;
    }
    if (!j.is_object()) {
        throw ConfigError("'channel.noise' must be null, true or an object");
    }
    reject_unknown_keys(j, {"t2_us", "readout_flip_prob", "idle_depolarize_prob"}, "channel.noise");
    if (j.contains("t2_us")) n.t2_us = get_number(j, "t2_us");
    if (j.contains("readout_flip_prob")) n.readout_flip_prob = get_number(j, "readout_flip_prob");
    if (j.contains("idle_depolarize_prob")) n.idle_depolarize_prob = get_number(j, "idle_depolarize_prob");
    return n;
}

QuantumChannel parse_channel(const json &j) {
    if (!j.is_object()) {
        throw ConfigError("'channel' must be an object");
    }
    reject_unknown_keys(j, {"latency_us", "loss_prob", "noise"}, "channel");
    QuantumChannel ch;
    if (j.contains("latency_us")) ch.latency_us = get_number(j, "latency_us");
    if (j.contains("loss_prob")) ch.loss_prob = get_number(j, "loss_prob");
    if (j.contains("noise")) {
        const auto &n = j.at("noise");
        if (!n.is_null() && !(n.is_boolean() && !n.get<bool>())) {
            ch.noise = parse_noise(n);
        }
    }
    return ch;
}

// ---------------------------------------------------------------------------
// Trial plumbing shared by the three protocols.

/// Quantum and classical sends with loss accounting.
class Wire {
   public:
    Wire(const QuantumChannel &channel, RngStream rng) : channel_(channel), rng_(std::move(rng)) {}

    /// Through the configured channel.
    void send_quantum(EventLoop &loop, Payload p) {
        sent_++;
        auto tx = transmit_quantum(channel_, *p.quantum, rng_);
        if (tx.lost) {
            lost_++;
            loop.record_loss(p);
            return;
        }
        p.quantum = std::move(tx.state);
        loop.schedule_after(tx.arrival_delta_us, std::move(p));
    }

    /// Instantaneous ideal hop, used between co-located or on-path nodes.
    void relay_quantum(EventLoop &loop, Payload p) {
        sent_++;
        loop.schedule_after(0.0, std::move(p));
    }

    void send_classical(EventLoop &loop, Payload p) {
        loop.schedule_after(channel_.latency_us, std::move(p));
    }

    size_t sent() const { return sent_; }
    size_t lost() const { return lost_; }

   private:
    QuantumChannel channel_;
    RngStream rng_;
    size_t sent_ = 0;
    size_t lost_ = 0;
};

Payload quantum_payload(std::string kind, std::string from, std::string to, size_t tag, QuantumState s) {
    Payload p;
    p.kind = std::move(kind);
    p.from = std::move(from);
    p.to = std::move(to);
    p.tag = tag;
    p.quantum = std::move(s);
    return p;
}

Payload classical_payload(std::string kind, std::string from, std::string to, std::string text) {
    Payload p;
    p.kind = std::move(kind);
    p.from = std::move(from);
    p.to = std::move(to);
    p.classical = std::move(text);
    return p;
}

Payload control_payload(std::string kind, std::string to) {
    Payload p;
    p.kind = std::move(kind);
    p.from = p.to = std::move(to);
    return p;
}

/// Where verifier-bound and user-bound traffic goes first.
struct Routing {
    /// First hop for messages addressed to the prover side.
    std::string to_prover;
    /// Node that actually answers (user, or an adversary standing in for it).
    std::string prover;
    bool on_path = false;
};

Routing routing_for(Adversary a) {
    switch (a) {
        case Adversary::none:
            return {"user", "user", false};
        case Adversary::intercept_resend:
            return {"adversary", "user", true};
        case Adversary::emulation:
        case Adversary::random_guess:
        case Adversary::token_clone:
            return {"adversary", "adversary", false};
    }
    return {"user", "user", false};
}

void add_standard_nodes(EventLoop &loop, const ScenarioConfig &cfg, Handler certifier, Handler verifier,
                        Handler user, Handler adversary) {
    loop.add_node(Node{"certifier", Role::certifier, "issuer"}, std::move(certifier));
    loop.add_node(Node{"verifier", Role::verifier, "checker"}, std::move(verifier));
    loop.add_node(Node{"user", Role::user, "honest"}, std::move(user));
    if (cfg.adversary != Adversary::none) {
        loop.add_node(Node{"adversary", Role::adversary, to_string(cfg.adversary)}, std::move(adversary));
    }
}

void finish_outcome(TrialOutcome &out, const EventLoop &loop, const Wire &wire) {
    out.trace = loop.trace();
    out.quantum_sent = wire.sent();
    for (const auto &e : out.trace) {
        if (!e.quantum) {
            continue;
        }
        if (e.outcome == "delivered") {
            out.quantum_delivered++;
        } else if (e.outcome == "lost") {
            out.quantum_lost++;
        }
    }
}

// ---------------------------------------------------------------------------
// QR-PUF session.

TrialOutcome run_qrpuf_trial(const ScenarioConfig &cfg, RngStream &root) {
    RngStream setup = root.child(0);
    RngStream adv = root.child(3);
    RngStream verifier_rng = root.child(4);
    Wire wire(cfg.channel, root.child(1));

    const auto puf = qrpuf::qgen_qr(cfg.lambda, setup);
    const auto challenges = qrpuf::select_challenges(cfg.challenges, cfg.lambda, setup);
    const auto crt = qrpuf::enroll(puf, challenges, cfg.enroll_mode, cfg.enroll_shots, cfg.quant_bits, setup);
    const auto session = setup.sample_without_replacement(cfg.challenges, cfg.challenges_per_session);
    const UnitaryOp device_op = tensor_ops(puf.gates());
    const size_t dim = size_t{1} << cfg.lambda;
    const size_t shots = cfg.shots_per_qubit;
    const Routing route = routing_for(cfg.adversary);

    std::vector<std::optional<QuantumState>> responses(session.size() * shots);

    EventLoop loop;
    auto certifier = [&](const Event &, EventLoop &l) {
        l.annotate("certifier", "enroll", "crt entries " + std::to_string(crt.entries.size()));
    };
    auto verifier = [&](const Event &ev, EventLoop &l) {
        if (ev.payload.kind == "start") {
            for (size_t j = 0; j < session.size(); j++) {
                StateVector c = crt.entries[session[j]].challenge.state();
                for (size_t s = 0; s < shots; s++) {
                    wire.send_quantum(l, quantum_payload("challenge", "verifier", route.to_prover, j * shots + s, c));
                }
            }
        } else if (ev.payload.kind == "response") {
            responses.at(ev.payload.tag) = ev.payload.quantum;
        }
    };
    auto user = [&](const Event &ev, EventLoop &l) {
        QuantumState out = apply_unitary(device_op, *ev.payload.quantum);
        std::string back = route.on_path ? "adversary" : "verifier";
        wire.send_quantum(l, quantum_payload("response", "user", back, ev.payload.tag, std::move(out)));
    };
    auto adversary = [&](const Event &ev, EventLoop &l) {
        const auto &p = ev.payload;
        switch (cfg.adversary) {
            case Adversary::intercept_resend: {
                QuantumState fwd = intercept_resend(*p.quantum, adv);
                std::string next = p.kind == "challenge" ? "user" : "verifier";
                wire.relay_quantum(l, quantum_payload(p.kind, "adversary", next, p.tag, std::move(fwd)));
                break;
            }
            case Adversary::emulation: {
                QuantumState out = apply_unitary(device_op, *p.quantum);
                wire.send_quantum(l, quantum_payload("response", "adversary", "verifier", p.tag, std::move(out)));
                break;
            }
            case Adversary::random_guess: {
                QuantumState out = haar_state(dim, adv);
                wire.send_quantum(l, quantum_payload("response", "adversary", "verifier", p.tag, std::move(out)));
                break;
            }
            default:
                throw std::logic_error("adversary not supported for qrpuf");
        }
    };
    add_standard_nodes(loop, cfg, certifier, verifier, user, adversary);
    loop.schedule(0.0, control_payload("enroll", "certifier"));
    loop.schedule(0.0, control_payload("start", "verifier"));
    loop.run();

    qrpuf::VerifyOptions opts;
    opts.hamming_threshold = cfg.effective_hamming_threshold();
    opts.shots_per_qubit = shots;
    opts.readout_flip_prob = cfg.channel.noise ? cfg.channel.noise->readout_flip_prob : 0.0;

    TrialOutcome out;
    out.record.accepted = true;
    out.record.dwell_us = 2.0 * cfg.channel.latency_us;
    double weight = 0.0;
    for (size_t j = 0; j < session.size(); j++) {
        std::span<const std::optional<QuantumState>> slice(responses.data() + j * shots, shots);
        auto r = qrpuf::verify_responses(crt, session[j], slice, opts, verifier_rng);
        weight += static_cast<double>(r.hamming_weight);
        out.record.accepted = out.record.accepted && r.accept;
        out.record.lost = out.record.lost || r.status == qrpuf::VerifyStatus::lost;
    }
    out.record.error_metric = weight;
    loop.annotate("verifier", "decide", out.record.accepted ? "accept" : "reject");
    finish_outcome(out, loop, wire);
    return out;
}

// ---------------------------------------------------------------------------
// Unknown-unitary PUF session.

TrialOutcome run_uupuf_trial(const ScenarioConfig &cfg, RngStream &root) {
    RngStream setup = root.child(0);
    RngStream adv = root.child(3);
    RngStream verifier_rng = root.child(4);
    Wire wire(cfg.channel, root.child(1));

    const auto puf = uupuf::qgen_uu(cfg.lambda, setup);
    const auto crt = uupuf::issue_crt(puf, cfg.challenges, cfg.k2, setup);
    const auto session = setup.sample_without_replacement(cfg.challenges, cfg.challenges_per_session);
    const size_t dim = puf.dim();
    const size_t k1 = cfg.k1;
    const Routing route = routing_for(cfg.adversary);

    std::vector<std::optional<QuantumState>> responses(session.size() * k1);

    EventLoop loop;
    auto certifier = [&](const Event &, EventLoop &l) {
        l.annotate("certifier", "issue_crt", "crt entries " + std::to_string(crt.entries.size()));
    };
    auto verifier = [&](const Event &ev, EventLoop &l) {
        if (ev.payload.kind == "start") {
            for (size_t j = 0; j < session.size(); j++) {
                const auto &c = crt.entries[session[j]].challenge;
                for (size_t s = 0; s < k1; s++) {
                    wire.send_quantum(l, quantum_payload("challenge", "verifier", route.to_prover, j * k1 + s, c));
                }
            }
        } else if (ev.payload.kind == "response") {
            responses.at(ev.payload.tag) = ev.payload.quantum;
        }
    };
    auto user = [&](const Event &ev, EventLoop &l) {
        QuantumState out = puf.evaluate(*ev.payload.quantum);
        std::string back = route.on_path ? "adversary" : "verifier";
        wire.send_quantum(l, quantum_payload("response", "user", back, ev.payload.tag, std::move(out)));
    };
    // Granted knowledge of the device, the emulator holds an exact copy.
    const uupuf::UuPuf emulated = puf;
    auto adversary = [&](const Event &ev, EventLoop &l) {
        const auto &p = ev.payload;
        switch (cfg.adversary) {
            case Adversary::intercept_resend: {
                QuantumState fwd = intercept_resend(*p.quantum, adv);
                std::string next = p.kind == "challenge" ? "user" : "verifier";
                wire.relay_quantum(l, quantum_payload(p.kind, "adversary", next, p.tag, std::move(fwd)));
                break;
            }
            case Adversary::emulation: {
                QuantumState out = emulated.evaluate(*p.quantum);
                wire.send_quantum(l, quantum_payload("response", "adversary", "verifier", p.tag, std::move(out)));
                break;
            }
            case Adversary::random_guess: {
                QuantumState out = haar_state(dim, adv);
                wire.send_quantum(l, quantum_payload("response", "adversary", "verifier", p.tag, std::move(out)));
                break;
            }
            default:
                throw std::logic_error("adversary not supported for uupuf");
        }
    };
    add_standard_nodes(loop, cfg, certifier, verifier, user, adversary);
    loop.schedule(0.0, control_payload("issue_crt", "certifier"));
    loop.schedule(0.0, control_payload("start", "verifier"));
    loop.run();

    TrialOutcome out;
    out.record.accepted = true;
    out.record.dwell_us = 2.0 * cfg.channel.latency_us;
    double worst = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < session.size(); j++) {
        std::vector<QuantumState> got;
        bool missing = false;
        bool wrong_dim = false;
        for (size_t s = 0; s < k1; s++) {
            const auto &r = responses[j * k1 + s];
            if (!r) {
                missing = true;
            } else if (state_dim(*r) != dim) {
                wrong_dim = true;
            } else {
                got.push_back(*r);
            }
        }
        if (missing || wrong_dim) {
            out.record.accepted = false;
            out.record.lost = out.record.lost || missing;
            worst = 0.0;
            continue;
        }
        auto r = uupuf::test_responses(got, crt.entries[session[j]].response_copies.front(), cfg.k2, cfg.tau,
                                       verifier_rng);
        worst = std::min(worst, r.f_hat);
        out.record.accepted = out.record.accepted && r.accept;
    }
    out.record.error_metric = worst;
    loop.annotate("verifier", "decide", out.record.accepted ? "accept" : "reject");
    finish_outcome(out, loop, wire);
    return out;
}

// ---------------------------------------------------------------------------
// HMP4 token session.

/// Holder that measured every register on arrival in a random matching and
/// answers from that classical record.
struct CloneRecord {
    int m = 0;
    hmp4::HmpOutcome outcome;
};

hmp4::ValidationReply clone_reply(const hmp4::ValidationRequest &req, const Bitstring &token_id,
                                  const std::vector<std::optional<CloneRecord>> &record, RngStream &rng) {
    hmp4::ValidationReply reply;
    reply.token_id = token_id;
    reply.chosen = hmp4::choose_subset(req, rng);
    for (size_t idx : reply.chosen) {
        auto pos = static_cast<size_t>(std::find(req.indices.begin(), req.indices.end(), idx) - req.indices.begin());
        const auto &rec = record.at(idx);
        if (rec && rec->m == req.bases.at(pos)) {
            reply.outcomes.push_back(rec->outcome);
        } else {
            int a = static_cast<int>(rng.below(2));
            int b = static_cast<int>(rng.below(2));
            reply.outcomes.push_back(hmp4::HmpOutcome{a, b});
        }
    }
    return reply;
}

/// Holder state collected from register arrivals.
struct Stash {
    std::vector<std::optional<hmp4::HmpRegister>> registers;
    double first_stored = std::numeric_limits<double>::infinity();

    void store(size_t idx, QuantumState s, double now, hmp4::Encoding enc) {
        registers.at(idx) = hmp4::HmpRegister{std::move(s), false, now, enc};
        first_stored = std::min(first_stored, now);
    }

    bool covers(const std::vector<size_t> &indices) const {
        return std::all_of(indices.begin(), indices.end(),
                           [&](size_t i) { return i < registers.size() && registers[i].has_value(); });
    }

    /// Token view for the measuring holder; absent registers are placeholders
    /// that are never requested (covers() is checked first).
    hmp4::HmpToken token(const Bitstring &id) const {
        hmp4::HmpToken t;
        t.token_id = id;
        for (const auto &r : registers) {
            t.registers.push_back(r ? *r
                                    : hmp4::HmpRegister{QuantumState{DensityMatrix::maximally_mixed(4)}, true,
                                                        0.0, hmp4::Encoding::entangled});
        }
        return t;
    }
};

TrialOutcome run_hmp4_trial(const ScenarioConfig &cfg, RngStream &root) {
    RngStream setup = root.child(0);
    RngStream device = root.child(2);
    RngStream adv = root.child(3);
    RngStream verifier_rng = root.child(4);
    Wire wire(cfg.channel, root.child(1));

    auto issued = hmp4::issue(cfg.registers, setup, cfg.control_registers);
    hmp4::ServerRecord &server = issued.server;
    const Bitstring token_id = issued.holder.token_id;
    const size_t total = issued.holder.registers.size();
    const Routing route = routing_for(cfg.adversary);

    Stash user_stash{std::vector<std::optional<hmp4::HmpRegister>>(total)};
    Stash adv_stash{std::vector<std::optional<hmp4::HmpRegister>>(total)};
    std::vector<std::optional<CloneRecord>> clone_record(total);
    std::optional<hmp4::ValidationRequest> request;
    std::optional<hmp4::ValidationTranscript> transcript;
    double dwell = 0.0;

    // Answers a request from a stash by measuring; empty reply when the
    // holder is missing a requested register.
    auto answer_from = [&](Stash &stash, const hmp4::ValidationRequest &req, double now) {
        if (!stash.covers(req.indices)) {
            hmp4::ValidationReply empty;
            empty.token_id = token_id;
            return empty;
        }
        dwell = now - stash.first_stored;
        hmp4::HonestHolder holder(stash.token(token_id), cfg.channel.noise);
        holder.set_time(now);
        return holder.respond(req, device);
    };

    EventLoop loop;
    auto certifier = [&](const Event &, EventLoop &l) {
        for (size_t r = 0; r < total; r++) {
            wire.send_quantum(
                l, quantum_payload("register", "certifier", route.to_prover, r, issued.holder.registers[r].state));
        }
        Payload v = control_payload("validate", "verifier");
        l.schedule_after(cfg.channel.latency_us + cfg.memory_dwell_us, std::move(v));
    };
    auto verifier = [&](const Event &ev, EventLoop &l) {
        if (ev.payload.kind == "validate") {
            request = hmp4::make_request(server, cfg.t, verifier_rng);
            wire.send_classical(l, classical_payload("request", "verifier", route.prover,
                                                     hmp4::request_to_json(*request)));
        } else if (ev.payload.kind == "reply") {
            hmp4::ValidationReply reply;
            try {
                reply = hmp4::reply_from_json(ev.payload.classical);
            } catch (const std::invalid_argument &) {
                reply = hmp4::ValidationReply{};
            }
            transcript = hmp4::check_reply(server, *request, reply, cfg.error_tolerance);
        }
    };
    auto user = [&](const Event &ev, EventLoop &l) {
        const auto &p = ev.payload;
        if (p.kind == "register") {
            user_stash.store(p.tag, *p.quantum, l.now(), issued.holder.registers[p.tag].encoding);
        } else if (p.kind == "request") {
            auto req = hmp4::request_from_json(p.classical);
            auto reply = answer_from(user_stash, req, l.now());
            wire.send_classical(l, classical_payload("reply", "user", "verifier", hmp4::reply_to_json(reply)));
        }
    };
    auto adversary = [&](const Event &ev, EventLoop &l) {
        const auto &p = ev.payload;
        const auto enc = p.kind == "register" ? issued.holder.registers[p.tag].encoding : hmp4::Encoding::entangled;
        switch (cfg.adversary) {
            case Adversary::intercept_resend:
                wire.relay_quantum(l, quantum_payload("register", "adversary", "user", p.tag,
                                                      intercept_resend(*p.quantum, adv)));
                break;
            case Adversary::random_guess:
                if (p.kind == "register") {
                    adv_stash.store(p.tag, haar_state(4, adv), l.now(), enc);
                } else {
                    auto req = hmp4::request_from_json(p.classical);
                    auto reply = answer_from(adv_stash, req, l.now());
                    wire.send_classical(l,
                                        classical_payload("reply", "adversary", "verifier", hmp4::reply_to_json(reply)));
                }
                break;
            case Adversary::token_clone:
                if (p.kind == "register") {
                    int m = static_cast<int>(adv.below(2));
                    clone_record.at(p.tag) = CloneRecord{m, hmp4::measure_hmp4(*p.quantum, m, adv)};
                    adv_stash.store(p.tag, *p.quantum, l.now(), enc);
                } else {
                    auto req = hmp4::request_from_json(p.classical);
                    hmp4::ValidationReply reply;
                    reply.token_id = token_id;
                    if (adv_stash.covers(req.indices)) {
                        dwell = l.now() - adv_stash.first_stored;
                        reply = clone_reply(req, token_id, clone_record, adv);
                    }
                    wire.send_classical(l,
                                        classical_payload("reply", "adversary", "verifier", hmp4::reply_to_json(reply)));
                }
                break;
            default:
                throw std::logic_error("adversary not supported for hmp4");
        }
    };
    add_standard_nodes(loop, cfg, certifier, verifier, user, adversary);
    loop.schedule(0.0, control_payload("issue", "certifier"));
    loop.run();

    TrialOutcome out;
    if (!transcript) {
        throw std::logic_error("hmp4 session ended without a verdict");
    }
    out.record.accepted = transcript->accept;
    out.record.lost = wire.lost() > 0;
    out.record.error_metric = transcript->malformed ? static_cast<double>(2 * cfg.t / 3)
                                                    : static_cast<double>(transcript->error_count);
    out.record.dwell_us = dwell;
    loop.annotate("verifier", "decide", out.record.accepted ? "accept" : "reject");
    finish_outcome(out, loop, wire);
    return out;
}

}  // namespace

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::qrpuf:
            return "qrpuf";
        case Protocol::uupuf:
            return "uupuf";
        case Protocol::hmp4:
            return "hmp4";
    }
    return "unknown";
}

std::string to_string(Adversary a) {
    switch (a) {
        case Adversary::none:
            return "none";
        case Adversary::emulation:
            return "emulation";
        case Adversary::intercept_resend:
            return "intercept_resend";
        case Adversary::random_guess:
            return "random_guess";
        case Adversary::token_clone:
            return "token_clone";
    }
    return "unknown";
}

Protocol parse_protocol(std::string_view text) {
    for (auto p : {Protocol::qrpuf, Protocol::uupuf, Protocol::hmp4}) {
        if (text == to_string(p)) {
            return p;
        }
    }
    throw ConfigError("unknown protocol '" + std::string(text) + "'");
}

Adversary parse_adversary(std::string_view text) {
    for (auto a : {Adversary::none, Adversary::emulation, Adversary::intercept_resend, Adversary::random_guess,
                   Adversary::token_clone}) {
        if (text == to_string(a)) {
            return a;
        }
    }
    throw ConfigError("unknown adversary '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
    if (trials == 0) {
        throw ConfigError("trials must be positive");
    }
    try {
        channel.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    if (!(memory_dwell_us >= 0.0) || !std::isfinite(memory_dwell_us)) {
        throw ConfigError("memory_dwell_us must be a non-negative number");
    }
    if (adversary == Adversary::token_clone && protocol != Protocol::hmp4) {
        throw ConfigError("token_clone applies only to the hmp4 protocol");
    }
    if (adversary == Adversary::emulation) {
        if (protocol == Protocol::hmp4) {
            throw ConfigError("emulation applies only to PUF protocols");
        }
        if (!adversary_knows_unitary) {
            throw ConfigError("emulation requires adversary_knows_unitary = true");
        }
    }
    switch (protocol) {
        case Protocol::qrpuf:
            if (lambda == 0 || lambda > kMaxQrLambda) {
                throw ConfigError("qrpuf lambda must lie in [1, " + std::to_string(kMaxQrLambda) + "]");
            }
            if (quant_bits == 0 || quant_bits > 24) {
                throw ConfigError("quant_bits must lie in [1, 24]");
            }
            if (enroll_mode == qrpuf::EnrollMode::tomography && enroll_shots < 3) {
                throw ConfigError("tomography enrollment needs enroll_shots >= 3");
            }
            if (shots_per_qubit == 0) {
                throw ConfigError("shots_per_qubit must be positive");
            }
            break;
        case Protocol::uupuf:
            if (lambda == 0 || lambda > uupuf::kMaxLambda) {
                throw ConfigError("uupuf lambda must lie in [1, " + std::to_string(uupuf::kMaxLambda) + "]");
            }
            if (channel.noise && lambda > kMaxNoisyUuLambda) {
                throw ConfigError("noisy channels support uupuf lambda up to " + std::to_string(kMaxNoisyUuLambda));
            }
            if (k1 == 0 || k2 == 0) {
                throw ConfigError("k1 and k2 must be positive");
            }
            if (!(tau >= 0.0 && tau <= 1.0)) {
                throw ConfigError("tau must lie in [0, 1]");
            }
            break;
        case Protocol::hmp4:
            if (t == 0 || t % 3 != 0) {
                throw ConfigError("t must be a positive multiple of 3");
            }
            if (registers < t) {
                throw ConfigError("registers must be at least t");
            }
            break;
    }
    if (protocol != Protocol::hmp4) {
        if (challenges == 0) {
            throw ConfigError("challenges must be positive");
        }
        if (challenges_per_session == 0 || challenges_per_session > challenges) {
            throw ConfigError("challenges_per_session must lie in [1, challenges]");
        }
    }
}

size_t ScenarioConfig::effective_hamming_threshold() const {
    if (hamming_threshold) {
        return *hamming_threshold;
    }
    return channel.noise ? static_cast<size_t>(std::ceil(0.1 * static_cast<double>(lambda))) : 0;
}

ScenarioConfig parse_scenario_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("scenario config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("scenario config must be a JSON object");
    }
    reject_unknown_keys(j,
                        {"protocol", "lambda", "challenges", "challenges_per_session", "quant_bits", "enroll_mode",
                         "enroll_shots", "hamming_threshold", "shots_per_qubit", "k1", "k2", "tau", "registers",
                         "control_registers", "t", "error_tolerance", "memory_dwell_us", "channel", "adversary",
                         "adversary_knows_unitary", "trials", "seed"},
                        "scenario config");
    ScenarioConfig c;
    if (!j.contains("protocol")) {
        throw ConfigError("scenario config needs 'protocol'");
    }
    c.protocol = parse_protocol(get_string(j, "protocol"));
    if (j.contains("lambda")) c.lambda = get_size(j, "lambda");
    if (j.contains("challenges")) c.challenges = get_size(j, "challenges");
    if (j.contains("challenges_per_session")) c.challenges_per_session = get_size(j, "challenges_per_session");
    if (j.contains("quant_bits")) c.quant_bits = static_cast<unsigned>(get_size(j, "quant_bits"));
    if (j.contains("enroll_mode")) {
        try {
            c.enroll_mode = qrpuf::parse_enroll_mode(get_string(j, "enroll_mode"));
        } catch (const ConfigError &) {
            throw;
        } catch (const std::exception &e) {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("enroll_shots")) c.enroll_shots = get_size(j, "enroll_shots");
    if (j.contains("hamming_threshold")) c.hamming_threshold = get_size(j, "hamming_threshold");
    if (j.contains("shots_per_qubit")) c.shots_per_qubit = get_size(j, "shots_per_qubit");
    if (j.contains("k1")) c.k1 = get_size(j, "k1");
    if (j.contains("k2")) c.k2 = get_size(j, "k2");
    if (j.contains("tau")) c.tau = get_number(j, "tau");
    if (j.contains("registers")) c.registers = get_size(j, "registers");
    if (j.contains("control_registers")) c.control_registers = get_size(j, "control_registers");
    if (j.contains("t")) c.t = get_size(j, "t");
    if (j.contains("error_tolerance")) c.error_tolerance = get_size(j, "error_tolerance");
    if (j.contains("memory_dwell_us")) c.memory_dwell_us = get_number(j, "memory_dwell_us");
    if (j.contains("channel")) c.channel = parse_channel(j.at("channel"));
    if (j.contains("adversary")) c.adversary = parse_adversary(get_string(j, "adversary"));
    if (j.contains("adversary_knows_unitary")) c.adversary_knows_unitary = get_bool(j, "adversary_knows_unitary");
    if (j.contains("trials")) c.trials = get_size(j, "trials");
    if (j.contains("seed")) c.seed = get_size(j, "seed");
    c.validate();
    return c;
}

std::string config_to_json(const ScenarioConfig &c) {
    ordered_json ch{{"latency_us", c.channel.latency_us}, {"loss_prob", c.channel.loss_prob}};
    if (c.channel.noise) {
        ch["noise"] = ordered_json{{"t2_us", c.channel.noise->t2_us},
                                   {"readout_flip_prob", c.channel.noise->readout_flip_prob},
                                   {"idle_depolarize_prob", c.channel.noise->idle_depolarize_prob}};
    } else {
        ch["noise"] = nullptr;
    }
    ordered_json j{{"protocol", to_string(c.protocol)},
                   {"lambda", c.lambda},
                   {"challenges", c.challenges},
                   {"challenges_per_session", c.challenges_per_session},
                   {"quant_bits", c.quant_bits},
                   {"enroll_mode", qrpuf::to_string(c.enroll_mode)},
                   {"enroll_shots", c.enroll_shots},
                   {"hamming_threshold", c.effective_hamming_threshold()},
                   {"shots_per_qubit", c.shots_per_qubit},
                   {"k1", c.k1},
                   {"k2", c.k2},
                   {"tau", c.tau},
                   {"registers", c.registers},
                   {"control_registers", c.control_registers},
                   {"t", c.t},
                   {"error_tolerance", c.error_tolerance},
                   {"memory_dwell_us", c.memory_dwell_us},
                   {"channel", ch},
                   {"adversary", to_string(c.adversary)},
                   {"adversary_knows_unitary", c.adversary_knows_unitary},
                   {"trials", c.trials},
                   {"seed", c.seed}};
    return j.dump(2);
}

uint64_t trial_seed(uint64_t scenario_seed, size_t trial) {
    return mix64(scenario_seed ^ mix64(static_cast<uint64_t>(trial) + 1));
}

TrialOutcome run_trial(const ScenarioConfig &cfg, size_t trial) {
    const uint64_t seed = trial_seed(cfg.seed, trial);
    RngStream root(seed, 0);
    TrialOutcome out;
    switch (cfg.protocol) {
        case Protocol::qrpuf:
            out = run_qrpuf_trial(cfg, root);
            break;
        case Protocol::uupuf:
            out = run_uupuf_trial(cfg, root);
            break;
        case Protocol::hmp4:
            out = run_hmp4_trial(cfg, root);
            break;
    }
    out.record.trial = trial;
    out.record.seed = seed;
    return out;
}

Metrics run_scenario(const ScenarioConfig &cfg, size_t workers) {
    cfg.validate();
    std::vector<TrialRecord> records(cfg.trials);
    workers = std::clamp<size_t>(workers, 1, cfg.trials);
    if (workers == 1) {
        for (size_t i = 0; i < cfg.trials; i++) {
            records[i] = run_trial(cfg, i).record;
        }
    } else {
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (size_t w = 0; w < workers; w++) {
            pool.emplace_back([&, w] {
                try {
                    for (size_t i = w; i < cfg.trials; i += workers) {
                        records[i] = run_trial(cfg, i).record;
                    }
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    Metrics m;
    m.trials = cfg.trials;
    for (const auto &r : records) {
        m.accepts += r.accepted ? 1 : 0;
        m.lost += r.lost ? 1 : 0;
    }
    m.accept_rate = static_cast<double>(m.accepts) / static_cast<double>(m.trials);
    if (cfg.adversary == Adversary::none) {
        m.honest_accept_rate = m.accept_rate;
    } else {
        m.adversary_accept_rate = m.accept_rate;
    }
    m.records = std::move(records);
    return m;
}

std::string metrics_to_json(const ScenarioConfig &cfg, const Metrics &m) {
    double mean_error = 0.0;
    double mean_dwell = 0.0;
    for (const auto &r : m.records) {
        mean_error += r.error_metric;
        mean_dwell += r.dwell_us;
    }
    if (!m.records.empty()) {
        mean_error /= static_cast<double>(m.records.size());
        mean_dwell /= static_cast<double>(m.records.size());
    }
    auto rate = [](const std::optional<double> &v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    ordered_json j{{"protocol", to_string(cfg.protocol)},
                   {"adversary", to_string(cfg.adversary)},
                   {"seed", cfg.seed},
                   {"trials", m.trials},
                   {"accepts", m.accepts},
                   {"lost", m.lost},
                   {"accept_rate", m.accept_rate},
                   {"honest_accept_rate", rate(m.honest_accept_rate)},
                   {"adversary_accept_rate", rate(m.adversary_accept_rate)},
                   {"mean_error_metric", mean_error},
                   {"mean_dwell_us", mean_dwell},
                   {"config", ordered_json::parse(config_to_json(cfg))}};
    return j.dump(2) + "\n";
}

std::string metrics_to_csv(const ScenarioConfig &cfg, const Metrics &m) {
    std::ostringstream out;
    out << "trial,protocol,adversary,accepted,error_metric,dwell_us,seed\n";
    const std::string protocol = to_string(cfg.protocol);
    const std::string adversary = to_string(cfg.adversary);
    for (const auto &r : m.records) {
        out << r.trial << ',' << protocol << ',' << adversary << ',' << (r.accepted ? 1 : 0) << ','
            << format_double(r.error_metric) << ',' << format_double(r.dwell_us) << ',' << r.seed << '\n';
    }
    return out.str();
}

}  // namespace qtoksim::harness
