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

#include "qtoksim/harness/event_loop.h"

#include <cmath>

#include "qtoksim/format.h"

namespace qtoksim::harness {

std::string to_string(Role role) {
    switch (role) {
        case Role::certifier:
            return "certifier";
        case Role::verifier:
            return "verifier";
        case Role::user:
            return "user";
        case Role::adversary:
            return "adversary";
    }
    return "unknown";
}

void EventLoop::add_node(Node node, Handler handler) {
    if (node.name.empty()) {
        throw std::invalid_argument("node names must be non-empty");
    }
    if (nodes_.contains(node.name)) {
        throw std::invalid_argument("duplicate node name '" + node.name + "'");
    }
    std::string name = node.name;
    nodes_.emplace(std::move(name), std::make_pair(std::move(node), std::move(handler)));
}

bool EventLoop::has_node(std::string_view name) const {
    return nodes_.find(name) != nodes_.end();
}

const Node &EventLoop::node(std::string_view name) const {
    auto it = nodes_.find(name);
    if (it == nodes_.end()) {
        throw std::out_of_range("unknown node '" + std::string(name) + "'");
    }
    return it->second.first;
}

uint64_t EventLoop::schedule(double time_us, Payload payload) {
    if (!std::isfinite(time_us) || time_us < now_) {
        throw std::invalid_argument("cannot schedule an event in the past");
    }
    uint64_t seq = next_seq_++;
    queue_.push(Event{time_us, seq, std::move(payload)});
    return seq;
}

uint64_t EventLoop::schedule_after(double delay_us, Payload payload) {
    if (!(delay_us >= 0.0)) {
        throw std::invalid_argument("event delay must be non-negative");
    }
    return schedule(now_ + delay_us, std::move(payload));
}

void EventLoop::record_loss(const Payload &payload) {
    trace_.push_back(TraceEntry{now_, next_seq_++, payload.to, payload.from, payload.kind, payload.tag, "lost",
                                payload.quantum.has_value()});
}

void EventLoop::annotate(std::string_view node, std::string_view kind, std::string outcome) {
    trace_.push_back(TraceEntry{now_, next_seq_++, std::string(node), std::string(node), std::string(kind), 0,
                                std::move(outcome), false});
}

const std::vector<TraceEntry> &EventLoop::run() {
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time_us;
        auto it = nodes_.find(ev.payload.to);
        if (it == nodes_.end()) {
            throw ScenarioAborted("event '" + ev.payload.kind + "' addressed to unknown node '" + ev.payload.to +
                                  "'");
        }
        trace_.push_back(TraceEntry{ev.time_us, ev.seq, ev.payload.to, ev.payload.from, ev.payload.kind,
                                    ev.payload.tag, "delivered", ev.payload.quantum.has_value()});
        try {
            it->second.second(ev, *this);
        } catch (const std::exception &e) {
            throw ScenarioAborted("node '" + ev.payload.to + "' failed on '" + ev.payload.kind +
                                  "' at t=" + format_double(ev.time_us) + "us: " + e.what());
        }
    }
    return trace_;
}

}  // namespace qtoksim::harness
