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

#ifndef QTOKSIM_HARNESS_EVENT_LOOP_H
#define QTOKSIM_HARNESS_EVENT_LOOP_H

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qtoksim/state.h"

namespace qtoksim::harness {

enum class Role { certifier, verifier, user, adversary };

std::string to_string(Role role);

struct Node {
    std::string name;
    Role role = Role::user;
    /// Free-form strategy descriptor, e.g. "honest" or "intercept_resend".
    std::string behavior;
};

/// Message carried by an event. Quantum payloads carry a state, classical
/// ones carry JSON text.
struct Payload {
    std::string kind;
    std::string from;
    std::string to;
    /// Message-specific index (challenge copy, register number, ...).
    size_t tag = 0;
    std::optional<QuantumState> quantum;
    std::string classical;
};

struct Event {
    double time_us = 0.0;
    uint64_t seq = 0;
    Payload payload;
};

struct TraceEntry {
    double time_us = 0.0;
    uint64_t seq = 0;
    std::string node;
    std::string from;
    std::string kind;
    size_t tag = 0;
    /// "delivered" for processed events, "lost" for dropped quantum messages,
    /// or a free-form annotation added by a handler.
    std::string outcome;
    bool quantum = false;

    bool operator==(const TraceEntry &) const = default;
};

/// A handler threw; the message names the node, time and original error.
class ScenarioAborted : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class EventLoop;
using Handler = std::function<void(const Event &, EventLoop &)>;

/// Single-threaded discrete-event loop. Events run in (time, seq) order where
/// seq is the scheduling order, so equal-time events keep their insertion
/// order and a run is fully determined by its inputs.
class EventLoop {
   public:
    /// Throws std::invalid_argument when the name is already taken.
    void add_node(Node node, Handler handler);
    bool has_node(std::string_view name) const;
    const Node &node(std::string_view name) const;

    /// Schedules at an absolute time, which must not lie in the past.
    uint64_t schedule(double time_us, Payload payload);
    uint64_t schedule_after(double delay_us, Payload payload);

    /// Records a message that never reaches its destination.
    void record_loss(const Payload &payload);
    /// Adds a free-form entry at the current time.
    void annotate(std::string_view node, std::string_view kind, std::string outcome);

    /// Processes events until the queue is empty and returns the trace.
    /// Handler exceptions are rethrown as ScenarioAborted.
    const std::vector<TraceEntry> &run();

    double now() const { return now_; }
    const std::vector<TraceEntry> &trace() const { return trace_; }

   private:
    struct Later {
        bool operator()(const Event &a, const Event &b) const {
            if (a.time_us != b.time_us) {
                return a.time_us > b.time_us;
            }
            return a.seq > b.seq;
        }
    };

    std::map<std::string, std::pair<Node, Handler>, std::less<>> nodes_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::vector<TraceEntry> trace_;
    double now_ = 0.0;
    uint64_t next_seq_ = 0;
};

}  // namespace qtoksim::harness

#endif
