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

#ifndef QTOKSIM_RESPONDER_H
#define QTOKSIM_RESPONDER_H

#include <functional>
#include <optional>

#include "qtoksim/rng.h"
#include "qtoksim/state.h"

namespace qtoksim {

/// Remote party answering a challenge state. std::nullopt means the reply
/// never arrived. Adversaries may return any state, of any dimension.
using Responder = std::function<std::optional<QuantumState>(const StateVector &challenge, RngStream &rng)>;

}  // namespace qtoksim

#endif
