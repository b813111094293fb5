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

#ifndef QTOKSIM_RNG_H
#define QTOKSIM_RNG_H

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace qtoksim {

/// Deterministic random stream identified by (seed, stream id).
///
/// Two streams built from the same pair produce bit-identical draws on every
/// platform: the engine is mt19937_64 and every distribution used by the
/// simulator is implemented here rather than taken from <random>, whose
/// distributions are implementation-defined.
///
/// Parallel Monte-Carlo code derives one child stream per trial with
/// `child(trial_index)`; children never share state with their parent.
class RngStream {
   public:
    RngStream(uint64_t seed, uint64_t stream_id);

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }

    /// Independent stream for sub-task `index`; depends only on
    /// (seed, stream_id, index), not on how many draws were taken.
    RngStream child(uint64_t index) const;

    uint64_t next_u64();
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n). n must be positive.
    uint64_t below(uint64_t n);
    bool bernoulli(double p);
    /// Standard normal (Box-Muller).
    double normal();
    /// Circularly-symmetric complex normal with E|z|^2 = 1.
    std::complex<double> complex_normal();

    /// `count` distinct values from [0, n), in draw order.
    std::vector<size_t> sample_without_replacement(size_t n, size_t count);

   private:
    uint64_t seed_;
    uint64_t stream_id_;
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// SplitMix64 finalizer; used to derive stream ids and identifiers.
uint64_t mix64(uint64_t x);

}  // namespace qtoksim

#endif
