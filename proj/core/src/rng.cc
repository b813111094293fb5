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

#include "qtoksim/rng.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qtoksim {

uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(uint64_t seed, uint64_t stream_id) {
    std::seed_seq seq{
        static_cast<uint32_t>(seed),
        static_cast<uint32_t>(seed >> 32),
        static_cast<uint32_t>(stream_id),
        static_cast<uint32_t>(stream_id >> 32),
    };
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {
}

RngStream RngStream::child(uint64_t index) const {
    return RngStream(seed_, mix64(stream_id_ ^ mix64(index + 0x51ED2701ULL)));
}

uint64_t RngStream::next_u64() {
    return engine_();
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

uint64_t RngStream::below(uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("RngStream::below: n must be positive");
    }
    // Rejection sampling removes modulo bias.
    uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

bool RngStream::bernoulli(double p) {
    if (p <= 0.0) {
        return false;
    }
    if (p >= 1.0) {
        return true;
    }
    return uniform() < p;
}

double RngStream::normal() {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 == 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(a);
    has_spare_normal_ = true;
    return r * std::cos(a);
}

std::complex<double> RngStream::complex_normal() {
    double re = normal();
    double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

std::vector<size_t> RngStream::sample_without_replacement(size_t n, size_t count) {
    if (count > n) {
        throw std::invalid_argument("sample_without_replacement: count exceeds population");
    }
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; i++) {
        pool[i] = i;
    }
    // Partial Fisher-Yates.
    for (size_t i = 0; i < count; i++) {
        size_t j = i + static_cast<size_t>(below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace qtoksim
