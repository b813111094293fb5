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

#ifndef QTOKSIM_BITSTRING_H
#define QTOKSIM_BITSTRING_H

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qtoksim {

/// Classical bit string. Index 0 is the leftmost (most significant) bit,
/// which is also the first qubit of a tensor product.
class Bitstring {
   public:
    Bitstring() = default;
    explicit Bitstring(size_t length) : bits_(length, 0) {}
    explicit Bitstring(std::vector<uint8_t> bits);

    /// Parses "0"/"1" text; anything else throws std::invalid_argument.
    static Bitstring parse(std::string_view text);
    /// `width` bits of `value`, most significant first.
    static Bitstring from_uint(uint64_t value, size_t width);

    size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    bool operator[](size_t i) const { return bits_[i] != 0; }
    void set(size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    void push_back(bool v) { bits_.push_back(v ? 1 : 0); }

    size_t hamming_weight() const;
    uint64_t to_uint() const;
    std::string str() const;

    Bitstring operator^(const Bitstring &other) const;
    /// Concatenation, `this` first.
    Bitstring operator+(const Bitstring &other) const;
    bool operator==(const Bitstring &other) const = default;

   private:
    std::vector<uint8_t> bits_;
};

}  // namespace qtoksim

#endif
