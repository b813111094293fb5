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

#include "qtoksim/bitstring.h"

#include <stdexcept>

namespace qtoksim {

Bitstring::Bitstring(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
    for (auto &b : bits_) {
        if (b > 1) {
            throw std::invalid_argument("Bitstring: bits must be 0 or 1");
        }
    }
}

Bitstring Bitstring::parse(std::string_view text) {
    Bitstring out;
    out.bits_.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("Bitstring: expected only '0' and '1' characters");
        }
        out.bits_.push_back(c == '1' ? 1 : 0);
    }
    return out;
}

Bitstring Bitstring::from_uint(uint64_t value, size_t width) {
    if (width < 64 && (value >> width) != 0) {
        throw std::invalid_argument("Bitstring: value does not fit in width");
    }
    Bitstring out(width);
    for (size_t i = 0; i < width; i++) {
        size_t shift = width - 1 - i;
        out.bits_[i] = shift < 64 ? static_cast<uint8_t>((value >> shift) & 1) : 0;
    }
    return out;
}

size_t Bitstring::hamming_weight() const {
    size_t w = 0;
    for (auto b : bits_) {
        w += b;
    }
    return w;
}

uint64_t Bitstring::to_uint() const {
    if (bits_.size() > 64) {
        throw std::out_of_range("Bitstring: too long for uint64");
    }
    uint64_t v = 0;
    for (auto b : bits_) {
        v = (v << 1) | b;
    }
    return v;
}

std::string Bitstring::str() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

Bitstring Bitstring::operator^(const Bitstring &other) const {
    if (other.size() != size()) {
        throw std::invalid_argument("Bitstring: xor of strings with different lengths");
    }
    Bitstring out(size());
    for (size_t i = 0; i < size(); i++) {
        out.bits_[i] = bits_[i] ^ other.bits_[i];
    }
    return out;
}

Bitstring Bitstring::operator+(const Bitstring &other) const {
    Bitstring out = *this;
    out.bits_.insert(out.bits_.end(), other.bits_.begin(), other.bits_.end());
    return out;
}

}  // namespace qtoksim
