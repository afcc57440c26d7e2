#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/rng.hpp"

namespace qkd {

// Binary strings (keys, basis selectors). One byte per bit, values 0/1.
using Bits = std::vector<std::uint8_t>;

inline Bits random_bits(std::size_t n, Rng& rng) {
    Bits out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.bit());
    return out;
}

inline std::size_t hamming_distance(const Bits& a, const Bits& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("hamming_distance: length mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
    return d;
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("xor_bits: length mismatch");
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = static_cast<std::uint8_t>(a[i] ^ b[i]);
    return out;
}

inline std::string bits_to_string(const Bits& b) {
    std::string s;
    s.reserve(b.size());
    for (auto v : b) s.push_back(v ? '1' : '0');
    return s;
}

inline Bits bits_from_string(const std::string& s) {
    Bits b;
    b.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bits_from_string: non-binary character");
        b.push_back(c == '1');
    }
    return b;
}

}  // namespace qkd
