#pragma once

// Test-only oracles, independent of the library's bit plumbing: everything
// here works on strings of '0'/'1' characters and asks the cipher primitives
// directly, so a bug in BitReader/assemble/check_solution cannot hide.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poew/cipher.hpp"

namespace oracle {

inline std::string bytes_to_bitstring(std::span<const uint8_t> bytes, int bits) {
    std::string s;
    for (int i = 0; i < bits; ++i)
        s.push_back(((bytes[size_t(i / 8)] >> (7 - i % 8)) & 1) ? '1' : '0');
    return s;
}

inline std::string value_to_bitstring(uint64_t v, int bits) {
    std::string s;
    for (int i = bits - 1; i >= 0; --i) s.push_back(((v >> i) & 1) ? '1' : '0');
    return s;
}

inline uint64_t bitstring_to_value(const std::string& s) {
    uint64_t v = 0;
    for (char c : s) v = (v << 1) | uint64_t(c == '1');
    return v;
}

// Even key split: first (k mod m) blocks take ceil(k/m) key bits.
inline std::vector<int> key_bits_per_block(int k, int m) {
    std::vector<int> out;
    for (int i = 0; i < m; ++i) out.push_back(k / m + (i < k % m ? 1 : 0));
    return out;
}

inline std::vector<uint64_t> plaintext_blocks(const poew::CipherProfile& cipher,
                                              std::span<const uint8_t> header_bytes,
                                              int header_bits, uint64_t full_key) {
    int b = cipher.block_bits, k = cipher.key_bits;
    int m = (header_bits + k) / b;
    std::string header = bytes_to_bitstring(header_bytes, header_bits);
    std::string key = value_to_bitstring(full_key, k);
    auto kb = key_bits_per_block(k, m);

    std::vector<uint64_t> blocks;
    size_t hpos = 0, kpos = 0;
    for (int i = 0; i < m; ++i) {
        int hb = b - kb[size_t(i)];
        std::string block = header.substr(hpos, size_t(hb)) + key.substr(kpos, size_t(kb[size_t(i)]));
        hpos += size_t(hb);
        kpos += size_t(kb[size_t(i)]);
        blocks.push_back(bitstring_to_value(block));
    }
    return blocks;
}

inline bool is_solution(const poew::CipherProfile& cipher, std::span<const uint8_t> header_bytes,
                        int header_bits, uint64_t effective_key, uint64_t threshold,
                        bool threshold_is_max) {
    uint64_t full = poew::expand_effective_key(cipher, effective_key);
    for (uint64_t p : plaintext_blocks(cipher, header_bytes, header_bits, full)) {
        uint64_t c = poew::encrypt_block(cipher, full, p);
        if (!threshold_is_max && c >= threshold) return false;
    }
    return true;
}

// Full-enumeration search for the minimal satisfying effective key.
inline std::optional<uint64_t> minimal_key(const poew::CipherProfile& cipher,
                                           std::span<const uint8_t> header_bytes,
                                           int header_bits, uint64_t threshold,
                                           bool threshold_is_max = false) {
    uint64_t keyspace = uint64_t{1} << cipher.effective_key_bits;
    for (uint64_t key = 0; key < keyspace; ++key)
        if (is_solution(cipher, header_bytes, header_bits, key, threshold, threshold_is_max))
            return key;
    return std::nullopt;
}

}  // namespace oracle
