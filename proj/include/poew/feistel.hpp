#pragma once

#include <array>
#include <cstdint>

#include "poew/bits.hpp"

// Reduced-size Feistel cipher for desk-scale key search. Invertible for any
// round function; makes no claim to cryptographic strength.
//
// Construction (fixed so independent implementations agree bit for bit):
//   halves L,R of b/2 bits, r rounds
//   subkey s_i = (rotl_k(K, (7*i) mod k) mod 2^{b/2}) XOR i,  i = 1..r
//   round:     (L,R) <- (R, L XOR F(R, s_i))
//   F(x,s)   = rotl_{b/2}((x + s) mod 2^{b/2}, 3) XOR ((x * 5) mod 2^{b/2})
//   ciphertext = L_r || R_r

namespace poew::feistel {

inline constexpr int kMaxRounds = 64;

struct Params {
    int block_bits;  // even, <= 64
    int key_bits;    // <= 64
    int rounds;      // <= kMaxRounds
};

struct Schedule {
    std::array<uint64_t, kMaxRounds> subkey;
    int rounds;
};

inline constexpr uint64_t round_f(uint64_t x, uint64_t s, int half) {
    uint64_t m = low_mask(half);
    return rotl_bits((x + s) & m, 3, half) ^ ((x * 5) & m);
}

inline constexpr Schedule schedule(const Params& p, uint64_t key) {
    Schedule ks{{}, p.rounds};
    int half = p.block_bits / 2;
    for (int i = 1; i <= p.rounds; ++i)
        ks.subkey[size_t(i - 1)] =
            (rotl_bits(key, (7 * i) % p.key_bits, p.key_bits) & low_mask(half)) ^
            uint64_t(i);
    return ks;
}

inline constexpr uint64_t encrypt(const Params& p, const Schedule& ks, uint64_t plaintext) {
    int half = p.block_bits / 2;
    uint64_t l = (plaintext >> half) & low_mask(half);
    uint64_t r = plaintext & low_mask(half);
    for (int i = 0; i < ks.rounds; ++i) {
        uint64_t next = l ^ round_f(r, ks.subkey[size_t(i)], half);
        l = r;
        r = next;
    }
    return (l << half) | r;
}

inline constexpr uint64_t decrypt(const Params& p, const Schedule& ks, uint64_t ciphertext) {
    int half = p.block_bits / 2;
    uint64_t l = (ciphertext >> half) & low_mask(half);
    uint64_t r = ciphertext & low_mask(half);
    for (int i = ks.rounds - 1; i >= 0; --i) {
        uint64_t prev = r ^ round_f(l, ks.subkey[size_t(i)], half);
        r = l;
        l = prev;
    }
    return (l << half) | r;
}

inline constexpr uint64_t encrypt(const Params& p, uint64_t key, uint64_t plaintext) {
    return encrypt(p, schedule(p, key), plaintext);
}

inline constexpr uint64_t decrypt(const Params& p, uint64_t key, uint64_t ciphertext) {
    return decrypt(p, schedule(p, key), ciphertext);
}

}  // namespace poew::feistel
