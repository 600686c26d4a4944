#pragma once

#include <cstdint>
#include <stdexcept>

#include "poew/bits.hpp"
#include "poew/des.hpp"
#include "poew/feistel.hpp"

namespace poew {

struct InvalidSymbol : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class CipherId : uint8_t { DES = 1, ToyFeistel = 2, Caesar = 3 };

/// Parameters of the block cipher backing a puzzle. All operations on it are
/// pure; any number of threads may share one profile.
struct CipherProfile {
    CipherId id;
    int block_bits;          // b
    int key_bits;            // k
    int effective_key_bits;  // k_eff <= k
    int rounds = 0;          // ToyFeistel only

    static CipherProfile des() { return {CipherId::DES, 64, 64, 56, 0}; }

    static CipherProfile toy_feistel(int block_bits, int key_bits, int rounds = 8) {
        if (block_bits <= 0 || block_bits > 64 || block_bits % 2 != 0)
            throw InvalidWidth("ToyFeistel block size must be even and <= 64");
        if (key_bits <= 0 || key_bits > 64)
            throw InvalidWidth("ToyFeistel key size must be in 1..64");
        if (rounds <= 0 || rounds > feistel::kMaxRounds)
            throw InvalidWidth("ToyFeistel round count out of range");
        return {CipherId::ToyFeistel, block_bits, key_bits, key_bits, rounds};
    }

    // One letter per block; 26 "keys" (shifts), so ceil(log2 26) effective bits.
    static CipherProfile caesar() { return {CipherId::Caesar, 8, 8, 5, 0}; }

    feistel::Params feistel_params() const {
        return {block_bits, key_bits, rounds};
    }

    bool operator==(const CipherProfile&) const = default;
};

namespace detail {

inline void check_block(const CipherProfile& p, uint64_t v) {
    if (p.block_bits < 64 && v > low_mask(p.block_bits))
        throw InvalidWidth("block value wider than profile block size");
}

inline void check_key(const CipherProfile& p, uint64_t v) {
    if (p.key_bits < 64 && v > low_mask(p.key_bits))
        throw InvalidWidth("key value wider than profile key size");
}

inline uint64_t caesar_block(uint64_t key, uint64_t p, bool decrypt) {
    if (p >= 26) throw InvalidSymbol("Caesar block must encode a letter 0..25");
    uint64_t shift = key % 26;
    return decrypt ? (p + 26 - shift) % 26 : (p + shift) % 26;
}

}  // namespace detail

/// Key schedule cached for repeated blocks under one key. This is what the
/// miner iterates; schedule setup is paid once per key trial, not per block.
class PreparedKey {
public:
    PreparedKey(const CipherProfile& profile, uint64_t key) : profile_(profile), key_(key) {
        detail::check_key(profile, key);
        switch (profile.id) {
            case CipherId::DES: des_ = des::key_schedule(key); break;
            case CipherId::ToyFeistel:
                feistel_ = feistel::schedule(profile.feistel_params(), key);
                break;
            case CipherId::Caesar: break;
        }
    }

    uint64_t encrypt(uint64_t plaintext) const {
        detail::check_block(profile_, plaintext);
        switch (profile_.id) {
            case CipherId::DES: return des::crypt(plaintext, des_, false);
            case CipherId::ToyFeistel:
                return feistel::encrypt(profile_.feistel_params(), feistel_, plaintext);
            case CipherId::Caesar: return detail::caesar_block(key_, plaintext, false);
        }
        throw std::logic_error("unknown cipher id");
    }

    uint64_t decrypt(uint64_t ciphertext) const {
        detail::check_block(profile_, ciphertext);
        switch (profile_.id) {
            case CipherId::DES: return des::crypt(ciphertext, des_, true);
            case CipherId::ToyFeistel:
                return feistel::decrypt(profile_.feistel_params(), feistel_, ciphertext);
            case CipherId::Caesar: return detail::caesar_block(key_, ciphertext, true);
        }
        throw std::logic_error("unknown cipher id");
    }

    uint64_t key() const { return key_; }

private:
    CipherProfile profile_;
    uint64_t key_;
    des::KeySchedule des_{};
    feistel::Schedule feistel_{};
};

inline uint64_t encrypt_block(const CipherProfile& profile, uint64_t key, uint64_t plaintext) {
    return PreparedKey(profile, key).encrypt(plaintext);
}

inline uint64_t decrypt_block(const CipherProfile& profile, uint64_t key, uint64_t ciphertext) {
    return PreparedKey(profile, key).decrypt(ciphertext);
}

/// k_eff-bit search value -> full k-bit key. For DES the 56 bits land in the
/// non-parity positions (FIPS numbering) with parity bits zeroed; elsewhere
/// k_eff == k and this is the identity.
inline uint64_t expand_effective_key(const CipherProfile& profile, uint64_t effective) {
    if (profile.effective_key_bits < 64 && effective > low_mask(profile.effective_key_bits))
        throw InvalidWidth("effective key wider than k_eff");
    if (profile.id == CipherId::DES) return des::expand_key56(effective);
    return effective;
}

inline uint64_t extract_effective_key(const CipherProfile& profile, uint64_t key) {
    detail::check_key(profile, key);
    if (profile.id == CipherId::DES) return des::extract_key56(key);
    return key;
}

enum class CaesarDirection { Encrypt, Decrypt };

inline char caesar_shift(int shift, char letter, CaesarDirection dir) {
    if (shift < 0 || shift > 25) throw InvalidSymbol("shift must be in 0..25");
    if (letter < 'A' || letter > 'Z') throw InvalidSymbol("letter must be uppercase A-Z");
    int v = letter - 'A';
    int out = dir == CaesarDirection::Encrypt ? (v + shift) % 26 : (v + 26 - shift) % 26;
    return char('A' + out);
}

}  // namespace poew
