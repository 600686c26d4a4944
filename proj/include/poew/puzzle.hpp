#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poew/bits.hpp"
#include "poew/cipher.hpp"
#include "poew/sha256.hpp"

namespace poew {

struct NonDivisible : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Threshold every ciphertext block must stay strictly below. T = 2^b is the
/// "accept anything" sentinel (stored as 0 in the b-bit header field).
struct DifficultyTarget {
    uint64_t threshold = 0;  // valid when !maxed
    int block_bits = 0;
    bool maxed = false;      // T == 2^b

    static DifficultyTarget from_threshold(uint64_t t, int block_bits) {
        if (t == 0) throw std::invalid_argument("threshold must be >= 1");
        if (block_bits < 64 && t > (uint64_t{1} << block_bits))
            throw InvalidWidth("threshold exceeds 2^b");
        if (block_bits < 64 && t == (uint64_t{1} << block_bits))
            return {0, block_bits, true};
        return {t, block_bits, false};
    }

    static DifficultyTarget from_zero_bits(int n, int block_bits) {
        if (n < 0 || n > block_bits) throw std::invalid_argument("zero bits out of range");
        if (n == 0) return {0, block_bits, true};
        return {uint64_t{1} << (block_bits - n), block_bits, false};
    }

    // Header encoding: sentinel 0 means 2^b, anything else is literal.
    static DifficultyTarget from_header_field(uint64_t field, int block_bits) {
        if (field == 0) return {0, block_bits, true};
        return from_threshold(field, block_bits);
    }

    uint64_t header_field() const {
        if (maxed) return 0;
        if (block_bits < 64 && threshold == (uint64_t{1} << block_bits)) return 0;
        return threshold;
    }

    bool satisfies(uint64_t ciphertext) const {
        return maxed || ciphertext < threshold;
    }

    // n = b - ceil(log2 T); the count of guaranteed-zero leading bits.
    int zero_bits() const {
        if (maxed) return 0;
        return block_bits - ceil_log2(threshold);
    }

    long double as_real() const {
        if (maxed) return std::scalbln(1.0L, block_bits);
        return static_cast<long double>(threshold);
    }

    bool operator==(const DifficultyTarget&) const = default;
};

/// Bit widths of the serialized header fields, in order:
/// version | prev_id | merkle_root | timestamp | target_field.
/// The 640-bit layout is 32/256/256/32/64; toy profiles scale down.
struct HeaderLayout {
    int version_bits;
    int id_bits;  // prev_id and merkle_root each
    int timestamp_bits;
    int target_bits;

    int total_bits() const {
        return version_bits + 2 * id_bits + timestamp_bits + target_bits;
    }
    int total_bytes() const { return total_bits() / 8; }

    void validate() const {
        if (version_bits <= 0 || version_bits > 32 || id_bits <= 0 || id_bits > 256 ||
            timestamp_bits <= 0 || timestamp_bits > 32 || target_bits <= 0 ||
            target_bits > 64)
            throw InvalidWidth("header field width out of range");
        if (total_bits() % 8 != 0)
            throw InvalidWidth("header layout must be byte-aligned");
    }

    static HeaderLayout bitcoin_like() { return {32, 256, 32, 64}; }

    bool operator==(const HeaderLayout&) const = default;
};

struct BlockHeader {
    uint32_t version = 1;
    Hash256 prev_id{};
    Hash256 merkle_root{};
    uint32_t timestamp = 0;
    uint64_t target_field = 0;  // 0 encodes T = 2^b

    bool operator==(const BlockHeader&) const = default;
};

namespace detail {

inline void write_hash_prefix(BitWriter& w, const Hash256& h, int bits) {
    int full = bits / 8, rem = bits % 8;
    for (int i = 0; i < full; ++i) w.write(h[size_t(i)], 8);
    if (rem) w.write(h[size_t(full)] >> (8 - rem), rem);
}

inline Hash256 read_hash_prefix(BitReader& r, int bits) {
    Hash256 h{};
    int full = bits / 8, rem = bits % 8;
    for (int i = 0; i < full; ++i) h[size_t(i)] = uint8_t(r.read(8));
    if (rem) h[size_t(full)] = uint8_t(r.read(rem) << (8 - rem));
    return h;
}

}  // namespace detail

inline std::vector<uint8_t> serialize_header(const BlockHeader& h, const HeaderLayout& layout) {
    layout.validate();
    BitWriter w;
    w.write(h.version & low_mask(layout.version_bits), layout.version_bits);
    detail::write_hash_prefix(w, h.prev_id, layout.id_bits);
    detail::write_hash_prefix(w, h.merkle_root, layout.id_bits);
    w.write(h.timestamp & low_mask(layout.timestamp_bits), layout.timestamp_bits);
    w.write(h.target_field & low_mask(layout.target_bits), layout.target_bits);
    return std::move(w).take();
}

inline BlockHeader parse_header(std::span<const uint8_t> bytes, const HeaderLayout& layout) {
    layout.validate();
    if (bytes.size() != size_t(layout.total_bytes()))
        throw InvalidWidth("serialized header has wrong length");
    BitReader r(bytes, size_t(layout.total_bits()));
    BlockHeader h;
    h.version = uint32_t(r.read(layout.version_bits));
    h.prev_id = detail::read_hash_prefix(r, layout.id_bits);
    h.merkle_root = detail::read_hash_prefix(r, layout.id_bits);
    h.timestamp = uint32_t(r.read(layout.timestamp_bits));
    h.target_field = r.read(layout.target_bits);
    return h;
}

inline Hash256 block_id(std::span<const uint8_t> header_bytes) {
    return sha256(header_bytes);
}

inline Hash256 block_id(const BlockHeader& h, const HeaderLayout& layout) {
    return sha256(serialize_header(h, layout));
}

/// Keep the first `bits` bits of an id, zeroing the rest; the form a hash
/// field narrower than 256 bits carries in a serialized header.
inline Hash256 truncate_id(const Hash256& id, int bits) {
    Hash256 out{};
    int full = bits / 8, rem = bits % 8;
    for (int i = 0; i < full; ++i) out[size_t(i)] = id[size_t(i)];
    if (rem) out[size_t(full)] = uint8_t(id[size_t(full)] & (0xFF << (8 - rem)));
    return out;
}

/// How header bits and key bits fold into m plaintext blocks. Key bits are
/// spread as evenly as possible, low-order within each block; header bits
/// fill the high-order remainder. Both are consumed MSB-first in block order.
struct SegmentationPlan {
    int m = 0;
    std::vector<std::pair<int, int>> splits;  // (header_bits_i, key_bits_i)

    bool operator==(const SegmentationPlan&) const = default;
};

inline SegmentationPlan build_plan(int header_bits, int key_bits, int block_bits) {
    if (header_bits < 0 || key_bits < 0 || block_bits <= 0)
        throw std::invalid_argument("negative bit counts");
    if ((header_bits + key_bits) % block_bits != 0)
        throw NonDivisible("header+key length not divisible by block size");
    SegmentationPlan plan;
    plan.m = (header_bits + key_bits) / block_bits;
    if (plan.m == 0) return plan;
    int hi = key_bits / plan.m + 1;  // ceil for the first (k mod m) blocks
    int carry = key_bits % plan.m;
    for (int i = 0; i < plan.m; ++i) {
        int kb = i < carry ? hi : key_bits / plan.m;
        if (kb > block_bits) throw NonDivisible("key does not fit the blocks");
        plan.splits.emplace_back(block_bits - kb, kb);
    }
    return plan;
}

inline std::vector<uint64_t> assemble_plaintexts(std::span<const uint8_t> header_bytes,
                                                 int header_bits, uint64_t key, int key_bits,
                                                 const SegmentationPlan& plan) {
    int total_h = 0, total_k = 0;
    for (auto [hb, kb] : plan.splits) total_h += hb, total_k += kb;
    if (total_h != header_bits) throw InvalidWidth("plan does not match header length");
    if (total_k != key_bits) throw InvalidWidth("plan does not match key length");
    if (key_bits < 64 && key > low_mask(key_bits)) throw InvalidWidth("key too wide");

    BitReader hr(header_bytes, size_t(header_bits));
    std::vector<uint64_t> blocks;
    blocks.reserve(size_t(plan.m));
    int key_pos = key_bits;
    for (auto [hb, kb] : plan.splits) {
        uint64_t hseg = hr.read(hb);
        key_pos -= kb;
        uint64_t kseg = (key >> key_pos) & low_mask(kb);
        blocks.push_back((hseg << kb) | kseg);
    }
    return blocks;
}

/// Inverse of assemble_plaintexts: recover (header bytes, key).
inline std::pair<std::vector<uint8_t>, uint64_t> disassemble_plaintexts(
    std::span<const uint64_t> blocks, const SegmentationPlan& plan, int key_bits) {
    if (blocks.size() != size_t(plan.m)) throw InvalidWidth("block count mismatch");
    BitWriter hw;
    uint64_t key = 0;
    for (int i = 0; i < plan.m; ++i) {
        auto [hb, kb] = plan.splits[size_t(i)];
        uint64_t v = blocks[size_t(i)];
        if (hb + kb < 64 && v > low_mask(hb + kb)) throw InvalidWidth("block too wide");
        hw.write(v >> kb, hb);
        key = (key << kb) | (v & low_mask(kb));
    }
    (void)key_bits;
    return {std::move(hw).take(), key};
}

/// True iff every plaintext block encrypts below the target. Blocks are
/// checked in order; the first miss wins, which is what makes high-difficulty
/// key sweeps cheap.
inline bool check_solution(const CipherProfile& cipher, std::span<const uint8_t> header_bytes,
                           int header_bits, const PreparedKey& key,
                           const SegmentationPlan& plan, const DifficultyTarget& target) {
    auto blocks = assemble_plaintexts(header_bytes, header_bits, key.key(), cipher.key_bits, plan);
    for (uint64_t p : blocks)
        if (!target.satisfies(key.encrypt(p))) return false;
    return true;
}

inline bool check_solution(const CipherProfile& cipher, std::span<const uint8_t> header_bytes,
                           int header_bits, uint64_t key, const DifficultyTarget& target) {
    auto plan = build_plan(header_bits, cipher.key_bits, cipher.block_bits);
    return check_solution(cipher, header_bytes, header_bits, PreparedKey(cipher, key), plan,
                          target);
}

}  // namespace poew
