#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poew/bits.hpp"
#include "poew/cipher.hpp"
#include "poew/profile.hpp"
#include "poew/puzzle.hpp"

// Encryption-as-compression: a solved puzzle is stored as the effective key
// plus the m ciphertext residues, i.e. the (b-n) low-order bits that are not
// pinned to zero by the difficulty target. Decompression prepends the zero
// bits and decrypts; no search is involved.

namespace poew {

struct NotASolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct KeyMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedArchive : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotCompressible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CompressedBlock {
    CipherId profile_id;
    int block_bits;          // b
    int effective_key_bits;  // k_eff
    int m;
    int zero_bits;           // n = b - ceil(log2 T)
    DifficultyTarget target;
    uint64_t key_eff;
    std::vector<uint64_t> residues;  // m values, (b-n) bits each

    int payload_bits() const {
        return (block_bits - zero_bits) * m + effective_key_bits;
    }
};

struct SizeReport {
    int original_bits;
    int compressed_bits;  // payload only; container framing accounted separately
    double ratio;
    std::optional<int> break_even_n;  // smallest n with compressed < original
};

inline SizeReport size_report(int block_bits, int m, int effective_key_bits, int zero_bits,
                              int original_bits) {
    if (zero_bits < 0 || zero_bits > block_bits)
        throw std::invalid_argument("zero bits out of range");
    SizeReport r;
    r.original_bits = original_bits;
    r.compressed_bits = (block_bits - zero_bits) * m + effective_key_bits;
    r.ratio = double(r.compressed_bits) / double(original_bits);
    for (int n = 0; n <= block_bits; ++n) {
        if ((block_bits - n) * m + effective_key_bits < original_bits) {
            r.break_even_n = n;
            break;
        }
    }
    return r;
}

inline CompressedBlock compress(const CipherProfile& cipher,
                                std::span<const uint8_t> header_bytes, int header_bits,
                                uint64_t key, const DifficultyTarget& target) {
    auto plan = build_plan(header_bits, cipher.key_bits, cipher.block_bits);
    PreparedKey pk(cipher, key);
    auto blocks = assemble_plaintexts(header_bytes, header_bits, key, cipher.key_bits, plan);

    CompressedBlock out;
    out.profile_id = cipher.id;
    out.block_bits = cipher.block_bits;
    out.effective_key_bits = cipher.effective_key_bits;
    out.m = plan.m;
    out.zero_bits = target.zero_bits();
    out.target = target;
    out.key_eff = extract_effective_key(cipher, key);
    for (uint64_t p : blocks) {
        uint64_t c = pk.encrypt(p);
        if (!target.satisfies(c))
            throw NotASolution("compression requires a solved puzzle");
        out.residues.push_back(c);  // top n bits are zero since c < T <= 2^{b-n}
    }
    return out;
}

// Container: "PoEW" | version 0x01 | profile id | b | k_eff | m | n (one byte
// each) | threshold, 8 bytes big-endian (0 encodes 2^b) | payload bitstream
// (key_eff then residues, MSB-first), zero-padded to a byte boundary.
inline constexpr uint8_t kArchiveVersion = 0x01;

inline std::vector<uint8_t> serialize_archive(const CompressedBlock& cb) {
    std::vector<uint8_t> out = {'P', 'o', 'E', 'W', kArchiveVersion, uint8_t(cb.profile_id),
                                uint8_t(cb.block_bits), uint8_t(cb.effective_key_bits),
                                uint8_t(cb.m), uint8_t(cb.zero_bits)};
    uint64_t t = cb.target.header_field();
    for (int i = 7; i >= 0; --i) out.push_back(uint8_t(t >> (8 * i)));

    BitWriter w;
    w.write(cb.key_eff, cb.effective_key_bits);
    int rbits = cb.block_bits - cb.zero_bits;
    for (uint64_t r : cb.residues) {
        if (rbits < 64 && r > low_mask(rbits))
            throw MalformedArchive("residue wider than b-n bits");
        w.write(r, rbits);
    }
    auto payload = std::move(w).take();
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

inline CompressedBlock parse_archive(std::span<const uint8_t> bytes) {
    if (bytes.size() < 18) throw MalformedArchive("archive truncated");
    if (bytes[0] != 'P' || bytes[1] != 'o' || bytes[2] != 'E' || bytes[3] != 'W')
        throw MalformedArchive("bad magic");
    if (bytes[4] != kArchiveVersion) throw MalformedArchive("unsupported version");

    CompressedBlock cb;
    cb.profile_id = CipherId(bytes[5]);
    cb.block_bits = bytes[6];
    cb.effective_key_bits = bytes[7];
    cb.m = bytes[8];
    cb.zero_bits = bytes[9];
    if (cb.profile_id != CipherId::DES && cb.profile_id != CipherId::ToyFeistel)
        throw MalformedArchive("unknown profile id");
    if (cb.block_bits <= 0 || cb.block_bits > 64 || cb.effective_key_bits <= 0 ||
        cb.effective_key_bits > 64 || cb.m < 1 || cb.zero_bits < 0 ||
        cb.zero_bits > cb.block_bits)
        throw MalformedArchive("parameters out of range");

    uint64_t t = 0;
    for (int i = 0; i < 8; ++i) t = (t << 8) | bytes[size_t(10 + i)];
    cb.target = DifficultyTarget::from_header_field(t, cb.block_bits);
    if (cb.target.zero_bits() != cb.zero_bits)
        throw MalformedArchive("zero-bit count disagrees with threshold");

    int payload_bits = cb.payload_bits();
    size_t payload_bytes = (size_t(payload_bits) + 7) / 8;
    if (bytes.size() != 18 + payload_bytes) throw MalformedArchive("payload length mismatch");

    BitReader r(bytes.subspan(18), payload_bytes * 8);
    cb.key_eff = r.read(cb.effective_key_bits);
    int rbits = cb.block_bits - cb.zero_bits;
    for (int i = 0; i < cb.m; ++i) cb.residues.push_back(r.read(rbits));
    if (r.remaining() > 0 && r.read(int(r.remaining())) != 0)
        throw MalformedArchive("nonzero padding");
    return cb;
}

namespace detail {

inline CipherProfile cipher_from_archive(const CompressedBlock& cb) {
    switch (cb.profile_id) {
        case CipherId::DES:
            if (cb.block_bits != 64 || cb.effective_key_bits != 56)
                throw MalformedArchive("DES archive with wrong parameters");
            return CipherProfile::des();
        case CipherId::ToyFeistel:
            return CipherProfile::toy_feistel(cb.block_bits, cb.effective_key_bits);
        default:
            throw MalformedArchive("profile cannot be decompressed");
    }
}

}  // namespace detail

struct DecompressedHeader {
    std::vector<uint8_t> bytes;
    int bits;
    CipherProfile cipher;
    uint64_t key;  // full k-bit key
};

/// Reassemble the header from key + residues. The key segments embedded in
/// the decrypted plaintexts must reproduce the stored key exactly; any
/// disagreement is reported as corruption.
inline DecompressedHeader decompress(const CompressedBlock& cb) {
    CipherProfile cipher = detail::cipher_from_archive(cb);
    uint64_t full_key = expand_effective_key(cipher, cb.key_eff);
    PreparedKey pk(cipher, full_key);

    int rbits = cb.block_bits - cb.zero_bits;
    std::vector<uint64_t> plaintexts;
    for (uint64_t res : cb.residues) {
        if (rbits < 64 && res > low_mask(rbits))
            throw MalformedArchive("residue wider than b-n bits");
        plaintexts.push_back(pk.decrypt(res));
    }

    int header_bits = cb.m * cb.block_bits - cipher.key_bits;
    if (header_bits <= 0) throw MalformedArchive("no header bits in archive");
    auto plan = build_plan(header_bits, cipher.key_bits, cipher.block_bits);
    auto [header_bytes, embedded_key] = disassemble_plaintexts(plaintexts, plan, cipher.key_bits);
    if (embedded_key != full_key)
        throw KeyMismatch("embedded key segments disagree with stored key");
    return {std::move(header_bytes), header_bits, cipher, full_key};
}

inline DecompressedHeader decompress(std::span<const uint8_t> archive) {
    return decompress(parse_archive(archive));
}

/// Decompress and cross-check the header's own target field against the
/// archive threshold; catches corruption in the target-carrying blocks.
inline DecompressedHeader decompress_checked(std::span<const uint8_t> archive,
                                             const HeaderLayout& layout) {
    auto cb = parse_archive(archive);
    auto out = decompress(cb);
    if (layout.total_bits() != out.bits)
        throw MalformedArchive("archive does not match header layout");
    BlockHeader h = parse_header(out.bytes, layout);
    if (DifficultyTarget::from_header_field(h.target_field, cb.block_bits) != cb.target)
        throw KeyMismatch("header target field disagrees with archive threshold");
    return out;
}

// --- Caesar demo: fixed ciphertext "AAA" ---------------------------------

inline char caesar_compress(const std::string& text) {
    if (text.size() != 3 || text[0] != text[1] || text[1] != text[2])
        throw NotCompressible("only 3 identical letters compress against \"AAA\"");
    char c = text[0];
    if (c < 'A' || c > 'Z') throw NotCompressible("letters must be uppercase A-Z");
    return c;  // the shift mapping c to 'A' is (c - 'A') backwards, i.e. c itself
}

inline std::string caesar_decompress(char c) {
    if (c < 'A' || c > 'Z') throw InvalidSymbol("letter must be uppercase A-Z");
    return std::string(3, c);
}

}  // namespace poew
