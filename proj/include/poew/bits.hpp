#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace poew {

struct InvalidWidth : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr uint64_t low_mask(int bits) {
    return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

inline constexpr uint64_t rotl_bits(uint64_t v, int shift, int width) {
    v &= low_mask(width);
    shift %= width;
    if (shift == 0) return v;
    return ((v << shift) | (v >> (width - shift))) & low_mask(width);
}

// ceil(log2(v)) for v >= 1; ceil_log2(1) == 0
inline constexpr int ceil_log2(uint64_t v) {
    return v <= 1 ? 0 : std::bit_width(v - 1);
}

// MSB-first bit stream over a byte buffer. Bit 0 is the top bit of byte 0.
class BitReader {
public:
    BitReader(std::span<const uint8_t> data, size_t total_bits)
        : data_(data), total_bits_(total_bits) {
        if (total_bits > data.size() * 8)
            throw InvalidWidth("BitReader: buffer shorter than declared bit length");
    }

    uint64_t read(int nbits) {
        if (nbits < 0 || nbits > 64) throw InvalidWidth("BitReader: bad read width");
        if (pos_ + nbits > total_bits_) throw InvalidWidth("BitReader: read past end");
        uint64_t v = 0;
        for (int i = 0; i < nbits; ++i) {
            size_t p = pos_ + i;
            v = (v << 1) | ((data_[p >> 3] >> (7 - (p & 7))) & 1u);
        }
        pos_ += nbits;
        return v;
    }

    size_t position() const { return pos_; }
    size_t remaining() const { return total_bits_ - pos_; }

private:
    std::span<const uint8_t> data_;
    size_t total_bits_;
    size_t pos_ = 0;
};

class BitWriter {
public:
    void write(uint64_t value, int nbits) {
        if (nbits < 0 || nbits > 64) throw InvalidWidth("BitWriter: bad write width");
        if (nbits < 64 && value > low_mask(nbits))
            throw InvalidWidth("BitWriter: value wider than field");
        for (int i = nbits - 1; i >= 0; --i) {
            if (bit_pos_ == 0) bytes_.push_back(0);
            bytes_.back() |= uint8_t(((value >> i) & 1u) << (7 - bit_pos_));
            bit_pos_ = (bit_pos_ + 1) & 7;
        }
        nbits_ += nbits;
    }

    size_t bit_size() const { return nbits_; }

    // Remaining bits of the last byte stay zero.
    std::vector<uint8_t> take() && { return std::move(bytes_); }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
    size_t nbits_ = 0;
    int bit_pos_ = 0;
};

}  // namespace poew
