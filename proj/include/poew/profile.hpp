#pragma once

#include <string>

#include "poew/cipher.hpp"
#include "poew/puzzle.hpp"

namespace poew {

/// A puzzle configuration: cipher plus header layout. The header length h,
/// the key length k and the block size b determine the segmentation plan
/// (m = (h+k)/b). The target field is always b bits wide so the threshold is
/// carried verbatim in the header.
struct PuzzleProfile {
    std::string name;
    CipherProfile cipher;
    HeaderLayout layout;

    int header_bits() const { return layout.total_bits(); }

    SegmentationPlan plan() const {
        return build_plan(header_bits(), cipher.key_bits, cipher.block_bits);
    }

    void validate() const {
        layout.validate();
        if (layout.target_bits != cipher.block_bits)
            throw InvalidWidth("target field must be as wide as a cipher block");
        if ((header_bits() + cipher.key_bits) % cipher.block_bits != 0)
            throw NonDivisible("header+key not divisible by block size");
    }

    /// Full exhaustive search is permitted only on desk-scale keyspaces.
    bool desk_scale() const { return cipher.effective_key_bits <= 24; }

    // The full-size construction: DES over a 640-bit Bitcoin-like header,
    // 704 bits folded into 11 blocks.
    static PuzzleProfile des640() {
        return {"des640", CipherProfile::des(), HeaderLayout::bitcoin_like()};
    }

    // 48-bit header + 16-bit Feistel key -> 4 blocks of 16 bits. Fully
    // searchable (2^16 keys), used for everything that needs real mining.
    static PuzzleProfile toy16() {
        return {"toy16", CipherProfile::toy_feistel(16, 16), HeaderLayout{4, 8, 12, 16}};
    }

    // Wider-key toy variant: 9-10 key bits per block, so archives carry a
    // stronger embedded-key integrity signal. Mined over a bounded range.
    static PuzzleProfile toy16w() {
        return {"toy16w", CipherProfile::toy_feistel(16, 64), HeaderLayout{4, 8, 12, 16}};
    }

    // Toy cipher under full-width 256-bit ids, for chain and simulator runs
    // where truncated parent ids would collide. 592-bit header, m = 38.
    static PuzzleProfile toy16chain() {
        return {"toy16chain", CipherProfile::toy_feistel(16, 16), HeaderLayout{32, 256, 32, 16}};
    }
};

}  // namespace poew
