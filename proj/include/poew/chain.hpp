#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poew/miner.hpp"
#include "poew/profile.hpp"
#include "poew/puzzle.hpp"

namespace poew {

/// Difficulty retarget rule. The underlying scheme leaves retargeting open;
/// this is a plain Bitcoin-style timespan correction so multi-block runs
/// keep a stable spacing.
struct RetargetConfig {
    int interval = 16;            // R: retarget every R blocks
    double target_spacing = 1.0;  // seconds
    double clamp = 4.0;           // T' confined to [T/clamp, clamp*T]
};

enum class RejectReason { UnknownParent, BadSolution, BadTimestamp, BadTarget };

inline const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::UnknownParent: return "UnknownParent";
        case RejectReason::BadSolution: return "BadSolution";
        case RejectReason::BadTimestamp: return "BadTimestamp";
        case RejectReason::BadTarget: return "BadTarget";
    }
    return "?";
}

struct ChainBlock {
    BlockHeader header;   // header.prev_id carries only the layout's id_bits
    uint64_t key_eff = 0; // unused for genesis
    Hash256 id{};         // full 256-bit id
    Hash256 parent_id{};  // full id of the resolved parent
    uint64_t height = 0;
    double cumulative_work = 0.0;
    uint64_t arrival_seq = 0;
};

/// Expected key trials to solve a block at this target: 2^{m*n}. The PoEW
/// analogue of expected hashes.
inline double block_work(const DifficultyTarget& target, int m) {
    return std::exp2(double(m) * double(target.zero_bits()));
}

/// Minimal block tree with heaviest-chain fork choice. Single writer; reads
/// see a consistent snapshot between mutations.
class ChainState {
public:
    ChainState(PuzzleProfile profile, RetargetConfig retarget, DifficultyTarget genesis_target,
               bool verify_solutions = true)
        : profile_(std::move(profile)),
          retarget_(retarget),
          verify_(verify_solutions),
          plan_(profile_.plan()) {
        profile_.validate();
        ChainBlock g;
        g.header.version = 1;
        g.header.timestamp = 0;
        g.header.target_field = genesis_target.header_field();
        g.id = block_id(g.header, profile_.layout);
        g.parent_id = g.id;
        genesis_ = g.id;
        tip_ = g.id;
        index(g);
    }

    const PuzzleProfile& profile() const { return profile_; }
    const RetargetConfig& retarget_config() const { return retarget_; }
    Hash256 genesis_id() const { return genesis_; }
    Hash256 tip() const { return tip_; }
    const ChainBlock& block(const Hash256& id) const { return blocks_.at(id); }
    bool contains(const Hash256& id) const { return blocks_.count(id) != 0; }
    size_t size() const { return blocks_.size(); }
    const std::map<Hash256, ChainBlock>& blocks() const { return blocks_; }

    DifficultyTarget target_of(const ChainBlock& b) const {
        return DifficultyTarget::from_header_field(b.header.target_field,
                                                   profile_.cipher.block_bits);
    }

    /// Retarget rule: at heights that are multiples of R, correct the parent
    /// target by the (clamped) ratio of actual to expected timespan over the
    /// last R intervals; otherwise inherit the parent target. Because a key
    /// succeeds with probability (T/2^b)^m, the spacing responds to the m-th
    /// power of a threshold change, so the correction applied to T is the
    /// m-th root of the timespan ratio.
    DifficultyTarget expected_target(const Hash256& parent_id) const {
        const ChainBlock& parent = blocks_.at(parent_id);
        DifficultyTarget t = target_of(parent);
        uint64_t child_height = parent.height + 1;
        if (retarget_.interval < 1 || child_height % uint64_t(retarget_.interval) != 0)
            return t;

        uint64_t back = std::min<uint64_t>(parent.height, uint64_t(retarget_.interval));
        if (back == 0) return t;
        const ChainBlock* anc = &parent;
        for (uint64_t i = 0; i < back; ++i) anc = &blocks_.at(anc->parent_id);
        double actual = double(parent.header.timestamp) - double(anc->header.timestamp);
        double expected = double(back) * retarget_.target_spacing;

        long double ratio = actual / expected;
        ratio = std::min<long double>(std::max<long double>(ratio, 1.0L / retarget_.clamp),
                                      retarget_.clamp);
        long double factor = std::pow(ratio, 1.0L / static_cast<long double>(plan_.m));
        long double next = std::roundl(t.as_real() * factor);
        long double max_t = std::scalbln(1.0L, profile_.cipher.block_bits);
        if (next < 1.0L) next = 1.0L;
        if (next >= max_t) return DifficultyTarget{0, profile_.cipher.block_bits, true};
        return DifficultyTarget::from_threshold(uint64_t(next), profile_.cipher.block_bits);
    }

    /// The unique known block whose id starts with the header's (possibly
    /// truncated) prev_id prefix. Ambiguous prefixes resolve to nothing.
    std::optional<Hash256> resolve_parent(const Hash256& prev_prefix) const {
        auto it = prefix_index_.find(prev_prefix);
        if (it == prefix_index_.end() || it->second.size() != 1) return std::nullopt;
        return it->second.front();
    }

    std::optional<RejectReason> validate(const BlockHeader& header, uint64_t key_eff) const {
        auto parent_id = resolve_parent(header.prev_id);
        if (!parent_id) return RejectReason::UnknownParent;
        const ChainBlock& parent = blocks_.at(*parent_id);
        if (header.timestamp <= parent.header.timestamp) return RejectReason::BadTimestamp;
        if (header.target_field != expected_target(*parent_id).header_field())
            return RejectReason::BadTarget;
        if (verify_) {
            auto bytes = serialize_header(header, profile_.layout);
            uint64_t full = expand_effective_key(profile_.cipher, key_eff);
            DifficultyTarget t = DifficultyTarget::from_header_field(
                header.target_field, profile_.cipher.block_bits);
            if (!check_solution(profile_.cipher, bytes, profile_.header_bits(),
                                PreparedKey(profile_.cipher, full), plan_, t))
                return RejectReason::BadSolution;
        }
        return std::nullopt;
    }

    /// Validate and append. Accepting a block may move the tip per the
    /// heaviest-work rule (ties: earliest arrival, then smaller id).
    std::optional<RejectReason> submit(const BlockHeader& header, uint64_t key_eff) {
        if (auto reject = validate(header, key_eff)) return reject;
        Hash256 parent_id = *resolve_parent(header.prev_id);
        const ChainBlock& parent = blocks_.at(parent_id);

        ChainBlock b;
        b.header = header;
        b.key_eff = key_eff;
        b.id = block_id(header, profile_.layout);
        b.parent_id = parent_id;
        b.height = parent.height + 1;
        b.cumulative_work = parent.cumulative_work + block_work(target_of(b), plan_.m);
        b.arrival_seq = next_seq_++;
        if (blocks_.count(b.id)) return std::nullopt;  // duplicate, already accepted
        index(b);

        if (prefer(blocks_.at(b.id), blocks_.at(tip_))) tip_ = b.id;
        return std::nullopt;
    }

    /// Tip of the heaviest chain; recomputed from scratch, matching the
    /// incrementally maintained tip.
    Hash256 fork_choice() const {
        const ChainBlock* best = &blocks_.at(genesis_);
        for (const auto& [id, b] : blocks_)
            if (prefer(b, *best)) best = &b;
        return best->id;
    }

    /// Blocks from genesis to `id`, genesis first.
    std::vector<Hash256> chain_to(const Hash256& id) const {
        std::vector<Hash256> out;
        const ChainBlock* b = &blocks_.at(id);
        while (true) {
            out.push_back(b->id);
            if (b->height == 0) break;
            b = &blocks_.at(b->parent_id);
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    /// Depth of the reorg implied by switching from `from` to `to`:
    /// blocks abandoned below `from` down to the common ancestor.
    uint64_t reorg_depth(const Hash256& from, const Hash256& to) const {
        const ChainBlock* a = &blocks_.at(from);
        const ChainBlock* b = &blocks_.at(to);
        uint64_t from_height = a->height;
        while (a->height > b->height) a = &blocks_.at(a->parent_id);
        while (b->height > a->height) b = &blocks_.at(b->parent_id);
        while (a->id != b->id) {
            a = &blocks_.at(a->parent_id);
            b = &blocks_.at(b->parent_id);
        }
        return from_height - a->height;
    }

    /// Export all non-genesis blocks in arrival order as a count-prefixed
    /// sequence of (serialized header, big-endian effective key) records.
    std::vector<uint8_t> export_blocks() const {
        std::vector<const ChainBlock*> ordered;
        for (const auto& [id, b] : blocks_)
            if (b.height > 0) ordered.push_back(&b);
        std::sort(ordered.begin(), ordered.end(),
                  [](const ChainBlock* x, const ChainBlock* y) {
                      return x->arrival_seq < y->arrival_seq;
                  });

        std::vector<uint8_t> out;
        uint32_t count = uint32_t(ordered.size());
        for (int i = 3; i >= 0; --i) out.push_back(uint8_t(count >> (8 * i)));
        int key_bytes = (profile_.cipher.effective_key_bits + 7) / 8;
        for (const ChainBlock* b : ordered) {
            auto hb = serialize_header(b->header, profile_.layout);
            out.insert(out.end(), hb.begin(), hb.end());
            for (int i = key_bytes - 1; i >= 0; --i)
                out.push_back(uint8_t(b->key_eff >> (8 * i)));
        }
        return out;
    }

    /// Replay an exported record stream. Records whose parent is not yet
    /// known are buffered and retried, so any interleaving of a valid log
    /// imports cleanly. Returns the number of accepted blocks.
    size_t import_blocks(std::span<const uint8_t> data) {
        if (data.size() < 4) throw InvalidWidth("chain import: truncated");
        uint32_t count = 0;
        for (int i = 0; i < 4; ++i) count = (count << 8) | data[size_t(i)];
        size_t header_bytes = size_t(profile_.layout.total_bytes());
        size_t key_bytes = size_t((profile_.cipher.effective_key_bits + 7) / 8);
        size_t rec = header_bytes + key_bytes;
        if (data.size() != 4 + count * rec) throw InvalidWidth("chain import: bad length");

        std::vector<std::pair<BlockHeader, uint64_t>> pending;
        for (uint32_t i = 0; i < count; ++i) {
            auto* p = data.data() + 4 + i * rec;
            BlockHeader h = parse_header({p, header_bytes}, profile_.layout);
            uint64_t key = 0;
            for (size_t j = 0; j < key_bytes; ++j) key = (key << 8) | p[header_bytes + j];
            pending.emplace_back(h, key);
        }

        size_t accepted = 0;
        bool progress = true;
        while (progress && !pending.empty()) {
            progress = false;
            for (auto it = pending.begin(); it != pending.end();) {
                auto reject = submit(it->first, it->second);
                if (!reject || *reject != RejectReason::UnknownParent) {
                    if (!reject) ++accepted;
                    it = pending.erase(it);
                    progress = true;
                } else {
                    ++it;
                }
            }
        }
        return accepted;
    }

private:
    void index(const ChainBlock& b) {
        prefix_index_[truncate_id(b.id, profile_.layout.id_bits)].push_back(b.id);
        blocks_.emplace(b.id, b);
    }

    bool prefer(const ChainBlock& a, const ChainBlock& b) const {
        if (a.cumulative_work != b.cumulative_work)
            return a.cumulative_work > b.cumulative_work;
        if (a.arrival_seq != b.arrival_seq) return a.arrival_seq < b.arrival_seq;
        return a.id < b.id;
    }

    PuzzleProfile profile_;
    RetargetConfig retarget_;
    bool verify_;
    SegmentationPlan plan_;
    std::map<Hash256, ChainBlock> blocks_;
    std::map<Hash256, std::vector<Hash256>> prefix_index_;
    Hash256 genesis_;
    Hash256 tip_;
    uint64_t next_seq_ = 1;
};

/// Header template for mining on top of `parent_id` (full id): prev linkage
/// truncated to the layout's width, caller's merkle root, timestamp strictly
/// after the parent, retargeted threshold.
inline BlockHeader build_candidate(const ChainState& state, const Hash256& parent_id,
                                   const Hash256& merkle_root, double now) {
    const ChainBlock& parent = state.block(parent_id);
    BlockHeader h;
    h.version = 1;
    h.prev_id = truncate_id(parent_id, state.profile().layout.id_bits);
    h.merkle_root = merkle_root;
    h.timestamp = std::max<uint32_t>(uint32_t(now), parent.header.timestamp + 1);
    h.target_field = state.expected_target(parent_id).header_field();
    return h;
}

}  // namespace poew
