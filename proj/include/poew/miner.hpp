#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "poew/cipher.hpp"
#include "poew/puzzle.hpp"

namespace poew {

struct DivideByZero : std::domain_error {
    using std::domain_error::domain_error;
};

/// Half-open range [start, end) of effective key values.
struct KeyRange {
    uint64_t start = 0;
    uint64_t end = 0;

    uint64_t size() const { return end - start; }
    bool operator==(const KeyRange&) const = default;
};

inline KeyRange full_keyspace(const CipherProfile& cipher) {
    int ke = cipher.effective_key_bits;
    return {0, ke >= 64 ? ~uint64_t{0} : (uint64_t{1} << ke)};
}

/// Contiguous, disjoint, covering subranges whose sizes differ by at most 1.
inline std::vector<KeyRange> partition(KeyRange range, unsigned workers) {
    if (workers == 0) throw std::invalid_argument("workers must be >= 1");
    std::vector<KeyRange> out;
    uint64_t n = range.size();
    uint64_t base = n / workers, extra = n % workers;
    uint64_t pos = range.start;
    for (unsigned i = 0; i < workers; ++i) {
        uint64_t len = base + (i < extra ? 1 : 0);
        out.push_back({pos, pos + len});
        pos += len;
    }
    return out;
}

enum class MinePolicy { First, Minimal };

struct MiningResult {
    std::optional<uint64_t> found_key;  // effective bits
    uint64_t trials = 0;
    double elapsed = 0.0;
    double trials_per_second = 0.0;
};

// (trials done so far, range being searched), called every `stride` keys.
using ProgressFn = std::function<void(uint64_t, KeyRange)>;

namespace detail {

// Header segments never change across key trials; fold them once.
struct SearchContext {
    CipherProfile cipher;
    DifficultyTarget target;
    std::vector<uint64_t> base;       // header segment, pre-shifted
    std::vector<int> key_shift;       // low bit of this block's key segment
    std::vector<uint64_t> key_mask;

    SearchContext(const CipherProfile& c, std::span<const uint8_t> header_bytes,
                  int header_bits, const SegmentationPlan& plan, const DifficultyTarget& t)
        : cipher(c), target(t) {
        BitReader hr(header_bytes, size_t(header_bits));
        int pos = c.key_bits;
        for (auto [hb, kb] : plan.splits) {
            pos -= kb;
            base.push_back(hr.read(hb) << kb);
            key_shift.push_back(pos);
            key_mask.push_back(low_mask(kb));
        }
        if (pos != 0) throw InvalidWidth("plan does not cover the key");
    }

    bool try_key(uint64_t effective) const {
        PreparedKey pk(cipher, expand_effective_key(cipher, effective));
        uint64_t full = pk.key();
        for (size_t i = 0; i < base.size(); ++i) {
            uint64_t p = base[i] | ((full >> key_shift[i]) & key_mask[i]);
            if (!target.satisfies(pk.encrypt(p))) return false;
        }
        return true;
    }
};

}  // namespace detail

/// Scan `range` in ascending key order. Ascending order makes First and
/// Minimal coincide on a single range; the distinction matters only when
/// ranges are searched in parallel.
inline MiningResult mine(const CipherProfile& cipher, std::span<const uint8_t> header_bytes,
                         int header_bits, const DifficultyTarget& target, KeyRange range,
                         MinePolicy policy = MinePolicy::Minimal,
                         const ProgressFn& progress = nullptr, uint64_t stride = 1 << 16,
                         std::atomic<bool>* cancel = nullptr) {
    (void)policy;  // ascending scan: first hit is the range minimum
    auto plan = build_plan(header_bits, cipher.key_bits, cipher.block_bits);
    detail::SearchContext ctx(cipher, header_bytes, header_bits, plan, target);

    auto t0 = std::chrono::steady_clock::now();
    MiningResult res;
    for (uint64_t k = range.start; k < range.end; ++k) {
        if (cancel && cancel->load(std::memory_order_relaxed)) break;
        ++res.trials;
        if (ctx.try_key(k)) {
            res.found_key = k;
            break;
        }
        if (progress && res.trials % stride == 0) progress(res.trials, range);
    }
    res.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.trials_per_second = res.elapsed > 0 ? double(res.trials) / res.elapsed : 0.0;
    return res;
}

/// Fan the range out over `workers` threads and merge: minimum found key,
/// summed trials. Under MinePolicy::First a hit cancels the other workers,
/// so the merged key may be any satisfying key; under Minimal every subrange
/// below a hit is searched to completion and the global minimum is exact.
inline MiningResult mine_parallel(const CipherProfile& cipher,
                                  std::span<const uint8_t> header_bytes, int header_bits,
                                  const DifficultyTarget& target, KeyRange range,
                                  unsigned workers, MinePolicy policy = MinePolicy::Minimal,
                                  const ProgressFn& progress = nullptr,
                                  uint64_t stride = 1 << 16) {
    auto t0 = std::chrono::steady_clock::now();
    auto ranges = partition(range, workers);
    std::vector<MiningResult> parts(ranges.size());
    std::atomic<bool> cancel{false};

    auto run = [&](size_t i) {
        parts[i] = mine(cipher, header_bytes, header_bits, target, ranges[i],
                        MinePolicy::Minimal, progress, stride,
                        policy == MinePolicy::First ? &cancel : nullptr);
        if (policy == MinePolicy::First && parts[i].found_key) cancel.store(true);
    };

    std::vector<std::thread> threads;
    threads.reserve(ranges.size());
    for (size_t i = 0; i < ranges.size(); ++i) threads.emplace_back(run, i);
    for (auto& t : threads) t.join();

    MiningResult res;
    for (const auto& p : parts) {
        res.trials += p.trials;
        if (p.found_key && (!res.found_key || *p.found_key < *res.found_key))
            res.found_key = p.found_key;
    }
    res.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.trials_per_second = res.elapsed > 0 ? double(res.trials) / res.elapsed : 0.0;
    return res;
}

struct WorkEstimate {
    double expected_trials;
    double expected_solutions;
    double solvability_probability;  // 1 - exp(-expected_solutions)
    double worst_case_seconds;       // 2^k_eff / hashrate
};

/// Ideal-cipher model: each key succeeds independently with p = (T/2^b)^m.
inline WorkEstimate work_estimate(int effective_key_bits, int block_bits, int m,
                                  const DifficultyTarget& target, double hashrate) {
    if (hashrate <= 0) throw DivideByZero("hashrate must be positive");
    long double p = std::pow(target.as_real() / std::scalbln(1.0L, block_bits),
                             static_cast<long double>(m));
    long double keyspace = std::scalbln(1.0L, effective_key_bits);
    WorkEstimate e;
    e.expected_trials = double(1.0L / p);
    e.expected_solutions = double(keyspace * p);
    e.solvability_probability = double(1.0L - std::exp(-keyspace * p));
    e.worst_case_seconds = double(keyspace / hashrate);
    return e;
}

}  // namespace poew
