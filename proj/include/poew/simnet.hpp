#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

#include "poew/chain.hpp"
#include "poew/codec.hpp"
#include "poew/miner.hpp"
#include "poew/profile.hpp"

// Seeded discrete-event simulation of competing PoEW miners. One logical
// event timeline; each miner keeps its own chain view and rebases its search
// whenever its tip moves. `Sampled` mode draws block-find times from the
// ideal-cipher exponential model so DES-scale parameters can be simulated;
// `Real` mode actually sweeps a toy keyspace.

namespace poew {

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DeskScaleExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LatencyModel {
    enum class Kind { Constant, Uniform };
    Kind kind = Kind::Constant;
    double min = 0.0;
    double max = 0.0;  // Uniform only

    static LatencyModel constant(double seconds) {
        return {Kind::Constant, seconds, seconds};
    }
    static LatencyModel uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
};

enum class SimMode { Real, Sampled };

struct MinerConfig {
    int id;
    double hashrate;  // key trials per second
};

struct SimConfig {
    uint64_t seed = 0;
    std::vector<MinerConfig> miners;
    LatencyModel latency;
    double duration = 0.0;  // simulated seconds of mining
    PuzzleProfile profile;
    RetargetConfig retarget;
    SimMode mode = SimMode::Sampled;
    DifficultyTarget genesis_target;

    void validate() const {
        if (miners.empty()) throw ConfigInvalid("at least one miner required");
        for (const auto& m : miners)
            if (m.hashrate <= 0) throw ConfigInvalid("hashrates must be positive");
        if (duration <= 0) throw ConfigInvalid("duration must be positive");
        if (latency.min < 0 || latency.max < latency.min)
            throw ConfigInvalid("bad latency bounds");
        if (mode == SimMode::Real && profile.cipher.effective_key_bits > 24)
            throw ConfigInvalid("real mode restricted to keyspaces <= 2^24");
    }
};

struct SimStats {
    uint64_t blocks_accepted = 0;  // canonical chain length (sans genesis)
    uint64_t blocks_mined = 0;     // including orphaned
    uint64_t forks_observed = 0;
    uint64_t max_reorg_depth = 0;
    std::map<int, uint64_t> shares;  // canonical blocks per miner id
    double mean_spacing = 0.0;
    double mean_compressed_bits = 0.0;
    uint64_t unsolvable_retries = 0;
    bool converged = false;
    std::vector<double> canonical_times;  // found times along the winning chain

    bool operator==(const SimStats&) const = default;
};

namespace simdetail {

// Fixed-algorithm uniform in [0,1): top 53 bits of one mt19937_64 draw.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1p-53;
}

inline double exponential(std::mt19937_64& rng, double rate) {
    return -std::log1p(-uniform01(rng)) / rate;
}

inline Hash256 random_hash(std::mt19937_64& rng) {
    Hash256 h;
    for (int i = 0; i < 4; ++i) {
        uint64_t v = rng();
        for (int j = 0; j < 8; ++j) h[size_t(8 * i + j)] = uint8_t(v >> (8 * j));
    }
    return h;
}

inline double sample_latency(const LatencyModel& m, std::mt19937_64& rng) {
    if (m.kind == LatencyModel::Kind::Constant) return m.min;
    return m.min + (m.max - m.min) * uniform01(rng);
}

}  // namespace simdetail

class Simulation {
public:
    explicit Simulation(SimConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
        cfg_.validate();
        cfg_.profile.validate();
    }

    SimStats run() {
        bool verify = cfg_.mode == SimMode::Real;
        for (size_t i = 0; i < cfg_.miners.size(); ++i)
            nodes_.emplace_back(cfg_.profile, cfg_.retarget, cfg_.genesis_target, verify);
        observer_.emplace(cfg_.profile, cfg_.retarget, cfg_.genesis_target, verify);

        for (size_t i = 0; i < cfg_.miners.size(); ++i) start_mining(i, 0.0);

        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.type == Event::Found)
                on_found(ev);
            else
                on_deliver(ev);
        }
        return finalize();
    }

private:
    struct Mined {
        BlockHeader header;
        uint64_t key_eff;
        int miner;
        double found_time;
        double compressed_bits;
    };

    struct Event {
        double time;
        uint64_t seq;  // tiebreak: processing order equals scheduling order
        enum Type { Found, Deliver } type;
        size_t node;
        uint64_t token = 0;     // Found: stale-search guard
        size_t block_idx = 0;   // Deliver: index into mined_
        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };

    double success_probability(const DifficultyTarget& t) const {
        const auto& c = cfg_.profile.cipher;
        long double per_block = t.as_real() / std::scalbln(1.0L, c.block_bits);
        return double(std::pow(per_block, (long double)cfg_.profile.plan().m));
    }

    void start_mining(size_t node, double now) {
        uint64_t token = ++tokens_[node];
        if (now > cfg_.duration) return;  // past the mining horizon: go idle
        ChainState& st = nodes_[node];
        Hash256 tip = st.tip();
        DifficultyTarget t = st.expected_target(tip);
        BlockHeader header = build_candidate(st, tip, simdetail::random_hash(rng_), now);
        header.merkle_root = truncate_id(header.merkle_root, cfg_.profile.layout.id_bits);

        double dt;
        uint64_t key_eff = 0;
        if (cfg_.mode == SimMode::Sampled) {
            double rate = cfg_.miners[node].hashrate * success_probability(t);
            dt = simdetail::exponential(rng_, rate);
        } else {
            uint64_t trials = 0;
            auto range = full_keyspace(cfg_.profile.cipher);
            while (true) {
                auto bytes = serialize_header(header, cfg_.profile.layout);
                auto res = mine(cfg_.profile.cipher, bytes, cfg_.profile.header_bits(), t,
                                range, MinePolicy::First);
                trials += res.trials;
                if (res.found_key) {
                    key_eff = *res.found_key;
                    break;
                }
                // Keyspace exhausted: advance the timestamp and roll a fresh
                // merkle root so every block of the next candidate changes
                // (a timestamp bump alone leaves the earlier blocks fixed).
                ++stats_.unsolvable_retries;
                ++header.timestamp;
                header.merkle_root =
                    truncate_id(simdetail::random_hash(rng_), cfg_.profile.layout.id_bits);
            }
            dt = double(trials) / cfg_.miners[node].hashrate;
        }

        pending_[node] = Mined{header, key_eff, cfg_.miners[node].id, now + dt, 0.0};
        queue_.push({now + dt, next_seq_++, Event::Found, node, token, 0});
    }

    void on_found(const Event& ev) {
        if (ev.token != tokens_[ev.node]) return;  // search was rebased meanwhile
        Mined mined = pending_[ev.node];
        mined.found_time = ev.time;
        mined.compressed_bits = compressed_bits(mined);
        ++stats_.blocks_mined;

        size_t idx = mined_.size();
        mined_.push_back(mined);

        accept(ev.node, idx, ev.time);
        observer_accept(idx);

        for (size_t j = 0; j < nodes_.size(); ++j) {
            if (j == ev.node) continue;
            double lat = simdetail::sample_latency(cfg_.latency, rng_);
            queue_.push({ev.time + lat, next_seq_++, Event::Deliver, j, 0, idx});
        }
        start_mining(ev.node, ev.time);
    }

    void on_deliver(const Event& ev) {
        buffered_[ev.node].push_back(ev.block_idx);
        drain_buffer(ev.node, ev.time);
    }

    // Apply buffered blocks until none fits; UnknownParent entries wait for
    // their ancestor to show up.
    void drain_buffer(size_t node, double now) {
        Hash256 old_tip = nodes_[node].tip();
        bool progress = true;
        while (progress) {
            progress = false;
            auto& buf = buffered_[node];
            for (auto it = buf.begin(); it != buf.end();) {
                const Mined& m = mined_[*it];
                auto reject = nodes_[node].submit(m.header, m.key_eff);
                if (reject && *reject == RejectReason::UnknownParent) {
                    ++it;
                } else {
                    it = buf.erase(it);
                    progress = true;
                }
            }
        }
        Hash256 new_tip = nodes_[node].tip();
        if (new_tip != old_tip) {
            uint64_t depth = nodes_[node].reorg_depth(old_tip, new_tip);
            stats_.max_reorg_depth = std::max(stats_.max_reorg_depth, depth);
            start_mining(node, now);
        }
    }

    void accept(size_t node, size_t idx, double now) {
        const Mined& m = mined_[idx];
        auto reject = nodes_[node].submit(m.header, m.key_eff);
        (void)reject;  // own freshly mined block extends own tip
        (void)now;
    }

    void observer_accept(size_t idx) {
        const Mined& m = mined_[idx];
        auto reject = observer_->submit(m.header, m.key_eff);
        if (!reject) {
            Hash256 id = block_id(m.header, cfg_.profile.layout);
            Hash256 parent = observer_->block(id).parent_id;
            if (++children_[parent] >= 2) ++stats_.forks_observed;
            meta_[id] = idx;
        }
    }

    double compressed_bits(const Mined& m) const {
        const auto& c = cfg_.profile.cipher;
        DifficultyTarget t =
            DifficultyTarget::from_header_field(m.header.target_field, c.block_bits);
        int n = t.zero_bits();
        return double((c.block_bits - n) * cfg_.profile.plan().m + c.effective_key_bits);
    }

    SimStats finalize() {
        stats_.converged = true;
        for (const auto& n : nodes_)
            if (n.tip() != nodes_[0].tip()) stats_.converged = false;

        for (const auto& mc : cfg_.miners) stats_.shares[mc.id] = 0;

        // Canonical chain as the observer sees it (it holds every block).
        auto canon = observer_->chain_to(observer_->fork_choice());
        stats_.blocks_accepted = canon.size() - 1;
        double prev_time = 0.0, spacing_sum = 0.0, bits_sum = 0.0;
        size_t count = 0;
        for (size_t i = 1; i < canon.size(); ++i) {
            const Mined& m = mined_[meta_.at(canon[i])];
            stats_.shares[m.miner] += 1;
            stats_.canonical_times.push_back(m.found_time);
            spacing_sum += m.found_time - prev_time;
            prev_time = m.found_time;
            bits_sum += m.compressed_bits;
            ++count;
        }
        if (count) {
            stats_.mean_spacing = spacing_sum / double(count);
            stats_.mean_compressed_bits = bits_sum / double(count);
        }
        return stats_;
    }

    SimConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<ChainState> nodes_;
    std::optional<ChainState> observer_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::vector<Mined> mined_;
    std::map<size_t, Mined> pending_;
    std::map<size_t, uint64_t> tokens_;
    std::map<size_t, std::vector<size_t>> buffered_;
    std::map<Hash256, int> children_;
    std::map<Hash256, size_t> meta_;
    SimStats stats_;
    uint64_t next_seq_ = 0;
};

inline SimStats run_simulation(const SimConfig& cfg) { return Simulation(cfg).run(); }

struct SolvabilityPoint {
    int zero_bits;
    double measured_fraction;
    double model_fraction;  // 1 - exp(-2^{k_eff - m*n})
};

/// Mine `headers_per_point` random headers over the full keyspace at each n
/// and report the fraction that admit any solution, next to the Poisson
/// model value.
inline std::vector<SolvabilityPoint> sweep_solvability(const PuzzleProfile& profile,
                                                       int n_min, int n_max,
                                                       int headers_per_point, uint64_t seed) {
    profile.validate();
    if (!profile.desk_scale())
        throw DeskScaleExceeded("solvability sweep requires a desk-scale keyspace");
    if (n_min < 0 || n_max > profile.cipher.block_bits || n_min > n_max)
        throw ConfigInvalid("bad zero-bit range");

    std::mt19937_64 rng(seed);
    auto plan = profile.plan();
    int header_bytes = profile.layout.total_bytes();
    std::vector<SolvabilityPoint> out;
    for (int n = n_min; n <= n_max; ++n) {
        auto target = DifficultyTarget::from_zero_bits(n, profile.cipher.block_bits);
        int solvable = 0;
        for (int h = 0; h < headers_per_point; ++h) {
            std::vector<uint8_t> header(size_t(header_bytes), 0);
            for (auto& b : header) b = uint8_t(rng());
            auto res = mine(profile.cipher, header, profile.header_bits(), target,
                            full_keyspace(profile.cipher), MinePolicy::First);
            if (res.found_key) ++solvable;
        }
        double expected = std::exp2(double(profile.cipher.effective_key_bits) -
                                    double(plan.m) * double(n));
        out.push_back({n, double(solvable) / double(headers_per_point),
                       1.0 - std::exp(-expected)});
    }
    return out;
}

}  // namespace poew
