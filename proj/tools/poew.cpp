// Command-line driver: mining, verification, compression, estimation,
// solvability sweeps and network simulation.
//
// Exit codes: 0 success, 1 verification/solve failure, 2 usage/config error,
// 3 keyspace exhausted, 4 data corruption.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "poew/poew.hpp"

using json = nlohmann::ordered_json;
using namespace poew;

namespace {

constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitExhausted = 3;
constexpr int kExitCorrupt = 4;

PuzzleProfile profile_by_name(const std::string& name) {
    if (name == "des640") return PuzzleProfile::des640();
    if (name == "toy16") return PuzzleProfile::toy16();
    if (name == "toy16w") return PuzzleProfile::toy16w();
    if (name == "toy16chain") return PuzzleProfile::toy16chain();
    throw CLI::ValidationError("--profile", "unknown profile: " + name);
}

std::string default_profile() {
    const char* env = std::getenv("POEW_PROFILE");
    return env ? env : "des640";
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const uint8_t> data) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::runtime_error("invalid hex digit");
}

std::vector<uint8_t> parse_hex(const std::string& s) {
    if (s.size() % 2) throw std::runtime_error("odd-length hex string");
    std::vector<uint8_t> out;
    for (size_t i = 0; i < s.size(); i += 2)
        out.push_back(uint8_t(hex_nibble(s[i]) << 4 | hex_nibble(s[i + 1])));
    return out;
}

uint64_t parse_hex_u64(const std::string& s) {
    if (s.empty() || s.size() > 16) throw std::runtime_error("bad hex value");
    uint64_t v = 0;
    for (char c : s) v = (v << 4) | uint64_t(hex_nibble(c));
    return v;
}

// Header input: raw binary file of the layout's byte length, or the same
// bytes as a hex string.
std::vector<uint8_t> load_header(const PuzzleProfile& prof, const std::string& file,
                                 const std::string& hex) {
    std::vector<uint8_t> bytes;
    if (!file.empty())
        bytes = read_file(file);
    else if (!hex.empty())
        bytes = parse_hex(hex);
    else
        throw std::runtime_error("provide --header-file or --header-hex");
    if (bytes.size() != size_t(prof.layout.total_bytes()))
        throw std::runtime_error("header must be " +
                                 std::to_string(prof.layout.total_bytes()) + " bytes");
    return bytes;
}

DifficultyTarget target_from_flags(const PuzzleProfile& prof, std::optional<int> zero_bits,
                                   std::optional<std::string> target_str) {
    int b = prof.cipher.block_bits;
    if (zero_bits && target_str)
        throw std::runtime_error("give either --zero-bits or --target, not both");
    if (zero_bits) return DifficultyTarget::from_zero_bits(*zero_bits, b);
    if (target_str) {
        const std::string& s = *target_str;
        uint64_t t = s.rfind("0x", 0) == 0 ? parse_hex_u64(s.substr(2)) : std::stoull(s);
        return DifficultyTarget::from_header_field(t, b);
    }
    throw std::runtime_error("provide --zero-bits or --target");
}

json estimate_json(const WorkEstimate& e) {
    return {{"expected_trials", e.expected_trials},
            {"expected_solutions", e.expected_solutions},
            {"solvability_probability", e.solvability_probability},
            {"worst_case_seconds", e.worst_case_seconds}};
}

json stats_json(const SimStats& s) {
    json shares = json::object();
    for (auto [id, n] : s.shares) shares[std::to_string(id)] = n;
    return {{"blocks_accepted", s.blocks_accepted},
            {"blocks_mined", s.blocks_mined},
            {"forks_observed", s.forks_observed},
            {"max_reorg_depth", s.max_reorg_depth},
            {"shares", shares},
            {"mean_spacing", s.mean_spacing},
            {"mean_compressed_bits", s.mean_compressed_bits},
            {"unsolvable_retries", s.unsolvable_retries},
            {"converged", s.converged}};
}

SimConfig sim_config_from_json(const json& j) {
    SimConfig cfg;
    cfg.seed = j.value("seed", uint64_t{0});
    cfg.duration = j.at("duration").get<double>();
    cfg.profile = profile_by_name(j.value("profile", std::string("toy16chain")));
    std::string mode = j.value("mode", std::string("sampled"));
    if (mode == "real")
        cfg.mode = SimMode::Real;
    else if (mode == "sampled")
        cfg.mode = SimMode::Sampled;
    else
        throw std::runtime_error("mode must be \"real\" or \"sampled\"");

    int n = j.value("genesis_zero_bits", 4);
    cfg.genesis_target = DifficultyTarget::from_zero_bits(n, cfg.profile.cipher.block_bits);

    if (j.contains("retarget")) {
        const auto& r = j.at("retarget");
        cfg.retarget.interval = r.value("interval", 16);
        cfg.retarget.target_spacing = r.value("spacing", 1.0);
        cfg.retarget.clamp = r.value("clamp", 4.0);
    }
    if (j.contains("latency")) {
        const auto& l = j.at("latency");
        std::string kind = l.value("kind", std::string("constant"));
        if (kind == "constant")
            cfg.latency = LatencyModel::constant(l.value("seconds", 0.0));
        else if (kind == "uniform")
            cfg.latency = LatencyModel::uniform(l.at("min").get<double>(),
                                                l.at("max").get<double>());
        else
            throw std::runtime_error("latency kind must be \"constant\" or \"uniform\"");
    }
    for (const auto& m : j.at("miners"))
        cfg.miners.push_back({m.at("id").get<int>(), m.at("hashrate").get<double>()});
    return cfg;
}

int cmd_repro() {
    int failures = 0;
    auto report = [&](bool ok, const std::string& name, const std::string& detail) {
        std::printf("%s  %s (%s)\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        if (!ok) ++failures;
    };

    // Size formula for the DES construction: (64-n)*11 + 56 = 760 - 11n.
    bool size_ok = true;
    for (int n = 0; n <= 64; ++n)
        size_ok &= size_report(64, 11, 56, n, 640).compressed_bits == 760 - 11 * n;
    auto r10 = size_report(64, 11, 56, 10, 640);
    auto r11 = size_report(64, 11, 56, 11, 640);
    size_ok &= r10.compressed_bits == 650 && r11.compressed_bits == 639;
    size_ok &= r11.break_even_n && *r11.break_even_n == 11;
    report(size_ok, "size-formula", "760-11n, n=10 -> 650, n=11 -> 639, break-even 11");

    // Worst-case DES crack time at the quoted network rate.
    auto est = work_estimate(56, 64, 11, DifficultyTarget::from_zero_bits(11, 64), 8.452e23);
    bool crack_ok = std::abs(est.worst_case_seconds - 8.52e-8) / 8.52e-8 < 0.01;
    std::ostringstream os;
    os << "2^56 / 8.452e23 = " << est.worst_case_seconds << " s";
    report(crack_ok, "crack-time", os.str());

    // Caesar demo against the fixed ciphertext "AAA".
    bool caesar_ok = caesar_compress("BBB") == 'B' && caesar_compress("CCC") == 'C';
    for (char c = 'A'; c <= 'Z'; ++c)
        caesar_ok &= caesar_decompress(caesar_compress(std::string(3, c))) == std::string(3, c);
    report(caesar_ok, "caesar-demo", "BBB -> B, CCC -> C, 26-letter round trip");

    // Measured key-trial rates, toy and DES, for the rate-equivalence caveat.
    auto bench = [&](const PuzzleProfile& prof) {
        std::vector<uint8_t> header(size_t(prof.layout.total_bytes()), 0xA5);
        auto t = DifficultyTarget::from_threshold(1, prof.cipher.block_bits);
        return mine(prof.cipher, header, prof.header_bits(), t, {0, 1 << 15}).trials_per_second;
    };
    std::printf("INFO  measured rates: toy16 %.3g keys/s, des640 %.3g keys/s\n",
                bench(PuzzleProfile::toy16()), bench(PuzzleProfile::des640()));

    return failures == 0 ? 0 : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PoEW: proof-of-work by exhaustive key search, with the "
                 "encryption-based compression codec it enables"};
    app.require_subcommand(1);

    std::string profile_name = default_profile();
    std::string header_file, header_hex, key_hex, in_path, out_path, config_path, custom;
    std::optional<int> zero_bits;
    std::optional<std::string> target_str;
    unsigned workers = 1;
    std::string policy = "minimal";
    bool allow_big = false, verbose = false, csv = false;
    uint64_t seed = 0;
    int n_min = 0, n_max = 8, headers_per_point = 200;
    double hashrate = 0;
    int keyspace_bits = 56, est_blocks = 11, est_block_bits = 64, est_zero = 11;

    auto* plan_cmd = app.add_subcommand("plan", "print the header/key segmentation plan");
    plan_cmd->add_option("--profile", profile_name);
    plan_cmd->add_option("--custom", custom, "h=<bits>,k=<bits>,b=<bits>");

    auto* mine_cmd = app.add_subcommand("mine", "exhaustive key search over a header");
    mine_cmd->add_option("--profile", profile_name);
    mine_cmd->add_option("--header-file", header_file);
    mine_cmd->add_option("--header-hex", header_hex);
    mine_cmd->add_option("--zero-bits", zero_bits);
    mine_cmd->add_option("--target", target_str);
    mine_cmd->add_option("--workers", workers);
    mine_cmd->add_option("--policy", policy)->check(CLI::IsMember({"first", "minimal"}));
    mine_cmd->add_flag("--allow-big", allow_big, "search beyond desk-scale keyspaces");

    auto* verify_cmd = app.add_subcommand("verify", "check a (header, key) solution");
    verify_cmd->add_option("--profile", profile_name);
    verify_cmd->add_option("--header-file", header_file);
    verify_cmd->add_option("--header-hex", header_hex);
    verify_cmd->add_option("--key", key_hex)->required();
    verify_cmd->add_option("--zero-bits", zero_bits);
    verify_cmd->add_option("--target", target_str);
    verify_cmd->add_flag("--verbose", verbose, "print per-block ciphertexts");

    auto* comp_cmd = app.add_subcommand("compress", "archive a solved header as key+residues");
    comp_cmd->add_option("--profile", profile_name);
    comp_cmd->add_option("--in", in_path)->required();
    comp_cmd->add_option("--out", out_path)->required();
    comp_cmd->add_option("--key", key_hex)->required();
    comp_cmd->add_option("--zero-bits", zero_bits);
    comp_cmd->add_option("--target", target_str);

    auto* decomp_cmd = app.add_subcommand("decompress", "restore a header from an archive");
    decomp_cmd->add_option("--profile", profile_name);
    decomp_cmd->add_option("--in", in_path)->required();
    decomp_cmd->add_option("--out", out_path)->required();

    auto* est_cmd = app.add_subcommand("estimate", "ideal-cipher work/solvability estimates");
    est_cmd->add_option("--keyspace-bits", keyspace_bits);
    est_cmd->add_option("--block-bits", est_block_bits);
    est_cmd->add_option("--blocks", est_blocks);
    est_cmd->add_option("--zero-bits", est_zero);
    est_cmd->add_option("--hashrate", hashrate)->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "measured vs. model solvability by zero bits");
    sweep_cmd->add_option("--profile", profile_name);
    sweep_cmd->add_option("--n-min", n_min);
    sweep_cmd->add_option("--n-max", n_max);
    sweep_cmd->add_option("--headers", headers_per_point);
    sweep_cmd->add_option("--seed", seed);

    auto* sim_cmd = app.add_subcommand("simulate", "seeded multi-miner network simulation");
    sim_cmd->add_option("--config", config_path)->required();
    sim_cmd->add_option("--seed", seed, "overrides the seed in the config file");
    sim_cmd->add_flag("--csv", csv, "emit CSV instead of JSON");

    auto* repro_cmd =
        app.add_subcommand("repro", "re-derive the headline closed-form numbers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (plan_cmd->parsed()) {
            SegmentationPlan plan;
            int h, k, b;
            if (!custom.empty()) {
                if (std::sscanf(custom.c_str(), "h=%d,k=%d,b=%d", &h, &k, &b) != 3)
                    throw std::runtime_error("--custom expects h=<bits>,k=<bits>,b=<bits>");
            } else {
                auto prof = profile_by_name(profile_name);
                h = prof.header_bits();
                k = prof.cipher.key_bits;
                b = prof.cipher.block_bits;
            }
            plan = build_plan(h, k, b);
            json splits = json::array();
            for (auto [hb, kb] : plan.splits) splits.push_back({{"header", hb}, {"key", kb}});
            std::cout << json{{"h", h}, {"k", k}, {"b", b}, {"m", plan.m}, {"splits", splits}}
                      << "\n";
            return 0;
        }

        if (mine_cmd->parsed()) {
            auto prof = profile_by_name(profile_name);
            if (!prof.desk_scale() && !allow_big) {
                std::cerr << "refusing a " << prof.cipher.effective_key_bits
                          << "-bit keyspace without --allow-big (desk-scale guard)\n";
                return kExitUsage;
            }
            auto header = load_header(prof, header_file, header_hex);
            auto target = target_from_flags(prof, zero_bits, target_str);
            auto pol = policy == "first" ? MinePolicy::First : MinePolicy::Minimal;
            auto res = mine_parallel(prof.cipher, header, prof.header_bits(), target,
                                     full_keyspace(prof.cipher), workers, pol);
            json out{{"found", res.found_key.has_value()},
                     {"trials", res.trials},
                     {"elapsed", res.elapsed},
                     {"trials_per_second", res.trials_per_second}};
            if (res.found_key) {
                char buf[17];
                std::snprintf(buf, sizeof buf, "%016llx",
                              (unsigned long long)*res.found_key);
                out["key"] = buf;
            }
            std::cout << out << "\n";
            return res.found_key ? 0 : kExitExhausted;
        }

        if (verify_cmd->parsed()) {
            auto prof = profile_by_name(profile_name);
            auto header = load_header(prof, header_file, header_hex);
            uint64_t key_eff;
            try {
                key_eff = parse_hex_u64(key_hex);
            } catch (const std::exception& e) {
                std::cerr << "bad key: " << e.what() << "\n";
                return kExitUsage;
            }
            DifficultyTarget target =
                (zero_bits || target_str)
                    ? target_from_flags(prof, zero_bits, target_str)
                    : DifficultyTarget::from_header_field(
                          parse_header(header, prof.layout).target_field,
                          prof.cipher.block_bits);
            uint64_t full = expand_effective_key(prof.cipher, key_eff);
            auto plan = prof.plan();
            bool ok = true;
            auto blocks = assemble_plaintexts(header, prof.header_bits(), full,
                                              prof.cipher.key_bits, plan);
            PreparedKey pk(prof.cipher, full);
            for (size_t i = 0; i < blocks.size(); ++i) {
                uint64_t c = pk.encrypt(blocks[i]);
                bool hit = target.satisfies(c);
                ok &= hit;
                if (verbose)
                    std::fprintf(stderr, "block %zu: E(p)=%016llx %s\n", i,
                                 (unsigned long long)c, hit ? "ok" : "MISS");
            }
            std::cout << json{{"valid", ok}} << "\n";
            return ok ? 0 : kExitVerifyFail;
        }

        if (comp_cmd->parsed()) {
            auto prof = profile_by_name(profile_name);
            auto header = read_file(in_path);
            if (header.size() != size_t(prof.layout.total_bytes()))
                throw std::runtime_error("input is not a header of this profile");
            uint64_t full = expand_effective_key(prof.cipher, parse_hex_u64(key_hex));
            DifficultyTarget target =
                (zero_bits || target_str)
                    ? target_from_flags(prof, zero_bits, target_str)
                    : DifficultyTarget::from_header_field(
                          parse_header(header, prof.layout).target_field,
                          prof.cipher.block_bits);
            CompressedBlock cb;
            try {
                cb = compress(prof.cipher, header, prof.header_bits(), full, target);
            } catch (const NotASolution& e) {
                std::cerr << e.what() << "\n";
                return kExitVerifyFail;
            }
            auto archive = serialize_archive(cb);
            if (cb.payload_bits() >= prof.header_bits())
                std::cerr << "warning: payload " << cb.payload_bits() << " bits >= header "
                          << prof.header_bits() << " bits (no compression at n="
                          << cb.zero_bits << ")\n";
            write_file(out_path, archive);
            std::cout << json{{"archive_bytes", archive.size()},
                              {"payload_bits", cb.payload_bits()},
                              {"zero_bits", cb.zero_bits}}
                      << "\n";
            return 0;
        }

        if (decomp_cmd->parsed()) {
            auto archive = read_file(in_path);
            try {
                auto prof = profile_by_name(profile_name);
                auto out = decompress_checked(archive, prof.layout);
                write_file(out_path, out.bytes);
                std::cout << json{{"header_bytes", out.bytes.size()}} << "\n";
                return 0;
            } catch (const KeyMismatch& e) {
                std::cerr << "corrupt archive: " << e.what() << "\n";
                return kExitCorrupt;
            } catch (const MalformedArchive& e) {
                std::cerr << "corrupt archive: " << e.what() << "\n";
                return kExitCorrupt;
            }
        }

        if (est_cmd->parsed()) {
            auto target = DifficultyTarget::from_zero_bits(est_zero, est_block_bits);
            auto e = work_estimate(keyspace_bits, est_block_bits, est_blocks, target, hashrate);
            std::cout << estimate_json(e) << "\n";
            return 0;
        }

        if (sweep_cmd->parsed()) {
            auto prof = profile_by_name(profile_name);
            auto rows = sweep_solvability(prof, n_min, n_max, headers_per_point, seed);
            std::cout << "n,measured,model\n";
            for (const auto& r : rows)
                std::printf("%d,%.6f,%.6f\n", r.zero_bits, r.measured_fraction,
                            r.model_fraction);
            return 0;
        }

        if (sim_cmd->parsed()) {
            auto j = json::parse(read_file(config_path));
            auto cfg = sim_config_from_json(j);
            if (sim_cmd->count("--seed")) cfg.seed = seed;
            auto stats = run_simulation(cfg);
            if (csv) {
                std::cout << "blocks_accepted,blocks_mined,forks_observed,max_reorg_depth,"
                             "mean_spacing,mean_compressed_bits,unsolvable_retries,converged\n";
                std::printf("%llu,%llu,%llu,%llu,%.6f,%.6f,%llu,%d\n",
                            (unsigned long long)stats.blocks_accepted,
                            (unsigned long long)stats.blocks_mined,
                            (unsigned long long)stats.forks_observed,
                            (unsigned long long)stats.max_reorg_depth, stats.mean_spacing,
                            stats.mean_compressed_bits,
                            (unsigned long long)stats.unsolvable_retries,
                            int(stats.converged));
            } else {
                std::cout << stats_json(stats) << "\n";
            }
            return 0;
        }

        if (repro_cmd->parsed()) return cmd_repro();
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
