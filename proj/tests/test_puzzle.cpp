#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "poew/profile.hpp"
#include "poew/puzzle.hpp"
#include "support/oracle.hpp"

using namespace poew;

TEST_CASE("build_plan: the 640+64 -> 11 block construction") {
    auto plan = build_plan(640, 64, 64);
    REQUIRE(plan.m == 11);
    for (int i = 0; i < 9; ++i) CHECK(plan.splits[size_t(i)] == std::pair{58, 6});
    CHECK(plan.splits[9] == std::pair{59, 5});
    CHECK(plan.splits[10] == std::pair{59, 5});
}

TEST_CASE("build_plan: even split and errors") {
    auto plan = build_plan(48, 16, 16);
    REQUIRE(plan.m == 4);
    for (auto s : plan.splits) CHECK(s == std::pair{12, 4});

    CHECK(build_plan(100, 28, 64).m == 2);
    CHECK_THROWS_AS(build_plan(641, 64, 64), NonDivisible);
    CHECK_THROWS_AS(build_plan(0, 8, 64), NonDivisible);
}

TEST_CASE("build_plan matches the string-slicing oracle") {
    for (auto [h, k, b] : {std::tuple{640, 64, 64}, {48, 16, 16}, {48, 64, 16}, {592, 16, 16}}) {
        auto plan = build_plan(h, k, b);
        auto kb = oracle::key_bits_per_block(k, plan.m);
        for (int i = 0; i < plan.m; ++i) {
            CHECK(plan.splits[size_t(i)].second == kb[size_t(i)]);
            CHECK(plan.splits[size_t(i)].first + plan.splits[size_t(i)].second == b);
        }
    }
}

TEST_CASE("assemble_plaintexts: fixed patterns") {
    auto plan = build_plan(48, 16, 16);
    std::vector<uint8_t> zeros(6, 0x00), ones(6, 0xFF);
    for (uint64_t p : assemble_plaintexts(zeros, 48, 0, 16, plan)) CHECK(p == 0);
    for (uint64_t p : assemble_plaintexts(ones, 48, 0, 16, plan)) CHECK(p == 0xFFF0);
}

TEST_CASE("assemble/disassemble round-trips against the oracle") {
    std::mt19937_64 rng(11);
    for (auto prof : {PuzzleProfile::des640(), PuzzleProfile::toy16(), PuzzleProfile::toy16w()}) {
        auto plan = prof.plan();
        int h = prof.header_bits();
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<uint8_t> header(size_t(h / 8));
            for (auto& b : header) b = uint8_t(rng());
            uint64_t key = rng() & low_mask(prof.cipher.key_bits);

            auto blocks = assemble_plaintexts(header, h, key, prof.cipher.key_bits, plan);
            auto expected = oracle::plaintext_blocks(prof.cipher, header, h, key);
            REQUIRE(blocks == expected);

            auto [hdr2, key2] = disassemble_plaintexts(blocks, plan, prof.cipher.key_bits);
            REQUIRE(hdr2 == header);
            REQUIRE(key2 == key);
        }
    }
}

TEST_CASE("assemble rejects mismatched lengths") {
    auto plan = build_plan(48, 16, 16);
    std::vector<uint8_t> header(6, 0);
    CHECK_THROWS_AS(assemble_plaintexts(header, 40, 0, 16, plan), InvalidWidth);
    CHECK_THROWS_AS(assemble_plaintexts(header, 48, 0, 8, plan), InvalidWidth);
    CHECK_THROWS_AS(assemble_plaintexts(header, 48, uint64_t{1} << 16, 16, plan), InvalidWidth);
}

TEST_CASE("difficulty target semantics") {
    auto t = DifficultyTarget::from_zero_bits(4, 16);
    CHECK(t.threshold == 0x1000);
    CHECK(t.zero_bits() == 4);
    CHECK(t.satisfies(0x0FFF));
    CHECK(!t.satisfies(0x1000));

    CHECK(DifficultyTarget::from_zero_bits(0, 64).maxed);
    CHECK(DifficultyTarget::from_zero_bits(0, 16).satisfies(0xFFFF));
    CHECK(DifficultyTarget::from_threshold(1, 16).zero_bits() == 16);
    CHECK(DifficultyTarget::from_header_field(0, 64).maxed);
    CHECK(DifficultyTarget::from_zero_bits(0, 64).header_field() == 0);

    // non-power-of-two: n counts only guaranteed zero bits
    CHECK(DifficultyTarget::from_threshold(5, 16).zero_bits() == 13);
    CHECK_THROWS(DifficultyTarget::from_threshold(0, 16));
    CHECK_THROWS_AS(DifficultyTarget::from_threshold(uint64_t{1} << 17, 16), InvalidWidth);
}

TEST_CASE("check_solution: trivial target accepts every key") {
    auto prof = PuzzleProfile::toy16();
    std::mt19937_64 rng(12);
    std::vector<uint8_t> header(6);
    for (auto& b : header) b = uint8_t(rng());
    auto t = DifficultyTarget::from_zero_bits(0, 16);
    for (int i = 0; i < 50; ++i)
        CHECK(check_solution(prof.cipher, header, 48, rng() & 0xFFFF, t));
}

TEST_CASE("check_solution agrees with leading-zero formulation") {
    auto prof = PuzzleProfile::toy16();
    std::mt19937_64 rng(13);
    auto plan = prof.plan();
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<uint8_t> header(6);
        for (auto& b : header) b = uint8_t(rng());
        uint64_t key = rng() & 0xFFFF;
        int n = int(rng() % 5);
        auto t = DifficultyTarget::from_zero_bits(n, 16);

        bool via_target = check_solution(prof.cipher, header, 48, key, t);
        bool via_zeros = true;
        PreparedKey pk(prof.cipher, key);
        for (uint64_t p : assemble_plaintexts(header, 48, key, 16, plan))
            via_zeros &= (pk.encrypt(p) >> (16 - n)) == 0 || n == 0;
        CHECK(via_target == via_zeros);
    }
}

TEST_CASE("check_solution is monotone in the threshold") {
    auto prof = PuzzleProfile::toy16();
    std::mt19937_64 rng(14);
    std::vector<uint8_t> header(6);
    for (auto& b : header) b = uint8_t(rng());
    for (int trial = 0; trial < 200; ++trial) {
        uint64_t key = rng() & 0xFFFF;
        uint64_t t1 = 1 + rng() % 0xFFFF;
        uint64_t t2 = t1 + rng() % (0x10000 - t1);  // t2 >= t1
        bool low = check_solution(prof.cipher, header, 48, key,
                                  DifficultyTarget::from_threshold(t1, 16));
        bool high = check_solution(prof.cipher, header, 48, key,
                                   DifficultyTarget::from_threshold(t2, 16));
        if (low) CHECK(high);
    }
}

TEST_CASE("header serialization is bit-exact") {
    auto layout = HeaderLayout::bitcoin_like();
    CHECK(layout.total_bits() == 640);
    CHECK(layout.total_bytes() == 80);

    BlockHeader h;
    h.version = 2;
    h.prev_id[0] = 0xAB;
    h.prev_id[31] = 0xCD;
    h.merkle_root[5] = 0x77;
    h.timestamp = 123456;
    h.target_field = uint64_t{1} << 53;
    auto bytes = serialize_header(h, layout);
    REQUIRE(bytes.size() == 80);
    CHECK(parse_header(bytes, layout) == h);

    // toy layout truncates ids to their field width
    auto toy = PuzzleProfile::toy16().layout;
    auto tb = serialize_header(h, toy);
    REQUIRE(tb.size() == 6);
    auto h2 = parse_header(tb, toy);
    CHECK(h2.prev_id == truncate_id(h.prev_id, toy.id_bits));
}

TEST_CASE("block_id is SHA-256 of the serialized header") {
    BlockHeader zero{0, {}, {}, 0, 0};
    auto id = block_id(zero, HeaderLayout::bitcoin_like());
    // golden value computed by two independent SHA-256 implementations
    CHECK(to_hex(id) == "5b6fb58e61fa475939767d68a446f97f1bff02c0e5935a3ea8bb51e6515783d8");

    BlockHeader one = zero;
    one.timestamp = 1;
    CHECK(block_id(one, HeaderLayout::bitcoin_like()) != id);
    CHECK(id.size() == 32);
}

TEST_CASE("sha256 matches NIST vectors") {
    std::vector<uint8_t> abc = {'a', 'b', 'c'};
    CHECK(to_hex(sha256(abc)) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(sha256(std::vector<uint8_t>{})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    std::string long_msg = "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq";
    std::vector<uint8_t> lm(long_msg.begin(), long_msg.end());
    CHECK(to_hex(sha256(lm)) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}
