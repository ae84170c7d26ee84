#include <doctest.h>

#include <stdexcept>

#include <set>

#include "../support/reference_aes.hpp"
#include "snapattack/aes.hpp"
#include "snapattack/rng.hpp"

using namespace snapattack;

namespace {

aes::Block random_block(Rng& rng)
{
    aes::Block b;
    for (auto& x : b)
        x = rng.next_byte();
    return b;
}

} // namespace

TEST_SUITE("cipher_core") {

TEST_CASE("sbox matches the field definition on every input")
{
    const auto table = ref::sbox_table();
    CHECK(aes::sbox(0x00) == 0x63);
    std::set<int> image;
    for (int x = 0; x < 256; ++x) {
        const auto v = static_cast<std::uint8_t>(x);
        CHECK(aes::sbox(v) == table[x]);
        CHECK(aes::inv_sbox(aes::sbox(v)) == v);
        CHECK(aes::sbox(aes::inv_sbox(v)) == v);
        image.insert(aes::sbox(v));
    }
    CHECK(image.size() == 256);
    CHECK(aes::inv_sbox(0x63) == 0x00);
}

TEST_CASE("mix_column is linear and matches the xtime form")
{
    CHECK(aes::mix_column({0, 0, 0, 0}) == aes::Column{0, 0, 0, 0});
    // FIPS-197 appendix column: db 13 53 45 -> 8e 4d a1 bc
    CHECK(aes::mix_column({0xdb, 0x13, 0x53, 0x45}) == aes::Column{0x8e, 0x4d, 0xa1, 0xbc});
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        aes::Column a, b, ab;
        for (int i = 0; i < 4; ++i) {
            a[i] = rng.next_byte();
            b[i] = rng.next_byte();
            ab[i] = a[i] ^ b[i];
        }
        const auto ma = aes::mix_column(a), mb = aes::mix_column(b), mab = aes::mix_column(ab);
        for (int i = 0; i < 4; ++i)
            CHECK(mab[i] == (ma[i] ^ mb[i]));
        const auto r = ref::mix({a[0], a[1], a[2], a[3]});
        for (int i = 0; i < 4; ++i)
            CHECK(ma[i] == r[i]);
    }
}

TEST_CASE("key schedule")
{
    const aes::Block zero{};
    const aes::Block k1 = aes::key_schedule_round(zero, 1);
    CHECK(k1[0] == 0x62);
    CHECK(k1[1] == 0x63);
    CHECK(k1[2] == 0x63);
    CHECK(k1[3] == 0x63);
    CHECK_THROWS_AS(aes::rcon(0), std::out_of_range);
    CHECK_THROWS_AS(aes::rcon(11), std::out_of_range);
    CHECK_THROWS(aes::key_schedule_round(zero, 11));
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const aes::Block key = random_block(rng);
        const auto mine = aes::expand_key(key);
        const auto theirs = ref::expand(key);
        for (int r = 0; r <= 10; ++r)
            CHECK(mine[r] == theirs[r]);
    }
}

TEST_CASE("encryption known answer and reference agreement")
{
    const aes::Block key = aes::block_from_hex("000102030405060708090a0b0c0d0e0f");
    const aes::Block pt = aes::block_from_hex("00112233445566778899aabbccddeeff");
    CHECK(aes::to_hex(aes::encrypt(key, pt)) == "69c4e0d86a7b0430d8cdb78070b4c55a");
    // SP 800-38A F.1.1, first block
    CHECK(aes::to_hex(aes::encrypt(aes::block_from_hex("2b7e151628aed2a6abf7158809cf4f3c"),
                                   aes::block_from_hex("6bc1bee22e409f96e93d7e117393172a"))) ==
          "3ad77bb40d7a3660a89ecaf32466ef97");
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        const aes::Block k = random_block(rng), p = random_block(rng);
        CHECK(aes::encrypt(k, p) == ref::encrypt(k, p));
    }
}

TEST_CASE("round one state")
{
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const aes::Block k = random_block(rng), p = random_block(rng);
        const auto st = aes::round_one(k, p);
        const auto rk = ref::expand(k);
        for (int j = 0; j < 16; ++j) {
            CHECK(st.sub_bytes[j] == ref::sbox(k[j] ^ p[j]));
            CHECK(st.round_key2[j] == rk[1][j]);
            CHECK(st.sub_bytes2[j] == ref::sbox(st.mix_columns[j] ^ rk[1][j]));
        }
        for (int c = 0; c < 4; ++c) {
            const auto m = ref::mix({st.sub_bytes[4 * ((c + 0) % 4) + 0], st.sub_bytes[4 * ((c + 1) % 4) + 1],
                                     st.sub_bytes[4 * ((c + 2) % 4) + 2], st.sub_bytes[4 * ((c + 3) % 4) + 3]});
            for (int r = 0; r < 4; ++r)
                CHECK(st.mix_columns[4 * c + r] == m[r]);
        }
    }
    aes::Block p{};
    for (int j = 0; j < 16; ++j)
        p[j] = static_cast<std::uint8_t>(j * 17);
    CHECK(aes::round_one(p, p).sub_bytes[5] == 0x63);
}

TEST_CASE("hex parsing")
{
    CHECK_THROWS_AS(aes::block_from_hex("00"), std::invalid_argument);
    CHECK_THROWS_AS(aes::block_from_hex("zz0102030405060708090a0b0c0d0e0f"), std::invalid_argument);
    CHECK(aes::to_hex(aes::block_from_hex("00112233445566778899AABBCCDDEEFF")) == "00112233445566778899aabbccddeeff");
}

}
