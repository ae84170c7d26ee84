#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace snapattack::aes {

using Block = std::array<std::uint8_t, 16>;
using Column = std::array<std::uint8_t, 4>;
using ExpandedKey = std::array<Block, 11>;

// Field arithmetic in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.
constexpr std::uint8_t xtime(std::uint8_t a)
{
    return static_cast<std::uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1B : 0x00));
}

constexpr std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b)
{
    std::uint8_t r = 0;
    while (b) {
        if (b & 1)
            r ^= a;
        a = xtime(a);
        b >>= 1;
    }
    return r;
}

std::uint8_t sbox(std::uint8_t x);
std::uint8_t inv_sbox(std::uint8_t y);

Column mix_column(const Column& col);

// Rcon for rounds 1..10.
std::uint8_t rcon(int round_index);

// One step of the AES-128 key expansion. Throws std::out_of_range unless
// round_index is in [1, 10].
Block key_schedule_round(const Block& round_key, int round_index);

ExpandedKey expand_key(const Block& key);

Block encrypt(const Block& key, const Block& plaintext);

// Round-1 intermediates used by the register schedule. Byte numbering is the
// usual column-major state order.
struct RoundOneState {
    Block sub_bytes;   // Sbox(plaintext ^ key)
    Block mix_columns; // MixColumns(ShiftRows(sub_bytes))
    Block round_key2;  // key_schedule_round(key, 1)
    Block sub_bytes2;  // Sbox(mix_columns ^ round_key2)
};

RoundOneState round_one(const Block& key, const Block& plaintext);

// Index of the SubBytes byte feeding byte `row` of MixColumns column `col`.
constexpr int shift_rows_source(int col, int row) { return 4 * ((col + row) % 4) + row; }

std::string to_hex(std::span<const std::uint8_t> bytes);
// Parses exactly 32 hex digits. Throws std::invalid_argument otherwise.
Block block_from_hex(std::string_view hex);

} // namespace snapattack::aes
