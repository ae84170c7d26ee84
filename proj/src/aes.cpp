#include "snapattack/aes.hpp"

#include <stdexcept>

namespace snapattack::aes {

namespace {

constexpr std::array<std::uint8_t, 256> kSbox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

constexpr std::array<std::uint8_t, 10> kRcon = {0x01, 0x02, 0x04, 0x08, 0x10,
                                                0x20, 0x40, 0x80, 0x1b, 0x36};

// Compile-time derivation from the field inverse and the affine map; the
// literal tables above must agree with it.
constexpr std::uint8_t gf_inverse(std::uint8_t a)
{
    if (a == 0)
        return 0;
    // a^254 = a^-1
    std::uint8_t result = 1;
    std::uint8_t base = a;
    int e = 254;
    while (e) {
        if (e & 1)
            result = gf_mul(result, base);
        base = gf_mul(base, base);
        e >>= 1;
    }
    return result;
}

constexpr std::uint8_t rotl8(std::uint8_t x, int s)
{
    return static_cast<std::uint8_t>((x << s) | (x >> (8 - s)));
}

constexpr std::uint8_t derived_sbox(std::uint8_t x)
{
    const std::uint8_t b = gf_inverse(x);
    return static_cast<std::uint8_t>(b ^ rotl8(b, 1) ^ rotl8(b, 2) ^ rotl8(b, 3) ^ rotl8(b, 4) ^ 0x63);
}

constexpr bool sbox_table_matches_definition()
{
    for (int x = 0; x < 256; ++x)
        if (kSbox[x] != derived_sbox(static_cast<std::uint8_t>(x)))
            return false;
    return true;
}

constexpr bool rcon_table_matches_definition()
{
    std::uint8_t r = 1;
    for (int i = 0; i < 10; ++i) {
        if (kRcon[i] != r)
            return false;
        r = xtime(r);
    }
    return true;
}

static_assert(sbox_table_matches_definition(), "Sbox table disagrees with GF(2^8) definition");
static_assert(rcon_table_matches_definition(), "Rcon table disagrees with GF(2^8) definition");

constexpr std::array<std::uint8_t, 256> make_inv_sbox()
{
    std::array<std::uint8_t, 256> inv{};
    for (int x = 0; x < 256; ++x)
        inv[kSbox[x]] = static_cast<std::uint8_t>(x);
    return inv;
}

constexpr std::array<std::uint8_t, 256> kInvSbox = make_inv_sbox();

Block shift_rows(const Block& s)
{
    Block out{};
    for (int col = 0; col < 4; ++col)
        for (int row = 0; row < 4; ++row)
            out[4 * col + row] = s[shift_rows_source(col, row)];
    return out;
}

Block mix_columns(const Block& s)
{
    Block out{};
    for (int col = 0; col < 4; ++col) {
        const Column in = {s[4 * col], s[4 * col + 1], s[4 * col + 2], s[4 * col + 3]};
        const Column mixed = mix_column(in);
        for (int row = 0; row < 4; ++row)
            out[4 * col + row] = mixed[row];
    }
    return out;
}

Block sub_bytes(const Block& s)
{
    Block out{};
    for (int i = 0; i < 16; ++i)
        out[i] = kSbox[s[i]];
    return out;
}

Block xor_blocks(const Block& a, const Block& b)
{
    Block out{};
    for (int i = 0; i < 16; ++i)
        out[i] = a[i] ^ b[i];
    return out;
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

std::uint8_t sbox(std::uint8_t x) { return kSbox[x]; }

std::uint8_t inv_sbox(std::uint8_t y) { return kInvSbox[y]; }

Column mix_column(const Column& c)
{
    return {
        static_cast<std::uint8_t>(xtime(c[0]) ^ xtime(c[1]) ^ c[1] ^ c[2] ^ c[3]),
        static_cast<std::uint8_t>(c[0] ^ xtime(c[1]) ^ xtime(c[2]) ^ c[2] ^ c[3]),
        static_cast<std::uint8_t>(c[0] ^ c[1] ^ xtime(c[2]) ^ xtime(c[3]) ^ c[3]),
        static_cast<std::uint8_t>(xtime(c[0]) ^ c[0] ^ c[1] ^ c[2] ^ xtime(c[3])),
    };
}

std::uint8_t rcon(int round_index)
{
    if (round_index < 1 || round_index > 10)
        throw std::out_of_range("rcon: round index must be in [1, 10]");
    return kRcon[round_index - 1];
}

Block key_schedule_round(const Block& rk, int round_index)
{
    const std::uint8_t rc = rcon(round_index);
    Block out{};
    out[0] = rk[0] ^ kSbox[rk[13]] ^ rc;
    out[1] = rk[1] ^ kSbox[rk[14]];
    out[2] = rk[2] ^ kSbox[rk[15]];
    out[3] = rk[3] ^ kSbox[rk[12]];
    for (int i = 4; i < 16; ++i)
        out[i] = rk[i] ^ out[i - 4];
    return out;
}

ExpandedKey expand_key(const Block& key)
{
    ExpandedKey rks{};
    rks[0] = key;
    for (int r = 1; r <= 10; ++r)
        rks[r] = key_schedule_round(rks[r - 1], r);
    return rks;
}

Block encrypt(const Block& key, const Block& plaintext)
{
    const ExpandedKey rks = expand_key(key);
    Block s = xor_blocks(plaintext, rks[0]);
    for (int r = 1; r < 10; ++r)
        s = xor_blocks(mix_columns(shift_rows(sub_bytes(s))), rks[r]);
    return xor_blocks(shift_rows(sub_bytes(s)), rks[10]);
}

RoundOneState round_one(const Block& key, const Block& plaintext)
{
    RoundOneState st;
    st.sub_bytes = sub_bytes(xor_blocks(plaintext, key));
    st.mix_columns = mix_columns(shift_rows(st.sub_bytes));
    st.round_key2 = key_schedule_round(key, 1);
    st.sub_bytes2 = sub_bytes(xor_blocks(st.mix_columns, st.round_key2));
    return st;
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

Block block_from_hex(std::string_view hex)
{
    if (hex.size() != 32)
        throw std::invalid_argument("expected 32 hex digits, got " + std::to_string(hex.size()));
    Block out{};
    for (int i = 0; i < 16; ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex digit in '" + std::string(hex) + "'");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

} // namespace snapattack::aes
