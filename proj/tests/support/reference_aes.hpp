#pragma once

// Straight-line AES-128 written from the field definition, kept apart from
// the library so tests can compare against it.

#include <array>
#include <cstdint>

namespace ref {

using Block = std::array<std::uint8_t, 16>;

inline std::uint8_t gmul(std::uint8_t a, std::uint8_t b)
{
    std::uint8_t p = 0;
    for (int i = 0; i < 8; ++i) {
        if (b & 1)
            p ^= a;
        const bool hi = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (hi)
            a ^= 0x1B;
        b >>= 1;
    }
    return p;
}

inline std::uint8_t ginv(std::uint8_t a)
{
    if (a == 0)
        return 0;
    for (int x = 1; x < 256; ++x)
        if (gmul(a, static_cast<std::uint8_t>(x)) == 1)
            return static_cast<std::uint8_t>(x);
    return 0;
}

inline std::uint8_t rotl8(std::uint8_t x, int s) { return static_cast<std::uint8_t>((x << s) | (x >> (8 - s))); }

inline std::uint8_t sbox(std::uint8_t x)
{
    const std::uint8_t b = ginv(x);
    return static_cast<std::uint8_t>(b ^ rotl8(b, 1) ^ rotl8(b, 2) ^ rotl8(b, 3) ^ rotl8(b, 4) ^ 0x63);
}

inline std::array<std::uint8_t, 256> sbox_table()
{
    std::array<std::uint8_t, 256> t{};
    for (int x = 0; x < 256; ++x)
        t[x] = sbox(static_cast<std::uint8_t>(x));
    return t;
}

inline std::array<std::uint8_t, 4> mix(const std::array<std::uint8_t, 4>& a)
{
    std::array<std::uint8_t, 4> r{};
    for (int i = 0; i < 4; ++i)
        r[i] = gmul(a[i], 2) ^ gmul(a[(i + 1) % 4], 3) ^ a[(i + 2) % 4] ^ a[(i + 3) % 4];
    return r;
}

// 11 round keys, column-major bytes.
inline std::array<Block, 11> expand(const Block& key)
{
    const auto sb = sbox_table();
    std::array<Block, 11> rk{};
    rk[0] = key;
    std::uint8_t rc = 1;
    for (int r = 1; r <= 10; ++r) {
        const Block& p = rk[r - 1];
        Block& k = rk[r];
        std::uint8_t t[4] = {sb[p[13]], sb[p[14]], sb[p[15]], sb[p[12]]};
        t[0] ^= rc;
        rc = gmul(rc, 2);
        for (int i = 0; i < 4; ++i)
            k[i] = p[i] ^ t[i];
        for (int w = 1; w < 4; ++w)
            for (int i = 0; i < 4; ++i)
                k[4 * w + i] = p[4 * w + i] ^ k[4 * (w - 1) + i];
    }
    return rk;
}

inline Block encrypt(const Block& key, const Block& pt)
{
    const auto sb = sbox_table();
    const auto rk = expand(key);
    Block s = pt;
    for (int i = 0; i < 16; ++i)
        s[i] ^= rk[0][i];
    for (int r = 1; r <= 10; ++r) {
        Block t{};
        for (int c = 0; c < 4; ++c)
            for (int row = 0; row < 4; ++row)
                t[4 * c + row] = sb[s[4 * ((c + row) % 4) + row]];
        if (r != 10)
            for (int c = 0; c < 4; ++c) {
                const auto m = mix({t[4 * c], t[4 * c + 1], t[4 * c + 2], t[4 * c + 3]});
                for (int row = 0; row < 4; ++row)
                    t[4 * c + row] = m[row];
            }
        for (int i = 0; i < 16; ++i)
            s[i] = t[i] ^ rk[r][i];
    }
    return s;
}

} // namespace ref
