#include "snapattack/masking.hpp"

#include <stdexcept>

namespace snapattack {

MaskedByte::MaskedByte(std::vector<std::uint8_t> shares) : shares_(std::move(shares))
{
    if (shares_.empty())
        throw std::invalid_argument("MaskedByte needs at least one share");
}

MaskedByte::MaskedByte(std::initializer_list<std::uint8_t> shares)
    : MaskedByte(std::vector<std::uint8_t>(shares))
{
}

bool MaskedByte::same_value(const MaskedByte& other) const
{
    return unshare(*this) == unshare(other);
}

MaskedByte share(std::uint8_t value, int d, Rng& rng)
{
    if (d < 0)
        throw std::invalid_argument("masking order must be non-negative");
    std::vector<std::uint8_t> shares(static_cast<std::size_t>(d) + 1);
    std::uint8_t acc = value;
    for (int i = 0; i < d; ++i) {
        shares[i] = rng.next_byte();
        acc ^= shares[i];
    }
    shares[d] = acc;
    return MaskedByte(std::move(shares));
}

std::uint8_t unshare(const MaskedByte& m)
{
    std::uint8_t v = 0;
    for (std::uint8_t s : m.shares())
        v ^= s;
    return v;
}

MaskedByte reshare(const MaskedByte& m, Rng& rng)
{
    std::vector<std::uint8_t> shares = m.shares();
    // XOR a fresh sharing of zero into the existing shares.
    for (std::size_t i = 0; i + 1 < shares.size(); ++i) {
        const std::uint8_t r = rng.next_byte();
        shares[i] ^= r;
        shares.back() ^= r;
    }
    return MaskedByte(std::move(shares));
}

} // namespace snapattack
