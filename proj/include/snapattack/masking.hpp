#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "snapattack/rng.hpp"

namespace snapattack {

struct ShareConfig {
    int d = 1; // masking order, d + 1 shares
    std::uint64_t rng_seed = 0;
};

// Boolean sharing of one byte. Shares are kept in register order; operator==
// compares share-wise, use same_value() to compare the represented byte.
class MaskedByte {
public:
    explicit MaskedByte(std::vector<std::uint8_t> shares);
    MaskedByte(std::initializer_list<std::uint8_t> shares);

    int order() const { return static_cast<int>(shares_.size()) - 1; }
    std::size_t share_count() const { return shares_.size(); }
    const std::vector<std::uint8_t>& shares() const { return shares_; }
    std::uint8_t operator[](std::size_t i) const { return shares_[i]; }

    bool same_value(const MaskedByte& other) const;
    bool operator==(const MaskedByte&) const = default;

private:
    std::vector<std::uint8_t> shares_;
};

// d fresh uniform shares, the last one completes the XOR to value.
MaskedByte share(std::uint8_t value, int d, Rng& rng);
std::uint8_t unshare(const MaskedByte& m);
MaskedByte reshare(const MaskedByte& m, Rng& rng);

} // namespace snapattack
