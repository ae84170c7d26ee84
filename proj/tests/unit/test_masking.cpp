#include <doctest.h>

#include <stdexcept>

#include <array>

#include "snapattack/masking.hpp"
#include "snapattack/rng.hpp"

using namespace snapattack;

namespace {

// Pearson statistic of byte counts against the uniform distribution.
double chi2_bytes(const std::array<int, 256>& counts, int draws)
{
    const double e = draws / 256.0;
    double x = 0;
    for (int c : counts)
        x += (c - e) * (c - e) / e;
    return x;
}

// 255 degrees of freedom, p ~ 1e-4
constexpr double kChi2Limit = 340.0;

} // namespace

TEST_SUITE("masking") {

TEST_CASE("share and unshare")
{
    Rng rng(1);
    const MaskedByte z = share(0x5A, 0, rng);
    REQUIRE(z.share_count() == 1);
    CHECK(z[0] == 0x5A);
    for (int t = 0; t < 10000; ++t) {
        const int d = 1 + static_cast<int>(rng.uniform(6));
        const std::uint8_t x = rng.next_byte();
        const MaskedByte m = share(x, d, rng);
        CHECK(m.order() == d);
        CHECK(unshare(m) == x);
    }
    CHECK_THROWS_AS(share(1, -1, rng), std::invalid_argument);
    CHECK_THROWS_AS(MaskedByte(std::vector<std::uint8_t>{}), std::invalid_argument);
}

TEST_CASE("three shares from the scan decode the key byte")
{
    CHECK(unshare(MaskedByte{0xA6, 0x28, 0x39}) == 0xB7);
    CHECK(unshare(MaskedByte{0x42}) == 0x42);
}

TEST_CASE("reshare keeps the value and draws fresh masks")
{
    Rng rng(2);
    const MaskedByte single{0x17};
    CHECK(reshare(single, rng) == single);
    int same = 0;
    for (int t = 0; t < 10000; ++t) {
        const MaskedByte m = share(rng.next_byte(), 1 + static_cast<int>(rng.uniform(6)), rng);
        const MaskedByte r = reshare(m, rng);
        CHECK(unshare(r) == unshare(m));
        CHECK(r.same_value(m));
        same += r == m;
    }
    CHECK(same < 100);
}

TEST_CASE("share 0 is uniform and independent of the value")
{
    Rng rng(3);
    constexpr int kDraws = 10000;
    for (std::uint8_t value : {std::uint8_t{0x00}, std::uint8_t{0xFF}}) {
        std::array<int, 256> fresh{}, again{};
        for (int t = 0; t < kDraws; ++t) {
            ++fresh[share(value, 1, rng)[0]];
            ++again[reshare(MaskedByte{value, 0}, rng)[0]];
        }
        CHECK(chi2_bytes(fresh, kDraws) < kChi2Limit);
        CHECK(chi2_bytes(again, kDraws) < kChi2Limit);
    }
}

}
