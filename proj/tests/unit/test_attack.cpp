#include <doctest.h>

#include <stdexcept>

#include <sstream>

#include "../support/reference_aes.hpp"
#include "snapattack/attack.hpp"

using namespace snapattack;
using namespace snapattack::attack;

TEST_SUITE("attack") {

TEST_CASE("key verification and round-one inversion")
{
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        aes::Block key, pt;
        for (auto& b : key)
            b = rng.next_byte();
        for (auto& b : pt)
            b = rng.next_byte();
        const aes::Block ct = ref::encrypt(key, pt);
        CHECK(verify_key(key, pt, ct));
        aes::Block bad = key;
        bad[rng.uniform(16)] ^= static_cast<std::uint8_t>(1u << rng.uniform(8));
        CHECK_FALSE(verify_key(bad, pt, ct));

        aes::Block s;
        for (int j = 0; j < 16; ++j)
            s[j] = ref::sbox(key[j] ^ pt[j]);
        CHECK(recover_key_from_round1_state(s, pt) == key);
    }
    CHECK(combine_shares({0xA6, 0x28, 0x39}) == 0xB7);
    CHECK(combine_shares({0x5C}) == 0x5C);
}

TEST_CASE("scenario 1 recovers the key from known locations")
{
    const ScheduleTable& table = load_schedule();
    for (int d : {2, 4}) {
        int ok = 0;
        for (int t = 0; t < 100; ++t) {
            const auto planted = plant_instance(table, d, 208, 16, 16, 1000 * d + t);
            const KnownPair pair{planted.config.plaintext, planted.ciphertext};
            const auto r = scenario1_direct(planted.snapshots, planted.placement, table, d, false, pair);
            CHECK(r.bits_read == static_cast<std::size_t>(128 * (d + 1)));
            REQUIRE(r.candidates.size() == 1);
            ok += r.candidates[0] == planted.config.key && r.verified.at(0);
        }
        CHECK(ok == 100);
    }
}

TEST_CASE("scenario 1 with unlabeled templates")
{
    const ScheduleTable& table = load_schedule();
    for (int d : {1, 2}) {
        const auto planted = plant_instance(table, d, 208, 16, 16, 77 + d);
        // Every bit read back inverted.
        auto inverted = planted.snapshots;
        for (auto& b : inverted[0].bits)
            b ^= 1;
        const KnownPair pair{planted.config.plaintext, planted.ciphertext};
        const auto r = scenario1_direct(inverted, planted.placement, table, d, true, pair);
        REQUIRE(r.candidates.size() == 2);
        if ((d + 1) % 2 == 0) {
            CHECK(r.candidates[0] == r.candidates[1]);
            CHECK(r.candidates[0] == planted.config.key);
        } else {
            CHECK(r.candidates[0] != r.candidates[1]);
            CHECK(r.candidates[1] == planted.config.key);
            CHECK_FALSE(r.verified[0]);
            CHECK(r.verified[1]);
        }
    }
}

TEST_CASE("scenario 1 input errors")
{
    const ScheduleTable& table = load_schedule();
    const auto planted = plant_instance(table, 1, 208, 17, 18, 5);
    CHECK_THROWS_AS(scenario1_direct(planted.snapshots, planted.placement, table, 1), std::invalid_argument);
    const auto at16 = plant_instance(table, 1, 208, 16, 16, 5);
    CHECK_THROWS_AS(scenario1_direct(at16.snapshots, PlacementMap::identity(10), table, 1), std::invalid_argument);
}

TEST_CASE("scenario 2 on a small window")
{
    const ScheduleTable table = ReducedScheduleSpec{}.table();
    const auto planted = plant_instance(table, 0, 52, 16, 31, 12);
    sat::BuiltinSolver solver(1);
    const auto r = scenario2_sat(planted.snapshots, 16, 16, 0, planted.config.plaintext, table, solver);
    // This instance admits a second key one bit away; both must be reported.
    REQUIRE(r.outcome == Outcome::Ambiguous);
    REQUIRE(r.alternate.has_value());
    CHECK((r.key == planted.config.key || *r.alternate == planted.config.key));
    CHECK(r.key != *r.alternate);
    CHECK(verify_key(r.key, planted.config.plaintext, planted.ciphertext) == (r.key == planted.config.key));
    CHECK(r.stats.n_vars > 0);

    const auto unique = plant_instance(table, 0, 52, 16, 29, 3);
    const auto u = scenario2_sat(unique.snapshots, 16, 14, 0, unique.config.plaintext, table, solver);
    CHECK(u.outcome == Outcome::Recovered);
    CHECK(u.key == unique.config.key);
    CHECK(verify_key(u.key, unique.config.plaintext, unique.ciphertext));
}

TEST_CASE("bench bookkeeping")
{
    BenchConfig cfg;
    cfg.trials = 0;
    CHECK(bench_table(cfg).empty());

    std::vector<BenchRow> rows = {
        {0, 9, 0, Outcome::Ambiguous, 1.0, 2.0, 10, 20, false},
        {0, 12, 0, Outcome::Recovered, 1.0, 2.0, 10, 20, true},
        {0, 12, 1, Outcome::Recovered, 3.0, 4.0, 10, 20, true},
        {1, 12, 0, Outcome::Timeout, 1.0, 2.0, 10, 20, false},
    };
    std::ostringstream with, without;
    write_bench_csv(rows, with, true);
    write_bench_csv(rows, without, false);
    CHECK(with.str().find("0,12,1,RECOVERED,3.0,4.0,10,20\n") != std::string::npos);
    CHECK(without.str().find("0,12,1,RECOVERED,-,-,10,20\n") != std::string::npos);

    const auto cells = summarize(rows);
    REQUIRE(cells.size() == 3);
    CHECK(cells[1].recovered == 2);
    CHECK(cells[1].mean_solve_ms == doctest::Approx(3.0));
    CHECK(minimum_window(cells, 0) == 12);
    CHECK_FALSE(minimum_window(cells, 1).has_value());
    CHECK_FALSE(minimum_window(cells, 2).has_value());
}

}
