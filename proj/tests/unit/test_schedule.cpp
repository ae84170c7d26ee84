#include <doctest.h>

#include <stdexcept>

#include <set>
#include <sstream>

#include "snapattack/schedule.hpp"

using namespace snapattack;

namespace {

CellSymbol sym(const char* s) { return CellSymbol::parse(s); }

} // namespace

TEST_SUITE("schedule") {

TEST_CASE("table landmarks")
{
    const ScheduleTable& t = load_schedule();
    REQUIRE(t.rows() == 32);
    CHECK(t.at(0, 15).is_empty());
    CHECK(t.at(0, 16) == sym("K0"));
    CHECK(t.at(0, 17) == sym("K1"));
    CHECK(t.at(0, 19) == sym("K3"));
    CHECK(t.at(0, 20) == sym("S0"));
    CHECK(t.at(0, 36) == sym("K'0"));
    for (int j = 0; j < 16; ++j)
        CHECK(t.at(16 + j, 16) == CellSymbol::make(SymbolKind::K, j));
    // The state chain shifts by one row per cycle.
    CHECK(t.at(4, 12) == sym("K0"));
    CHECK(t.at(3, 13) == sym("K0"));
}

TEST_CASE("symbol text round trip")
{
    for (const char* s : {"K0", "S15", "M7", "K'3", "S'11"})
        CHECK(sym(s).to_string() == s);
    CHECK(sym("-").is_empty());
    CHECK_THROWS_AS(sym("Q1"), std::invalid_argument);
    CHECK_THROWS_AS(sym("K16"), std::invalid_argument);
}

TEST_CASE("CSV round trip")
{
    std::stringstream ss;
    write_schedule_csv(load_schedule(), ss);
    const std::string text = ss.str();
    CHECK(text.rfind("cycle_1,cycle_2,", 0) == 0);
    std::stringstream in(text);
    CHECK(read_schedule_csv(in) == load_schedule());
    std::stringstream bad("cycle_1,cycle_2\n-,-\n");
    CHECK_THROWS(read_schedule_csv(bad));
}

TEST_CASE("validator")
{
    const ScheduleTable& t = load_schedule();
    CHECK(validate_schedule(t).empty());

    const ScheduleTable swapped = t.with_cell(5, 20, sym("S13"));
    const auto v = validate_schedule(swapped);
    REQUIRE_FALSE(v.empty());
    for (const auto& x : v) {
        CHECK(x.row == 5);
        CHECK(x.cycle == 20);
    }

    std::vector<ScheduleTable::Row> rows(32);
    const auto empty = validate_schedule(ScheduleTable(rows));
    bool completeness = false;
    for (const auto& x : empty)
        completeness |= x.kind == ScheduleViolation::Kind::Completeness && x.cycle == 16;
    CHECK(completeness);
}

TEST_CASE("relations emitted exactly when their operands are in the window")
{
    const ScheduleTable& t = load_schedule();
    CHECK(relations_for_window(t, 16, 0).relations.empty());
    CHECK_THROWS_AS(relations_for_window(t, 15, 3), std::out_of_range);
    CHECK_THROWS_AS(relations_for_window(t, 30, 10), std::out_of_range);

    for (int len : {1, 5, 12, 21}) {
        const int last = 16 + len - 1;
        std::set<CellSymbol> seen;
        for (int r = 0; r < t.rows(); ++r)
            for (int c = 16; c <= last; ++c)
                if (!t.at(r, c).is_empty())
                    seen.insert(t.at(r, c));
        const auto wr = relations_for_window(t, 16, len);
        std::set<CellSymbol> outputs;
        for (const auto& rel : wr.relations) {
            outputs.insert(rel.output);
            for (CellSymbol in : rel.operands())
                if (!(rel.hidden_output && in == rel.output))
                    CHECK((seen.count(in) || outputs.count(in)));
        }
        // Brute-force scan: each round-1 Sbox output in view with its key byte.
        int sbox_add = 0;
        for (int j = 0; j < 16; ++j)
            sbox_add += seen.count(CellSymbol::make(SymbolKind::S, j)) && seen.count(CellSymbol::make(SymbolKind::K, j));
        int emitted = 0;
        for (const auto& rel : wr.relations)
            emitted += rel.kind == RelationKind::SboxAdd;
        CHECK(emitted == sbox_add);
        CHECK(wr.constants.size() == static_cast<std::size_t>(sbox_add));
    }
    CHECK(relations_for_window(t, 16, 1).relations.size() < 16);

    const auto full = relations_for_window(t, 16, 21);
    std::set<CellSymbol> keysched, round2;
    for (const auto& rel : full.relations) {
        if (rel.kind == RelationKind::KeySched)
            keysched.insert(rel.output);
        if (rel.kind == RelationKind::SboxRound2)
            round2.insert(rel.output);
    }
    CHECK(keysched.size() == 16);
    for (int j = 0; j < 12; ++j)
        CHECK(round2.count(CellSymbol::make(SymbolKind::S2, j)) == 1);
}

TEST_CASE("row subsets keep their source rows")
{
    const ScheduleTable r = load_schedule().subset({0, 1, 2, 3, 16, 17, 18, 19});
    REQUIRE(r.rows() == 8);
    CHECK(r.source_row(4) == 16);
    CHECK(r.at(4, 16) == sym("K0"));
    CHECK(r.at(0, 16) == sym("K0"));
}

}
