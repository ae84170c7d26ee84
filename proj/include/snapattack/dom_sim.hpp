#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "snapattack/aes.hpp"
#include "snapattack/masking.hpp"
#include "snapattack/schedule.hpp"

namespace snapattack {

enum class ReshareMode { FreshEveryCycle, StableOnShift };

struct TraceConfig {
    aes::Block key{};
    aes::Block plaintext{};
    int d = 1;
    // Control-logic bits appended to every snapshot. 208 gives n = 720 for
    // d = 1 on the full 32-row register file.
    int fsm_bits = 208;
    std::uint64_t seed = 0;
    ReshareMode reshare_mode = ReshareMode::FreshEveryCycle;

    // Targeted register bits m for a schedule with `rows` byte registers.
    int targeted_bits(int rows) const { return rows * 8 * (d + 1); }
    int total_bits(int rows) const { return targeted_bits(rows) + fsm_bits; }
};

// Concrete masked register contents at one clock cycle.
struct RegisterFile {
    int cycle = 0;
    std::vector<MaskedByte> data_cells; // one per schedule row
    std::vector<std::uint8_t> fsm_cells; // 0/1

    bool operator==(const RegisterFile&) const = default;
};

// Unmasked value of a schedule symbol for the given key and plaintext.
// Throws std::invalid_argument for the empty symbol.
std::uint8_t ground_truth_value(CellSymbol sym, const aes::Block& key, const aes::Block& plaintext);

// Register whose contents row `row` takes over at `cycle` under
// StableOnShift: the shift predecessor holding the same symbol at cycle - 1,
// else any register of the same half holding it. -1 if the symbol is new.
int carried_from(const ScheduleTable& table, int row, int cycle);

// Simulates cycles [first_cycle, last_cycle] (1-based, within [1, 36]).
std::vector<RegisterFile> simulate(const TraceConfig& cfg, const ScheduleTable& table, int first_cycle,
                                   int last_cycle);
std::vector<RegisterFile> simulate(const TraceConfig& cfg, int first_cycle, int last_cycle);

// Deterministic distractor pattern: cycle counter followed by LFSR output.
std::vector<std::uint8_t> fsm_pattern(int cycle, int fsm_bits);

// CSV dumps: "cycle,row,share_index,value_hex" and "cycle,fsm_index,bit".
void write_trace_csv(const std::vector<RegisterFile>& trace, std::ostream& data_out, std::ostream& fsm_out);

} // namespace snapattack
