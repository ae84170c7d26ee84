#include "snapattack/dom_sim.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace snapattack {

std::uint8_t ground_truth_value(CellSymbol sym, const aes::Block& key, const aes::Block& plaintext)
{
    if (sym.is_empty())
        throw std::invalid_argument("ground_truth_value: empty symbol");
    const aes::RoundOneState st = aes::round_one(key, plaintext);
    switch (sym.kind) {
    case SymbolKind::K: return key[sym.index];
    case SymbolKind::S: return st.sub_bytes[sym.index];
    case SymbolKind::M: return st.mix_columns[sym.index];
    case SymbolKind::K2: return st.round_key2[sym.index];
    case SymbolKind::S2: return st.sub_bytes2[sym.index];
    case SymbolKind::Empty: break;
    }
    throw std::logic_error("unreachable");
}

std::vector<std::uint8_t> fsm_pattern(int cycle, int fsm_bits)
{
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(std::max(fsm_bits, 0)));
    constexpr int kCounterBits = 6;
    for (int k = 0; k < fsm_bits && k < kCounterBits; ++k)
        bits[k] = static_cast<std::uint8_t>((cycle >> k) & 1);
    // 32-bit Galois LFSR, advanced a fixed number of steps per cycle.
    std::uint32_t state = 0xACE1ACE1u;
    const int per_cycle = std::max(fsm_bits - kCounterBits, 1);
    auto step = [&state]() {
        const std::uint32_t out = state & 1u;
        state >>= 1;
        if (out)
            state ^= 0x80200003u;
        return out;
    };
    for (long i = 0; i < static_cast<long>(cycle) * per_cycle; ++i)
        step();
    for (int k = kCounterBits; k < fsm_bits; ++k)
        bits[k] = static_cast<std::uint8_t>(step());
    return bits;
}

int carried_from(const ScheduleTable& table, int row, int cycle)
{
    if (cycle <= 1)
        return -1;
    const CellSymbol s = table.at(row, cycle);
    if (s.is_empty())
        return -1;
    // State and key halves of the register file; a symbol only travels
    // within its own half.
    auto half_of = [&](int r) { return table.source_row(r) < 16 ? 0 : 1; };
    for (int p = 0; p < table.rows(); ++p)
        if (table.source_row(p) == table.source_row(row) + 1 && half_of(p) == half_of(row) &&
            table.at(p, cycle - 1) == s)
            return p;
    for (int p = 0; p < table.rows(); ++p)
        if (half_of(p) == half_of(row) && table.at(p, cycle - 1) == s)
            return p;
    return -1;
}

std::vector<RegisterFile> simulate(const TraceConfig& cfg, const ScheduleTable& table, int first_cycle,
                                   int last_cycle)
{
    if (first_cycle < 1 || first_cycle > last_cycle || last_cycle > ScheduleTable::kCycles)
        throw std::out_of_range("simulate: cycle range must satisfy 1 <= first <= last <= 36");
    if (cfg.d < 0 || cfg.fsm_bits < 0)
        throw std::invalid_argument("simulate: d and fsm_bits must be non-negative");

    const Rng base(cfg.seed);
    const int rows = table.rows();
    const std::vector<std::uint8_t> zero_shares(static_cast<std::size_t>(cfg.d) + 1, 0);
    const auto st = aes::round_one(cfg.key, cfg.plaintext);
    auto value_of = [&](CellSymbol s) -> std::uint8_t {
        switch (s.kind) {
        case SymbolKind::K: return cfg.key[s.index];
        case SymbolKind::S: return st.sub_bytes[s.index];
        case SymbolKind::M: return st.mix_columns[s.index];
        case SymbolKind::K2: return st.round_key2[s.index];
        case SymbolKind::S2: return st.sub_bytes2[s.index];
        case SymbolKind::Empty: break;
        }
        return 0;
    };

    std::vector<RegisterFile> out;
    std::vector<MaskedByte> prev;
    // Stable mode carries shares along, so the walk always starts at cycle 1.
    const int start = cfg.reshare_mode == ReshareMode::StableOnShift ? 1 : first_cycle;
    for (int c = start; c <= last_cycle; ++c) {
        Rng rng = base.fork(static_cast<std::uint64_t>(c));
        RegisterFile rf;
        rf.cycle = c;
        rf.data_cells.reserve(rows);
        for (int r = 0; r < rows; ++r) {
            const CellSymbol s = table.at(r, c);
            if (s.is_empty()) {
                rf.data_cells.emplace_back(zero_shares);
                continue;
            }
            if (cfg.reshare_mode == ReshareMode::StableOnShift && c > 1) {
                const int from = carried_from(table, r, c);
                if (from >= 0) {
                    rf.data_cells.push_back(prev[from]);
                    continue;
                }
            }
            rf.data_cells.push_back(share(value_of(s), cfg.d, rng));
        }
        rf.fsm_cells = fsm_pattern(c, cfg.fsm_bits);
        prev = rf.data_cells;
        if (c >= first_cycle)
            out.push_back(std::move(rf));
    }
    return out;
}

std::vector<RegisterFile> simulate(const TraceConfig& cfg, int first_cycle, int last_cycle)
{
    return simulate(cfg, load_schedule(), first_cycle, last_cycle);
}

void write_trace_csv(const std::vector<RegisterFile>& trace, std::ostream& data_out, std::ostream& fsm_out)
{
    data_out << "cycle,row,share_index,value_hex\n";
    fsm_out << "cycle,fsm_index,bit\n";
    char hex[3];
    for (const RegisterFile& rf : trace) {
        for (std::size_t r = 0; r < rf.data_cells.size(); ++r) {
            const auto& shares = rf.data_cells[r].shares();
            for (std::size_t s = 0; s < shares.size(); ++s) {
                std::snprintf(hex, sizeof hex, "%02x", shares[s]);
                data_out << rf.cycle << ',' << r << ',' << s << ',' << hex << '\n';
            }
        }
        for (std::size_t k = 0; k < rf.fsm_cells.size(); ++k)
            fsm_out << rf.cycle << ',' << k << ',' << int(rf.fsm_cells[k]) << '\n';
    }
}

} // namespace snapattack
