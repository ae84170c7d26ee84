#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace snapattack {

enum class SymbolKind : std::uint8_t { Empty, K, S, M, K2, S2 };

// One byte-register entry of the schedule: K_i, S_i, M_i, K'_i, S'_i or empty.
struct CellSymbol {
    SymbolKind kind = SymbolKind::Empty;
    std::uint8_t index = 0;

    static CellSymbol empty() { return {}; }
    static CellSymbol make(SymbolKind kind, int index);
    // Accepts "-", "K3", "S15", "M7", "K'3", "S'11". Throws std::invalid_argument.
    static CellSymbol parse(std::string_view text);

    bool is_empty() const { return kind == SymbolKind::Empty; }
    std::string to_string() const;
    // Dense id in [0, 80) for non-empty symbols, used for per-symbol arrays.
    int dense_id() const;
    static CellSymbol from_dense_id(int id);
    static constexpr int kDenseCount = 80;

    auto operator<=>(const CellSymbol&) const = default;
};

// Symbolic register contents: rows x 36 clock cycles. Cycles are 1-based.
// Rows 0-15 of the embedded table are the state register, 16-31 the key
// register; subsets remember which embedded row each of their rows came from.
class ScheduleTable {
public:
    static constexpr int kCycles = 36;
    using Row = std::array<CellSymbol, kCycles>;

    ScheduleTable() = default;
    explicit ScheduleTable(std::vector<Row> rows, std::vector<int> source_rows = {});

    int rows() const { return static_cast<int>(rows_.size()); }
    const CellSymbol& at(int row, int cycle) const { return rows_.at(row).at(cycle - 1); }
    int source_row(int row) const { return source_rows_.at(row); }
    const std::vector<int>& source_rows() const { return source_rows_; }

    ScheduleTable with_cell(int row, int cycle, CellSymbol sym) const;
    // Keeps the given rows (indices into this table) in the given order.
    ScheduleTable subset(const std::vector<int>& rows) const;

    // True if sym occurs in any row at a cycle in [first, last].
    bool occurs(CellSymbol sym, int first = 1, int last = kCycles) const;

    bool operator==(const ScheduleTable&) const = default;

private:
    std::vector<Row> rows_;
    std::vector<int> source_rows_;
};

// The AES-DOM register schedule for the first 36 cycles (32 byte registers).
const ScheduleTable& load_schedule();

// CSV: header cycle_1..cycle_36, then one line per row.
ScheduleTable read_schedule_csv(std::istream& in);
void write_schedule_csv(const ScheduleTable& t, std::ostream& out);

struct ScheduleViolation {
    enum class Kind { Shift, Completeness, MissingOperand };
    Kind kind;
    int row;
    int cycle;
    std::string message;
};

// Checks shift consistency against the shift links of `reference` (mapped
// through source rows), that every row is filled at cycle 16, and that each
// symbol's defining operands exist somewhere in the table.
std::vector<ScheduleViolation> validate_schedule(const ScheduleTable& t);
std::vector<ScheduleViolation> validate_schedule(const ScheduleTable& t, const ScheduleTable& reference);

enum class RelationKind { SboxAdd, MixCol, KeySched, SboxRound2 };

std::string_view to_string(RelationKind kind);

// output = f(inputs). Semantics by kind:
//   SboxAdd    S_j  = Sbox(K_j ^ P_j)                 inputs {K_j}
//   MixCol     M_j  = row j%4 of MixColumns(column)   inputs {4 ShiftRows-mapped S}
//   KeySched   K'_i = K_i ^ Sbox(K_{12+(i+1)%4}) ^ rcon (i < 4)
//              K'_i = K_i ^ K'_{i-4}                  (i >= 4)
//   SboxRound2 S'_j = Sbox(M_j ^ K'_j)                inputs {M_j, K'_j}
struct LinkRelation {
    RelationKind kind;
    CellSymbol output;
    std::vector<CellSymbol> inputs;
    // Set when the output is never stored in a register (MixColumns row 0,
    // which the schedule shows as the pass-through S byte).
    bool hidden_output = false;
    std::uint8_t rcon = 0;
    int plaintext_index = -1; // SboxAdd only

    std::vector<CellSymbol> operands() const;
    bool operator==(const LinkRelation&) const = default;
};

struct PlaintextBinding {
    CellSymbol symbol; // the S_j whose Sbox input carries P_j
    int plaintext_index;
    bool operator==(const PlaintextBinding&) const = default;
};

struct WindowRelations {
    std::vector<LinkRelation> relations;
    std::vector<PlaintextBinding> constants;
};

// Every relation in the fixed AES-DOM universe, in canonical order.
std::vector<LinkRelation> all_relations();

// Relations whose operands all occur in cycles [start, start + length - 1].
// Throws std::out_of_range unless 16 <= start and the window ends by cycle 36.
WindowRelations relations_for_window(const ScheduleTable& t, int start_cycle, int length);

} // namespace snapattack
