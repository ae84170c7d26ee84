#include "snapattack/schedule.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "snapattack/aes.hpp"

namespace snapattack {

namespace {

// Rows in register order, columns are cycles 1..36.
constexpr const char* kAesDomTable[32] = {
    "- - - - - - - - - - - - - - - K0 K1 K2 K3 S0 M1 M2 M3 S4 M5 M6 M7 S8 M9 M10 M11 S12 M13 M14 M15 K'0",
    "- - - - - - - - - - - - - - K0 K1 K2 K3 S0 S5 M2 M3 S4 S9 M6 M7 S8 S13 M10 M11 S12 S1 M14 M15 K'0 K'1",
    "- - - - - - - - - - - - - K0 K1 K2 K3 S0 S1 S10 M3 S4 S9 S14 M7 S8 S13 S2 M11 S12 S1 S6 M15 K'0 K'1 K'2",
    "- - - - - - - - - - - - K0 K1 K2 K3 S0 S1 S2 S15 S4 S9 S14 S3 S8 S13 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3",
    "- - - - - - - - - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S9 S14 S3 S8 S13 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0",
    "- - - - - - - - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S9 S14 S3 S8 S13 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1",
    "- - - - - - - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S14 S3 S8 S13 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2",
    "- - - - - - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S3 S8 S13 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3",
    "- - - - - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S13 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4",
    "- - - - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S13 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4 S'5",
    "- - - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S9 S2 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4 S'5 S'6",
    "- - - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S9 S10 S7 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4 S'5 S'6 S'7",
    "- - - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S9 S10 S11 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4 S'5 S'6 S'7 S'8",
    "- - K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S9 S10 S11 S12 S1 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4 S'5 S'6 S'7 S'8 S'9",
    "- K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S9 S10 S11 S12 S13 S6 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4 S'5 S'6 S'7 S'8 S'9 S'10",
    "K0 K1 K2 K3 S0 S1 S2 S3 S4 S5 S6 S7 S8 S9 S10 S11 S12 S13 S14 S11 K'0 K'1 K'2 K'3 S'0 S'1 S'2 S'3 S'4 S'5 S'6 S'7 S'8 S'9 S'10 S'11",
    "- - - - - - - - - - - - - - - K0 K1 K2 K3 K0 K1 K2 K3 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'0",
    "- - - - - - - - - - - - - - K0 K1 K2 K3 K0 K1 K2 K3 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'0 K'1",
    "- - - - - - - - - - - - - K0 K1 K2 K3 K0 K1 K2 K3 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'0 K'1 K'2",
    "- - - - - - - - - - - - K0 K1 K2 K3 K0 K1 K2 K3 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'0 K'1 K'2 K'3",
    "- - - - - - - - - - - K4 K5 K6 K7 K4 K5 K6 K7 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'4",
    "- - - - - - - - - - K4 K5 K6 K7 K4 K5 K6 K7 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'4 K'5",
    "- - - - - - - - - K4 K5 K6 K7 K4 K5 K6 K7 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'4 K'5 K'6",
    "- - - - - - - - K4 K5 K6 K7 K4 K5 K6 K7 K4 K5 K6 K7 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'4 K'5 K'6 K'7",
    "- - - - - - - K4 K5 K6 K7 K8 K9 K10 K11 K8 K9 K10 K11 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'8",
    "- - - - - - K4 K5 K6 K7 K8 K9 K10 K11 K8 K9 K10 K11 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'8 K'9",
    "- - - - - K4 K5 K6 K7 K8 K9 K10 K11 K8 K9 K10 K11 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'8 K'9 K'10",
    "- - - - K4 K5 K6 K7 K8 K9 K10 K11 K8 K9 K10 K11 K8 K9 K10 K11 K12 K13 K14 K15 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'8 K'9 K'10 K'11",
    "- - - - - - - - - - - - - - - K12 K13 K14 K15 K12 K13 K14 K15 K'0 K'1 K'2 K'3 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'12",
    "- - - - - - - - - - - - - - K12 K13 K14 K15 K12 K13 K14 K15 K'0 K'1 K'2 K'3 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'12 K'13",
    "- - - - - - - - - - - - - K12 K13 K14 K15 K12 K13 K14 K15 K'0 K'1 K'2 K'3 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'12 K'13 K'14",
    "- - - - - - - - - - - - K12 K13 K14 K15 K12 K13 K14 K15 K'0 K'1 K'2 K'3 K'4 K'5 K'6 K'7 K'8 K'9 K'10 K'11 K'12 K'13 K'14 K'15",
};

std::vector<std::string> split_ws(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r' && c != ' ' && c != '\t') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

ScheduleTable build_embedded()
{
    std::vector<ScheduleTable::Row> rows;
    for (const char* line : kAesDomTable) {
        const auto toks = split_ws(line);
        if (toks.size() != ScheduleTable::kCycles)
            throw std::logic_error("embedded schedule row has wrong length");
        ScheduleTable::Row row;
        for (int c = 0; c < ScheduleTable::kCycles; ++c)
            row[c] = CellSymbol::parse(toks[c]);
        rows.push_back(row);
    }
    return ScheduleTable(std::move(rows));
}

bool occurs_in_window(const ScheduleTable& t, CellSymbol sym, int first, int last)
{
    return t.occurs(sym, first, last);
}

} // namespace

CellSymbol CellSymbol::make(SymbolKind kind, int index)
{
    if (kind == SymbolKind::Empty)
        return {};
    if (index < 0 || index > 15)
        throw std::invalid_argument("symbol index out of range: " + std::to_string(index));
    return {kind, static_cast<std::uint8_t>(index)};
}

CellSymbol CellSymbol::parse(std::string_view text)
{
    if (text == "-")
        return {};
    if (text.size() < 2)
        throw std::invalid_argument("bad schedule symbol '" + std::string(text) + "'");
    SymbolKind kind;
    std::size_t pos = 1;
    switch (text[0]) {
    case 'K': kind = SymbolKind::K; break;
    case 'S': kind = SymbolKind::S; break;
    case 'M': kind = SymbolKind::M; break;
    default: throw std::invalid_argument("bad schedule symbol '" + std::string(text) + "'");
    }
    if (text[1] == '\'') {
        if (kind == SymbolKind::M)
            throw std::invalid_argument("bad schedule symbol '" + std::string(text) + "'");
        kind = kind == SymbolKind::K ? SymbolKind::K2 : SymbolKind::S2;
        pos = 2;
    }
    const std::string_view digits = text.substr(pos);
    if (digits.empty() || digits.size() > 2 || !std::all_of(digits.begin(), digits.end(), ::isdigit))
        throw std::invalid_argument("bad schedule symbol '" + std::string(text) + "'");
    return make(kind, std::stoi(std::string(digits)));
}

std::string CellSymbol::to_string() const
{
    switch (kind) {
    case SymbolKind::Empty: return "-";
    case SymbolKind::K: return "K" + std::to_string(index);
    case SymbolKind::S: return "S" + std::to_string(index);
    case SymbolKind::M: return "M" + std::to_string(index);
    case SymbolKind::K2: return "K'" + std::to_string(index);
    case SymbolKind::S2: return "S'" + std::to_string(index);
    }
    return "?";
}

int CellSymbol::dense_id() const
{
    if (is_empty())
        throw std::logic_error("empty symbol has no dense id");
    return (static_cast<int>(kind) - 1) * 16 + index;
}

CellSymbol CellSymbol::from_dense_id(int id)
{
    return make(static_cast<SymbolKind>(id / 16 + 1), id % 16);
}

ScheduleTable::ScheduleTable(std::vector<Row> rows, std::vector<int> source_rows)
    : rows_(std::move(rows)), source_rows_(std::move(source_rows))
{
    if (source_rows_.empty())
        for (int r = 0; r < static_cast<int>(rows_.size()); ++r)
            source_rows_.push_back(r);
    if (source_rows_.size() != rows_.size())
        throw std::invalid_argument("source row list does not match row count");
}

ScheduleTable ScheduleTable::with_cell(int row, int cycle, CellSymbol sym) const
{
    ScheduleTable copy = *this;
    copy.rows_.at(row).at(cycle - 1) = sym;
    return copy;
}

ScheduleTable ScheduleTable::subset(const std::vector<int>& rows) const
{
    std::vector<Row> kept;
    std::vector<int> sources;
    for (int r : rows) {
        kept.push_back(rows_.at(r));
        sources.push_back(source_rows_.at(r));
    }
    return ScheduleTable(std::move(kept), std::move(sources));
}

bool ScheduleTable::occurs(CellSymbol sym, int first, int last) const
{
    for (const Row& row : rows_)
        for (int c = first; c <= last; ++c)
            if (row[c - 1] == sym)
                return true;
    return false;
}

const ScheduleTable& load_schedule()
{
    static const ScheduleTable table = build_embedded();
    return table;
}

ScheduleTable read_schedule_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("schedule CSV: missing header");
    const auto header = split_csv(line);
    if (header.size() != ScheduleTable::kCycles)
        throw std::runtime_error("schedule CSV: expected 36 columns in header");
    for (int c = 0; c < ScheduleTable::kCycles; ++c)
        if (header[c] != "cycle_" + std::to_string(c + 1))
            throw std::runtime_error("schedule CSV: bad header field '" + header[c] + "'");
    std::vector<ScheduleTable::Row> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto fields = split_csv(line);
        if (fields.size() != ScheduleTable::kCycles)
            throw std::runtime_error("schedule CSV: row " + std::to_string(rows.size()) + " has " +
                                     std::to_string(fields.size()) + " fields");
        ScheduleTable::Row row;
        for (int c = 0; c < ScheduleTable::kCycles; ++c)
            row[c] = CellSymbol::parse(fields[c]);
        rows.push_back(row);
    }
    if (rows.empty())
        throw std::runtime_error("schedule CSV: no rows");
    return ScheduleTable(std::move(rows));
}

void write_schedule_csv(const ScheduleTable& t, std::ostream& out)
{
    for (int c = 1; c <= ScheduleTable::kCycles; ++c)
        out << (c > 1 ? "," : "") << "cycle_" << c;
    out << '\n';
    for (int r = 0; r < t.rows(); ++r) {
        for (int c = 1; c <= ScheduleTable::kCycles; ++c)
            out << (c > 1 ? "," : "") << t.at(r, c).to_string();
        out << '\n';
    }
}

std::vector<ScheduleViolation> validate_schedule(const ScheduleTable& t)
{
    return validate_schedule(t, load_schedule());
}

std::vector<ScheduleViolation> validate_schedule(const ScheduleTable& t, const ScheduleTable& reference)
{
    std::vector<ScheduleViolation> out;

    // Shift links: cell (r, c) should repeat (r', c - 1) where r' holds the
    // next reference row, wherever the reference table itself shifts there.
    std::vector<int> row_of_source(reference.rows(), -1);
    for (int r = 0; r < t.rows(); ++r) {
        const int src = t.source_row(r);
        if (src >= 0 && src < reference.rows())
            row_of_source[src] = r;
    }
    const int half = reference.rows() / 2;
    auto predecessor = [&](int r) -> int {
        const int src = t.source_row(r);
        if (src < 0 || src + 1 >= reference.rows() || (src + 1) % half == 0)
            return -1;
        return row_of_source[src + 1];
    };
    auto link_applies = [&](int r, int c) {
        const int src = t.source_row(r);
        return c >= 2 && src >= 0 && src + 1 < reference.rows() && (src + 1) % half != 0 &&
               reference.at(src, c) == reference.at(src + 1, c - 1);
    };
    // A link is checkable when both endpoints are in t.
    auto link_state = [&](int r, int c) -> int { // -1 n/a, 0 ok, 1 broken
        if (r < 0 || c < 2 || c > ScheduleTable::kCycles || !link_applies(r, c))
            return -1;
        const int p = predecessor(r);
        if (p < 0)
            return -1;
        return t.at(r, c) == t.at(p, c - 1) ? 0 : 1;
    };
    std::vector<int> successor(t.rows(), -1);
    for (int r = 0; r < t.rows(); ++r) {
        const int p = predecessor(r);
        if (p >= 0)
            successor[p] = r;
    }
    for (int r = 0; r < t.rows(); ++r) {
        for (int c = 1; c <= ScheduleTable::kCycles; ++c) {
            const int in = link_state(r, c);
            const int outl = successor[r] >= 0 ? link_state(successor[r], c + 1) : -1;
            if (in == -1 && outl == -1)
                continue;
            // Blame the cell only when every link touching it is broken, so
            // one faulty entry is not also charged to its neighbours.
            if (in != 0 && outl != 0) {
                out.push_back({ScheduleViolation::Kind::Shift, r, c,
                               "symbol " + t.at(r, c).to_string() + " breaks the shift chain"});
            }
        }
    }

    for (int r = 0; r < t.rows(); ++r)
        if (t.at(r, 16).is_empty())
            out.push_back({ScheduleViolation::Kind::Completeness, r, 16, "register empty at cycle 16"});

    // Defining operands of every stored symbol must exist somewhere.
    const auto universe = all_relations();
    auto available = [&](CellSymbol s) {
        if (t.occurs(s))
            return true;
        if (s.kind == SymbolKind::M) {
            for (const auto& rel : universe)
                if (rel.kind == RelationKind::MixCol && rel.output == s)
                    return std::all_of(rel.inputs.begin(), rel.inputs.end(),
                                       [&](CellSymbol in) { return t.occurs(in); });
        }
        return false;
    };
    for (int r = 0; r < t.rows(); ++r) {
        for (int c = 1; c <= ScheduleTable::kCycles; ++c) {
            const CellSymbol s = t.at(r, c);
            if (s.is_empty() || s.kind == SymbolKind::K)
                continue;
            for (const auto& rel : universe) {
                if (rel.output != s)
                    continue;
                for (CellSymbol in : rel.inputs)
                    if (!available(in))
                        out.push_back({ScheduleViolation::Kind::MissingOperand, r, c,
                                       s.to_string() + " needs " + in.to_string()});
            }
        }
    }
    return out;
}

std::string_view to_string(RelationKind kind)
{
    switch (kind) {
    case RelationKind::SboxAdd: return "SBOX_ADD";
    case RelationKind::MixCol: return "MIXCOL";
    case RelationKind::KeySched: return "KEYSCHED";
    case RelationKind::SboxRound2: return "SBOX_ROUND2";
    }
    return "?";
}

std::vector<CellSymbol> LinkRelation::operands() const
{
    std::vector<CellSymbol> ops{output};
    ops.insert(ops.end(), inputs.begin(), inputs.end());
    return ops;
}

std::vector<LinkRelation> all_relations()
{
    using K = SymbolKind;
    std::vector<LinkRelation> rels;
    for (int j = 0; j < 16; ++j)
        rels.push_back({RelationKind::SboxAdd, CellSymbol::make(K::S, j), {CellSymbol::make(K::K, j)}, false, 0, j});
    for (int j = 0; j < 16; ++j) {
        const int col = j / 4;
        std::vector<CellSymbol> ins;
        for (int row = 0; row < 4; ++row)
            ins.push_back(CellSymbol::make(K::S, aes::shift_rows_source(col, row)));
        rels.push_back({RelationKind::MixCol, CellSymbol::make(K::M, j), ins});
    }
    for (int i = 0; i < 16; ++i) {
        LinkRelation rel{RelationKind::KeySched, CellSymbol::make(K::K2, i), {}};
        if (i < 4) {
            rel.inputs = {CellSymbol::make(K::K, i), CellSymbol::make(K::K, 12 + (i + 1) % 4)};
            rel.rcon = i == 0 ? aes::rcon(1) : 0;
        } else {
            rel.inputs = {CellSymbol::make(K::K, i), CellSymbol::make(K::K2, i - 4)};
        }
        rels.push_back(rel);
    }
    for (int j = 0; j < 16; ++j)
        rels.push_back({RelationKind::SboxRound2, CellSymbol::make(K::S2, j),
                        {CellSymbol::make(K::M, j), CellSymbol::make(K::K2, j)}});
    return rels;
}

WindowRelations relations_for_window(const ScheduleTable& t, int start_cycle, int length)
{
    if (length < 0 || start_cycle < 16 || start_cycle + length - 1 > ScheduleTable::kCycles)
        throw std::out_of_range("relation window must lie within cycles [16, 36]");
    WindowRelations out;
    if (length == 0)
        return out;
    const int last = start_cycle + length - 1;
    const auto universe = all_relations();

    auto in_window = [&](CellSymbol s) { return occurs_in_window(t, s, start_cycle, last); };
    // MixColumns outputs never stored anywhere in the table are derivable
    // from their column inputs.
    auto hidden = [&](const LinkRelation& rel) {
        return rel.kind == RelationKind::MixCol && !t.occurs(rel.output);
    };
    auto inputs_present = [&](const LinkRelation& rel) {
        return std::all_of(rel.inputs.begin(), rel.inputs.end(), in_window);
    };
    std::set<CellSymbol> derivable;
    for (const auto& rel : universe)
        if (hidden(rel) && inputs_present(rel))
            derivable.insert(rel.output);
    auto present = [&](CellSymbol s) { return in_window(s) || derivable.count(s) > 0; };

    std::set<CellSymbol> consumed;
    for (const auto& rel : universe) {
        if (hidden(rel))
            continue;
        const auto ops = rel.operands();
        if (!std::all_of(ops.begin(), ops.end(), present))
            continue;
        out.relations.push_back(rel);
        for (CellSymbol in : rel.inputs)
            if (derivable.count(in))
                consumed.insert(in);
        if (rel.kind == RelationKind::SboxAdd)
            out.constants.push_back({rel.output, rel.plaintext_index});
    }
    // Hidden MixColumns outputs go in front of their consumers.
    std::vector<LinkRelation> hidden_rels;
    for (const auto& rel : universe) {
        if (hidden(rel) && consumed.count(rel.output)) {
            LinkRelation h = rel;
            h.hidden_output = true;
            hidden_rels.push_back(h);
        }
    }
    out.relations.insert(out.relations.begin(), hidden_rels.begin(), hidden_rels.end());
    return out;
}

} // namespace snapattack
