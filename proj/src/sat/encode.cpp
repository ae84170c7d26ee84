#include "snapattack/sat/encode.hpp"

#include <set>
#include <stdexcept>

#include "snapattack/sat/sbox_circuit.hpp"

namespace snapattack::sat {

void encode_onehot(std::span<const Var> coeffs, CnfProblem& sink, OneHotEncoding enc)
{
    const std::size_t n = coeffs.size();
    if (n == 0)
        throw std::invalid_argument("one-hot over zero coefficients");
    if (n == 1) {
        sink.add_clause({pos(coeffs[0])});
        return;
    }
    if (enc == OneHotEncoding::Pairwise) {
        std::vector<Lit> any;
        for (Var c : coeffs)
            any.push_back(pos(c));
        sink.add_clause(any);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                sink.add_clause({neg(coeffs[a]), neg(coeffs[b])});
        return;
    }
    // Running sum s_j = c_0 + ... + c_{j-1}; a carry out of any step would
    // mean two coefficients are set, and the final sum bit must be 1.
    Lit sum = pos(coeffs[0]);
    for (std::size_t j = 1; j < n; ++j) {
        sink.add_clause({-sum, neg(coeffs[j])});
        if (j + 1 < n) {
            const Lit next = pos(sink.define_xor({sum, pos(coeffs[j])}));
            if (enc == OneHotEncoding::SequentialImplied) {
                sink.add_clause({-sum, next});
                sink.add_clause({neg(coeffs[j]), next});
            }
            sum = next;
        } else
            sink.add_xor({sum, pos(coeffs[j])}, true);
    }
}

void encode_observation_link(Var v, std::span<const Var> coeffs, const ObservationVector& obs, CnfProblem& sink)
{
    if (static_cast<int>(coeffs.size()) != obs.size())
        throw std::invalid_argument("observation link: coefficient count differs from observation size");
    std::vector<Lit> big{neg(v)};
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (!obs.bits[j])
            continue;
        big.push_back(pos(coeffs[j]));
        sink.add_clause({pos(v), neg(coeffs[j])});
    }
    sink.add_clause(big);
}

void encode_share_combine(Var nu, std::span<const Var> shares, CnfProblem& sink)
{
    std::vector<Lit> lits{pos(nu)};
    for (Var s : shares)
        lits.push_back(pos(s));
    sink.add_xor(lits, false);
}

namespace {

struct LinearForm {
    std::vector<Lit> lits;
    bool constant = false;
};

// Builds the gate list on `in` and returns each output bit (LSB first) as a
// linear form. Output gates nobody else reads are left as forms so the
// caller can merge them into its own parity constraint.
std::array<LinearForm, 8> sbox_forms(const ByteLits& in, CnfProblem& sink)
{
    const auto gates = sbox_gates();
    const int n_wires = 8 + static_cast<int>(gates.size());
    std::vector<int> readers(n_wires, 0);
    for (const SboxGate& g : gates) {
        ++readers[g.a];
        ++readers[g.b];
    }
    std::vector<bool> is_output(n_wires, false);
    for (int b = 0; b < 8; ++b)
        is_output[sbox_output_wire(b)] = true;

    std::vector<Lit> wire(n_wires, 0);
    for (int w = 0; w < 8; ++w)
        wire[w] = in[7 - w];
    for (std::size_t k = 0; k < gates.size(); ++k) {
        const int w = 8 + static_cast<int>(k);
        const SboxGate& g = gates[k];
        if (is_output[w] && readers[w] == 0 && g.op != GateOp::And)
            continue;
        switch (g.op) {
        case GateOp::Xor: wire[w] = pos(sink.define_xor({wire[g.a], wire[g.b]})); break;
        case GateOp::Xnor: wire[w] = pos(sink.define_xor({wire[g.a], wire[g.b]}, true)); break;
        case GateOp::And: wire[w] = pos(sink.define_and({wire[g.a], wire[g.b]})); break;
        }
    }
    std::array<LinearForm, 8> out;
    for (int bm = 0; bm < 8; ++bm) {
        const int w = sbox_output_wire(bm);
        LinearForm& f = out[7 - bm];
        if (wire[w] != 0) {
            f.lits = {wire[w]};
        } else {
            const SboxGate& g = gates[w - 8];
            f.lits = {wire[g.a], wire[g.b]};
            f.constant = g.op == GateOp::Xnor;
        }
    }
    return out;
}

// XOR(form) ^ XOR(extra) = rhs
void add_form_xor(CnfProblem& sink, const LinearForm& f, std::initializer_list<Lit> extra, bool rhs)
{
    std::vector<Lit> lits = f.lits;
    lits.insert(lits.end(), extra.begin(), extra.end());
    sink.add_xor(lits, rhs ^ f.constant);
}

const ByteVars& lookup(const SymbolVars& vars, CellSymbol s)
{
    const auto it = vars.find(s);
    if (it == vars.end())
        throw std::invalid_argument("function link: symbol " + s.to_string() + " has no variables");
    return it->second;
}

ByteLits as_lits(const ByteVars& v)
{
    ByteLits l;
    for (int b = 0; b < 8; ++b)
        l[b] = pos(v[b]);
    return l;
}

// Bit b of MixColumns row `row` as a set of (input row, input bit) pairs.
std::vector<std::pair<int, int>> mixcol_terms(int row, int b)
{
    std::vector<std::pair<int, int>> terms;
    for (int r = 0; r < 4; ++r)
        for (int bi = 0; bi < 8; ++bi) {
            aes::Column col{};
            col[r] = static_cast<std::uint8_t>(1u << bi);
            if ((aes::mix_column(col)[row] >> b) & 1)
                terms.emplace_back(r, bi);
        }
    return terms;
}

} // namespace

void encode_sbox(const ByteLits& in, const ByteLits& out, CnfProblem& sink)
{
    const auto forms = sbox_forms(in, sink);
    for (int b = 0; b < 8; ++b)
        add_form_xor(sink, forms[b], {out[b]}, false);
}

void encode_function_links(std::span<const LinkRelation> relations, const SymbolVars& vars,
                           const PlaintextTerm& plaintext, CnfProblem& sink)
{
    for (const LinkRelation& rel : relations) {
        const ByteVars& out = lookup(vars, rel.output);
        switch (rel.kind) {
        case RelationKind::SboxAdd: {
            const ByteVars& k = lookup(vars, rel.inputs.at(0));
            const int pj = rel.plaintext_index;
            ByteLits in;
            for (int b = 0; b < 8; ++b) {
                if (plaintext.known)
                    in[b] = ((plaintext.value[pj] >> b) & 1) ? neg(k[b]) : pos(k[b]);
                else
                    in[b] = pos(sink.define_xor({pos(k[b]), pos(plaintext.vars[pj][b])}));
            }
            encode_sbox(in, as_lits(out), sink);
            break;
        }
        case RelationKind::MixCol: {
            std::array<const ByteVars*, 4> ins;
            for (int r = 0; r < 4; ++r)
                ins[r] = &lookup(vars, rel.inputs.at(r));
            const int row = rel.output.index % 4;
            for (int b = 0; b < 8; ++b) {
                std::vector<Lit> lits{pos(out[b])};
                for (auto [r, bi] : mixcol_terms(row, b))
                    lits.push_back(pos((*ins[r])[bi]));
                sink.add_xor(lits, false);
            }
            break;
        }
        case RelationKind::KeySched: {
            const ByteVars& ki = lookup(vars, rel.inputs.at(0));
            const ByteVars& other = lookup(vars, rel.inputs.at(1));
            if (rel.output.index >= 4) {
                for (int b = 0; b < 8; ++b)
                    sink.add_xor({pos(out[b]), pos(ki[b]), pos(other[b])}, false);
            } else {
                const auto forms = sbox_forms(as_lits(other), sink);
                for (int b = 0; b < 8; ++b)
                    add_form_xor(sink, forms[b], {pos(out[b]), pos(ki[b])}, (rel.rcon >> b) & 1);
            }
            break;
        }
        case RelationKind::SboxRound2: {
            const ByteVars& mj = lookup(vars, rel.inputs.at(0));
            const ByteVars& kj = lookup(vars, rel.inputs.at(1));
            ByteLits u;
            for (int b = 0; b < 8; ++b)
                u[b] = pos(sink.define_xor({pos(mj[b]), pos(kj[b])}));
            encode_sbox(u, as_lits(out), sink);
            break;
        }
        }
    }
}

EncodedInstance encode_instance(const AttackInstance& inst, const ScheduleTable& table)
{
    const int len = inst.window_length();
    if (len == 0)
        throw std::invalid_argument("encode: no covered cycles");
    const int start = inst.window_start;
    if (start < 16 || start + len - 1 > ScheduleTable::kCycles)
        throw std::invalid_argument("encode: window must lie within cycles [16, 36]");
    const int n = inst.observations.front().size();
    for (int k = 0; k < len; ++k) {
        if (inst.observations[k].cycle != start + k)
            throw std::invalid_argument("encode: observations must cover consecutive cycles from the window start");
        if (inst.observations[k].size() != n)
            throw std::invalid_argument("encode: observations differ in length");
    }
    if (inst.d < 0)
        throw std::invalid_argument("encode: negative masking order");
    const int shares = inst.d + 1;
    const int m = table.rows() * 8 * shares;
    if (m > n)
        throw std::invalid_argument("encode: " + std::to_string(m) + " targeted bits exceed " + std::to_string(n) +
                                    " observed bits");

    EncodedInstance enc;
    CnfProblem& p = enc.problem;
    DecodeMap& dm = enc.map;
    dm.d = inst.d;
    dm.m = m;
    dm.n = n;
    dm.window_start = start;

    // Coefficients are shared by every cycle.
    dm.coeff_base = p.new_vars(static_cast<std::uint32_t>(m) * n);
    std::vector<Var> row_coeffs(n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j)
            row_coeffs[j] = dm.coeff(i, j);
        encode_onehot(row_coeffs, p, inst.onehot);
    }

    // Symbols: everything in the window, the relation operands, all key bytes.
    const int last = start + len - 1;
    WindowRelations wr = relations_for_window(table, start, len);
    std::set<CellSymbol> needed;
    for (int r = 0; r < table.rows(); ++r)
        for (int c = start; c <= last; ++c)
            if (!table.at(r, c).is_empty())
                needed.insert(table.at(r, c));
    for (const auto& rel : wr.relations)
        for (CellSymbol s : rel.operands())
            needed.insert(s);
    for (int j = 0; j < 16; ++j) {
        const CellSymbol kj = CellSymbol::make(SymbolKind::K, j);
        const CellSymbol sj = CellSymbol::make(SymbolKind::S, j);
        KeyByteSource& src = dm.key_source[j];
        for (int c = start; c <= last && src.kind == KeyByteSource::Kind::Free; ++c)
            for (int r = 0; r < table.rows(); ++r)
                if (table.at(r, c) == kj) {
                    src = {KeyByteSource::Kind::Direct, r, c};
                    break;
                }
        if (src.kind == KeyByteSource::Kind::Free && needed.count(sj)) {
            // Round-1 Sbox output in view: the key byte follows from it.
            src.kind = KeyByteSource::Kind::ViaSbox;
            wr.relations.push_back({RelationKind::SboxAdd, sj, {kj}, false, 0, j});
        }
        needed.insert(kj);
    }
    for (CellSymbol s : needed) {
        const Var first = p.new_vars(8);
        ByteVars v;
        for (int b = 0; b < 8; ++b)
            v[b] = first + b;
        dm.symbols.emplace(s, v);
    }

    dm.plaintext.known = inst.known_plaintext;
    dm.plaintext.value = inst.plaintext;
    if (!inst.known_plaintext)
        for (int j = 0; j < 16; ++j) {
            const Var first = p.new_vars(8);
            for (int b = 0; b < 8; ++b)
                dm.plaintext.vars[j][b] = first + b;
        }

    std::vector<Var> share_vars(shares);
    for (int k = 0; k < len; ++k) {
        const ObservationVector& obs = inst.observations[k];
        const Var base = p.new_vars(static_cast<std::uint32_t>(m));
        dm.share_base.push_back(base);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j)
                row_coeffs[j] = dm.coeff(i, j);
            encode_observation_link(base + i, row_coeffs, obs, p);
        }
        const int cycle = start + k;
        for (int r = 0; r < table.rows(); ++r) {
            const CellSymbol sym = table.at(r, cycle);
            const int from = inst.carried_shares && k > 0 ? carried_from(table, r, cycle) : -1;
            if (from >= 0)
                for (int s = 0; s < shares; ++s)
                    for (int b = 0; b < 8; ++b)
                        p.add_xor({pos(base + logical_index(r, s, b, inst.d)),
                                   pos(dm.share_var(k - 1, logical_index(from, s, b, inst.d)))},
                                  false);
            for (int b = 0; b < 8; ++b) {
                for (int s = 0; s < shares; ++s)
                    share_vars[s] = base + logical_index(r, s, b, inst.d);
                std::vector<Lit> lits;
                for (Var v : share_vars)
                    lits.push_back(pos(v));
                const Var nu = p.define_xor(lits);
                if (sym.is_empty())
                    p.add_clause({neg(nu)});
                else
                    p.add_xor({pos(nu), pos(dm.symbols.at(sym)[b])}, false);
            }
        }
    }

    encode_function_links(wr.relations, dm.symbols, dm.plaintext, p);
    return enc;
}

namespace {

std::uint8_t read_byte(const Assignment& a, const ByteVars& v)
{
    std::uint8_t x = 0;
    for (int b = 0; b < 8; ++b)
        if (a[v[b]])
            x |= static_cast<std::uint8_t>(1u << b);
    return x;
}

} // namespace

aes::Block decode_key(const Assignment& a, const DecodeMap& dm)
{
    aes::Block key{};
    for (int j = 0; j < 16; ++j) {
        const KeyByteSource& src = dm.key_source[j];
        if (src.kind != KeyByteSource::Kind::Direct) {
            key[j] = read_byte(a, dm.key_vars(j));
            continue;
        }
        const int k = src.cycle - dm.window_start;
        std::uint8_t x = 0;
        for (int b = 0; b < 8; ++b) {
            int bit = 0;
            for (int s = 0; s <= dm.d; ++s)
                bit ^= a[dm.share_var(k, logical_index(src.row, s, b, dm.d))];
            x |= static_cast<std::uint8_t>(bit << b);
        }
        key[j] = x;
    }
    return key;
}

Assignment ground_truth_assignment(const EncodedInstance& enc, const std::vector<RegisterFile>& trace,
                                   const PlacementMap& placement,
                                   const aes::Block& key, const aes::Block& plaintext)
{
    const DecodeMap& dm = enc.map;
    if (placement.size() != dm.n)
        throw std::invalid_argument("ground truth: placement size differs from observation size");
    Assignment a(static_cast<std::size_t>(enc.problem.var_count()) + 1, 0);
    for (int i = 0; i < dm.m; ++i)
        a[dm.coeff(i, placement(i))] = 1;
    for (std::size_t k = 0; k < dm.share_base.size(); ++k) {
        const int cycle = dm.window_start + static_cast<int>(k);
        const RegisterFile* rf = nullptr;
        for (const RegisterFile& f : trace)
            if (f.cycle == cycle)
                rf = &f;
        if (!rf)
            throw std::invalid_argument("ground truth: trace lacks cycle " + std::to_string(cycle));
        const auto bits = logical_bits(*rf);
        for (int i = 0; i < dm.m; ++i)
            a[dm.share_var(static_cast<int>(k), i)] = bits[i];
    }
    for (const auto& [sym, vars] : dm.symbols) {
        const std::uint8_t x = ground_truth_value(sym, key, plaintext);
        for (int b = 0; b < 8; ++b)
            a[vars[b]] = (x >> b) & 1;
    }
    if (!dm.plaintext.known)
        for (int j = 0; j < 16; ++j)
            for (int b = 0; b < 8; ++b)
                a[dm.plaintext.vars[j][b]] = (plaintext[j] >> b) & 1;
    enc.problem.complete(a);
    return a;
}

void block_key(CnfProblem& p, const DecodeMap& dm, const aes::Block& key)
{
    std::vector<Lit> clause;
    for (int j = 0; j < 16; ++j) {
        const ByteVars& v = dm.key_vars(j);
        for (int b = 0; b < 8; ++b)
            clause.push_back((key[j] >> b) & 1 ? neg(v[b]) : pos(v[b]));
    }
    p.add_clause(clause);
}

void block_shares(CnfProblem& p, const DecodeMap& dm, const Assignment& a)
{
    std::vector<Lit> clause;
    for (std::size_t k = 0; k < dm.share_base.size(); ++k)
        for (int i = 0; i < dm.m; ++i) {
            const Var v = dm.share_var(static_cast<int>(k), i);
            clause.push_back(a[v] ? neg(v) : pos(v));
        }
    p.add_clause(clause);
}

UniquenessResult check_key_unique(const CnfProblem& p, const DecodeMap& dm, const aes::Block& first_key,
                                  SolverBackend& solver, std::chrono::milliseconds budget)
{
    CnfProblem blocked = p;
    block_key(blocked, dm, first_key);
    const SolveResult r = solver.solve(blocked, budget);
    UniquenessResult out;
    out.solve_ms = r.solve_ms;
    switch (r.status) {
    case SolveStatus::Unsat:
        out.outcome = UniquenessResult::Outcome::Unique;
        break;
    case SolveStatus::Sat:
        out.outcome = UniquenessResult::Outcome::Alternate;
        out.alternate = decode_key(r.assignment, dm);
        break;
    case SolveStatus::Timeout:
        out.outcome = UniquenessResult::Outcome::Timeout;
        break;
    }
    return out;
}

} // namespace snapattack::sat
