#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace snapattack::sat {

using Var = std::uint32_t; // 1-based, dense
using Lit = std::int32_t;  // DIMACS convention: -v is the negation of v

constexpr Var var_of(Lit l) { return static_cast<Var>(l < 0 ? -l : l); }
constexpr Lit pos(Var v) { return static_cast<Lit>(v); }
constexpr Lit neg(Var v) { return -static_cast<Lit>(v); }

// Indexed by variable; entry 0 unused. Values are 0/1.
using Assignment = std::vector<std::uint8_t>;

inline bool lit_value(const Assignment& a, Lit l) { return (a[var_of(l)] != 0) != (l < 0); }

struct CnfStats {
    std::uint64_t n_vars = 0;
    std::uint64_t n_or = 0;
    std::uint64_t n_xor = 0;
    std::uint64_t n_clauses() const { return n_or + n_xor; }
};

// Functional definition of an auxiliary variable, recorded alongside the
// clauses that enforce it so a full assignment can be derived from the
// primary variables without a solver.
struct Definition {
    enum class Op : std::uint8_t { Xor, And };
    Op op;
    Var out;
    std::uint32_t first; // index into the definition input pool
    std::uint32_t count;
    bool constant = false; // Xor only: out = XOR(inputs) ^ constant
};

// OR clauses plus XOR (parity) clauses over a dense variable range.
class CnfProblem {
public:
    Var new_var();
    Var new_vars(std::uint32_t count); // returns the first of `count` vars
    Var var_count() const { return var_count_; }

    // Throws std::invalid_argument on an empty clause or an unknown variable.
    void add_clause(std::span<const Lit> lits);
    void add_clause(std::initializer_list<Lit> lits) { add_clause(std::span<const Lit>(lits.begin(), lits.size())); }

    // XOR of the literal values equals rhs. Negated literals flip the
    // parity, repeated variables cancel. A constraint that reduces to 0 = 1
    // throws; one that reduces to 0 = 0 is dropped.
    void add_xor(std::span<const Lit> lits, bool rhs);
    void add_xor(std::initializer_list<Lit> lits, bool rhs)
    {
        add_xor(std::span<const Lit>(lits.begin(), lits.size()), rhs);
    }

    // New variable equal to the XOR / AND of the inputs, with its clauses.
    Var define_xor(std::span<const Lit> inputs, bool constant = false);
    Var define_and(std::span<const Lit> inputs);
    Var define_xor(std::initializer_list<Lit> inputs, bool constant = false)
    {
        return define_xor(std::span<const Lit>(inputs.begin(), inputs.size()), constant);
    }
    Var define_and(std::initializer_list<Lit> inputs)
    {
        return define_and(std::span<const Lit>(inputs.begin(), inputs.size()));
    }

    std::size_t or_count() const { return or_offsets_.size() - 1; }
    std::size_t xor_count() const { return xor_offsets_.size() - 1; }
    std::span<const Lit> or_clause(std::size_t i) const
    {
        return {or_lits_.data() + or_offsets_[i], or_offsets_[i + 1] - or_offsets_[i]};
    }
    std::span<const Var> xor_vars(std::size_t i) const
    {
        return {xor_vars_.data() + xor_offsets_[i], xor_offsets_[i + 1] - xor_offsets_[i]};
    }
    bool xor_rhs(std::size_t i) const { return xor_rhs_[i] != 0; }

    const std::vector<Definition>& definitions() const { return definitions_; }
    std::span<const Lit> definition_inputs(const Definition& d) const
    {
        return {def_inputs_.data() + d.first, d.count};
    }

    CnfStats stats() const { return {var_count_, or_count(), xor_count()}; }

    // Fills every defined variable of `a` from its inputs, in definition order.
    void complete(Assignment& a) const;

    // Every XOR clause rewritten as OR clauses; XORs wider than three
    // variables are first cut into width-3 links with fresh variables.
    CnfProblem to_pure_cnf() const;

    bool operator==(const CnfProblem&) const = default;

private:
    void check_lit(Lit l) const;

    Var var_count_ = 0;
    std::vector<Lit> or_lits_;
    std::vector<std::size_t> or_offsets_{0};
    std::vector<Var> xor_vars_;
    std::vector<std::size_t> xor_offsets_{0};
    std::vector<std::uint8_t> xor_rhs_;
    std::vector<Definition> definitions_;
    std::vector<Lit> def_inputs_;
};

// Number of violated clauses (OR and XOR). The default version is
// OpenMP-parallel over clauses; the serial one is kept as its reference.
std::size_t count_violations(const CnfProblem& p, const Assignment& a);
std::size_t count_violations_serial(const CnfProblem& p, const Assignment& a);
bool satisfies(const CnfProblem& p, const Assignment& a);

// Extended DIMACS: "p cnf <vars> <clauses>", OR clauses as literal lines,
// XOR clauses as "x" lines whose first literal is negated when the parity
// is even.
void write_dimacs(const CnfProblem& p, std::ostream& out);
void write_dimacs(const CnfProblem& p, const std::string& path);

} // namespace snapattack::sat
