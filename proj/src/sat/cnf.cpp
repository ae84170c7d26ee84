#include "snapattack/sat/cnf.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace snapattack::sat {

Var CnfProblem::new_var() { return ++var_count_; }

Var CnfProblem::new_vars(std::uint32_t count)
{
    const Var first = var_count_ + 1;
    var_count_ += count;
    return first;
}

void CnfProblem::check_lit(Lit l) const
{
    if (l == 0 || var_of(l) > var_count_)
        throw std::invalid_argument("literal " + std::to_string(l) + " refers to an unallocated variable");
}

void CnfProblem::add_clause(std::span<const Lit> lits)
{
    if (lits.empty())
        throw std::invalid_argument("empty clause");
    for (Lit l : lits)
        check_lit(l);
    or_lits_.insert(or_lits_.end(), lits.begin(), lits.end());
    or_offsets_.push_back(or_lits_.size());
}

void CnfProblem::add_xor(std::span<const Lit> lits, bool rhs)
{
    std::vector<Var> vars;
    vars.reserve(lits.size());
    for (Lit l : lits) {
        check_lit(l);
        if (l < 0)
            rhs = !rhs;
        vars.push_back(var_of(l));
    }
    std::sort(vars.begin(), vars.end());
    std::vector<Var> kept;
    for (std::size_t i = 0; i < vars.size();) {
        if (i + 1 < vars.size() && vars[i] == vars[i + 1]) {
            i += 2;
            continue;
        }
        kept.push_back(vars[i]);
        ++i;
    }
    if (kept.empty()) {
        if (rhs)
            throw std::invalid_argument("XOR constraint reduces to 0 = 1");
        return;
    }
    // Keep the caller's variable order for readability of DIMACS output.
    std::vector<Var> ordered;
    ordered.reserve(kept.size());
    for (Lit l : lits) {
        const Var v = var_of(l);
        if (std::binary_search(kept.begin(), kept.end(), v) &&
            std::find(ordered.begin(), ordered.end(), v) == ordered.end())
            ordered.push_back(v);
    }
    xor_vars_.insert(xor_vars_.end(), ordered.begin(), ordered.end());
    xor_offsets_.push_back(xor_vars_.size());
    xor_rhs_.push_back(rhs ? 1 : 0);
}

Var CnfProblem::define_xor(std::span<const Lit> inputs, bool constant)
{
    const Var out = new_var();
    std::vector<Lit> lits{pos(out)};
    lits.insert(lits.end(), inputs.begin(), inputs.end());
    add_xor(lits, constant);
    definitions_.push_back({Definition::Op::Xor, out, static_cast<std::uint32_t>(def_inputs_.size()),
                            static_cast<std::uint32_t>(inputs.size()), constant});
    def_inputs_.insert(def_inputs_.end(), inputs.begin(), inputs.end());
    return out;
}

Var CnfProblem::define_and(std::span<const Lit> inputs)
{
    if (inputs.empty())
        throw std::invalid_argument("AND gate without inputs");
    const Var out = new_var();
    std::vector<Lit> big{pos(out)};
    for (Lit in : inputs) {
        add_clause({neg(out), in});
        big.push_back(-in);
    }
    add_clause(big);
    definitions_.push_back({Definition::Op::And, out, static_cast<std::uint32_t>(def_inputs_.size()),
                            static_cast<std::uint32_t>(inputs.size())});
    def_inputs_.insert(def_inputs_.end(), inputs.begin(), inputs.end());
    return out;
}

void CnfProblem::complete(Assignment& a) const
{
    a.resize(static_cast<std::size_t>(var_count_) + 1, 0);
    for (const Definition& d : definitions_) {
        const auto ins = definition_inputs(d);
        bool v;
        if (d.op == Definition::Op::Xor) {
            v = d.constant;
            for (Lit l : ins)
                v ^= lit_value(a, l);
        } else {
            v = std::all_of(ins.begin(), ins.end(), [&](Lit l) { return lit_value(a, l); });
        }
        a[d.out] = v ? 1 : 0;
    }
}

namespace {

// Clauses forbidding every assignment of `vars` with the wrong parity.
void xor_as_clauses(CnfProblem& out, std::span<const Var> vars, bool rhs)
{
    const std::size_t k = vars.size();
    std::vector<Lit> clause(k);
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        // mask bit i set: var i assigned true in the forbidden assignment
        if ((__builtin_popcount(mask) & 1) == (rhs ? 1 : 0))
            continue;
        for (std::size_t i = 0; i < k; ++i)
            clause[i] = (mask >> i) & 1 ? neg(vars[i]) : pos(vars[i]);
        out.add_clause(clause);
    }
}

} // namespace

CnfProblem CnfProblem::to_pure_cnf() const
{
    CnfProblem out;
    out.new_vars(var_count_);
    for (std::size_t i = 0; i < or_count(); ++i)
        out.add_clause(or_clause(i));
    for (std::size_t i = 0; i < xor_count(); ++i) {
        const auto vars = xor_vars(i);
        const bool rhs = xor_rhs(i);
        if (vars.size() <= 3) {
            xor_as_clauses(out, vars, rhs);
            continue;
        }
        Var carry = out.new_var();
        const Var head[3] = {vars[0], vars[1], carry};
        xor_as_clauses(out, head, false);
        for (std::size_t j = 2; j + 2 < vars.size(); ++j) {
            const Var next = out.new_var();
            const Var link[3] = {carry, vars[j], next};
            xor_as_clauses(out, link, false);
            carry = next;
        }
        const Var tail[3] = {carry, vars[vars.size() - 2], vars[vars.size() - 1]};
        xor_as_clauses(out, tail, rhs);
    }
    out.definitions_ = definitions_;
    out.def_inputs_ = def_inputs_;
    return out;
}

namespace {

bool or_satisfied(const CnfProblem& p, const Assignment& a, std::size_t i)
{
    for (Lit l : p.or_clause(i))
        if (lit_value(a, l))
            return true;
    return false;
}

bool xor_satisfied(const CnfProblem& p, const Assignment& a, std::size_t i)
{
    bool parity = false;
    for (Var v : p.xor_vars(i))
        parity ^= a[v] != 0;
    return parity == p.xor_rhs(i);
}

void check_assignment_size(const CnfProblem& p, const Assignment& a)
{
    if (a.size() < static_cast<std::size_t>(p.var_count()) + 1)
        throw std::invalid_argument("assignment does not cover every variable");
}

} // namespace

std::size_t count_violations_serial(const CnfProblem& p, const Assignment& a)
{
    check_assignment_size(p, a);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < p.or_count(); ++i)
        bad += or_satisfied(p, a, i) ? 0 : 1;
    for (std::size_t i = 0; i < p.xor_count(); ++i)
        bad += xor_satisfied(p, a, i) ? 0 : 1;
    return bad;
}

std::size_t count_violations(const CnfProblem& p, const Assignment& a)
{
    check_assignment_size(p, a);
    const long n_or = static_cast<long>(p.or_count());
    const long n_xor = static_cast<long>(p.xor_count());
    std::size_t bad = 0;
#pragma omp parallel for reduction(+ : bad) schedule(static)
    for (long i = 0; i < n_or; ++i)
        bad += or_satisfied(p, a, static_cast<std::size_t>(i)) ? 0 : 1;
#pragma omp parallel for reduction(+ : bad) schedule(static)
    for (long i = 0; i < n_xor; ++i)
        bad += xor_satisfied(p, a, static_cast<std::size_t>(i)) ? 0 : 1;
    return bad;
}

bool satisfies(const CnfProblem& p, const Assignment& a) { return count_violations(p, a) == 0; }

void write_dimacs(const CnfProblem& p, std::ostream& out)
{
    const CnfStats st = p.stats();
    out << "p cnf " << st.n_vars << ' ' << st.n_clauses() << '\n';
    for (std::size_t i = 0; i < p.or_count(); ++i) {
        for (Lit l : p.or_clause(i))
            out << l << ' ';
        out << "0\n";
    }
    for (std::size_t i = 0; i < p.xor_count(); ++i) {
        const auto vars = p.xor_vars(i);
        out << "x ";
        for (std::size_t k = 0; k < vars.size(); ++k) {
            const bool flip = k == 0 && !p.xor_rhs(i);
            out << (flip ? -static_cast<Lit>(vars[k]) : static_cast<Lit>(vars[k])) << ' ';
        }
        out << "0\n";
    }
}

void write_dimacs(const CnfProblem& p, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    write_dimacs(p, f);
    if (!f)
        throw std::runtime_error("write to " + path + " failed");
}

} // namespace snapattack::sat
