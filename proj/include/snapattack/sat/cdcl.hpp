#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "snapattack/rng.hpp"
#include "snapattack/sat/cnf.hpp"

namespace snapattack::sat {

enum class CdclStatus { Sat, Unsat, Timeout };

// Plain-CNF CDCL engine used by BuiltinSolver.
class Cdcl {
public:
    Cdcl(std::uint32_t n_vars, std::uint64_t seed = 0);

    // Returns false once the clause set is known to be unsatisfiable.
    bool add_clause(std::span<const Lit> clause);
    CdclStatus solve(std::chrono::steady_clock::time_point deadline);

    // Valid after Sat; indexed by DIMACS variable.
    const Assignment& model() const { return model_; }

    std::uint64_t conflicts() const { return conflicts_; }
    std::uint64_t decisions() const { return decisions_; }
    std::uint64_t propagations() const { return propagations_; }

private:
    struct Watch {
        std::uint32_t cref;
        std::uint32_t blocker;
    };

    int decision_level() const { return static_cast<int>(trail_lim_.size()); }
    std::uint8_t value(std::uint32_t x) const;
    std::uint32_t* lits_of(std::uint32_t cref) { return arena_.data() + cref + 3; }
    const std::uint32_t* lits_of(std::uint32_t cref) const { return arena_.data() + cref + 3; }

    std::uint32_t alloc(const std::vector<std::uint32_t>& lits, bool learnt);
    void attach(std::uint32_t cref);
    void enqueue(std::uint32_t x, std::uint32_t from);
    std::uint32_t propagate();
    void analyze(std::uint32_t confl, std::vector<std::uint32_t>& out, int& bt_level, std::uint32_t& lbd);
    bool redundant(std::uint32_t x, std::uint32_t levels);
    std::uint32_t abstract_level(std::uint32_t v) const;
    void cancel_until(int level);
    void bump_var(std::uint32_t v);
    void bump_clause(std::uint32_t cref);
    float clause_activity(std::uint32_t cref) const;
    bool locked(std::uint32_t cref) const;
    void reduce_db();
    void collect_garbage();
    std::uint32_t pick_branch();

    void heap_insert(std::uint32_t v);
    void heap_up(int i);
    void heap_down(int i);
    std::uint32_t heap_pop();

    Rng rng_;
    std::uint32_t nv_ = 0;
    bool ok_ = true;

    // clause arena: [size][flags|lbd<<2][activity][lits...]
    std::vector<std::uint32_t> arena_;
    std::vector<std::uint32_t> learnts_;
    std::size_t n_original_ = 0;
    std::size_t wasted_ = 0;
    std::vector<std::vector<Watch>> watches_;

    std::vector<std::uint8_t> assigns_;
    std::vector<int> level_;
    std::vector<std::uint32_t> reason_;
    std::vector<std::uint8_t> polarity_;
    std::vector<double> activity_;
    std::vector<std::uint8_t> seen_;
    std::vector<std::uint32_t> trail_;
    std::vector<std::size_t> trail_lim_;
    std::size_t qhead_ = 0;

    std::vector<std::uint32_t> heap_;
    std::vector<int> heap_index_;

    std::vector<std::uint32_t> stack_, to_clear_;
    std::vector<std::uint64_t> lbd_marks_;
    std::uint64_t lbd_stamp_ = 0;

    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    std::uint64_t conflicts_ = 0, decisions_ = 0, propagations_ = 0;
    Assignment model_;
};

} // namespace snapattack::sat
