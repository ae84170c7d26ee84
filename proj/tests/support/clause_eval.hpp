#pragma once

// Direct clause evaluation, independent of the library's checker.

#include <cstddef>

#include "snapattack/sat/cnf.hpp"

namespace ref {

inline std::size_t violated(const snapattack::sat::CnfProblem& p, const snapattack::sat::Assignment& a)
{
    using namespace snapattack::sat;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < p.or_count(); ++i) {
        bool sat = false;
        for (Lit l : p.or_clause(i)) {
            const bool v = a.at(static_cast<std::size_t>(l < 0 ? -l : l)) != 0;
            sat |= (l > 0) == v;
        }
        bad += !sat;
    }
    for (std::size_t i = 0; i < p.xor_count(); ++i) {
        bool parity = false;
        for (Var v : p.xor_vars(i))
            parity ^= a.at(v) != 0;
        bad += parity != p.xor_rhs(i);
    }
    return bad;
}

} // namespace ref
