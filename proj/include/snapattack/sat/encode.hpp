#pragma once

#include <array>
#include <chrono>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "snapattack/aes.hpp"
#include "snapattack/dom_sim.hpp"
#include "snapattack/sat/cnf.hpp"
#include "snapattack/sat/solver.hpp"
#include "snapattack/schedule.hpp"
#include "snapattack/snapshot.hpp"

namespace snapattack::sat {

enum class OneHotEncoding { Sequential, SequentialImplied, Pairwise };

// Exactly one of `coeffs` is true. Sequential is the running-sum scheme with
// carry clauses. SequentialImplied adds the binary clauses sum -> next and
// c_j -> next, which the parity form only yields once both inputs are set.
// Pairwise is the quadratic textbook form, kept for cross-checking.
void encode_onehot(std::span<const Var> coeffs, CnfProblem& sink,
                   OneHotEncoding enc = OneHotEncoding::Sequential);

// v is true iff the observation selected by the one-hot coefficients is 1.
// Throws std::invalid_argument if |coeffs| differs from the observation size.
void encode_observation_link(Var v, std::span<const Var> coeffs, const ObservationVector& obs,
                             CnfProblem& sink);

// nu = XOR(shares).
void encode_share_combine(Var nu, std::span<const Var> shares, CnfProblem& sink);

// Bits are indexed LSB first: vars[b] holds bit b of the byte.
using ByteVars = std::array<Var, 8>;
using ByteLits = std::array<Lit, 8>;
using SymbolVars = std::map<CellSymbol, ByteVars>;

// out = Sbox(in), Tseitin encoding of the compiled-in gate list.
void encode_sbox(const ByteLits& in, const ByteLits& out, CnfProblem& sink);

struct PlaintextTerm {
    bool known = true;
    aes::Block value{};                  // used when known
    std::array<ByteVars, 16> vars{};     // free variables otherwise
};

// Throws std::invalid_argument if an operand has no variables in `vars`.
void encode_function_links(std::span<const LinkRelation> relations, const SymbolVars& vars,
                           const PlaintextTerm& plaintext, CnfProblem& sink);

struct AttackInstance {
    std::vector<ObservationVector> observations; // consecutive cycles
    int window_start = 16;
    int d = 1;
    aes::Block plaintext{};
    bool known_plaintext = true;
    OneHotEncoding onehot = OneHotEncoding::Sequential;
    // Assume shares ride along with their symbol (StableOnShift hardware):
    // a carried cell reuses its predecessor's share values.
    bool carried_shares = false;

    int window_length() const { return static_cast<int>(observations.size()); }
};

// Where the decoder reads key byte j from.
struct KeyByteSource {
    enum class Kind { Direct, ViaSbox, Free };
    Kind kind = Kind::Free;
    int row = -1;   // Direct: a cell holding K_j in the window
    int cycle = -1;
};

struct DecodeMap {
    int d = 0;
    int m = 0; // targeted bits
    int n = 0; // observation length
    int window_start = 16;
    Var coeff_base = 0;
    std::vector<Var> share_base; // per covered cycle; share var of logical bit i is share_base[k] + i
    SymbolVars symbols;
    std::array<KeyByteSource, 16> key_source{};
    PlaintextTerm plaintext;

    Var coeff(int i, int j) const { return coeff_base + static_cast<Var>(i) * n + j; }
    Var share_var(int k, int i) const { return share_base[k] + i; }
    const ByteVars& key_vars(int j) const { return symbols.at(CellSymbol::make(SymbolKind::K, j)); }
};

struct EncodedInstance {
    CnfProblem problem;
    DecodeMap map;
};

// Throws std::invalid_argument on an empty window, observations of unequal
// length or non-consecutive cycles, m > n, or a window outside [16, 36].
EncodedInstance encode_instance(const AttackInstance& inst, const ScheduleTable& table);

// Reads the key off an assignment: XOR of the share variables of a K_j cell,
// or the key-byte variables when K_j is not in the window.
aes::Block decode_key(const Assignment& a, const DecodeMap& dm);

// Assignment built from the true placement, shares and symbol values, with
// every auxiliary variable completed from its definition.
Assignment ground_truth_assignment(const EncodedInstance& enc, const std::vector<RegisterFile>& trace,
                                   const PlacementMap& placement,
                                   const aes::Block& key, const aes::Block& plaintext);

// Forbids key-byte variables from taking the bytes of `key`.
void block_key(CnfProblem& p, const DecodeMap& dm, const aes::Block& key);
// Forbids the exact share-variable assignment of `a` (all covered cycles).
void block_shares(CnfProblem& p, const DecodeMap& dm, const Assignment& a);

struct UniquenessResult {
    enum class Outcome { Unique, Alternate, Timeout };
    Outcome outcome = Outcome::Timeout;
    aes::Block alternate{};
    double solve_ms = 0.0;
};

UniquenessResult check_key_unique(const CnfProblem& p, const DecodeMap& dm, const aes::Block& first_key,
                                  SolverBackend& solver, std::chrono::milliseconds budget);

} // namespace snapattack::sat
