#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "snapattack/aes.hpp"
#include "snapattack/dom_sim.hpp"
#include "snapattack/sat/encode.hpp"
#include "snapattack/sat/solver.hpp"
#include "snapattack/schedule.hpp"
#include "snapattack/snapshot.hpp"

namespace snapattack::attack {

bool verify_key(const aes::Block& key, const aes::Block& plaintext, const aes::Block& ciphertext);

// key_j = inv_sbox(s_j) ^ plaintext_j
aes::Block recover_key_from_round1_state(const aes::Block& s, const aes::Block& plaintext);

struct KnownPair {
    aes::Block plaintext;
    aes::Block ciphertext;
};

struct Scenario1Result {
    std::vector<aes::Block> candidates;
    std::vector<bool> verified; // parallel to candidates; empty without a known pair
    std::size_t bits_read = 0;
};

// Reads the key shares at cycle 16 from the observation at their known
// locations. With unlabeled templates every bit may be complemented, which
// adds the complement reading as a second candidate.
// Throws std::invalid_argument if the snapshot for cycle 16 is missing, a
// key byte has no register at cycle 16, or a location is out of range.
Scenario1Result scenario1_direct(const std::vector<ObservationVector>& snapshots, const PlacementMap& locations,
                                 const ScheduleTable& table, int d, bool unlabeled_templates = false,
                                 const std::optional<KnownPair>& pair = std::nullopt);

// XOR of the shares, exposed for the single-byte case.
std::uint8_t combine_shares(const std::vector<std::uint8_t>& shares);

enum class Outcome { Recovered, Ambiguous, Timeout, Unsat };

std::string_view to_string(Outcome o);

struct AttackStats {
    std::uint64_t n_vars = 0;
    std::uint64_t n_or = 0;
    std::uint64_t n_xor = 0;
    double encode_ms = 0.0;
    double solve_ms = 0.0;
};

struct Scenario2Result {
    Outcome outcome = Outcome::Timeout;
    aes::Block key{};
    std::optional<aes::Block> alternate;
    AttackStats stats;
};

struct Scenario2Options {
    bool known_plaintext = true;
    sat::OneHotEncoding onehot = sat::OneHotEncoding::SequentialImplied;
    bool carried_shares = false;
    std::chrono::milliseconds budget{std::chrono::minutes(5)};
};

// encode -> solve -> decode -> uniqueness check. The budget covers both solves.
Scenario2Result scenario2_sat(const std::vector<ObservationVector>& snapshots, int window_start, int window_length,
                              int d, const aes::Block& plaintext, const ScheduleTable& schedule,
                              sat::SolverBackend& solver, const Scenario2Options& opt = {});

struct ReducedScheduleSpec {
    std::vector<int> rows{0, 1, 2, 3, 16, 17, 18, 19};
    int fsm_bits = 52;

    ScheduleTable table() const;
};

struct BenchConfig {
    std::vector<int> d_values{0, 1, 2};
    std::vector<int> cycle_counts{9, 12, 15, 18, 21};
    int window_start = 16;
    int trials = 1;
    std::optional<ReducedScheduleSpec> reduced = ReducedScheduleSpec{};
    int full_fsm_bits = 208;
    std::chrono::milliseconds budget{std::chrono::minutes(2)};
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string solver = "builtin";
    ReshareMode reshare_mode = ReshareMode::FreshEveryCycle;
    sat::OneHotEncoding onehot = sat::OneHotEncoding::SequentialImplied;
    bool carried_shares = false;
};

struct BenchRow {
    int d = 0;
    int cycles = 0;
    int trial = 0;
    Outcome outcome = Outcome::Timeout;
    double encode_ms = 0.0;
    double solve_ms = 0.0;
    std::uint64_t n_vars = 0;
    std::uint64_t n_clauses = 0;
    bool verified = false; // recovered key re-encrypts the trial's plaintext
};

// One row per (d, cycles, trial), ordered by that triple. Each trial draws
// its own key, plaintext, masks and placement from (seed, d, cycles, trial).
std::vector<BenchRow> bench_table(const BenchConfig& cfg);

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out, bool with_timing = true);

struct BenchCell {
    int d;
    int cycles;
    int trials;
    int recovered;
    int ambiguous;
    int timeout;
    int unsat;
    double mean_encode_ms;
    double mean_solve_ms;
};

std::vector<BenchCell> summarize(const std::vector<BenchRow>& rows);

// Smallest cycle count at which every trial of `d` was recovered, if any.
std::optional<int> minimum_window(const std::vector<BenchCell>& cells, int d);

// Simulated single trial, shared by the bench and the CLI.
struct PlantedInstance {
    TraceConfig config;
    ScheduleTable table;
    PlacementMap placement;
    std::vector<RegisterFile> trace;
    std::vector<ObservationVector> snapshots;
    aes::Block ciphertext{};
};

PlantedInstance plant_instance(const ScheduleTable& table, int d, int fsm_bits, int first_cycle, int last_cycle,
                               std::uint64_t seed, ReshareMode mode = ReshareMode::FreshEveryCycle);

} // namespace snapattack::attack
