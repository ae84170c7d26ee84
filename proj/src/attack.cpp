#include "snapattack/attack.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

namespace snapattack::attack {

using Clock = std::chrono::steady_clock;

bool verify_key(const aes::Block& key, const aes::Block& plaintext, const aes::Block& ciphertext)
{
    return aes::encrypt(key, plaintext) == ciphertext;
}

aes::Block recover_key_from_round1_state(const aes::Block& s, const aes::Block& plaintext)
{
    aes::Block key;
    for (int j = 0; j < 16; ++j)
        key[j] = aes::inv_sbox(s[j]) ^ plaintext[j];
    return key;
}

std::uint8_t combine_shares(const std::vector<std::uint8_t>& shares)
{
    std::uint8_t x = 0;
    for (std::uint8_t s : shares)
        x ^= s;
    return x;
}

namespace {

// Row holding K_j at `cycle`, key register rows first.
int key_row(const ScheduleTable& table, int j, int cycle)
{
    const CellSymbol kj = CellSymbol::make(SymbolKind::K, j);
    int fallback = -1;
    for (int r = 0; r < table.rows(); ++r) {
        if (table.at(r, cycle) != kj)
            continue;
        if (table.source_row(r) >= 16)
            return r;
        if (fallback < 0)
            fallback = r;
    }
    return fallback;
}

} // namespace

Scenario1Result scenario1_direct(const std::vector<ObservationVector>& snapshots, const PlacementMap& locations,
                                 const ScheduleTable& table, int d, bool unlabeled_templates,
                                 const std::optional<KnownPair>& pair)
{
    constexpr int kCycle = 16;
    const ObservationVector* obs = nullptr;
    for (const auto& o : snapshots)
        if (o.cycle == kCycle)
            obs = &o;
    if (!obs)
        throw std::invalid_argument("scenario 1: no snapshot of cycle 16");
    Scenario1Result res;
    aes::Block key{}, complement{};
    for (int j = 0; j < 16; ++j) {
        const int row = key_row(table, j, kCycle);
        if (row < 0)
            throw std::invalid_argument("scenario 1: key byte " + std::to_string(j) + " is not in a register at cycle 16");
        std::vector<std::uint8_t> shares(d + 1, 0), flipped(d + 1, 0);
        for (int s = 0; s <= d; ++s) {
            for (int b = 0; b < 8; ++b) {
                const int li = logical_index(row, s, b, d);
                if (li >= locations.size() || locations(li) >= obs->size())
                    throw std::invalid_argument("scenario 1: location of a key share bit is unknown");
                const int bit = obs->bits[locations(li)];
                ++res.bits_read;
                shares[s] |= static_cast<std::uint8_t>(bit << b);
                flipped[s] |= static_cast<std::uint8_t>((bit ^ 1) << b);
            }
        }
        key[j] = combine_shares(shares);
        complement[j] = combine_shares(flipped);
    }
    res.candidates.push_back(key);
    if (unlabeled_templates)
        res.candidates.push_back(complement);
    if (pair)
        for (const auto& k : res.candidates)
            res.verified.push_back(verify_key(k, pair->plaintext, pair->ciphertext));
    return res;
}

std::string_view to_string(Outcome o)
{
    switch (o) {
    case Outcome::Recovered: return "RECOVERED";
    case Outcome::Ambiguous: return "AMBIGUOUS";
    case Outcome::Timeout: return "TIMEOUT";
    case Outcome::Unsat: return "UNSAT";
    }
    return "?";
}

Scenario2Result scenario2_sat(const std::vector<ObservationVector>& snapshots, int window_start, int window_length,
                              int d, const aes::Block& plaintext, const ScheduleTable& schedule,
                              sat::SolverBackend& solver, const Scenario2Options& opt)
{
    sat::AttackInstance inst;
    inst.window_start = window_start;
    inst.d = d;
    inst.plaintext = plaintext;
    inst.known_plaintext = opt.known_plaintext;
    inst.onehot = opt.onehot;
    inst.carried_shares = opt.carried_shares;
    for (int c = window_start; c < window_start + window_length; ++c) {
        const auto it = std::find_if(snapshots.begin(), snapshots.end(), [c](const auto& o) { return o.cycle == c; });
        if (it == snapshots.end())
            throw std::invalid_argument("scenario 2: no snapshot of cycle " + std::to_string(c));
        inst.observations.push_back(*it);
    }

    Scenario2Result res;
    const auto t0 = Clock::now();
    const sat::EncodedInstance enc = sat::encode_instance(inst, schedule);
    res.stats.encode_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    const auto st = enc.problem.stats();
    res.stats.n_vars = st.n_vars;
    res.stats.n_or = st.n_or;
    res.stats.n_xor = st.n_xor;

    const sat::SolveResult first = solver.solve(enc.problem, opt.budget);
    res.stats.solve_ms = first.solve_ms;
    if (first.status == sat::SolveStatus::Unsat) {
        res.outcome = Outcome::Unsat;
        return res;
    }
    if (first.status == sat::SolveStatus::Timeout) {
        res.outcome = Outcome::Timeout;
        return res;
    }
    res.key = sat::decode_key(first.assignment, enc.map);
    const auto left = opt.budget - std::chrono::duration_cast<std::chrono::milliseconds>(
                                       std::chrono::duration<double, std::milli>(first.solve_ms));
    if (left <= std::chrono::milliseconds(0)) {
        res.outcome = Outcome::Timeout;
        return res;
    }
    const sat::UniquenessResult u = sat::check_key_unique(enc.problem, enc.map, res.key, solver, left);
    res.stats.solve_ms += u.solve_ms;
    switch (u.outcome) {
    case sat::UniquenessResult::Outcome::Unique:
        res.outcome = Outcome::Recovered;
        break;
    case sat::UniquenessResult::Outcome::Alternate:
        res.outcome = Outcome::Ambiguous;
        res.alternate = u.alternate;
        break;
    case sat::UniquenessResult::Outcome::Timeout:
        res.outcome = Outcome::Timeout;
        break;
    }
    return res;
}

ScheduleTable ReducedScheduleSpec::table() const { return load_schedule().subset(rows); }

PlantedInstance plant_instance(const ScheduleTable& table, int d, int fsm_bits, int first_cycle, int last_cycle,
                               std::uint64_t seed, ReshareMode mode)
{
    Rng rng(seed);
    PlantedInstance p;
    for (auto& b : p.config.key)
        b = rng.next_byte();
    for (auto& b : p.config.plaintext)
        b = rng.next_byte();
    p.config.d = d;
    p.config.fsm_bits = fsm_bits;
    p.config.seed = rng.next_u64();
    p.config.reshare_mode = mode;
    p.table = table;
    p.trace = simulate(p.config, table, first_cycle, last_cycle);
    p.placement = random_placement(p.config.total_bits(table.rows()), rng);
    p.snapshots = place_trace(p.trace, p.placement);
    p.ciphertext = aes::encrypt(p.config.key, p.config.plaintext);
    return p;
}

namespace {

std::uint64_t trial_seed(std::uint64_t seed, int d, int cycles, int trial)
{
    const std::uint64_t salt = (static_cast<std::uint64_t>(d) << 40) ^ (static_cast<std::uint64_t>(cycles) << 24) ^
                               static_cast<std::uint64_t>(trial);
    return Rng(seed).fork(salt).next_u64();
}

} // namespace

std::vector<BenchRow> bench_table(const BenchConfig& cfg)
{
    struct Task {
        int d, cycles, trial;
    };
    std::vector<Task> tasks;
    for (int d : cfg.d_values)
        for (int cycles : cfg.cycle_counts) {
            if (cycles < 1 || cfg.window_start + cycles - 1 > ScheduleTable::kCycles)
                throw std::invalid_argument("bench: window of " + std::to_string(cycles) + " cycles does not fit");
            for (int t = 0; t < cfg.trials; ++t)
                tasks.push_back({d, cycles, t});
        }
    const ScheduleTable table = cfg.reduced ? cfg.reduced->table() : load_schedule();
    const int fsm = cfg.reduced ? cfg.reduced->fsm_bits : cfg.full_fsm_bits;

    std::vector<BenchRow> rows(tasks.size());
    std::vector<std::string> errors(tasks.size());
    const int n = static_cast<int>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, cfg.jobs))
    for (int k = 0; k < n; ++k) {
        const Task& t = tasks[k];
        try {
            const PlantedInstance p = plant_instance(table, t.d, fsm, cfg.window_start,
                                                     cfg.window_start + t.cycles - 1,
                                                     trial_seed(cfg.seed, t.d, t.cycles, t.trial), cfg.reshare_mode);
            auto solver = sat::make_solver(cfg.solver);
            Scenario2Options opt;
            opt.budget = cfg.budget;
            opt.onehot = cfg.onehot;
            opt.carried_shares = cfg.carried_shares;
            const Scenario2Result r = scenario2_sat(p.snapshots, cfg.window_start, t.cycles, t.d, p.config.plaintext,
                                                    table, *solver, opt);
            BenchRow& row = rows[k];
            row = {t.d, t.cycles, t.trial, r.outcome, r.stats.encode_ms, r.stats.solve_ms, r.stats.n_vars,
                   r.stats.n_or + r.stats.n_xor, false};
            row.verified = r.outcome == Outcome::Recovered && verify_key(r.key, p.config.plaintext, p.ciphertext);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty())
            throw std::runtime_error("bench trial failed: " + e);
    return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out, bool with_timing)
{
    out << "d,cycles,trial,outcome,encode_ms,solve_ms,n_vars,n_clauses\n";
    for (const BenchRow& r : rows) {
        out << r.d << ',' << r.cycles << ',' << r.trial << ',' << to_string(r.outcome) << ',';
        if (with_timing)
            out << std::fixed << std::setprecision(1) << r.encode_ms << ',' << r.solve_ms << std::defaultfloat;
        else
            out << "-,-";
        out << ',' << r.n_vars << ',' << r.n_clauses << '\n';
    }
}

std::vector<BenchCell> summarize(const std::vector<BenchRow>& rows)
{
    std::map<std::pair<int, int>, BenchCell> cells;
    for (const BenchRow& r : rows) {
        auto [it, fresh] = cells.try_emplace({r.d, r.cycles}, BenchCell{r.d, r.cycles, 0, 0, 0, 0, 0, 0.0, 0.0});
        BenchCell& c = it->second;
        ++c.trials;
        c.recovered += r.outcome == Outcome::Recovered;
        c.ambiguous += r.outcome == Outcome::Ambiguous;
        c.timeout += r.outcome == Outcome::Timeout;
        c.unsat += r.outcome == Outcome::Unsat;
        c.mean_encode_ms += r.encode_ms;
        c.mean_solve_ms += r.solve_ms;
    }
    std::vector<BenchCell> out;
    for (auto& [key, c] : cells) {
        if (c.trials > 0) {
            c.mean_encode_ms /= c.trials;
            c.mean_solve_ms /= c.trials;
        }
        out.push_back(c);
    }
    return out;
}

std::optional<int> minimum_window(const std::vector<BenchCell>& cells, int d)
{
    std::optional<int> best;
    for (const BenchCell& c : cells)
        if (c.d == d && c.trials > 0 && c.recovered == c.trials && (!best || c.cycles < *best))
            best = c.cycles;
    return best;
}

} // namespace snapattack::attack
