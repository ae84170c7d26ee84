#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snapattack/aes.hpp"
#include "snapattack/attack.hpp"
#include "snapattack/dom_sim.hpp"
#include "snapattack/llsi_image.hpp"
#include "snapattack/sat/cnf.hpp"
#include "snapattack/sat/encode.hpp"
#include "snapattack/sat/solver.hpp"
#include "snapattack/schedule.hpp"
#include "snapattack/snapshot.hpp"

using namespace snapattack;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    return f;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot read " + path);
    return f;
}

std::pair<int, int> parse_range(const std::string& s)
{
    const auto colon = s.find(':');
    try {
        if (colon == std::string::npos) {
            const int c = std::stoi(s);
            return {c, c};
        }
        return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw UsageError("bad cycle range '" + s + "', expected first:last");
    }
}

std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = 0;
        const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || p != item.data() + item.size())
            throw UsageError("bad integer list '" + s + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw UsageError("empty integer list");
    return out;
}

aes::Block parse_block(const std::string& hex, const char* what)
{
    try {
        return aes::block_from_hex(hex);
    } catch (const std::exception&) {
        throw UsageError(std::string("--") + what + " needs 32 hex digits");
    }
}

std::string hex(const aes::Block& b) { return aes::to_hex(b); }

// Parameters shared by every command that simulates a device.
struct SimOptions {
    std::uint64_t seed = 0;
    int d = 1;
    std::string cycles = "16:27";
    bool reduced = false;
    std::string schedule_path;
    int fsm_bits = -1;
    std::string reshare = "fresh";
    std::string key_hex;
    std::string pt_hex;

    void add(CLI::App* app, const std::string& default_cycles)
    {
        cycles = default_cycles;
        app->add_option("--seed", seed, "Seed for key, plaintext, masks and placement")->required();
        app->add_option("--d", d, "Masking order")->check(CLI::Range(0, 6));
        app->add_option("--cycles", cycles, "Cycle range first:last");
        app->add_flag("--reduced", reduced, "Use the reduced 8-row schedule");
        app->add_option("--schedule", schedule_path, "Schedule CSV replacing the builtin table");
        app->add_option("--fsm-bits", fsm_bits, "Distractor bits per snapshot (default 208, 52 reduced)");
        app->add_option("--reshare", reshare, "Mask refresh: fresh or stable")
            ->check(CLI::IsMember({"fresh", "stable"}));
        app->add_option("--key", key_hex, "Key (hex), default drawn from the seed");
        app->add_option("--pt", pt_hex, "Plaintext (hex), default drawn from the seed");
    }

    ScheduleTable table() const
    {
        ScheduleTable t = load_schedule();
        if (!schedule_path.empty()) {
            auto f = open_in(schedule_path);
            t = read_schedule_csv(f);
        }
        if (reduced)
            t = t.subset(attack::ReducedScheduleSpec{}.rows);
        return t;
    }

    int fsm() const
    {
        if (fsm_bits >= 0)
            return fsm_bits;
        return reduced ? attack::ReducedScheduleSpec{}.fsm_bits : 208;
    }

    ReshareMode mode() const { return reshare == "stable" ? ReshareMode::StableOnShift : ReshareMode::FreshEveryCycle; }

    attack::PlantedInstance plant() const
    {
        const auto [first, last] = parse_range(cycles);
        if (first < 1 || first > last || last > ScheduleTable::kCycles)
            throw UsageError("cycle range must satisfy 1 <= first <= last <= 36");
        const ScheduleTable t = table();
        if (key_hex.empty() && pt_hex.empty())
            return attack::plant_instance(t, d, fsm(), first, last, seed, mode());
        attack::PlantedInstance p = attack::plant_instance(t, d, fsm(), first, first, seed, mode());
        if (!key_hex.empty())
            p.config.key = parse_block(key_hex, "key");
        if (!pt_hex.empty())
            p.config.plaintext = parse_block(pt_hex, "pt");
        p.trace = simulate(p.config, t, first, last);
        p.snapshots = place_trace(p.trace, p.placement);
        p.ciphertext = aes::encrypt(p.config.key, p.config.plaintext);
        return p;
    }

    json to_json() const
    {
        return {{"seed", seed},         {"d", d},         {"cycles", cycles}, {"reduced", reduced},
                {"schedule", schedule_path}, {"fsm_bits", fsm()}, {"reshare", reshare}};
    }
};

struct ImageOptions {
    llsi::ImagingConfig cfg;
    bool no_flip = false;

    void add(CLI::App* app)
    {
        app->add_option("--cell", cfg.cell_h, "Cell size in pixels");
        app->add_flag("--no-flip", no_flip, "Disable mirroring of odd columns");
        app->add_option("--border", cfg.border, "Blank border in pixels");
    }

    llsi::ImagingConfig resolved() const
    {
        llsi::ImagingConfig c = cfg;
        if (c.cell_h != 16) {
            // Scale the default geometry to the requested cell size.
            const double k = c.cell_h / 16.0;
            c.cell_w = c.cell_h;
            for (auto* sites : {c.sites0, c.sites1})
                for (int i = 0; i < 2; ++i)
                    sites[i] = {sites[i].y * k, sites[i].x * k};
            c.blob_sigma *= k;
        }
        c.alternate_flip = !no_flip;
        return c;
    }
};

sat::OneHotEncoding parse_onehot(const std::string& s)
{
    if (s == "implied")
        return sat::OneHotEncoding::SequentialImplied;
    if (s == "pairwise")
        return sat::OneHotEncoding::Pairwise;
    return sat::OneHotEncoding::Sequential;
}

const ObservationVector& pick_cycle(const std::vector<ObservationVector>& obs, std::optional<int> cycle)
{
    if (obs.empty())
        throw std::runtime_error("no snapshots in input");
    if (!cycle)
        return obs.front();
    for (const auto& o : obs)
        if (o.cycle == *cycle)
            return o;
    throw std::runtime_error("no snapshot of cycle " + std::to_string(*cycle));
}

// Flags found on the command line, used to let them win over --config.
bool has_flag(const std::vector<std::string>& args, const std::string& name)
{
    const std::string f = "--" + name;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == f || a.rfind(f + "=", 0) == 0; });
}

std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::string& command)
{
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;
    json cfg;
    try {
        auto f = open_in(path);
        cfg = json::parse(f);
    } catch (const std::exception& e) {
        throw UsageError("bad config " + path + ": " + e.what());
    }
    if (!cfg.is_object())
        throw UsageError("config must be a JSON object");
    // Top-level keys apply to every command, a section named after the
    // command overrides them.
    json flat = json::object();
    for (auto& [k, v] : cfg.items())
        if (!v.is_object())
            flat[k] = v;
    if (cfg.contains(command) && cfg[command].is_object())
        for (auto& [k, v] : cfg[command].items())
            flat[k] = v;
    std::vector<std::string> out = args;
    for (auto& [k, v] : flat.items()) {
        if (has_flag(args, k))
            continue;
        if (v.is_boolean()) {
            if (v.get<bool>())
                out.push_back("--" + k);
        } else if (v.is_array()) {
            std::string joined;
            for (auto& e : v)
                joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
            out.push_back("--" + k);
            out.push_back(joined);
        } else {
            out.push_back("--" + k);
            out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return out;
}

void emit(const json& j) { std::cout << j.dump() << '\n'; }

void write_manifest(const std::string& path, const std::string& command, const json& resolved)
{
    if (path.empty())
        return;
    json m{{"command", command}, {"config", resolved}};
    auto f = open_out(path);
    f << m.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Snapshot attack toolkit for serialized masked AES-128", "snapattack"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, manifest_path = "manifest.json";
    app.add_option("--config", config_path, "JSON file with default flag values");
    app.add_option("--manifest", manifest_path, "Where to record the resolved configuration (empty: skip)");

    // simulate
    SimOptions sim;
    std::string sim_data = "trace_data.csv", sim_fsm = "trace_fsm.csv";
    auto* c_sim = app.add_subcommand("simulate", "Dump the masked register trace");
    sim.add(c_sim, "1:36");
    c_sim->add_option("--out-data", sim_data, "Register share CSV");
    c_sim->add_option("--out-fsm", sim_fsm, "Control bit CSV");

    // snapshot
    SimOptions snap;
    std::string snap_out = "snapshots.csv", snap_pm = "placement.csv";
    double flip_prob = 0.0;
    auto* c_snap = app.add_subcommand("snapshot", "Simulate and scramble into unordered snapshots");
    snap.add(c_snap, "16:27");
    c_snap->add_option("--out", snap_out, "Snapshot CSV");
    c_snap->add_option("--placement-out", snap_pm, "Ground-truth placement CSV");
    c_snap->add_option("--flip-prob", flip_prob, "Independent bit-flip probability")->check(CLI::Range(0.0, 1.0));

    // imggen
    ImageOptions gen_img;
    std::string gen_snaps, gen_out = "snapshot.pgm", gen_ref;
    std::optional<int> gen_cycle;
    std::uint64_t gen_seed = 0;
    int gen_bits = 720, gen_cols = 30;
    auto* c_gen = app.add_subcommand("imggen", "Render a snapshot as a synthetic scan image");
    gen_img.add(c_gen);
    c_gen->add_option("--snapshots", gen_snaps, "Snapshot CSV to render (default: random bits)");
    c_gen->add_option("--cycle", gen_cycle, "Cycle to render from the snapshot CSV");
    c_gen->add_option("--seed", gen_seed, "Seed for random bits, noise")->required();
    c_gen->add_option("--n-bits", gen_bits, "Random bit count when no CSV is given")->check(CLI::PositiveNumber);
    c_gen->add_option("--cols", gen_cols, "Cells per image row")->check(CLI::PositiveNumber);
    c_gen->add_option("--noise", gen_img.cfg.noise_sigma, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);
    c_gen->add_option("--drift-x", gen_img.cfg.drift_x, "Horizontal drift in pixels");
    c_gen->add_option("--drift-y", gen_img.cfg.drift_y, "Vertical drift in pixels");
    c_gen->add_option("--out", gen_out, "Output PGM");
    c_gen->add_option("--reference-out", gen_ref, "Also write the golden reference scan");

    // imgextract
    ImageOptions ext_img;
    std::string ext_image, ext_ref, ext_csv, ext_obs, ext_truth;
    int ext_rows = 0, ext_cols = 30, ext_bits = -1, ext_cycle = 0;
    auto* c_ext = app.add_subcommand("imgextract", "Read the bits back from a scan image");
    ext_img.add(c_ext);
    c_ext->add_option("--image", ext_image, "Scan PGM")->required();
    c_ext->add_option("--reference", ext_ref, "Golden reference PGM (default: rendered)");
    c_ext->add_option("--rows", ext_rows, "Cell rows (default: from the image size)");
    c_ext->add_option("--cols", ext_cols, "Cell columns")->check(CLI::PositiveNumber);
    c_ext->add_option("--n-bits", ext_bits, "Bits to keep (default: every cell)");
    c_ext->add_option("--out-csv", ext_csv, "Per-cell scores CSV");
    c_ext->add_option("--snapshot-out", ext_obs, "Write the bits as a snapshot CSV");
    c_ext->add_option("--cycle", ext_cycle, "Cycle label for --snapshot-out and --truth");
    c_ext->add_option("--truth", ext_truth, "Snapshot CSV to score the extraction against");

    // attack1
    SimOptions a1;
    std::string a1_snaps, a1_pm, a1_ct;
    bool a1_unlabeled = false;
    auto* c_a1 = app.add_subcommand("attack1", "Known-location attack on the cycle-16 key registers");
    a1.add(c_a1, "16:16");
    c_a1->get_option("--seed")->required(false);
    c_a1->add_option("--snapshots", a1_snaps, "Snapshot CSV (default: simulate from --seed)");
    c_a1->add_option("--placement", a1_pm, "Known cell locations CSV");
    c_a1->add_option("--ct", a1_ct, "Ciphertext (hex) of --pt for verification");
    c_a1->add_flag("--unlabeled", a1_unlabeled, "Templates are unlabeled, report the complement too");

    // attack2 and encode share the instance options
    SimOptions a2;
    std::string a2_snaps, a2_stats, a2_onehot = "implied", enc_onehot = "sequential", a2_solver = sat::default_solver_spec();
    double a2_budget = 300;
    bool a2_unknown_pt = false, a2_carry = false;
    auto* c_a2 = app.add_subcommand("attack2", "Unknown-location SAT attack");
    a2.add(c_a2, "16:27");
    c_a2->get_option("--seed")->required(false);
    c_a2->add_option("--snapshots", a2_snaps, "Snapshot CSV (default: simulate from --seed)");
    c_a2->add_option("--stats-out", a2_stats, "Stats JSON with timings");
    c_a2->add_option("--solver", a2_solver, "builtin, builtin:<seed> or a solver executable[:cnf]");
    c_a2->add_option("--budget", a2_budget, "Time budget in seconds")->check(CLI::PositiveNumber);

    SimOptions enc_o;
    std::string enc_out = "instance.cnf";
    bool enc_cnf = false;
    auto* c_enc = app.add_subcommand("encode", "Write the SAT instance as extended DIMACS");
    enc_o.add(c_enc, "16:27");
    c_enc->add_option("--out", enc_out, "DIMACS output");
    c_enc->add_flag("--cnf-only", enc_cnf, "Cut parity constraints into plain clauses");
    for (auto* c : {c_a2, c_enc}) {
        c->add_option("--onehot", c == c_a2 ? a2_onehot : enc_onehot, "sequential, implied or pairwise")
            ->check(CLI::IsMember({"sequential", "implied", "pairwise"}));
        c->add_flag("--unknown-plaintext", a2_unknown_pt, "Leave the plaintext unconstrained");
        c->add_flag("--carry-shares", a2_carry, "Share variables follow their symbol across shifts");
    }

    // bench
    std::string b_d = "0,1,2", b_cycles = "9,12,15,18,21", b_out = "bench.csv", b_timing = "on", b_reshare = "fresh",
                b_onehot = "implied", b_solver = sat::default_solver_spec();
    int b_trials = 1, b_jobs = 1, b_start = 16;
    double b_budget = 120;
    std::uint64_t b_seed = 1;
    bool b_full = false, b_carry = false;
    auto* c_b = app.add_subcommand("bench", "Sweep masking order and window length");
    c_b->add_option("--d", b_d, "Masking orders, comma separated");
    c_b->add_option("--cycles", b_cycles, "Window lengths, comma separated");
    c_b->add_option("--start", b_start, "First covered cycle");
    c_b->add_option("--trials", b_trials, "Trials per cell")->check(CLI::PositiveNumber);
    c_b->add_option("--budget", b_budget, "Per-trial budget in seconds")->check(CLI::PositiveNumber);
    c_b->add_option("--seed", b_seed, "Base seed");
    c_b->add_option("--jobs", b_jobs, "Concurrent trials")->check(CLI::PositiveNumber);
    c_b->add_option("--solver", b_solver, "builtin, builtin:<seed> or a solver executable[:cnf]");
    c_b->add_option("--out", b_out, "Per-trial CSV");
    c_b->add_option("--timing", b_timing, "on or off; off blanks the time columns")
        ->check(CLI::IsMember({"on", "off"}));
    c_b->add_flag("--full", b_full, "Full 32-row schedule instead of the reduced one");
    c_b->add_option("--reshare", b_reshare, "fresh or stable")->check(CLI::IsMember({"fresh", "stable"}));
    c_b->add_option("--onehot", b_onehot, "sequential, implied or pairwise")
        ->check(CLI::IsMember({"sequential", "implied", "pairwise"}));
    c_b->add_flag("--carry-shares", b_carry, "Share variables follow their symbol across shifts");

    // verify
    std::string v_key, v_pt, v_ct;
    auto* c_v = app.add_subcommand("verify", "Check a key against a plaintext/ciphertext pair");
    c_v->add_option("--key", v_key, "Key (hex)")->required();
    c_v->add_option("--pt", v_pt, "Plaintext (hex)")->required();
    c_v->add_option("--ct", v_ct, "Ciphertext (hex)")->required();

    if (argc < 2) {
        std::cerr << app.help();
        return 2;
    }
    try {
        std::vector<std::string> args;
        for (int i = 1; i < argc; ++i) {
            const std::string a = argv[i];
            // "--opt=" carries an explicit empty value, which CLI11 drops.
            if (a.size() > 3 && a.rfind("--", 0) == 0 && a.back() == '=') {
                args.push_back(a.substr(0, a.size() - 1));
                args.emplace_back();
            } else {
                args.push_back(a);
            }
        }
        // Skip global options to find the command for config sections.
        std::size_t cmd = 0;
        while (cmd < args.size() && args[cmd].rfind("--", 0) == 0)
            cmd += args[cmd].find('=') == std::string::npos ? 2 : 1;
        args = merge_config(args, cmd < args.size() ? args[cmd] : std::string());
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        if (*c_sim) {
            const auto p = sim.plant();
            {
                auto fd = open_out(sim_data);
                auto ff = open_out(sim_fsm);
                write_trace_csv(p.trace, fd, ff);
            }
            json cfg = sim.to_json();
            cfg["out_data"] = sim_data;
            cfg["out_fsm"] = sim_fsm;
            write_manifest(manifest_path, "simulate", cfg);
            emit({{"command", "simulate"},
                  {"key", hex(p.config.key)},
                  {"plaintext", hex(p.config.plaintext)},
                  {"ciphertext", hex(p.ciphertext)},
                  {"cycles", p.trace.size()},
                  {"rows", p.table.rows()},
                  {"data_csv", sim_data},
                  {"fsm_csv", sim_fsm}});
        } else if (*c_snap) {
            auto p = snap.plant();
            if (flip_prob > 0) {
                Rng rng = Rng(snap.seed).fork(0xF11Bu);
                for (auto& o : p.snapshots)
                    o = corrupt(o, flip_prob, rng);
            }
            {
                auto fo = open_out(snap_out);
                write_snapshots_csv(p.snapshots, fo);
                auto fp = open_out(snap_pm);
                write_placement_csv(p.placement, fp);
            }
            json cfg = snap.to_json();
            cfg["flip_prob"] = flip_prob;
            cfg["out"] = snap_out;
            cfg["placement_out"] = snap_pm;
            write_manifest(manifest_path, "snapshot", cfg);
            emit({{"command", "snapshot"},
                  {"key", hex(p.config.key)},
                  {"plaintext", hex(p.config.plaintext)},
                  {"ciphertext", hex(p.ciphertext)},
                  {"n", p.placement.size()},
                  {"snapshots", p.snapshots.size()},
                  {"out", snap_out},
                  {"placement_out", snap_pm}});
        } else if (*c_gen) {
            const llsi::ImagingConfig cfg = gen_img.resolved();
            Rng rng(gen_seed);
            std::vector<std::uint8_t> bits;
            if (!gen_snaps.empty()) {
                auto f = open_in(gen_snaps);
                bits = pick_cycle(read_snapshots_csv(f), gen_cycle).bits;
            } else {
                bits.resize(static_cast<std::size_t>(gen_bits));
                for (auto& b : bits)
                    b = rng.next_bit();
            }
            const llsi::BitGrid grid = llsi::to_grid(bits, gen_cols);
            llsi::write_pgm(llsi::render_snapshot(grid, cfg, rng), gen_out);
            if (!gen_ref.empty())
                llsi::write_pgm(llsi::render_reference(grid.rows, grid.cols, cfg), gen_ref);
            write_manifest(manifest_path, "imggen",
                           {{"seed", gen_seed}, {"snapshots", gen_snaps}, {"n_bits", bits.size()},
                            {"cols", gen_cols}, {"cell", cfg.cell_h}, {"flip", cfg.alternate_flip},
                            {"noise", cfg.noise_sigma}, {"drift_x", cfg.drift_x}, {"drift_y", cfg.drift_y},
                            {"out", gen_out}, {"reference_out", gen_ref}});
            emit({{"command", "imggen"},
                  {"rows", grid.rows},
                  {"cols", grid.cols},
                  {"n_bits", bits.size()},
                  {"out", gen_out}});
        } else if (*c_ext) {
            const llsi::ImagingConfig cfg = ext_img.resolved();
            const llsi::Image img = llsi::read_pgm(ext_image);
            const int rows = ext_rows > 0 ? ext_rows : (img.h - 2 * cfg.border) / cfg.cell_h;
            if (rows < 1)
                throw UsageError("image too small for the cell geometry");
            const llsi::Image ref = ext_ref.empty() ? llsi::render_reference(rows, ext_cols, cfg) : llsi::read_pgm(ext_ref);
            const auto t = llsi::build_templates(llsi::render_cell(0, cfg), llsi::render_cell(1, cfg));
            const llsi::Extraction e = llsi::extract_bits(img, t, cfg, ref, rows, ext_cols);
            if (!ext_csv.empty()) {
                auto f = open_out(ext_csv);
                llsi::write_extraction_csv(e, f);
            }
            ObservationVector obs{ext_cycle, e.grid.bits};
            if (ext_bits >= 0)
                obs.bits.resize(std::min<std::size_t>(obs.bits.size(), static_cast<std::size_t>(ext_bits)));
            if (!ext_obs.empty()) {
                auto f = open_out(ext_obs);
                write_snapshots_csv({obs}, f);
            }
            int ties = 0;
            for (const auto& c : e.cells)
                ties += c.tie;
            json out{{"command", "imgextract"},
                     {"drift", {{"dx", e.drift.dx}, {"dy", e.drift.dy}}},
                     {"rows", rows},
                     {"cols", ext_cols},
                     {"n_bits", obs.bits.size()},
                     {"ties", ties}};
            if (!ext_truth.empty()) {
                auto f = open_in(ext_truth);
                const auto all = read_snapshots_csv(f);
                const auto& truth = pick_cycle(all, ext_cycle ? std::optional(ext_cycle) : std::nullopt);
                const std::size_t n = std::min(truth.bits.size(), obs.bits.size());
                std::size_t ok = 0;
                for (std::size_t i = 0; i < n; ++i)
                    ok += truth.bits[i] == obs.bits[i];
                out["accuracy"] = n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
            }
            write_manifest(manifest_path, "imgextract",
                           {{"image", ext_image}, {"reference", ext_ref}, {"rows", rows}, {"cols", ext_cols},
                            {"cell", cfg.cell_h}, {"flip", cfg.alternate_flip}, {"n_bits", ext_bits},
                            {"cycle", ext_cycle}, {"truth", ext_truth}});
            emit(out);
        } else if (*c_a1) {
            const ScheduleTable table = a1.table();
            std::vector<ObservationVector> snaps;
            PlacementMap pm;
            std::optional<attack::KnownPair> pair;
            if (a1_snaps.empty()) {
                if (c_a1->get_option("--seed")->count() == 0)
                    throw UsageError("attack1 needs --seed or --snapshots");
                const auto p = a1.plant();
                snaps = p.snapshots;
                pm = p.placement;
                pair = attack::KnownPair{p.config.plaintext, p.ciphertext};
            } else {
                auto f = open_in(a1_snaps);
                snaps = read_snapshots_csv(f);
                if (a1_pm.empty())
                    throw UsageError("attack1 --snapshots needs --placement");
                auto g = open_in(a1_pm);
                pm = read_placement_csv(g);
                if (!a1.pt_hex.empty() && !a1_ct.empty())
                    pair = attack::KnownPair{parse_block(a1.pt_hex, "pt"), parse_block(a1_ct, "ct")};
            }
            const auto r = attack::scenario1_direct(snaps, pm, table, a1.d, a1_unlabeled, pair);
            json cands = json::array(), ver = json::array();
            for (const auto& k : r.candidates)
                cands.push_back(hex(k));
            for (bool v : r.verified)
                ver.push_back(v);
            json cfg = a1.to_json();
            cfg["snapshots"] = a1_snaps;
            cfg["placement"] = a1_pm;
            cfg["unlabeled"] = a1_unlabeled;
            write_manifest(manifest_path, "attack1", cfg);
            emit({{"command", "attack1"}, {"candidates", cands}, {"verified", ver}, {"bits_read", r.bits_read}});
        } else if (*c_a2 || *c_enc) {
            SimOptions& o = *c_a2 ? a2 : enc_o;
            CLI::App* sub = *c_a2 ? c_a2 : c_enc;
            const ScheduleTable table = o.table();
            std::vector<ObservationVector> snaps;
            aes::Block pt{};
            std::optional<aes::Block> ct;
            const auto [first, last] = parse_range(o.cycles);
            if (!*c_a2 || a2_snaps.empty()) {
                if (sub->get_option("--seed")->count() == 0)
                    throw UsageError("needs --seed or --snapshots");
                const auto p = o.plant();
                snaps = p.snapshots;
                pt = p.config.plaintext;
                ct = p.ciphertext;
            } else {
                auto f = open_in(a2_snaps);
                snaps = read_snapshots_csv(f);
                if (o.pt_hex.empty() && !a2_unknown_pt)
                    throw UsageError("attack2 --snapshots needs --pt or --unknown-plaintext");
                if (!o.pt_hex.empty())
                    pt = parse_block(o.pt_hex, "pt");
            }
            json cfg = o.to_json();
            cfg["onehot"] = *c_a2 ? a2_onehot : enc_onehot;
            cfg["unknown_plaintext"] = a2_unknown_pt;
            cfg["carry_shares"] = a2_carry;
            if (*c_enc) {
                sat::AttackInstance inst;
                inst.window_start = first;
                inst.d = o.d;
                inst.plaintext = pt;
                inst.known_plaintext = !a2_unknown_pt;
                inst.onehot = parse_onehot(enc_onehot);
                inst.carried_shares = a2_carry;
                for (int c = first; c <= last; ++c)
                    inst.observations.push_back(pick_cycle(snaps, c));
                const auto enc = sat::encode_instance(inst, table);
                {
                    auto f = open_out(enc_out);
                    if (enc_cnf)
                        sat::write_dimacs(enc.problem.to_pure_cnf(), f);
                    else
                        sat::write_dimacs(enc.problem, f);
                }
                const auto st = enc.problem.stats();
                cfg["out"] = enc_out;
                cfg["cnf_only"] = enc_cnf;
                write_manifest(manifest_path, "encode", cfg);
                emit({{"command", "encode"},
                      {"n_vars", st.n_vars},
                      {"n_or", st.n_or},
                      {"n_xor", st.n_xor},
                      {"out", enc_out}});
            } else {
                auto solver = sat::make_solver(a2_solver);
                attack::Scenario2Options opt;
                opt.known_plaintext = !a2_unknown_pt;
                opt.onehot = parse_onehot(a2_onehot);
                opt.carried_shares = a2_carry;
                opt.budget = std::chrono::milliseconds(static_cast<long long>(a2_budget * 1000));
                const auto r = attack::scenario2_sat(snaps, first, last - first + 1, o.d, pt, table, *solver, opt);
                json out{{"command", "attack2"}, {"outcome", attack::to_string(r.outcome)}};
                if (r.outcome == attack::Outcome::Recovered || r.outcome == attack::Outcome::Ambiguous)
                    out["key"] = hex(r.key);
                if (r.alternate)
                    out["alternate"] = hex(*r.alternate);
                if (ct && r.outcome != attack::Outcome::Timeout && r.outcome != attack::Outcome::Unsat)
                    out["verified"] = attack::verify_key(r.key, pt, *ct);
                out["n_vars"] = r.stats.n_vars;
                out["n_or"] = r.stats.n_or;
                out["n_xor"] = r.stats.n_xor;
                if (!a2_stats.empty()) {
                    auto f = open_out(a2_stats);
                    f << json{{"n_vars", r.stats.n_vars},
                              {"n_or", r.stats.n_or},
                              {"n_xor", r.stats.n_xor},
                              {"encode_ms", r.stats.encode_ms},
                              {"solve_ms", r.stats.solve_ms}}
                             .dump()
                      << '\n';
                }
                cfg["snapshots"] = a2_snaps;
                cfg["solver"] = a2_solver;
                cfg["budget_s"] = a2_budget;
                write_manifest(manifest_path, "attack2", cfg);
                emit(out);
            }
        } else if (*c_b) {
            attack::BenchConfig bc;
            bc.d_values = parse_int_list(b_d);
            bc.cycle_counts = parse_int_list(b_cycles);
            bc.window_start = b_start;
            bc.trials = b_trials;
            if (b_full)
                bc.reduced.reset();
            bc.budget = std::chrono::milliseconds(static_cast<long long>(b_budget * 1000));
            bc.seed = b_seed;
            bc.jobs = b_jobs;
            bc.solver = b_solver;
            bc.reshare_mode = b_reshare == "stable" ? ReshareMode::StableOnShift : ReshareMode::FreshEveryCycle;
            bc.onehot = parse_onehot(b_onehot);
            bc.carried_shares = b_carry;
            const bool timing = b_timing == "on";
            const auto rows = attack::bench_table(bc);
            {
                auto f = open_out(b_out);
                attack::write_bench_csv(rows, f, timing);
            }
            json cells = json::array();
            for (const auto& c : attack::summarize(rows)) {
                json j{{"d", c.d},           {"cycles", c.cycles},       {"trials", c.trials},
                       {"recovered", c.recovered}, {"ambiguous", c.ambiguous}, {"timeout", c.timeout},
                       {"unsat", c.unsat}};
                if (timing) {
                    j["mean_encode_ms"] = c.mean_encode_ms;
                    j["mean_solve_ms"] = c.mean_solve_ms;
                }
                cells.push_back(j);
            }
            const auto summary = attack::summarize(rows);
            json minimum = json::object();
            for (int d : bc.d_values) {
                const auto w = attack::minimum_window(summary, d);
                minimum[std::to_string(d)] = w ? json(*w) : json(nullptr);
            }
            write_manifest(manifest_path, "bench",
                           {{"d", b_d}, {"cycles", b_cycles}, {"start", b_start}, {"trials", b_trials},
                            {"budget_s", b_budget}, {"seed", b_seed}, {"jobs", b_jobs}, {"solver", b_solver},
                            {"full", b_full}, {"reshare", b_reshare}, {"onehot", b_onehot},
                            {"carry_shares", b_carry}, {"timing", b_timing}, {"out", b_out}});
            emit({{"command", "bench"}, {"cells", cells}, {"minimum_window", minimum}, {"out", b_out}});
        } else if (*c_v) {
            const bool ok = attack::verify_key(parse_block(v_key, "key"), parse_block(v_pt, "pt"), parse_block(v_ct, "ct"));
            write_manifest(manifest_path, "verify", {{"key", v_key}, {"pt", v_pt}, {"ct", v_ct}});
            emit({{"ok", ok}});
            return ok ? 0 : 1;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
