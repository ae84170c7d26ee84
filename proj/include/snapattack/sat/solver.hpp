#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>

#include "snapattack/sat/cnf.hpp"

namespace snapattack::sat {

enum class SolveStatus { Sat, Unsat, Timeout };

std::string_view to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::Timeout;
    Assignment assignment; // filled for Sat, covers every variable
    double solve_ms = 0.0;
};

// Raised when a backend fails (crash, unparsable output); distinct from UNSAT.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual SolveResult solve(const CnfProblem& p, std::chrono::milliseconds budget) = 0;
    virtual std::string name() const = 0;
};

// In-process CDCL solver. XOR clauses are translated to CNF first.
class BuiltinSolver final : public SolverBackend {
public:
    explicit BuiltinSolver(std::uint64_t seed = 0) : seed_(seed) {}
    SolveResult solve(const CnfProblem& p, std::chrono::milliseconds budget) override;
    std::string name() const override { return "builtin"; }

private:
    std::uint64_t seed_;
};

// Runs `<executable> <dimacs file>` and parses "s ..." / "v ..." lines.
// With native_xor off the problem is written as pure CNF so any DIMACS
// solver can be plugged in.
class ExternalSolver final : public SolverBackend {
public:
    explicit ExternalSolver(std::string executable, bool native_xor = true);
    SolveResult solve(const CnfProblem& p, std::chrono::milliseconds budget) override;
    std::string name() const override { return executable_; }

private:
    std::string executable_;
    bool native_xor_;
};

// Parses solver stdout. Throws SolverError if no status line is present.
SolveResult parse_solver_output(const std::string& text, Var var_count);

// "builtin", "builtin:<seed>", or a path to an executable; an executable
// path may carry a ":cnf" suffix to force pure CNF output.
std::unique_ptr<SolverBackend> make_solver(const std::string& spec);

// Backend named by $SNAPATTACK_SOLVER, falling back to the builtin solver.
std::string default_solver_spec();

} // namespace snapattack::sat
