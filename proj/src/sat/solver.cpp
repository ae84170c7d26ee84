#include "snapattack/sat/solver.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "snapattack/sat/cdcl.hpp"

extern char** environ;

namespace snapattack::sat {

using Clock = std::chrono::steady_clock;

std::string_view to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Sat:
        return "SAT";
    case SolveStatus::Unsat:
        return "UNSAT";
    case SolveStatus::Timeout:
        return "TIMEOUT";
    }
    return "?";
}

namespace {

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

SolveResult BuiltinSolver::solve(const CnfProblem& p, std::chrono::milliseconds budget)
{
    const auto t0 = Clock::now();
    const CnfProblem pure = p.to_pure_cnf();
    Cdcl engine(pure.var_count(), seed_);
    SolveResult r;
    bool ok = true;
    for (std::size_t i = 0; ok && i < pure.or_count(); ++i)
        ok = engine.add_clause(pure.or_clause(i));
    if (!ok) {
        r.status = SolveStatus::Unsat;
    } else {
        switch (engine.solve(t0 + budget)) {
        case CdclStatus::Sat:
            r.status = SolveStatus::Sat;
            r.assignment.assign(engine.model().begin(), engine.model().begin() + p.var_count() + 1);
            break;
        case CdclStatus::Unsat:
            r.status = SolveStatus::Unsat;
            break;
        case CdclStatus::Timeout:
            r.status = SolveStatus::Timeout;
            break;
        }
    }
    r.solve_ms = ms_since(t0);
    return r;
}

SolveResult parse_solver_output(const std::string& text, Var var_count)
{
    SolveResult r;
    bool have_status = false;
    Assignment a(static_cast<std::size_t>(var_count) + 1, 0);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("s ", 0) == 0) {
            have_status = true;
            if (line.find("UNSATISFIABLE") != std::string::npos)
                r.status = SolveStatus::Unsat;
            else if (line.find("SATISFIABLE") != std::string::npos)
                r.status = SolveStatus::Sat;
            else
                r.status = SolveStatus::Timeout; // UNKNOWN / INDETERMINATE
        } else if (line.rfind("v ", 0) == 0) {
            std::istringstream vals(line.substr(2));
            long long l;
            while (vals >> l) {
                if (l == 0)
                    continue;
                const auto v = static_cast<std::uint64_t>(l < 0 ? -l : l);
                if (v > var_count)
                    continue; // helper variables of the backend
                a[v] = l > 0 ? 1 : 0;
            }
        }
    }
    if (!have_status)
        throw SolverError("solver output has no status line");
    if (r.status == SolveStatus::Sat)
        r.assignment = std::move(a);
    return r;
}

ExternalSolver::ExternalSolver(std::string executable, bool native_xor)
    : executable_(std::move(executable)), native_xor_(native_xor)
{
}

namespace {

struct TempFile {
    std::string path;
    TempFile()
    {
        std::string tmpl = (std::filesystem::temp_directory_path() / "snapattack-XXXXXX.cnf").string();
        const int fd = mkstemps(tmpl.data(), 4);
        if (fd < 0)
            throw SolverError("cannot create temporary DIMACS file");
        close(fd);
        path = tmpl;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> split_words(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

} // namespace

SolveResult ExternalSolver::solve(const CnfProblem& p, std::chrono::milliseconds budget)
{
    const auto t0 = Clock::now();
    TempFile file;
    if (native_xor_)
        write_dimacs(p, file.path);
    else
        write_dimacs(p.to_pure_cnf(), file.path);

    std::vector<std::string> words = split_words(executable_);
    if (words.empty())
        throw SolverError("empty solver command");
    words.push_back(file.path);
    std::vector<char*> argv;
    for (auto& w : words)
        argv.push_back(w.data());
    argv.push_back(nullptr);

    int out_pipe[2];
    if (pipe(out_pipe) != 0)
        throw SolverError("pipe failed");
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
    posix_spawn_file_actions_addclose(&actions, out_pipe[1]);
    pid_t pid;
    const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(out_pipe[1]);
    if (rc != 0) {
        close(out_pipe[0]);
        throw SolverError("cannot start solver '" + words[0] + "': " + std::strerror(rc));
    }

    std::string output;
    bool timed_out = false;
    const auto deadline = t0 + budget;
    char buf[65536];
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left <= 0) {
            timed_out = true;
            break;
        }
        pollfd pfd{out_pipe[0], POLLIN, 0};
        const int pr = poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1000)));
        if (pr < 0 && errno != EINTR)
            break;
        if (pr <= 0)
            continue;
        const ssize_t got = read(out_pipe[0], buf, sizeof buf);
        if (got <= 0)
            break;
        output.append(buf, static_cast<std::size_t>(got));
    }
    close(out_pipe[0]);
    if (timed_out)
        kill(pid, SIGKILL);
    int wstatus = 0;
    waitpid(pid, &wstatus, 0);

    SolveResult r;
    if (timed_out) {
        r.status = SolveStatus::Timeout;
    } else {
        if (WIFSIGNALED(wstatus))
            throw SolverError("solver killed by signal " + std::to_string(WTERMSIG(wstatus)));
        r = parse_solver_output(output, p.var_count());
    }
    r.solve_ms = ms_since(t0);
    return r;
}

std::unique_ptr<SolverBackend> make_solver(const std::string& spec)
{
    if (spec.empty() || spec == "builtin")
        return std::make_unique<BuiltinSolver>();
    if (spec.rfind("builtin:", 0) == 0)
        return std::make_unique<BuiltinSolver>(std::stoull(spec.substr(8)));
    const std::string suffix = ":cnf";
    if (spec.size() > suffix.size() && spec.compare(spec.size() - suffix.size(), suffix.size(), suffix) == 0)
        return std::make_unique<ExternalSolver>(spec.substr(0, spec.size() - suffix.size()), false);
    return std::make_unique<ExternalSolver>(spec, true);
}

std::string default_solver_spec()
{
    const char* env = std::getenv("SNAPATTACK_SOLVER");
    return env && *env ? std::string(env) : std::string("builtin");
}

} // namespace snapattack::sat
