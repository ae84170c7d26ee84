// Compact CDCL engine: two watched literals, VSIDS, first-UIP learning with
// recursive minimisation, Luby restarts, LBD-guided clause deletion.

#include "snapattack/sat/cdcl.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace snapattack::sat {

namespace {

constexpr std::uint32_t kUndef = 0xffffffffu;
constexpr std::uint8_t kTrue = 0, kFalse = 1, kUnset = 2;

inline std::uint32_t to_ilit(Lit l) { return (var_of(l) - 1) * 2 + (l < 0 ? 1 : 0); }
inline std::uint32_t ivar(std::uint32_t x) { return x >> 1; }
inline bool isign(std::uint32_t x) { return x & 1; }

double luby(double y, int x)
{
    int size = 1, seq = 0;
    while (size < x + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        --seq;
        x = x % size;
    }
    return std::pow(y, seq);
}

} // namespace

Cdcl::Cdcl(std::uint32_t n_vars, std::uint64_t seed) : rng_(seed)
{
    nv_ = n_vars;
    assigns_.assign(nv_, kUnset);
    level_.assign(nv_, 0);
    reason_.assign(nv_, kUndef);
    polarity_.assign(nv_, 1);
    activity_.assign(nv_, 0.0);
    seen_.assign(nv_, 0);
    heap_index_.assign(nv_, -1);
    watches_.resize(2 * static_cast<std::size_t>(nv_));
    for (std::uint32_t v = 0; v < nv_; ++v) {
        // tiny random jitter breaks ties between structurally equal variables
        activity_[v] = rng_.unit() * 1e-5;
        heap_insert(v);
    }
}

std::uint8_t Cdcl::value(std::uint32_t x) const
{
    const std::uint8_t a = assigns_[ivar(x)];
    return a == kUnset ? kUnset : static_cast<std::uint8_t>(a ^ (x & 1));
}

bool Cdcl::add_clause(std::span<const Lit> clause)
{
    if (!ok_)
        return false;
    std::vector<std::uint32_t> lits;
    lits.reserve(clause.size());
    for (Lit l : clause)
        lits.push_back(to_ilit(l));
    std::sort(lits.begin(), lits.end());
    std::vector<std::uint32_t> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        const std::uint32_t x = lits[i];
        if (i > 0 && lits[i - 1] == x)
            continue;
        if (i > 0 && lits[i - 1] == (x ^ 1))
            return true; // tautology
        const std::uint8_t v = value(x);
        if (v == kTrue)
            return true;
        if (v == kFalse)
            continue; // only level-0 assignments exist here
        kept.push_back(x);
    }
    if (kept.empty())
        return ok_ = false;
    if (kept.size() == 1) {
        enqueue(kept[0], kUndef);
        return ok_ = (propagate() == kUndef);
    }
    attach(alloc(kept, false));
    return true;
}

std::uint32_t Cdcl::alloc(const std::vector<std::uint32_t>& lits, bool learnt)
{
    const std::uint32_t cref = static_cast<std::uint32_t>(arena_.size());
    arena_.push_back(static_cast<std::uint32_t>(lits.size()));
    arena_.push_back(learnt ? 1u : 0u); // bit0 learnt, bit1 deleted, rest lbd
    arena_.push_back(0);                // activity (float bits)
    arena_.insert(arena_.end(), lits.begin(), lits.end());
    if (learnt)
        learnts_.push_back(cref);
    else
        ++n_original_;
    return cref;
}

void Cdcl::attach(std::uint32_t cref)
{
    const std::uint32_t* c = lits_of(cref);
    watches_[c[0] ^ 1].push_back({cref, c[1]});
    watches_[c[1] ^ 1].push_back({cref, c[0]});
}

void Cdcl::enqueue(std::uint32_t x, std::uint32_t from)
{
    const std::uint32_t v = ivar(x);
    assigns_[v] = isign(x) ? kFalse : kTrue;
    level_[v] = decision_level();
    reason_[v] = from;
    trail_.push_back(x);
}

// Returns the conflicting clause or kUndef.
std::uint32_t Cdcl::propagate()
{
    std::uint32_t confl = kUndef;
    while (qhead_ < trail_.size()) {
        const std::uint32_t p = trail_[qhead_++];
        auto& ws = watches_[p];
        ++propagations_;
        std::size_t i = 0, j = 0;
        const std::size_t n = ws.size();
        const std::uint32_t false_lit = p ^ 1;
        while (i < n) {
            const Watch w = ws[i];
            if (value(w.blocker) == kTrue) {
                ws[j++] = ws[i++];
                continue;
            }
            std::uint32_t* c = lits_of(w.cref);
            const std::uint32_t size = arena_[w.cref];
            if (c[0] == false_lit)
                std::swap(c[0], c[1]);
            ++i;
            const std::uint32_t first = c[0];
            if (first != w.blocker && value(first) == kTrue) {
                ws[j++] = {w.cref, first};
                continue;
            }
            bool moved = false;
            for (std::uint32_t k = 2; k < size; ++k) {
                if (value(c[k]) != kFalse) {
                    std::swap(c[1], c[k]);
                    watches_[c[1] ^ 1].push_back({w.cref, first});
                    moved = true;
                    break;
                }
            }
            if (moved)
                continue;
            ws[j++] = {w.cref, first};
            if (value(first) == kFalse) {
                confl = w.cref;
                qhead_ = trail_.size();
                while (i < n)
                    ws[j++] = ws[i++];
            } else {
                enqueue(first, w.cref);
            }
        }
        ws.resize(j);
        if (confl != kUndef)
            break;
    }
    return confl;
}

void Cdcl::bump_var(std::uint32_t v)
{
    if ((activity_[v] += var_inc_) > 1e100) {
        for (double& a : activity_)
            a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_index_[v] >= 0)
        heap_up(heap_index_[v]);
}

void Cdcl::bump_clause(std::uint32_t cref)
{
    float a;
    std::memcpy(&a, &arena_[cref + 2], sizeof a);
    a += static_cast<float>(cla_inc_);
    std::memcpy(&arena_[cref + 2], &a, sizeof a);
    if (a > 1e20f) {
        for (std::uint32_t l : learnts_) {
            float b;
            std::memcpy(&b, &arena_[l + 2], sizeof b);
            b *= 1e-20f;
            std::memcpy(&arena_[l + 2], &b, sizeof b);
        }
        cla_inc_ *= 1e-20;
    }
}

float Cdcl::clause_activity(std::uint32_t cref) const
{
    float a;
    std::memcpy(&a, &arena_[cref + 2], sizeof a);
    return a;
}

std::uint32_t Cdcl::abstract_level(std::uint32_t v) const { return 1u << (level_[v] & 31); }

bool Cdcl::redundant(std::uint32_t x, std::uint32_t levels)
{
    // iterative DFS over reasons, as in MiniSat's litRedundant
    stack_.clear();
    stack_.push_back(x);
    const std::size_t top = to_clear_.size();
    while (!stack_.empty()) {
        const std::uint32_t q = stack_.back();
        stack_.pop_back();
        const std::uint32_t r = reason_[ivar(q)];
        const std::uint32_t* c = lits_of(r);
        const std::uint32_t size = arena_[r];
        for (std::uint32_t k = 1; k < size; ++k) {
            const std::uint32_t y = c[k];
            const std::uint32_t v = ivar(y);
            if (seen_[v] || level_[v] == 0)
                continue;
            if (reason_[v] != kUndef && (abstract_level(v) & levels)) {
                seen_[v] = 1;
                stack_.push_back(y);
                to_clear_.push_back(y);
            } else {
                for (std::size_t t = top; t < to_clear_.size(); ++t)
                    seen_[ivar(to_clear_[t])] = 0;
                to_clear_.resize(top);
                return false;
            }
        }
    }
    return true;
}

void Cdcl::analyze(std::uint32_t confl, std::vector<std::uint32_t>& out, int& bt_level, std::uint32_t& lbd)
{
    out.assign(1, 0);
    int path = 0;
    std::uint32_t p = kUndef;
    std::size_t index = trail_.size();
    do {
        if (arena_[confl + 1] & 1)
            bump_clause(confl);
        std::uint32_t* c = lits_of(confl);
        const std::uint32_t size = arena_[confl];
        // reason clauses keep the implied literal in c[0]
        for (std::uint32_t k = (p == kUndef ? 0 : 1); k < size; ++k) {
            const std::uint32_t q = c[k];
            const std::uint32_t v = ivar(q);
            if (!seen_[v] && level_[v] > 0) {
                bump_var(v);
                seen_[v] = 1;
                if (level_[v] >= decision_level())
                    ++path;
                else
                    out.push_back(q);
            }
        }
        while (!seen_[ivar(trail_[--index])]) {
        }
        p = trail_[index];
        confl = reason_[ivar(p)];
        seen_[ivar(p)] = 0;
        --path;
    } while (path > 0);
    out[0] = p ^ 1;

    to_clear_.assign(out.begin(), out.end());
    std::uint32_t levels = 0;
    for (std::size_t k = 1; k < out.size(); ++k)
        levels |= abstract_level(ivar(out[k]));
    std::size_t j = 1;
    for (std::size_t k = 1; k < out.size(); ++k)
        if (reason_[ivar(out[k])] == kUndef || !redundant(out[k], levels))
            out[j++] = out[k];
    out.resize(j);

    bt_level = 0;
    if (out.size() > 1) {
        std::size_t best = 1;
        for (std::size_t k = 2; k < out.size(); ++k)
            if (level_[ivar(out[k])] > level_[ivar(out[best])])
                best = k;
        std::swap(out[1], out[best]);
        bt_level = level_[ivar(out[1])];
    }
    for (std::uint32_t x : to_clear_)
        seen_[ivar(x)] = 0;

    // literal block distance
    lbd_stamp_++;
    if (lbd_marks_.size() < trail_lim_.size() + 2)
        lbd_marks_.resize(trail_lim_.size() + 2, 0);
    lbd = 0;
    for (std::uint32_t x : out) {
        const int lv = level_[ivar(x)];
        if (lbd_marks_[lv] != lbd_stamp_) {
            lbd_marks_[lv] = lbd_stamp_;
            ++lbd;
        }
    }
}

void Cdcl::cancel_until(int level)
{
    if (decision_level() <= level)
        return;
    for (std::size_t k = trail_.size(); k-- > trail_lim_[level];) {
        const std::uint32_t v = ivar(trail_[k]);
        assigns_[v] = kUnset;
        reason_[v] = kUndef;
        polarity_[v] = isign(trail_[k]) ? 1 : 0;
        if (heap_index_[v] < 0)
            heap_insert(v);
    }
    trail_.resize(trail_lim_[level]);
    qhead_ = trail_.size();
    trail_lim_.resize(level);
}

bool Cdcl::locked(std::uint32_t cref) const
{
    const std::uint32_t x = lits_of(cref)[0];
    const std::uint32_t v = ivar(x);
    return reason_[v] == cref && value(x) == kTrue;
}

void Cdcl::reduce_db()
{
    std::sort(learnts_.begin(), learnts_.end(), [&](std::uint32_t a, std::uint32_t b) {
        const std::uint32_t la = arena_[a + 1] >> 2, lb = arena_[b + 1] >> 2;
        if (la != lb)
            return la > lb;
        return clause_activity(a) < clause_activity(b);
    });
    const std::size_t half = learnts_.size() / 2;
    std::size_t j = 0;
    for (std::size_t k = 0; k < learnts_.size(); ++k) {
        const std::uint32_t cref = learnts_[k];
        const bool keep = k >= half || arena_[cref] <= 2 || (arena_[cref + 1] >> 2) <= 2 || locked(cref);
        if (keep)
            learnts_[j++] = cref;
        else {
            arena_[cref + 1] |= 2;
            wasted_ += 3 + arena_[cref];
        }
    }
    learnts_.resize(j);
    for (auto& ws : watches_)
        std::erase_if(ws, [&](const Watch& w) { return arena_[w.cref + 1] & 2; });
    if (wasted_ > arena_.size() / 8)
        collect_garbage();
}

void Cdcl::collect_garbage()
{
    std::vector<std::uint32_t> fresh;
    fresh.reserve(arena_.size());
    std::vector<std::uint32_t> remap(arena_.size(), kUndef);
    std::size_t at = 0;
    while (at < arena_.size()) {
        const std::uint32_t size = arena_[at];
        if (!(arena_[at + 1] & 2)) {
            remap[at] = static_cast<std::uint32_t>(fresh.size());
            fresh.insert(fresh.end(), arena_.begin() + at, arena_.begin() + at + 3 + size);
        }
        at += 3 + size;
    }
    for (auto& ws : watches_)
        for (Watch& w : ws)
            w.cref = remap[w.cref];
    for (std::uint32_t& r : reason_)
        if (r != kUndef)
            r = remap[r];
    for (std::uint32_t& l : learnts_)
        l = remap[l];
    arena_.swap(fresh);
    wasted_ = 0;
}

std::uint32_t Cdcl::pick_branch()
{
    while (!heap_.empty()) {
        const std::uint32_t v = heap_pop();
        if (assigns_[v] == kUnset)
            return 2 * v + polarity_[v];
    }
    return kUndef;
}

CdclStatus Cdcl::solve(std::chrono::steady_clock::time_point deadline)
{
    model_.clear();
    if (!ok_)
        return CdclStatus::Unsat;
    if (propagate() != kUndef)
        return CdclStatus::Unsat;

    double max_learnts = std::max<double>(n_original_ / 3.0, 5000.0);
    int restart_no = 0;
    std::vector<std::uint32_t> learnt;
    std::uint64_t ticks = 0;
    for (;;) {
        const std::uint64_t limit = static_cast<std::uint64_t>(luby(2.0, restart_no++) * 100);
        std::uint64_t conflicts_here = 0;
        for (;;) {
            if ((++ticks & 255) == 0 && std::chrono::steady_clock::now() >= deadline) {
                cancel_until(0);
                return CdclStatus::Timeout;
            }
            const std::uint32_t confl = propagate();
            if (confl != kUndef) {
                ++conflicts_;
                ++conflicts_here;
                if (decision_level() == 0)
                    return CdclStatus::Unsat;
                int bt;
                std::uint32_t lbd;
                analyze(confl, learnt, bt, lbd);
                cancel_until(bt);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], kUndef);
                } else {
                    const std::uint32_t cref = alloc(learnt, true);
                    arena_[cref + 1] |= lbd << 2;
                    attach(cref);
                    bump_clause(cref);
                    enqueue(learnt[0], cref);
                }
                var_inc_ /= 0.95;
                cla_inc_ /= 0.999;
                continue;
            }
            if (conflicts_here >= limit) {
                cancel_until(0);
                break;
            }
            if (static_cast<double>(learnts_.size()) - trail_.size() >= max_learnts) {
                reduce_db();
                max_learnts *= 1.1;
            }
            const std::uint32_t next = pick_branch();
            if (next == kUndef) {
                model_.assign(static_cast<std::size_t>(nv_) + 1, 0);
                for (std::uint32_t v = 0; v < nv_; ++v)
                    model_[v + 1] = assigns_[v] == kTrue ? 1 : 0;
                cancel_until(0);
                return CdclStatus::Sat;
            }
            ++decisions_;
            trail_lim_.push_back(trail_.size());
            enqueue(next, kUndef);
        }
    }
}

// Binary max-heap on activity.
void Cdcl::heap_insert(std::uint32_t v)
{
    heap_index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_index_[v]);
}

void Cdcl::heap_up(int i)
{
    const std::uint32_t v = heap_[i];
    while (i > 0) {
        const int parent = (i - 1) >> 1;
        if (activity_[heap_[parent]] >= activity_[v])
            break;
        heap_[i] = heap_[parent];
        heap_index_[heap_[i]] = i;
        i = parent;
    }
    heap_[i] = v;
    heap_index_[v] = i;
}

void Cdcl::heap_down(int i)
{
    const std::uint32_t v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    for (;;) {
        int child = 2 * i + 1;
        if (child >= n)
            break;
        if (child + 1 < n && activity_[heap_[child + 1]] > activity_[heap_[child]])
            ++child;
        if (activity_[heap_[child]] <= activity_[v])
            break;
        heap_[i] = heap_[child];
        heap_index_[heap_[i]] = i;
        i = child;
    }
    heap_[i] = v;
    heap_index_[v] = i;
}

std::uint32_t Cdcl::heap_pop()
{
    const std::uint32_t top = heap_[0];
    heap_index_[top] = -1;
    const std::uint32_t last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_[0] = last;
        heap_index_[last] = 0;
        heap_down(0);
    }
    return top;
}

} // namespace snapattack::sat
