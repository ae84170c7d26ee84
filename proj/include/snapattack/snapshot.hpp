#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "snapattack/dom_sim.hpp"
#include "snapattack/rng.hpp"

namespace snapattack {

// Logical bit order of a register file: rows in order, then share index,
// then bit 7 down to bit 0; the fsm bits follow.
int logical_index(int row, int share_index, int bit, int d);
std::vector<std::uint8_t> logical_bits(const RegisterFile& rf);

// Hidden physical placement: logical bit position -> observation index.
class PlacementMap {
public:
    PlacementMap() = default;
    // Throws std::invalid_argument unless `forward` is a permutation.
    explicit PlacementMap(std::vector<int> forward);
    static PlacementMap identity(int n);

    int size() const { return static_cast<int>(forward_.size()); }
    int operator()(int logical) const { return forward_[logical]; }
    int logical_of(int physical) const { return inverse_[physical]; }
    const std::vector<int>& forward() const { return forward_; }
    PlacementMap inverse() const { return PlacementMap(inverse_); }
    PlacementMap compose(const PlacementMap& inner) const; // this(inner(x))

    bool operator==(const PlacementMap& other) const { return forward_ == other.forward_; }

private:
    std::vector<int> forward_;
    std::vector<int> inverse_;
};

struct ObservationVector {
    int cycle = 0;
    std::vector<std::uint8_t> bits; // 0/1, length n

    int size() const { return static_cast<int>(bits.size()); }
    bool operator==(const ObservationVector&) const = default;
};

PlacementMap random_placement(int n, Rng& rng);

// Throws std::invalid_argument if the map does not cover rf's bit count.
ObservationVector place(const RegisterFile& rf, const PlacementMap& pm);
std::vector<std::uint8_t> unplace(const ObservationVector& obs, const PlacementMap& pm);

ObservationVector corrupt(const ObservationVector& obs, double flip_prob, Rng& rng);

// Places a whole trace under one map, the only way the attack path should
// build its observations.
std::vector<ObservationVector> place_trace(const std::vector<RegisterFile>& trace, const PlacementMap& pm);

// Snapshot set "cycle,obs_index,bit" and ground-truth placement
// "logical_index,obs_index".
void write_snapshots_csv(const std::vector<ObservationVector>& obs, std::ostream& out);
std::vector<ObservationVector> read_snapshots_csv(std::istream& in);
void write_placement_csv(const PlacementMap& pm, std::ostream& out);
PlacementMap read_placement_csv(std::istream& in);

} // namespace snapattack
