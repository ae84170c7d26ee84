#include "snapattack/snapshot.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace snapattack {

int logical_index(int row, int share_index, int bit, int d)
{
    return (row * (d + 1) + share_index) * 8 + (7 - bit);
}

std::vector<std::uint8_t> logical_bits(const RegisterFile& rf)
{
    std::vector<std::uint8_t> bits;
    const std::size_t shares = rf.data_cells.empty() ? 0 : rf.data_cells.front().share_count();
    bits.reserve(rf.data_cells.size() * shares * 8 + rf.fsm_cells.size());
    for (const MaskedByte& cell : rf.data_cells)
        for (std::uint8_t s : cell.shares())
            for (int bit = 7; bit >= 0; --bit)
                bits.push_back(static_cast<std::uint8_t>((s >> bit) & 1));
    bits.insert(bits.end(), rf.fsm_cells.begin(), rf.fsm_cells.end());
    return bits;
}

PlacementMap::PlacementMap(std::vector<int> forward) : forward_(std::move(forward))
{
    inverse_.assign(forward_.size(), -1);
    for (std::size_t i = 0; i < forward_.size(); ++i) {
        const int p = forward_[i];
        if (p < 0 || p >= static_cast<int>(forward_.size()) || inverse_[p] != -1)
            throw std::invalid_argument("placement is not a permutation");
        inverse_[p] = static_cast<int>(i);
    }
}

PlacementMap PlacementMap::identity(int n)
{
    std::vector<int> fwd(n);
    for (int i = 0; i < n; ++i)
        fwd[i] = i;
    return PlacementMap(std::move(fwd));
}

PlacementMap PlacementMap::compose(const PlacementMap& inner) const
{
    if (inner.size() != size())
        throw std::invalid_argument("compose: size mismatch");
    std::vector<int> fwd(size());
    for (int i = 0; i < size(); ++i)
        fwd[i] = forward_[inner(i)];
    return PlacementMap(std::move(fwd));
}

PlacementMap random_placement(int n, Rng& rng)
{
    if (n < 1)
        throw std::invalid_argument("random_placement: n must be positive");
    std::vector<int> fwd(n);
    for (int i = 0; i < n; ++i)
        fwd[i] = i;
    // Fisher-Yates
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(i) + 1));
        std::swap(fwd[i], fwd[j]);
    }
    return PlacementMap(std::move(fwd));
}

ObservationVector place(const RegisterFile& rf, const PlacementMap& pm)
{
    const auto bits = logical_bits(rf);
    if (static_cast<int>(bits.size()) != pm.size())
        throw std::invalid_argument("place: register file has " + std::to_string(bits.size()) +
                                    " bits but placement covers " + std::to_string(pm.size()));
    ObservationVector obs;
    obs.cycle = rf.cycle;
    obs.bits.resize(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        obs.bits[pm(static_cast<int>(i))] = bits[i];
    return obs;
}

std::vector<std::uint8_t> unplace(const ObservationVector& obs, const PlacementMap& pm)
{
    if (obs.size() != pm.size())
        throw std::invalid_argument("unplace: size mismatch");
    std::vector<std::uint8_t> bits(obs.bits.size());
    for (int i = 0; i < pm.size(); ++i)
        bits[i] = obs.bits[pm(i)];
    return bits;
}

ObservationVector corrupt(const ObservationVector& obs, double flip_prob, Rng& rng)
{
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0))
        throw std::invalid_argument("corrupt: flip probability must be in [0, 1]");
    ObservationVector out = obs;
    for (auto& b : out.bits)
        if (rng.bernoulli(flip_prob))
            b ^= 1;
    return out;
}

std::vector<ObservationVector> place_trace(const std::vector<RegisterFile>& trace, const PlacementMap& pm)
{
    std::vector<ObservationVector> out;
    out.reserve(trace.size());
    for (const RegisterFile& rf : trace)
        out.push_back(place(rf, pm));
    return out;
}

void write_snapshots_csv(const std::vector<ObservationVector>& obs, std::ostream& out)
{
    out << "cycle,obs_index,bit\n";
    for (const auto& o : obs)
        for (int j = 0; j < o.size(); ++j)
            out << o.cycle << ',' << j << ',' << int(o.bits[j]) << '\n';
}

std::vector<ObservationVector> read_snapshots_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("cycle,obs_index,bit", 0) != 0)
        throw std::runtime_error("snapshot CSV: missing header");
    std::vector<ObservationVector> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream fields(line);
        int cycle, index, bit;
        char c1, c2;
        if (!(fields >> cycle >> c1 >> index >> c2 >> bit) || c1 != ',' || c2 != ',' || (bit != 0 && bit != 1))
            throw std::runtime_error("snapshot CSV: bad line '" + line + "'");
        if (out.empty() || out.back().cycle != cycle) {
            out.push_back({cycle, {}});
        }
        auto& bits = out.back().bits;
        if (index != static_cast<int>(bits.size()))
            throw std::runtime_error("snapshot CSV: observation indices must be dense and ordered");
        bits.push_back(static_cast<std::uint8_t>(bit));
    }
    for (const auto& o : out)
        if (o.size() != out.front().size())
            throw std::runtime_error("snapshot CSV: snapshots differ in length");
    return out;
}

void write_placement_csv(const PlacementMap& pm, std::ostream& out)
{
    out << "logical_index,obs_index\n";
    for (int i = 0; i < pm.size(); ++i)
        out << i << ',' << pm(i) << '\n';
}

PlacementMap read_placement_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("placement CSV: missing header");
    std::vector<int> fwd;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream fields(line);
        int logical, phys;
        char comma;
        if (!(fields >> logical >> comma >> phys) || logical != static_cast<int>(fwd.size()))
            throw std::runtime_error("placement CSV: bad line '" + line + "'");
        fwd.push_back(phys);
    }
    return PlacementMap(std::move(fwd));
}

} // namespace snapattack
