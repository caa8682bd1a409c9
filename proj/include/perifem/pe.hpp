#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "perifem/mesh.hpp"

namespace perifem {

/// Ordered pair of continuous elements: ej houses x', ei houses x.
struct PeriElement {
    int id = 0;
    int ej = 0;
    int ei = 0;
    /// Nodes of ej followed by nodes of ei; duplicates are kept.
    std::array<int, 8> node_ids{};
};

struct PeSet {
    std::vector<PeriElement> pes;
    /// neighborhoods[i]: sorted ids of CEs within the horizon of CE i (including i).
    std::vector<std::vector<int>> neighborhoods;

    std::size_t size() const noexcept { return pes.size(); }
};

/// All CEs whose closed quad lies within distance delta of CE ei, ei included.
std::vector<int> element_neighborhood(const Mesh& mesh, int ei, double delta);

/// One PE per ordered pair (ej, ei) with ej in H_i, ordered by ei then ej.
PeSet generate_pe_set(const Mesh& mesh, double delta);

/// Debug dump "pe_id,ej,ei".
void write_pe_csv(const PeSet& set, std::ostream& os);

} // namespace perifem
