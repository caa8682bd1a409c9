#include "perifem/bonds.hpp"

#include <algorithm>
#include <unordered_map>

namespace perifem {

BondTable::BondTable(const Mesh& mesh, const PeSet& pes, const QuadratureRule& rule,
                     const MaterialParams& p)
    : gps_per_element_(static_cast<int>(rule.size()))
{
    const auto m = static_cast<int>(mesh.num_elements());
    sites_.reserve(static_cast<std::size_t>(m) * gps_per_element_);
    for (int e = 0; e < m; ++e)
        for (int q = 0; q < gps_per_element_; ++q) {
            const auto pt = map_to_physical(mesh, e, rule.points[q].local);
            sites_.push_back({e, q, pt.x, rule.points[q].weight * pt.detJ * p.thickness,
                              shape_quad4(rule.points[q].local)});
        }

    // Same geometry and activity test as pe_quadrature, evaluated on the shared sites.
    std::unordered_map<long long, int> bond_of;
    const long long ns = static_cast<long long>(sites_.size());
    pe_offsets_.reserve(pes.size() + 1);
    pe_offsets_.push_back(0);
    for (const auto& pe : pes.pes) {
        for (int a = 0; a < gps_per_element_; ++a)
            for (int b = 0; b < gps_per_element_; ++b) {
                const int sp = site_index(pe.ej, a), s = site_index(pe.ei, b);
                const Vec2 xi = sites_[sp].x - sites_[s].x;
                const double r = xi.norm();
                if (!(r <= p.delta && r >= p.min_bond_length) || sp == s)
                    continue;
                const int lo = std::min(sp, s), hi = std::max(sp, s);
                auto [it, fresh] = bond_of.try_emplace(lo * ns + hi, static_cast<int>(bonds_.size()));
                if (fresh)
                    bonds_.push_back({lo, hi, sites_[lo].x - sites_[hi].x, r,
                                      sites_[lo].volume * sites_[hi].volume, BondFlag::intact});
                pairs_.push_back({it->second, sp, s});
            }
        pe_offsets_.push_back(pairs_.size());
    }

    std::vector<std::size_t> count(sites_.size() + 1, 0);
    for (const auto& b : bonds_) {
        ++count[b.site_a + 1];
        ++count[b.site_b + 1];
    }
    for (std::size_t k = 1; k < count.size(); ++k)
        count[k] += count[k - 1];
    site_offsets_ = count;
    site_bonds_.resize(count.back());
    std::vector<std::size_t> fill(count.begin(), count.end() - 1);
    for (int id = 0; id < static_cast<int>(bonds_.size()); ++id) {
        site_bonds_[fill[bonds_[id].site_a]++] = id;
        site_bonds_[fill[bonds_[id].site_b]++] = id;
    }
}

std::size_t BondTable::broken_count() const
{
    return static_cast<std::size_t>(std::count_if(bonds_.begin(), bonds_.end(),
                                                  [](const Bond& b) { return b.flag == BondFlag::broken; }));
}

} // namespace perifem
