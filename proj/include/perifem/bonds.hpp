#pragma once

#include <span>
#include <vector>

#include "perifem/discretization.hpp"

namespace perifem {

/// A CE Gauss point carrying its physical position and volume weight.
struct QuadSite {
    int element = 0;
    int gp = 0;
    Vec2 x = Vec2::Zero();
    double volume = 0.0;   ///< w * detJ * thickness
    Shape4 n{};
};

/// A physical bond between two distinct sites. Both ordered quadrature pairs
/// that realize it (one in PE (ej, ei), its mirror in PE (ei, ej)) share it.
struct Bond {
    int site_a = 0;        ///< site_a < site_b
    int site_b = 0;
    Vec2 xi = Vec2::Zero();   ///< x_a - x_b
    double r = 0.0;
    double weight = 0.0;      ///< volume_a * volume_b
    BondFlag flag = BondFlag::intact;
};

/// Active ordered pair of a PE: x' at site_prime (in ej), x at site (in ei).
struct OrderedPair {
    int bond = 0;
    int site_prime = 0;
    int site = 0;
};

/// Quadrature realization of all PEs with one irreversible flag per physical bond.
class BondTable {
public:
    BondTable(const Mesh& mesh, const PeSet& pes, const QuadratureRule& rule, const MaterialParams& p);

    const std::vector<QuadSite>& sites() const noexcept { return sites_; }
    const std::vector<Bond>& bonds() const noexcept { return bonds_; }
    std::size_t num_pes() const noexcept { return pe_offsets_.size() - 1; }
    std::size_t num_ordered_pairs() const noexcept { return pairs_.size(); }

    std::span<const OrderedPair> pairs_of(int pe) const
    {
        return {pairs_.data() + pe_offsets_[pe], pairs_.data() + pe_offsets_[pe + 1]};
    }
    /// Bonds incident to a site (each bond listed once per endpoint).
    std::span<const int> bonds_at(int site) const
    {
        return {site_bonds_.data() + site_offsets_[site], site_bonds_.data() + site_offsets_[site + 1]};
    }
    int site_index(int element, int gp) const { return element * gps_per_element_ + gp; }
    int gps_per_element() const noexcept { return gps_per_element_; }

    BondFlag flag(int bond) const { return bonds_[bond].flag; }
    /// Breaks a bond; breaking is irreversible and a no-op when already broken.
    void break_bond(int bond) { bonds_[bond].flag = BondFlag::broken; }
    std::size_t broken_count() const;

    /// xi of an ordered pair (x' - x).
    Vec2 pair_xi(const OrderedPair& op) const
    {
        const auto& b = bonds_[op.bond];
        return op.site_prime == b.site_a ? b.xi : Vec2(-b.xi);
    }

private:
    int gps_per_element_ = 0;
    std::vector<QuadSite> sites_;
    std::vector<Bond> bonds_;
    std::vector<OrderedPair> pairs_;
    std::vector<std::size_t> pe_offsets_;
    std::vector<std::size_t> site_offsets_;
    std::vector<int> site_bonds_;
};

} // namespace perifem
