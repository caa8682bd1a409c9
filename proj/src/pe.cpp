#include "perifem/pe.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace perifem {

namespace {

struct Box {
    Vec2 lo, hi;
};

Box element_box(const Mesh& mesh, int e)
{
    const auto p = mesh.corners(e);
    Box b{p[0], p[0]};
    for (const auto& q : p) {
        b.lo = b.lo.cwiseMin(q);
        b.hi = b.hi.cwiseMax(q);
    }
    return b;
}

// Uniform bucket grid over element bounding boxes.
class ElementGrid {
public:
    ElementGrid(const Mesh& mesh, double cell) : cell_(cell)
    {
        const auto m = static_cast<int>(mesh.num_elements());
        boxes_.reserve(m);
        for (int e = 0; e < m; ++e)
            boxes_.push_back(element_box(mesh, e));
        origin_ = boxes_.empty() ? Vec2::Zero() : boxes_[0].lo;
        Vec2 top = origin_;
        for (const auto& b : boxes_) {
            origin_ = origin_.cwiseMin(b.lo);
            top = top.cwiseMax(b.hi);
        }
        nx_ = std::max(1, static_cast<int>(std::ceil((top.x() - origin_.x()) / cell_)) + 1);
        ny_ = std::max(1, static_cast<int>(std::ceil((top.y() - origin_.y()) / cell_)) + 1);
        buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (int e = 0; e < m; ++e)
            visit(boxes_[e], 0.0, [&](std::vector<int>& bucket) { bucket.push_back(e); });
    }

    const Box& box(int e) const { return boxes_[e]; }

    template <class F>
    void visit(const Box& b, double pad, F&& f)
    {
        auto ix = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - origin_.x()) / cell_)), 0, nx_ - 1); };
        auto iy = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - origin_.y()) / cell_)), 0, ny_ - 1); };
        for (int j = iy(b.lo.y() - pad); j <= iy(b.hi.y() + pad); ++j)
            for (int i = ix(b.lo.x() - pad); i <= ix(b.hi.x() + pad); ++i)
                f(buckets_[static_cast<std::size_t>(j) * nx_ + i]);
    }

private:
    double cell_;
    Vec2 origin_;
    int nx_ = 1, ny_ = 1;
    std::vector<Box> boxes_;
    std::vector<std::vector<int>> buckets_;
};

bool boxes_within(const Box& a, const Box& b, double d)
{
    const double gx = std::max({0.0, a.lo.x() - b.hi.x(), b.lo.x() - a.hi.x()});
    const double gy = std::max({0.0, a.lo.y() - b.hi.y(), b.lo.y() - a.hi.y()});
    return gx * gx + gy * gy <= d * d;
}

// Relative slack on the distance test so that touching-at-delta pairs are kept.
constexpr double kReachSlack = 1e-12;

std::vector<int> neighborhood(const Mesh& mesh, ElementGrid& grid, int ei, double delta)
{
    const double reach = delta * (1.0 + kReachSlack);
    std::vector<int> out;
    const Box& bi = grid.box(ei);
    grid.visit(bi, reach, [&](std::vector<int>& bucket) {
        for (int ej : bucket)
            if (boxes_within(bi, grid.box(ej), reach))
                out.push_back(ej);
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::erase_if(out, [&](int ej) { return ej != ei && element_distance(mesh, ei, ej) > reach; });
    return out;
}

} // namespace

std::vector<int> element_neighborhood(const Mesh& mesh, int ei, double delta)
{
    if (ei < 0 || static_cast<std::size_t>(ei) >= mesh.num_elements())
        throw std::out_of_range("element_neighborhood: invalid element id " + std::to_string(ei));
    if (!(delta > 0.0))
        throw std::invalid_argument("element_neighborhood: delta must be positive");
    ElementGrid grid(mesh, delta);
    return neighborhood(mesh, grid, ei, delta);
}

PeSet generate_pe_set(const Mesh& mesh, double delta)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("generate_pe_set: delta must be positive");
    PeSet set;
    const auto m = static_cast<int>(mesh.num_elements());
    if (m == 0)
        return set;
    ElementGrid grid(mesh, delta);
    set.neighborhoods.resize(m);
    for (int ei = 0; ei < m; ++ei)
        set.neighborhoods[ei] = neighborhood(mesh, grid, ei, delta);
    for (int ei = 0; ei < m; ++ei) {
        const auto& ni = mesh.elements()[ei].node_ids;
        for (int ej : set.neighborhoods[ei]) {
            const auto& nj = mesh.elements()[ej].node_ids;
            PeriElement pe;
            pe.id = static_cast<int>(set.pes.size());
            pe.ej = ej;
            pe.ei = ei;
            std::copy(nj.begin(), nj.end(), pe.node_ids.begin());
            std::copy(ni.begin(), ni.end(), pe.node_ids.begin() + 4);
            set.pes.push_back(pe);
        }
    }
    return set;
}

void write_pe_csv(const PeSet& set, std::ostream& os)
{
    os << "pe_id,ej,ei\n";
    for (const auto& pe : set.pes)
        os << pe.id << ',' << pe.ej << ',' << pe.ei << '\n';
}

} // namespace perifem
