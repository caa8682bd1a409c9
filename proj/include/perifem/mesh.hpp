#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "perifem/types.hpp"

namespace perifem {

struct Node {
    int id = 0;
    Vec2 position = Vec2::Zero();
};

/// Bilinear quadrilateral; node ids in counter-clockwise order.
struct ContinuousElement {
    int id = 0;
    std::array<int, 4> node_ids{};
};

using NodeSets = std::map<std::string, std::vector<int>>;

class Mesh {
public:
    Mesh() = default;
    /// Validates on construction; throws InvariantError naming the offending element.
    Mesh(std::vector<Node> nodes, std::vector<ContinuousElement> elements, NodeSets node_sets = {});

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<ContinuousElement>& elements() const noexcept { return elements_; }
    const NodeSets& node_sets() const noexcept { return node_sets_; }

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_elements() const noexcept { return elements_.size(); }

    const Vec2& position(int node) const { return nodes_.at(node).position; }
    std::array<Vec2, 4> corners(int element) const;

    bool has_node_set(const std::string& name) const { return node_sets_.count(name) != 0; }
    const std::vector<int>& node_set(const std::string& name) const;

private:
    std::vector<Node> nodes_;
    std::vector<ContinuousElement> elements_;
    NodeSets node_sets_;
};

// Text format "peri-fem-mesh v1".
Mesh load_mesh(std::string_view text);
std::string write_mesh(const Mesh& mesh);

Mesh generate_rect_mesh(double width, double height, int nx, int ny);

double element_area(const Mesh& mesh, int element);
double average_element_size(const Mesh& mesh);
Vec2 element_centroid(const Mesh& mesh, int element);

/// Minimum distance between two closed quadrilaterals (0 when touching or overlapping).
double element_distance(const Mesh& mesh, int ei, int ej);

/// Edges (node pairs, oriented as in the owning element) used by exactly one element.
std::vector<std::array<int, 2>> boundary_edges(const Mesh& mesh);
/// Boundary edges chained into closed node loops.
std::vector<std::vector<int>> boundary_loops(const Mesh& mesh);

// ---------------------------------------------------------------------------
// Specimen generators. All lengths in mm.

/// Single-edge notched beam in four-point bending. The notch is an element-free
/// slit rising from the bottom edge.
struct BeamGeometry {
    double length = 75.0;
    double height = 20.0;
    double notch_length = 5.0;
    double notch_width = 3.0;
    double notch_center = -1.0;     ///< negative: mid-span
    double support_inset = 2.5;     ///< support distance from each beam end
    double load_span = 25.0;        ///< distance between the two top loading points
    double patch_half_width = 1.0;  ///< loading/support points collect nodes within this distance
    double h = 1.0;
};

/// Brazilian disk with a central slit, meshed as an O-grid.
struct DiskGeometry {
    double radius = 20.0;
    double slit_half_length = 5.0;
    double slit_width = 3.0;
    double slit_angle = 90.0;       ///< degrees from the x axis; 90 aligns the slit with the load
    double inner_fraction = 0.5;    ///< half-size of the inner square block relative to radius
    double patch_half_width = 1.0;
    double h = 1.0;
};

/// Square plate with two edge notches at mid-height.
struct PlateGeometry {
    double width = 50.0;
    double height = 50.0;
    double notch_depth = 6.25;
    double notch_width = 3.75;
    double h = 1.25;
};

using SpecimenGeometry = std::variant<BeamGeometry, DiskGeometry, PlateGeometry>;

Mesh generate_specimen_mesh(const SpecimenGeometry& geometry);

} // namespace perifem
