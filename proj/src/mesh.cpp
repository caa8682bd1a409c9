#include "perifem/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/Geometry>
#include <sstream>

namespace perifem {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::array<Vec2, 4>& p)
{
    double a = 0.0;
    for (int k = 0; k < 4; ++k)
        a += cross(p[k], p[(k + 1) % 4]);
    return 0.5 * a;
}

// Jacobian determinant of the bilinear map at a reference point.
double bilinear_det(const std::array<Vec2, 4>& p, double xi, double eta)
{
    const double dxi[4] = {-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)};
    const double deta[4] = {-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)};
    Vec2 gxi = Vec2::Zero(), geta = Vec2::Zero();
    for (int a = 0; a < 4; ++a) {
        gxi += 0.25 * dxi[a] * p[a];
        geta += 0.25 * deta[a] * p[a];
    }
    return cross(gxi, geta);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (a + t * ab - p).norm();
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

// Point inside (or on) a CCW convex quad.
bool inside_convex(const Vec2& p, const std::array<Vec2, 4>& q)
{
    for (int k = 0; k < 4; ++k)
        if (cross(q[(k + 1) % 4] - q[k], p - q[k]) < 0.0)
            return false;
    return true;
}

void validate_element(const Mesh& mesh, const ContinuousElement& e)
{
    const auto id = std::to_string(e.id);
    for (int a = 0; a < 4; ++a) {
        if (e.node_ids[a] < 0 || static_cast<std::size_t>(e.node_ids[a]) >= mesh.num_nodes())
            throw InvariantError("element " + id + ": unknown node " + std::to_string(e.node_ids[a]));
        for (int b = 0; b < a; ++b)
            if (e.node_ids[a] == e.node_ids[b])
                throw InvariantError("element " + id + ": repeated node " + std::to_string(e.node_ids[a]));
    }
    const auto p = mesh.corners(e.id);
    for (int k = 0; k < 4; ++k)
        if (cross(p[(k + 1) % 4] - p[k], p[(k + 2) % 4] - p[(k + 1) % 4]) <= 0.0)
            throw InvariantError("element " + id + ": not convex or not counter-clockwise");
    const double g = 1.0 / std::sqrt(3.0);
    for (double xi : {-g, g})
        for (double eta : {-g, g})
            if (!(bilinear_det(p, xi, eta) > 0.0))
                throw InvariantError("element " + id + ": non-positive Jacobian");
}

} // namespace

Mesh::Mesh(std::vector<Node> nodes, std::vector<ContinuousElement> elements, NodeSets node_sets)
    : nodes_(std::move(nodes)), elements_(std::move(elements)), node_sets_(std::move(node_sets))
{
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id != static_cast<int>(i))
            throw InvariantError("node ids must be dense 0..n-1 (found " + std::to_string(nodes_[i].id) +
                                 " at position " + std::to_string(i) + ")");
        if (!nodes_[i].position.allFinite())
            throw InvariantError("node " + std::to_string(i) + ": non-finite position");
    }
    std::set<std::array<int, 4>> seen;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        if (elements_[e].id != static_cast<int>(e))
            throw InvariantError("element ids must be dense 0..m-1 (found " +
                                 std::to_string(elements_[e].id) + ")");
        validate_element(*this, elements_[e]);
        auto key = elements_[e].node_ids;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second)
            throw InvariantError("element " + std::to_string(e) + ": duplicates another element");
    }
    for (const auto& [name, ids] : node_sets_)
        for (int id : ids)
            if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
                throw InvariantError("node set " + name + ": unknown node " + std::to_string(id));
}

std::array<Vec2, 4> Mesh::corners(int element) const
{
    const auto& e = elements_.at(element);
    return {nodes_[e.node_ids[0]].position, nodes_[e.node_ids[1]].position,
            nodes_[e.node_ids[2]].position, nodes_[e.node_ids[3]].position};
}

const std::vector<int>& Mesh::node_set(const std::string& name) const
{
    auto it = node_sets_.find(name);
    if (it == node_sets_.end())
        throw std::out_of_range("unknown node set: " + name);
    return it->second;
}

// ---------------------------------------------------------------------------
// File format

namespace {

struct Token {
    std::string text;
    int line;
};

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> out;
    int line = 1;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view l = text.substr(pos, eol - pos);
        if (auto hash = l.find('#'); hash != std::string_view::npos)
            l = l.substr(0, hash);
        std::size_t i = 0;
        while (i < l.size()) {
            while (i < l.size() && std::isspace(static_cast<unsigned char>(l[i])))
                ++i;
            std::size_t j = i;
            while (j < l.size() && !std::isspace(static_cast<unsigned char>(l[j])))
                ++j;
            if (j > i)
                out.push_back({std::string(l.substr(i, j - i)), line});
            i = j;
        }
        pos = eol + 1;
        ++line;
    }
    return out;
}

class TokenStream {
public:
    explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    bool done() const { return pos_ >= tokens_.size(); }
    int line() const { return done() ? (tokens_.empty() ? 0 : tokens_.back().line) : tokens_[pos_].line; }

    const std::string& next(const char* what)
    {
        if (done())
            throw ParseError(std::string("unexpected end of file, expected ") + what, line());
        return tokens_[pos_++].text;
    }

    long integer(const char* what)
    {
        const int ln = line();
        const auto& t = next(what);
        long v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || p != t.data() + t.size())
            throw ParseError(std::string("expected integer ") + what + ", got '" + t + "'", ln);
        return v;
    }

    double real(const char* what)
    {
        const int ln = line();
        const auto& t = next(what);
        try {
            std::size_t used = 0;
            double v = std::stod(t, &used);
            if (used != t.size())
                throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ParseError(std::string("expected number ") + what + ", got '" + t + "'", ln);
        }
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Mesh load_mesh(std::string_view text)
{
    TokenStream ts(tokenize(text));
    if (ts.done())
        throw ParseError("empty mesh file", 0);
    {
        const int ln = ts.line();
        const auto& a = ts.next("header");
        const auto& b = ts.next("header");
        if (a != "peri-fem-mesh" || b != "v1")
            throw ParseError("missing header 'peri-fem-mesh v1'", ln);
    }

    std::vector<Node> nodes;
    std::vector<ContinuousElement> elements;
    NodeSets sets;
    bool have_nodes = false, have_elements = false;

    while (!ts.done()) {
        const int ln = ts.line();
        const std::string section = ts.next("section");
        if (section == "NODES") {
            if (have_nodes)
                throw ParseError("duplicate NODES section", ln);
            have_nodes = true;
            const long n = ts.integer("node count");
            if (n < 0)
                throw ParseError("negative node count", ln);
            nodes.reserve(n);
            for (long k = 0; k < n; ++k) {
                const int nl = ts.line();
                Node node;
                node.id = static_cast<int>(ts.integer("node id"));
                node.position.x() = ts.real("x");
                node.position.y() = ts.real("y");
                if (node.id != k)
                    throw ParseError("node ids must be dense and ordered (expected " + std::to_string(k) + ")", nl);
                nodes.push_back(node);
            }
        } else if (section == "ELEMENTS") {
            if (have_elements)
                throw ParseError("duplicate ELEMENTS section", ln);
            have_elements = true;
            const long m = ts.integer("element count");
            if (m < 0)
                throw ParseError("negative element count", ln);
            for (long k = 0; k < m; ++k) {
                const int el = ts.line();
                ContinuousElement e;
                e.id = static_cast<int>(ts.integer("element id"));
                if (e.id != k)
                    throw ParseError("element ids must be dense and ordered (expected " + std::to_string(k) + ")", el);
                for (int a = 0; a < 4; ++a) {
                    const long nid = ts.integer("element node");
                    if (!have_nodes || nid < 0 || nid >= static_cast<long>(nodes.size()))
                        throw ParseError("element " + std::to_string(e.id) + ": unknown node " + std::to_string(nid), el);
                    e.node_ids[a] = static_cast<int>(nid);
                }
                elements.push_back(e);
            }
        } else if (section == "NODESET") {
            const std::string name = ts.next("node set name");
            const long k = ts.integer("node set size");
            if (k < 0)
                throw ParseError("negative node set size", ln);
            if (sets.count(name))
                throw ParseError("duplicate node set " + name, ln);
            auto& ids = sets[name];
            for (long q = 0; q < k; ++q) {
                const int il = ts.line();
                const long nid = ts.integer("node set member");
                if (nid < 0 || nid >= static_cast<long>(nodes.size()))
                    throw ParseError("node set " + name + ": unknown node " + std::to_string(nid), il);
                ids.push_back(static_cast<int>(nid));
            }
        } else {
            throw ParseError("unknown section '" + section + "'", ln);
        }
    }
    if (!have_nodes || !have_elements)
        throw ParseError("mesh file needs NODES and ELEMENTS sections", 0);
    return Mesh(std::move(nodes), std::move(elements), std::move(sets));
}

std::string write_mesh(const Mesh& mesh)
{
    std::ostringstream os;
    os << "peri-fem-mesh v1\n";
    os << "NODES " << mesh.num_nodes() << "\n";
    for (const auto& n : mesh.nodes())
        os << n.id << ' ' << fmt17(n.position.x()) << ' ' << fmt17(n.position.y()) << "\n";
    os << "ELEMENTS " << mesh.num_elements() << "\n";
    for (const auto& e : mesh.elements())
        os << e.id << ' ' << e.node_ids[0] << ' ' << e.node_ids[1] << ' ' << e.node_ids[2] << ' '
           << e.node_ids[3] << "\n";
    for (const auto& [name, ids] : mesh.node_sets()) {
        os << "NODESET " << name << ' ' << ids.size() << "\n";
        for (std::size_t k = 0; k < ids.size(); ++k)
            os << ids[k] << ((k + 1) % 16 == 0 || k + 1 == ids.size() ? "\n" : " ");
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Geometry queries

double element_area(const Mesh& mesh, int element) { return signed_area(mesh.corners(element)); }

double average_element_size(const Mesh& mesh)
{
    if (mesh.num_elements() == 0)
        throw std::invalid_argument("average_element_size: empty mesh");
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        sum += std::sqrt(element_area(mesh, static_cast<int>(e)));
    return sum / static_cast<double>(mesh.num_elements());
}

Vec2 element_centroid(const Mesh& mesh, int element)
{
    // area centroid of the polygon
    const auto p = mesh.corners(element);
    double a = 0.0;
    Vec2 c = Vec2::Zero();
    for (int k = 0; k < 4; ++k) {
        const double w = cross(p[k], p[(k + 1) % 4]);
        a += w;
        c += w * (p[k] + p[(k + 1) % 4]);
    }
    return c / (3.0 * a);
}

double element_distance(const Mesh& mesh, int ei, int ej)
{
    if (ei < 0 || ej < 0 || static_cast<std::size_t>(ei) >= mesh.num_elements() ||
        static_cast<std::size_t>(ej) >= mesh.num_elements())
        throw std::out_of_range("element_distance: invalid element id");
    if (ei == ej)
        return 0.0;
    const auto p = mesh.corners(ei);
    const auto q = mesh.corners(ej);
    for (int k = 0; k < 4; ++k) {
        if (inside_convex(p[k], q) || inside_convex(q[k], p))
            return 0.0;
        for (int l = 0; l < 4; ++l)
            if (segments_intersect(p[k], p[(k + 1) % 4], q[l], q[(l + 1) % 4]))
                return 0.0;
    }
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            d = std::min(d, point_segment_distance(p[k], q[l], q[(l + 1) % 4]));
            d = std::min(d, point_segment_distance(q[k], p[l], p[(l + 1) % 4]));
        }
    return d;
}

std::vector<std::array<int, 2>> boundary_edges(const Mesh& mesh)
{
    std::map<std::pair<int, int>, int> count;
    for (const auto& e : mesh.elements())
        for (int k = 0; k < 4; ++k) {
            int a = e.node_ids[k], b = e.node_ids[(k + 1) % 4];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    std::vector<std::array<int, 2>> out;
    for (const auto& e : mesh.elements())
        for (int k = 0; k < 4; ++k) {
            int a = e.node_ids[k], b = e.node_ids[(k + 1) % 4];
            if (count[{std::min(a, b), std::max(a, b)}] == 1)
                out.push_back({a, b});
        }
    return out;
}

std::vector<std::vector<int>> boundary_loops(const Mesh& mesh)
{
    const auto edges = boundary_edges(mesh);
    std::multimap<int, int> next;
    for (const auto& e : edges)
        next.emplace(e[0], e[1]);
    std::vector<std::vector<int>> loops;
    while (!next.empty()) {
        auto it = next.begin();
        const int start = it->first;
        std::vector<int> loop{start};
        int cur = it->second;
        next.erase(it);
        while (cur != start) {
            loop.push_back(cur);
            auto nx = next.find(cur);
            if (nx == next.end())
                break; // open chain; only possible for non-manifold input
            cur = nx->second;
            next.erase(nx);
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

// Grid coordinates with piecewise-uniform spacing through the given breakpoints.
std::vector<double> graded_axis(std::vector<double> breaks, double h)
{
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 breaks.end());
    std::vector<double> out{breaks.front()};
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double len = breaks[s + 1] - breaks[s];
        const int n = std::max(1, static_cast<int>(std::lround(len / h)));
        for (int k = 1; k <= n; ++k)
            out.push_back(k == n ? breaks[s + 1] : breaks[s] + len * k / n);
    }
    return out;
}

// Assembles a mesh from candidate nodes and quads: orients quads CCW, drops
// unreferenced nodes and renumbers densely. Node sets are given by predicates
// over positions and evaluated after compaction.
struct MeshBuilder {
    std::vector<Vec2> points;
    std::vector<std::array<int, 4>> quads;

    int add_point(const Vec2& p)
    {
        points.push_back(p);
        return static_cast<int>(points.size()) - 1;
    }

    template <class Selectors>
    Mesh build(const Selectors& selectors) const
    {
        std::vector<char> used(points.size(), 0);
        for (const auto& q : quads)
            for (int id : q)
                used[id] = 1;
        // node ids follow insertion order of the referenced points
        std::vector<int> order;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (used[i])
                order.push_back(static_cast<int>(i));
        std::vector<int> remap(points.size(), -1);
        std::vector<Node> nodes;
        for (std::size_t k = 0; k < order.size(); ++k) {
            remap[order[k]] = static_cast<int>(k);
            nodes.push_back({static_cast<int>(k), points[order[k]]});
        }
        std::vector<ContinuousElement> elements;
        for (const auto& q : quads) {
            ContinuousElement e;
            e.id = static_cast<int>(elements.size());
            for (int a = 0; a < 4; ++a)
                e.node_ids[a] = remap[q[a]];
            std::array<Vec2, 4> p;
            for (int a = 0; a < 4; ++a)
                p[a] = nodes[e.node_ids[a]].position;
            if (signed_area(p) < 0.0)
                std::swap(e.node_ids[1], e.node_ids[3]);
            elements.push_back(e);
        }
        NodeSets sets;
        for (const auto& [name, pred] : selectors) {
            auto& ids = sets[name];
            for (const auto& n : nodes)
                if (pred(n.position))
                    ids.push_back(n.id);
        }
        return Mesh(std::move(nodes), std::move(elements), std::move(sets));
    }
};

using Selector = std::pair<std::string, std::function<bool(const Vec2&)>>;

// Tensor-product grid over xs × ys, skipping cells for which `skip` holds.
template <class Skip>
void add_grid(MeshBuilder& b, const std::vector<double>& xs, const std::vector<double>& ys, Skip skip)
{
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;
    const int base = static_cast<int>(b.points.size());
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            b.add_point({xs[i], ys[j]});
    auto id = [&](int i, int j) { return base + j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Vec2 c{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
            if (!skip(c))
                b.quads.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
        }
}

Mesh beam_mesh(const BeamGeometry& g)
{
    if (g.length <= 0 || g.height <= 0 || g.h <= 0)
        throw std::invalid_argument("notched_beam: dimensions and h must be positive");
    const double xc = g.notch_center < 0 ? 0.5 * g.length : g.notch_center;
    const double x0 = xc - 0.5 * g.notch_width, x1 = xc + 0.5 * g.notch_width;
    if (g.notch_length < 0 || g.notch_length >= g.height || x0 < 0 || x1 > g.length)
        throw std::invalid_argument("notched_beam: notch exceeds specimen bounds");
    const bool notched = g.notch_length > 0;
    if (notched && g.h > g.notch_width * (1 + 1e-12))
        throw std::invalid_argument("notched_beam: element size h larger than notch width");

    std::vector<double> xb{0.0, g.length}, yb{0.0, g.height};
    if (notched) {
        xb.insert(xb.end(), {x0, x1});
        yb.push_back(g.notch_length);
    }
    const auto xs = graded_axis(xb, g.h);
    const auto ys = graded_axis(yb, g.h);
    MeshBuilder b;
    add_grid(b, xs, ys, [&](const Vec2& c) {
        return notched && c.x() > x0 && c.x() < x1 && c.y() < g.notch_length;
    });

    const double tol = 1e-9 * std::max(g.length, g.height);
    const double r = g.patch_half_width + tol;
    const double xl = 0.5 * g.length - 0.5 * g.load_span, xr = 0.5 * g.length + 0.5 * g.load_span;
    const double sl = g.support_inset, sr = g.length - g.support_inset;
    auto top = [=](const Vec2& p) { return std::abs(p.y() - g.height) < tol; };
    auto bottom = [=](const Vec2& p) { return std::abs(p.y()) < tol; };
    std::vector<Selector> sel{
        {"load", [=](const Vec2& p) { return top(p) && (std::abs(p.x() - xl) <= r || std::abs(p.x() - xr) <= r); }},
        {"load_left", [=](const Vec2& p) { return top(p) && std::abs(p.x() - xl) <= r; }},
        {"load_right", [=](const Vec2& p) { return top(p) && std::abs(p.x() - xr) <= r; }},
        {"support_left", [=](const Vec2& p) { return bottom(p) && std::abs(p.x() - sl) <= r; }},
        {"support_right", [=](const Vec2& p) { return bottom(p) && std::abs(p.x() - sr) <= r; }},
        {"top", top},
        {"bottom", bottom},
    };
    return b.build(sel);
}

Mesh plate_mesh(const PlateGeometry& g)
{
    if (g.width <= 0 || g.height <= 0 || g.h <= 0 || g.notch_depth < 0 || g.notch_width <= 0)
        throw std::invalid_argument("den_plate: dimensions and h must be positive");
    const double ym = 0.5 * g.height;
    const double y0 = ym - 0.5 * g.notch_width, y1 = ym + 0.5 * g.notch_width;
    if (2 * g.notch_depth >= g.width || y0 < 0 || y1 > g.height)
        throw std::invalid_argument("den_plate: notches exceed specimen bounds");
    const bool notched = g.notch_depth > 0;
    if (notched && g.h > g.notch_width * (1 + 1e-12))
        throw std::invalid_argument("den_plate: element size h larger than notch width");

    std::vector<double> xb{0.0, g.width}, yb{0.0, g.height};
    if (notched) {
        xb.insert(xb.end(), {g.notch_depth, g.width - g.notch_depth});
        yb.insert(yb.end(), {y0, y1});
    }
    MeshBuilder b;
    add_grid(b, graded_axis(xb, g.h), graded_axis(yb, g.h), [&](const Vec2& c) {
        return notched && c.y() > y0 && c.y() < y1 &&
               (c.x() < g.notch_depth || c.x() > g.width - g.notch_depth);
    });
    const double tol = 1e-9 * std::max(g.width, g.height);
    std::vector<Selector> sel{
        {"top", [=](const Vec2& p) { return std::abs(p.y() - g.height) < tol; }},
        {"bottom", [=](const Vec2& p) { return std::abs(p.y()) < tol; }},
        {"left", [=](const Vec2& p) { return std::abs(p.x()) < tol; }},
        {"right", [=](const Vec2& p) { return std::abs(p.x() - g.width) < tol; }},
        {"left_shear", [=](const Vec2& p) { return std::abs(p.x()) < tol && p.y() > y1 + tol; }},
        {"right_shear", [=](const Vec2& p) { return std::abs(p.x() - g.width) < tol && p.y() < y0 - tol; }},
    };
    return b.build(sel);
}

Mesh disk_mesh(const DiskGeometry& g)
{
    if (g.radius <= 0 || g.h <= 0 || g.slit_width <= 0 || g.slit_half_length < 0)
        throw std::invalid_argument("brazilian_disk: dimensions and h must be positive");
    const double s = g.inner_fraction * g.radius;
    if (!(g.inner_fraction > 0 && g.inner_fraction < 0.7))
        throw std::invalid_argument("brazilian_disk: inner_fraction must lie in (0, 0.7)");
    const double a = g.slit_half_length, w2 = 0.5 * g.slit_width;
    if (a >= s || w2 >= s)
        throw std::invalid_argument("brazilian_disk: slit exceeds the inner block");
    const bool slit = a > 0;
    if (slit && g.h > g.slit_width * (1 + 1e-12))
        throw std::invalid_argument("brazilian_disk: element size h larger than slit width");

    std::vector<double> xb{-s, s}, yb{-s, s};
    if (slit) {
        xb.insert(xb.end(), {-a, a});
        yb.insert(yb.end(), {-w2, w2});
    }
    const auto xs = graded_axis(xb, g.h);
    const auto ys = graded_axis(yb, g.h);
    MeshBuilder b;
    add_grid(b, xs, ys, [&](const Vec2& c) {
        return slit && std::abs(c.y()) < w2 && std::abs(c.x()) < a;
    });
    const Eigen::Rotation2Dd rot(g.slit_angle * std::numbers::pi / 180.0);
    for (auto& p : b.points)
        p = rot * p;

    // perimeter of the inner block, counter-clockwise
    const int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1;
    auto gid = [&](int i, int j) { return j * (nx + 1) + i; };
    std::vector<int> loop;
    for (int i = 0; i < nx; ++i) loop.push_back(gid(i, 0));
    for (int j = 0; j < ny; ++j) loop.push_back(gid(nx, j));
    for (int i = nx; i > 0; --i) loop.push_back(gid(i, ny));
    for (int j = ny; j > 0; --j) loop.push_back(gid(0, j));

    const int layers = std::max(1, static_cast<int>(std::lround((g.radius - 1.2 * s) / g.h)));
    const int np = static_cast<int>(loop.size());
    std::vector<std::vector<int>> ring(layers + 1);
    ring[0] = loop;
    for (int k = 1; k <= layers; ++k) {
        const double t = static_cast<double>(k) / layers;
        for (int q = 0; q < np; ++q) {
            const Vec2 p = b.points[loop[q]];
            const Vec2 c = g.radius * p.normalized();
            ring[k].push_back(b.add_point(k == layers ? c : Vec2((1 - t) * p + t * c)));
        }
    }
    for (int k = 0; k < layers; ++k)
        for (int q = 0; q < np; ++q) {
            const int q1 = (q + 1) % np;
            b.quads.push_back({ring[k][q], ring[k][q1], ring[k + 1][q1], ring[k + 1][q]});
        }

    const double tol = 1e-9 * g.radius;
    const double r = g.patch_half_width + tol;
    auto on_circle = [=](const Vec2& p) { return std::abs(p.norm() - g.radius) < 1e-7 * g.radius; };
    std::vector<Selector> sel{
        {"load_top", [=](const Vec2& p) { return on_circle(p) && p.y() > 0 && std::abs(p.x()) <= r; }},
        {"support_bottom", [=](const Vec2& p) { return on_circle(p) && p.y() < 0 && std::abs(p.x()) <= r; }},
        {"outer", on_circle},
    };
    return b.build(sel);
}

} // namespace

Mesh generate_rect_mesh(double width, double height, int nx, int ny)
{
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("generate_rect_mesh: nx and ny must be >= 1");
    if (!(width > 0) || !(height > 0))
        throw std::invalid_argument("generate_rect_mesh: width and height must be positive");
    std::vector<double> xs(nx + 1), ys(ny + 1);
    for (int i = 0; i <= nx; ++i) xs[i] = width * i / nx;
    for (int j = 0; j <= ny; ++j) ys[j] = height * j / ny;
    MeshBuilder b;
    add_grid(b, xs, ys, [](const Vec2&) { return false; });
    const double tol = 1e-9 * std::max(width, height);
    std::vector<Selector> sel{
        {"left", [=](const Vec2& p) { return std::abs(p.x()) < tol; }},
        {"right", [=](const Vec2& p) { return std::abs(p.x() - width) < tol; }},
        {"bottom", [=](const Vec2& p) { return std::abs(p.y()) < tol; }},
        {"top", [=](const Vec2& p) { return std::abs(p.y() - height) < tol; }},
    };
    return b.build(sel);
}

Mesh generate_specimen_mesh(const SpecimenGeometry& geometry)
{
    return std::visit(
        [](const auto& g) -> Mesh {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, BeamGeometry>)
                return beam_mesh(g);
            else if constexpr (std::is_same_v<T, DiskGeometry>)
                return disk_mesh(g);
            else
                return plate_mesh(g);
        },
        geometry);
}

} // namespace perifem
