#include "perifem/export.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace perifem {

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_for_writing(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace

void export_field_vtk(const Mesh& mesh, const Vector& d, const std::vector<double>& phi,
                      const std::filesystem::path& path)
{
    const auto n = mesh.num_nodes();
    if (static_cast<std::size_t>(d.size()) != 2 * n || phi.size() != n)
        throw std::invalid_argument("export_field_vtk: field sizes do not match the mesh");

    auto out = open_for_writing(path);
    out << "# vtk DataFile Version 2.0\nperifem field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n << " double\n";
    for (const auto& node : mesh.nodes())
        out << fmt(node.position.x()) << ' ' << fmt(node.position.y()) << " 0\n";
    const auto m = mesh.num_elements();
    out << "CELLS " << m << ' ' << 5 * m << '\n';
    for (const auto& e : mesh.elements())
        out << "4 " << e.node_ids[0] << ' ' << e.node_ids[1] << ' ' << e.node_ids[2] << ' ' << e.node_ids[3] << '\n';
    out << "CELL_TYPES " << m << '\n';
    for (std::size_t i = 0; i < m; ++i)
        out << "9\n";
    out << "POINT_DATA " << n << "\nVECTORS displacement double\n";
    for (std::size_t i = 0; i < n; ++i)
        out << fmt(d[2 * i]) << ' ' << fmt(d[2 * i + 1]) << " 0\n";
    out << "SCALARS damage double 1\nLOOKUP_TABLE default\n";
    for (double v : phi)
        out << fmt(v) << '\n';
    finish(out, path);
}

std::vector<std::string> history_columns(const LoadHistory& history)
{
    std::vector<std::string> cols{"step", "scale", "displacement"};
    std::multiset<std::string> seen;
    for (const auto& t : history.tracked)
        seen.insert(t.node_set);
    for (const auto& t : history.tracked) {
        std::string name = "force_" + t.node_set;
        if (seen.count(t.node_set) > 1)
            name += t.component == 0 ? "_x" : "_y";
        cols.push_back(name);
    }
    cols.insert(cols.end(), {"new_breaks", "max_damage", "inner_iters"});
    return cols;
}

void export_history_csv(const LoadHistory& history, const std::filesystem::path& path)
{
    if (history.records.empty())
        throw std::invalid_argument("export_history_csv: empty history");
    auto out = open_for_writing(path);
    const auto cols = history_columns(history);
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& rec : history.records) {
        out << rec.step << ',' << fmt(rec.scale) << ',' << fmt(rec.displacement);
        for (const auto& t : history.tracked) {
            const auto it = rec.resultants.find(t.node_set);
            const double v = it == rec.resultants.end() ? 0.0 : it->second[t.component];
            out << ',' << fmt(v);
        }
        out << ',' << rec.new_breaks << ',' << fmt(rec.max_damage) << ',' << rec.inner_iterations << '\n';
    }
    finish(out, path);
}

} // namespace perifem
