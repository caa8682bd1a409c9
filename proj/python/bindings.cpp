#include <algorithm>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "perifem/assembly.hpp"
#include "perifem/check.hpp"
#include "perifem/config.hpp"
#include "perifem/export.hpp"
#include "perifem/fracture.hpp"
#include "perifem/log.hpp"

namespace py = pybind11;
using namespace perifem;

namespace {

Eigen::MatrixXd node_array(const Mesh& m)
{
    Eigen::MatrixXd x(m.num_nodes(), 2);
    for (const auto& n : m.nodes())
        x.row(n.id) = n.position.transpose();
    return x;
}

Eigen::MatrixXi element_array(const Mesh& m)
{
    Eigen::MatrixXi e(m.num_elements(), 4);
    for (const auto& el : m.elements())
        for (int a = 0; a < 4; ++a)
            e(el.id, a) = el.node_ids[a];
    return e;
}

Mesh mesh_from_arrays(const Eigen::MatrixXd& nodes, const Eigen::MatrixXi& elements, const NodeSets& sets)
{
    if (nodes.cols() != 2 || elements.cols() != 4)
        throw std::invalid_argument("expected nodes of shape (n, 2) and elements of shape (m, 4)");
    std::vector<Node> ns;
    for (Eigen::Index i = 0; i < nodes.rows(); ++i)
        ns.push_back({static_cast<int>(i), Vec2(nodes(i, 0), nodes(i, 1))});
    std::vector<ContinuousElement> es;
    for (Eigen::Index i = 0; i < elements.rows(); ++i)
        es.push_back({static_cast<int>(i), {elements(i, 0), elements(i, 1), elements(i, 2), elements(i, 3)}});
    return Mesh(std::move(ns), std::move(es), sets);
}

// CSR arrays (indptr, indices, data) ready for scipy.sparse.csr_matrix.
py::tuple csr_tuple(const SparseSym& k)
{
    std::vector<long long> ptr(k.row_ptr().begin(), k.row_ptr().end());
    return py::make_tuple(py::array(py::cast(ptr)), py::array(py::cast(k.cols())), py::array(py::cast(k.values())),
                          k.rows());
}

py::dict history_dict(const LoadHistory& h)
{
    py::dict out;
    std::vector<int> step, breaks, inner;
    std::vector<double> scale, disp, maxphi;
    std::vector<bool> cap;
    for (const auto& r : h.records) {
        step.push_back(r.step);
        scale.push_back(r.scale);
        disp.push_back(r.displacement);
        breaks.push_back(r.new_breaks);
        maxphi.push_back(r.max_damage);
        inner.push_back(r.inner_iterations);
        cap.push_back(r.cap_hit);
    }
    out["step"] = step;
    out["scale"] = scale;
    out["displacement"] = disp;
    out["new_breaks"] = breaks;
    out["max_damage"] = maxphi;
    out["inner_iters"] = inner;
    out["cap_hit"] = cap;
    py::dict forces;
    for (const auto& t : h.tracked) {
        std::vector<double> f;
        for (const auto& r : h.records)
            f.push_back(r.resultants.at(t.node_set)[t.component]);
        forces[py::str(t.node_set + (t.component == 0 ? ":x" : ":y"))] = f;
    }
    out["forces"] = forces;
    return out;
}

py::dict run_dict(const RunConfig& c)
{
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run_quasi_static(c);
    }
    py::dict out;
    out["history"] = history_dict(r.history);
    out["damage"] = py::array(py::cast(r.damage));
    out["displacement"] = r.displacement;
    out["num_pes"] = r.num_pes;
    out["num_bonds"] = r.num_bonds;
    out["first_break_step"] = r.first_break_step;
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : r.first_break_points)
        pts.push_back({p.x(), p.y()});
    out["first_break_points"] = pts;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Quasi-static bond-based peridynamic fracture with a finite-element style discretization";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
    py::register_exception<SingularSystemError>(m, "SingularSystemError", PyExc_RuntimeError);

    m.def("set_log_level", [](int level) { set_log_level(static_cast<LogLevel>(std::clamp(level, 0, 3))); },
          py::arg("level"), "0 quiet, 1 warnings, 2 info, 3 debug");

    py::class_<Mesh>(m, "Mesh")
        .def(py::init(&mesh_from_arrays), py::arg("nodes"), py::arg("elements"), py::arg("node_sets") = NodeSets{})
        .def_property_readonly("nodes", &node_array)
        .def_property_readonly("elements", &element_array)
        .def_property_readonly("node_sets", &Mesh::node_sets)
        .def_property_readonly("num_nodes", &Mesh::num_nodes)
        .def_property_readonly("num_elements", &Mesh::num_elements)
        .def("average_element_size", [](const Mesh& self) { return average_element_size(self); })
        .def("to_text", [](const Mesh& self) { return write_mesh(self); })
        .def_static("from_text", [](const std::string& s) { return load_mesh(s); });

    m.def("rect_mesh", &generate_rect_mesh, py::arg("width"), py::arg("height"), py::arg("nx"), py::arg("ny"));

    py::class_<BeamGeometry>(m, "BeamGeometry")
        .def(py::init<>())
        .def_readwrite("length", &BeamGeometry::length)
        .def_readwrite("height", &BeamGeometry::height)
        .def_readwrite("notch_length", &BeamGeometry::notch_length)
        .def_readwrite("notch_width", &BeamGeometry::notch_width)
        .def_readwrite("notch_center", &BeamGeometry::notch_center)
        .def_readwrite("support_inset", &BeamGeometry::support_inset)
        .def_readwrite("load_span", &BeamGeometry::load_span)
        .def_readwrite("patch_half_width", &BeamGeometry::patch_half_width)
        .def_readwrite("h", &BeamGeometry::h);
    py::class_<DiskGeometry>(m, "DiskGeometry")
        .def(py::init<>())
        .def_readwrite("radius", &DiskGeometry::radius)
        .def_readwrite("slit_half_length", &DiskGeometry::slit_half_length)
        .def_readwrite("slit_width", &DiskGeometry::slit_width)
        .def_readwrite("slit_angle", &DiskGeometry::slit_angle)
        .def_readwrite("inner_fraction", &DiskGeometry::inner_fraction)
        .def_readwrite("patch_half_width", &DiskGeometry::patch_half_width)
        .def_readwrite("h", &DiskGeometry::h);
    py::class_<PlateGeometry>(m, "PlateGeometry")
        .def(py::init<>())
        .def_readwrite("width", &PlateGeometry::width)
        .def_readwrite("height", &PlateGeometry::height)
        .def_readwrite("notch_depth", &PlateGeometry::notch_depth)
        .def_readwrite("notch_width", &PlateGeometry::notch_width)
        .def_readwrite("h", &PlateGeometry::h);
    m.def("specimen_mesh", [](const BeamGeometry& g) { return generate_specimen_mesh(g); });
    m.def("specimen_mesh", [](const DiskGeometry& g) { return generate_specimen_mesh(g); });
    m.def("specimen_mesh", [](const PlateGeometry& g) { return generate_specimen_mesh(g); });

    py::class_<MaterialParams>(m, "Material")
        .def_readonly("E", &MaterialParams::E)
        .def_readonly("nu", &MaterialParams::nu)
        .def_readonly("delta", &MaterialParams::delta)
        .def_readonly("ell", &MaterialParams::ell)
        .def_readonly("tau0", &MaterialParams::tau0)
        .def_readonly("s_crit", &MaterialParams::s_crit)
        .def_readonly("thickness", &MaterialParams::thickness);
    m.def("make_material", &make_material, py::arg("E"), py::arg("nu"), py::arg("s_crit"), py::arg("thickness"),
          py::arg("h"), py::arg("horizon_factor") = 3.0, py::arg("ell_divisor") = 15.0);
    m.def("calibrate_tau0", &calibrate_tau0, py::arg("E"), py::arg("nu"), py::arg("delta"), py::arg("ell"));

    m.def(
        "pe_pairs",
        [](const Mesh& mesh, double delta) {
            const PeSet set = generate_pe_set(mesh, delta);
            Eigen::MatrixXi out(set.size(), 2);
            for (const auto& pe : set.pes)
                out.row(pe.id) << pe.ej, pe.ei;
            return out;
        },
        py::arg("mesh"), py::arg("delta"), "(ej, ei) of every peridynamic element, in id order");

    m.def(
        "stiffness",
        [](const Mesh& mesh, const MaterialParams& p, int threads) {
            py::gil_scoped_release release;
            const PeSet pes = generate_pe_set(mesh, p.delta);
            const BondTable table(mesh, pes, gauss_rule(2), p);
            AssemblyOptions o;
            o.threads = threads;
            SparseSym k = assemble_stiffness(mesh, pes, table, p, o);
            py::gil_scoped_acquire acquire;
            return csr_tuple(k);
        },
        py::arg("mesh"), py::arg("material"), py::arg("threads") = 1,
        "Global stiffness K of 1/2 K d = F as CSR (indptr, indices, data, n)");

    m.def(
        "run_config_text",
        [](const std::string& text, const std::string& base_dir) {
            return run_dict(parse_config(text, base_dir).run);
        },
        py::arg("text"), py::arg("base_dir") = "");
    m.def(
        "run_config_file", [](const std::filesystem::path& path) { return run_dict(load_config(path).run); },
        py::arg("path"));

    m.def(
        "export_vtk",
        [](const Mesh& mesh, const Vector& d, const std::vector<double>& phi, const std::filesystem::path& path) {
            export_field_vtk(mesh, d, phi, path);
        },
        py::arg("mesh"), py::arg("displacement"), py::arg("damage"), py::arg("path"));

    m.def("check", [] {
        py::list out;
        for (const auto& c : run_builtin_checks())
            out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
    });
}
