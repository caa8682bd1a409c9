#include "perifem/check.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "perifem/assembly.hpp"
#include "perifem/bonds.hpp"
#include "perifem/discretization.hpp"
#include "perifem/material.hpp"
#include "perifem/mesh.hpp"
#include "perifem/pe.hpp"

namespace perifem {

namespace {

std::string sci(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

CheckOutcome check_calibration()
{
    CheckOutcome out{"calibration", true, ""};
    const double E = 30000.0, nu = 1.0 / 3.0;
    const std::pair<double, double> cases[] = {{3.0, 0.2}, {3.0, 3.0 / 15.0 * 3.0}, {1.5, 0.1}};
    double worst = 0.0;
    for (const auto& [delta, ell] : cases) {
        const double tau0 = calibrate_tau0(E, nu, delta, ell);
        const auto f = [ell = ell](double r) { return std::exp(-r / ell) * r * r * r; };
        const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, delta, 15, 1e-14);
        const double target = E / (1.0 - nu);
        worst = std::max(worst, std::abs(0.5 * std::numbers::pi * tau0 * integral - target) / target);
    }
    out.passed = worst <= 1e-8;
    out.detail = "max relative residual " + sci(worst);
    return out;
}

CheckOutcome check_pe_counts()
{
    CheckOutcome out{"pe-count laws", true, ""};
    const Mesh mesh = generate_rect_mesh(3.0, 3.0, 3, 3);
    const PeSet set = generate_pe_set(mesh, 3.0);
    std::size_t total = 0;
    std::set<std::pair<int, int>> pairs;
    for (const auto& h : set.neighborhoods)
        total += h.size();
    for (const auto& pe : set.pes)
        pairs.emplace(pe.ej, pe.ei);
    std::vector<std::string> failures;
    if (total != set.pes.size())
        failures.push_back("count != sum of neighborhood sizes");
    if (set.neighborhoods[4].size() != 9)
        failures.push_back("center neighborhood does not hold all 9 elements");
    for (const auto& [a, b] : pairs)
        if (!pairs.count({b, a}))
            failures.push_back("missing mirror pair");
    for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e)
        if (!pairs.count({e, e}))
            failures.push_back("missing self pair");
    out.passed = failures.empty();
    out.detail = out.passed ? std::to_string(set.pes.size()) + " PEs" : failures.front();
    return out;
}

struct Fixture {
    Mesh mesh;
    MaterialParams p;
    SparseSym k;
};

Fixture grid_fixture()
{
    Fixture fx;
    fx.mesh = generate_rect_mesh(3.0, 3.0, 3, 3);
    fx.p = make_material(30000.0, 1.0 / 3.0, 0.02, 1.0, 1.0);
    const PeSet pes = generate_pe_set(fx.mesh, fx.p.delta);
    const auto rule = gauss_rule(2);
    const BondTable table(fx.mesh, pes, rule, fx.p);
    fx.k = assemble_stiffness(fx.mesh, pes, table, fx.p);
    return fx;
}

CheckOutcome check_symmetry_nullspace(const Fixture& fx)
{
    CheckOutcome out{"stiffness symmetry / null space", true, ""};
    const auto& k = fx.k;
    const double norm = k.norm_inf();
    const int n = static_cast<int>(fx.mesh.num_nodes());
    const double asym = k.max_asymmetry();

    Vector tx = Vector::Zero(2 * n), ty = Vector::Zero(2 * n), rot = Vector::Zero(2 * n);
    for (const auto& node : fx.mesh.nodes()) {
        tx[2 * node.id] = 1.0;
        ty[2 * node.id + 1] = 1.0;
        rot[2 * node.id] = -node.position.y();
        rot[2 * node.id + 1] = node.position.x();
    }
    double worst = 0.0;
    for (const Vector* v : {&tx, &ty, &rot})
        worst = std::max(worst, k.multiply(*v).lpNorm<Eigen::Infinity>() / (norm * v->lpNorm<Eigen::Infinity>()));
    out.passed = asym <= 1e-12 * norm && worst <= 1e-9;
    out.detail = "asymmetry/|K| " + sci(asym / norm) + ", rigid-mode residual " + sci(worst);
    return out;
}

/// Dense stiffness from every ordered pair of Gauss points in the mesh.
Eigen::MatrixXd brute_force(const Mesh& mesh, const MaterialParams& p)
{
    const auto rule = gauss_rule(2);
    struct Pt {
        int e;
        Vec2 x;
        double w;
        Shape4 n;
    };
    std::vector<Pt> pts;
    for (const auto& e : mesh.elements())
        for (const auto& q : rule.points) {
            const auto mp = map_to_physical(mesh, e.id, q.local);
            pts.push_back({e.id, mp.x, q.weight * mp.detJ * p.thickness, shape_quad4(q.local)});
        }
    const int n = 2 * static_cast<int>(mesh.num_nodes());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd v(n);
    for (const auto& a : pts)
        for (const auto& b : pts) {
            const Vec2 xi = a.x - b.x;
            const double r = xi.norm();
            if (r < p.min_bond_length || r > p.delta)
                continue;
            v.setZero();
            const auto& na = mesh.elements()[a.e].node_ids;
            const auto& nb = mesh.elements()[b.e].node_ids;
            for (int i = 0; i < 4; ++i) {
                v.segment<2>(2 * na[i]) += a.n[i] * xi;
                v.segment<2>(2 * nb[i]) -= b.n[i] * xi;
            }
            k += (a.w * b.w * micromodulus(r, p) / (r * r)) * v * v.transpose();
        }
    return k;
}

CheckOutcome check_assembly_oracle(const Fixture& fx)
{
    CheckOutcome out{"assembly oracle", true, ""};
    const Eigen::MatrixXd ref = brute_force(fx.mesh, fx.p);
    const double rel = (fx.k.to_dense() - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
    out.passed = rel <= 1e-12;
    out.detail = "max relative entry difference " + sci(rel);
    return out;
}

} // namespace

std::vector<CheckOutcome> run_builtin_checks()
{
    std::vector<CheckOutcome> out;
    out.push_back(check_calibration());
    out.push_back(check_pe_counts());
    const Fixture fx = grid_fixture();
    out.push_back(check_symmetry_nullspace(fx));
    out.push_back(check_assembly_oracle(fx));
    return out;
}

} // namespace perifem
