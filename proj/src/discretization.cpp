#include "perifem/discretization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace perifem {

QuadratureRule gauss_rule(int n)
{
    std::vector<std::pair<double, double>> g;
    switch (n) {
    case 1:
        g = {{0.0, 2.0}};
        break;
    case 2: {
        const double a = 1.0 / std::sqrt(3.0);
        g = {{-a, 1.0}, {a, 1.0}};
        break;
    }
    case 3: {
        const double a = std::sqrt(0.6);
        g = {{-a, 5.0 / 9.0}, {0.0, 8.0 / 9.0}, {a, 5.0 / 9.0}};
        break;
    }
    default:
        throw std::invalid_argument("gauss_rule: supported orders are 1, 2, 3");
    }
    QuadratureRule rule;
    for (const auto& [eta, we] : g)
        for (const auto& [xi, wx] : g)
            rule.points.push_back({Vec2(xi, eta), wx * we});
    return rule;
}

Shape4 shape_quad4(const Vec2& local)
{
    const double r = local.x(), s = local.y();
    return {0.25 * (1 - r) * (1 - s), 0.25 * (1 + r) * (1 - s), 0.25 * (1 + r) * (1 + s),
            0.25 * (1 - r) * (1 + s)};
}

PhysicalPoint map_to_physical(const Mesh& mesh, int ce, const Vec2& local)
{
    const auto p = mesh.corners(ce);
    const auto n = shape_quad4(local);
    const double r = local.x(), s = local.y();
    const double dr[4] = {-(1 - s), (1 - s), (1 + s), -(1 + s)};
    const double ds[4] = {-(1 - r), -(1 + r), (1 + r), (1 - r)};
    PhysicalPoint out;
    Vec2 gr = Vec2::Zero(), gs = Vec2::Zero();
    for (int a = 0; a < 4; ++a) {
        out.x += n[a] * p[a];
        gr += 0.25 * dr[a] * p[a];
        gs += 0.25 * ds[a] * p[a];
    }
    out.detJ = gr.x() * gs.y() - gr.y() * gs.x();
    if (!(out.detJ > 0.0))
        throw InvariantError("element " + std::to_string(ce) + ": non-positive Jacobian");
    return out;
}

std::vector<BondQuadraturePair> pe_quadrature(const Mesh& mesh, const PeriElement& pe,
                                              const QuadratureRule& rule, const MaterialParams& p)
{
    const auto nq = static_cast<int>(rule.size());
    std::vector<PhysicalPoint> xj(nq), xi(nq);
    for (int q = 0; q < nq; ++q) {
        xj[q] = map_to_physical(mesh, pe.ej, rule.points[q].local);
        xi[q] = map_to_physical(mesh, pe.ei, rule.points[q].local);
    }
    const double t2 = p.thickness * p.thickness;
    std::vector<BondQuadraturePair> pairs;
    pairs.reserve(static_cast<std::size_t>(nq) * nq);
    for (int a = 0; a < nq; ++a)
        for (int b = 0; b < nq; ++b) {
            BondQuadraturePair bp;
            bp.pe_id = pe.id;
            bp.gp_j = a;
            bp.gp_i = b;
            bp.x_prime = xj[a].x;
            bp.x = xi[b].x;
            bp.xi = bp.x_prime - bp.x;
            bp.n_prime = shape_quad4(rule.points[a].local);
            bp.n = shape_quad4(rule.points[b].local);
            bp.weight = t2 * xj[a].detJ * xi[b].detJ * rule.points[a].weight * rule.points[b].weight;
            const double r = bp.xi.norm();
            bp.active = r <= p.delta && r >= p.min_bond_length;
            pairs.push_back(bp);
        }
    return pairs;
}

void add_pair_contribution(PeMatrix& k, const Shape4& n_prime, const Shape4& n, const Vec2& xi,
                           double scale)
{
    Eigen::Matrix<double, 16, 1> v;
    for (int a = 0; a < 4; ++a) {
        v(2 * a) = n_prime[a] * xi.x();
        v(2 * a + 1) = n_prime[a] * xi.y();
        v(8 + 2 * a) = -n[a] * xi.x();
        v(8 + 2 * a + 1) = -n[a] * xi.y();
    }
    k.noalias() += scale * v * v.transpose();
}

PeMatrix pe_stiffness(const PeriElement& pe, const std::vector<BondQuadraturePair>& pairs,
                      const MaterialParams& p)
{
    PeMatrix k = PeMatrix::Zero();
    for (const auto& bp : pairs) {
        if (bp.pe_id != pe.id)
            throw std::invalid_argument("pe_stiffness: pair belongs to another PE");
        if (!bp.active || bp.flag == BondFlag::broken)
            continue;
        // B^T D B with D = c/r^2 xi xi^T factors as (c/r^2) v v^T, v = B^T xi
        const double r2 = bp.xi.squaredNorm();
        add_pair_contribution(k, bp.n_prime, bp.n, bp.xi, bp.weight * micromodulus(std::sqrt(r2), p) / r2);
    }
    return k;
}

CeVector ce_load_vector(const Mesh& mesh, int ce, const BodyForce& b, const QuadratureRule& rule,
                        double thickness)
{
    CeVector f = CeVector::Zero();
    for (const auto& qp : rule.points) {
        const auto pt = map_to_physical(mesh, ce, qp.local);
        const auto n = shape_quad4(qp.local);
        const Vec2 bx = b(pt.x);
        const double w = qp.weight * pt.detJ * thickness;
        for (int a = 0; a < 4; ++a) {
            f(2 * a) += w * n[a] * bx.x();
            f(2 * a + 1) += w * n[a] * bx.y();
        }
    }
    return f;
}

} // namespace perifem
