#include "oracles.hpp"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

double radial_moment(double delta, double ell)
{
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate([ell](double r) { return std::exp(-r / ell) * r * r * r; }, 0.0, delta, 1e-15);
}

namespace {

struct GaussPoint {
    int element;
    Eigen::Vector2d x;
    double volume;
    double n[4];
};

std::vector<GaussPoint> gauss_points(const perifem::Mesh& mesh, double thickness)
{
    const double g = 1.0 / std::sqrt(3.0);
    const double loc[2] = {-g, g};
    std::vector<GaussPoint> out;
    for (const auto& e : mesh.elements()) {
        Eigen::Vector2d X[4];
        for (int a = 0; a < 4; ++a)
            X[a] = mesh.position(e.node_ids[a]);
        for (double eta : loc)
            for (double xi : loc) {
                GaussPoint gp{e.id, Eigen::Vector2d::Zero(), 0.0, {}};
                gp.n[0] = 0.25 * (1 - xi) * (1 - eta);
                gp.n[1] = 0.25 * (1 + xi) * (1 - eta);
                gp.n[2] = 0.25 * (1 + xi) * (1 + eta);
                gp.n[3] = 0.25 * (1 - xi) * (1 + eta);
                const double dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
                const double deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
                Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
                for (int a = 0; a < 4; ++a) {
                    gp.x += gp.n[a] * X[a];
                    J.col(0) += dxi[a] * X[a];
                    J.col(1) += deta[a] * X[a];
                }
                gp.volume = J.determinant() * thickness;   // unit Gauss weights
                out.push_back(gp);
            }
    }
    return out;
}

} // namespace

Eigen::MatrixXd brute_force_stiffness(const perifem::Mesh& mesh, const perifem::MaterialParams& p)
{
    const auto pts = gauss_points(mesh, p.thickness);
    const int n = 2 * static_cast<int>(mesh.num_nodes());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd v(n);
    for (const auto& a : pts)
        for (const auto& b : pts) {
            const Eigen::Vector2d xi = a.x - b.x;
            const double r = xi.norm();
            if (r < p.min_bond_length || r > p.delta)
                continue;
            const double c = p.tau0 * std::exp(-r / p.ell);
            v.setZero();
            const auto& na = mesh.elements()[a.element].node_ids;
            const auto& nb = mesh.elements()[b.element].node_ids;
            for (int i = 0; i < 4; ++i) {
                v.segment<2>(2 * na[i]) += a.n[i] * xi;
                v.segment<2>(2 * nb[i]) -= b.n[i] * xi;
            }
            k += (a.volume * b.volume * c / (r * r)) * v * v.transpose();
        }
    return k;
}

std::array<Eigen::VectorXd, 3> rigid_modes(const perifem::Mesh& mesh)
{
    const int n = static_cast<int>(mesh.num_nodes());
    std::array<Eigen::VectorXd, 3> m{Eigen::VectorXd::Zero(2 * n), Eigen::VectorXd::Zero(2 * n),
                                     Eigen::VectorXd::Zero(2 * n)};
    for (const auto& node : mesh.nodes()) {
        m[0][2 * node.id] = 1.0;
        m[1][2 * node.id + 1] = 1.0;
        m[2][2 * node.id] = -node.position.y();
        m[2][2 * node.id + 1] = node.position.x();
    }
    return m;
}

} // namespace oracle
