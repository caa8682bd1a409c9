#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "perifem/material.hpp"
#include "perifem/mesh.hpp"
#include "perifem/pe.hpp"

namespace perifem {

struct QuadPoint {
    Vec2 local = Vec2::Zero();
    double weight = 0.0;
};

/// Tensor-product Gauss rule on [-1, 1]^2.
struct QuadratureRule {
    std::vector<QuadPoint> points;

    std::size_t size() const noexcept { return points.size(); }
};

/// n x n Gauss-Legendre rule, n in 1..3. The default discretization uses n = 2.
QuadratureRule gauss_rule(int n = 2);

using Shape4 = std::array<double, 4>;

/// Bilinear shape functions, nodes at (-1,-1), (1,-1), (1,1), (-1,1).
Shape4 shape_quad4(const Vec2& local);

struct PhysicalPoint {
    Vec2 x = Vec2::Zero();
    double detJ = 0.0;
};

PhysicalPoint map_to_physical(const Mesh& mesh, int ce, const Vec2& local);

/// One Gauss point of ej (x') paired with one Gauss point of ei (x).
struct BondQuadraturePair {
    int pe_id = 0;
    int gp_j = 0;
    int gp_i = 0;
    Vec2 x_prime = Vec2::Zero();
    Vec2 x = Vec2::Zero();
    Vec2 xi = Vec2::Zero();          ///< x' - x
    Shape4 n_prime{};                ///< ej shape values at x'
    Shape4 n{};                      ///< ei shape values at x
    double weight = 0.0;             ///< t^2 detJ_j detJ_i w_j w_i
    bool active = false;             ///< min_bond_length <= |xi| <= delta
    BondFlag flag = BondFlag::intact;
};

std::vector<BondQuadraturePair> pe_quadrature(const Mesh& mesh, const PeriElement& pe,
                                              const QuadratureRule& rule, const MaterialParams& p);

using PeMatrix = Eigen::Matrix<double, 16, 16>;
using CeVector = Eigen::Matrix<double, 8, 1>;

/// Sum over active pairs of weight * B^T D(xi) B with B = [N_j(x') I, -N_i(x) I].
/// Local dof 2a + c is component c of the PE's a-th node.
PeMatrix pe_stiffness(const PeriElement& pe, const std::vector<BondQuadraturePair>& pairs,
                      const MaterialParams& p);

/// Adds scale * v v^T with v = g (x) xi, g = [n_prime, -n] (one pair's contribution
/// with the micromodulus factor folded into scale).
void add_pair_contribution(PeMatrix& k, const Shape4& n_prime, const Shape4& n, const Vec2& xi,
                           double scale);

using BodyForce = std::function<Vec2(const Vec2&)>;

/// Integral of N^T b over a CE (times thickness).
CeVector ce_load_vector(const Mesh& mesh, int ce, const BodyForce& b, const QuadratureRule& rule,
                        double thickness);

} // namespace perifem
