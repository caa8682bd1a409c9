#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's discretization code so that agreement is meaningful.

#include <Eigen/Dense>

#include "perifem/material.hpp"
#include "perifem/mesh.hpp"

namespace oracle {

/// Integral of exp(-r/ell) r^3 over [0, delta] by adaptive tanh-sinh quadrature.
double radial_moment(double delta, double ell);

/// Dense global stiffness summed over every ordered pair of 2x2 Gauss points
/// in the mesh, with shape functions and Jacobians evaluated from scratch.
Eigen::MatrixXd brute_force_stiffness(const perifem::Mesh& mesh, const perifem::MaterialParams& p);

/// Translation in x, translation in y and linearized rotation about the origin.
std::array<Eigen::VectorXd, 3> rigid_modes(const perifem::Mesh& mesh);

} // namespace oracle
