#pragma once

#include <cstdint>
#include <span>

#include "perifem/types.hpp"

namespace perifem {

/// Bond-based constitutive parameters. Units: N, mm, MPa.
struct MaterialParams {
    double E = 30000.0;       ///< Young's modulus
    double nu = 1.0 / 3.0;    ///< fixed by the 2D bond-based model
    double delta = 3.0;       ///< horizon
    double ell = 0.2;         ///< characteristic length of the exponential kernel
    double tau0 = 0.0;        ///< micromodulus coefficient, see calibrate_tau0
    double s_crit = 0.02;     ///< critical stretch; +inf disables failure
    double thickness = 1.0;
    /// Quadrature pairs closer than this are skipped (1e-9 h by default).
    double min_bond_length = 1e-9;

    /// Throws InvariantError unless every field is admissible.
    void validate() const;
};

/// Builds calibrated parameters for mesh size h: delta = horizon_factor * h,
/// ell = delta / ell_divisor, tau0 from calibrate_tau0.
MaterialParams make_material(double E, double nu, double s_crit, double thickness, double h,
                             double horizon_factor = 3.0, double ell_divisor = 15.0);

/// c(r) = tau0 * exp(-r / ell). Accepts ell = +inf (constant kernel).
double micromodulus(double r, const MaterialParams& p);

/// Integral of exp(-r/ell) r^3 over [0, delta].
double kernel_moment(double delta, double ell);

/// Plane-stress energy matching under isotropic extension:
/// (pi/2) tau0 * kernel_moment(delta, ell) = E / (1 - nu).
double calibrate_tau0(double E, double nu, double delta, double ell);

/// Irreversible bond state: 1 intact, 0 broken.
enum class BondFlag : std::uint8_t { broken = 0, intact = 1 };

inline double mu_value(BondFlag f) { return f == BondFlag::intact ? 1.0 : 0.0; }

/// 2x2 micromodulus matrix c(|xi|) mu / |xi|^2 * xi xi^T.
Mat2 micromodulus_matrix(const Vec2& xi, BondFlag mu, const MaterialParams& p);

/// (|xi + eta| - |xi|) / |xi|
double bond_stretch(const Vec2& xi, const Vec2& eta);

BondFlag update_bond_flag(double s, double s_crit, BondFlag prev);

/// Energy dissipated by breaking a bond of length r: c(r) s_crit^2 r^4 / 2.
double critical_energy(double r, const MaterialParams& p);

struct DamageBond {
    BondFlag mu = BondFlag::intact;
    double r = 0.0;
    double weight = 0.0;   ///< quadrature weight of the bond's partner point
};

/// Energy-weighted broken fraction over the bonds incident to one point.
/// Bonds longer than delta are ignored. An empty set yields 0 and a warning.
double effective_damage_at(std::span<const DamageBond> bonds, const MaterialParams& p);

} // namespace perifem
