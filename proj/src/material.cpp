#include "perifem/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "perifem/log.hpp"

namespace perifem {

void MaterialParams::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw InvariantError(std::string("material: ") + name + " must be positive");
    };
    positive(E, "E");
    positive(delta, "horizon");
    positive(ell, "ell");
    positive(tau0, "tau0");
    positive(thickness, "thickness");
    if (!(s_crit >= 0.0))
        throw InvariantError("material: s_crit must be non-negative");
    if (std::abs(nu - 1.0 / 3.0) > 1e-12)
        throw InvariantError("material: nu must equal 1/3 for the 2D bond-based model (got " +
                             std::to_string(nu) + ")");
}

MaterialParams make_material(double E, double nu, double s_crit, double thickness, double h,
                             double horizon_factor, double ell_divisor)
{
    if (!(h > 0.0) || !(horizon_factor > 0.0) || !(ell_divisor > 0.0))
        throw InvariantError("material: h, horizon factor and ell divisor must be positive");
    MaterialParams p;
    p.E = E;
    p.nu = nu;
    p.s_crit = s_crit;
    p.thickness = thickness;
    p.delta = horizon_factor * h;
    p.ell = p.delta / ell_divisor;
    p.min_bond_length = 1e-9 * h;
    if (std::abs(nu - 1.0 / 3.0) > 1e-12)
        throw InvariantError("material: nu must equal 1/3 for the 2D bond-based model (got " +
                             std::to_string(nu) + ")");
    p.tau0 = calibrate_tau0(E, nu, p.delta, p.ell);
    p.validate();
    return p;
}

double micromodulus(double r, const MaterialParams& p) { return p.tau0 * std::exp(-r / p.ell); }

double kernel_moment(double delta, double ell)
{
    // delta^4 * sum_k (-x)^k / (k! (k + 4)) for small x = delta/ell; closed form
    // via the lower incomplete gamma function gamma(4, x) otherwise.
    const double x = delta / ell;
    if (x <= 2.0) {
        double term = 1.0, sum = 0.0;
        for (int k = 0; k < 60; ++k) {
            sum += term / (k + 4);
            term *= -x / (k + 1);
            if (std::abs(term) < 1e-18)
                break;
        }
        return std::pow(delta, 4) * sum;
    }
    const double tail = std::exp(-x) * (1.0 + x + x * x / 2.0 + x * x * x / 6.0);
    return 6.0 * std::pow(ell, 4) * (1.0 - tail);
}

double calibrate_tau0(double E, double nu, double delta, double ell)
{
    if (std::abs(nu - 1.0 / 3.0) > 1e-12)
        throw InvariantError("calibrate_tau0: nu must equal 1/3");
    if (!(delta > 0.0) || !(ell > 0.0))
        throw InvariantError("calibrate_tau0: delta and ell must be positive");
    const double moment = kernel_moment(delta, ell);
    if (!std::isfinite(moment) || !(moment > 0.0))
        throw std::runtime_error("calibrate_tau0: radial kernel moment is not finite");
    return E / (1.0 - nu) / (0.5 * std::numbers::pi * moment);
}

Mat2 micromodulus_matrix(const Vec2& xi, BondFlag mu, const MaterialParams& p)
{
    const double r2 = xi.squaredNorm();
    if (!(r2 > 0.0))
        throw std::invalid_argument("micromodulus_matrix: zero-length bond");
    const double scale = micromodulus(std::sqrt(r2), p) * mu_value(mu) / r2;
    const double off = scale * xi.x() * xi.y();
    Mat2 m;
    m << scale * xi.x() * xi.x(), off, off, scale * xi.y() * xi.y();
    return m;
}

double bond_stretch(const Vec2& xi, const Vec2& eta)
{
    const double r = xi.norm();
    if (!(r > 0.0))
        throw std::invalid_argument("bond_stretch: zero-length bond");
    return ((xi + eta).norm() - r) / r;
}

BondFlag update_bond_flag(double s, double s_crit, BondFlag prev)
{
    if (prev == BondFlag::broken || s >= s_crit)
        return BondFlag::broken;
    return BondFlag::intact;
}

double critical_energy(double r, const MaterialParams& p)
{
    return 0.5 * micromodulus(r, p) * p.s_crit * p.s_crit * std::pow(r, 4);
}

double effective_damage_at(std::span<const DamageBond> bonds, const MaterialParams& p)
{
    // s_crit^2 / 2 is common to numerator and denominator and is left out so
    // that elastic runs (s_crit = inf) stay finite.
    double num = 0.0, den = 0.0;
    for (const auto& b : bonds) {
        if (b.r > p.delta)
            continue;
        const double w = micromodulus(b.r, p) * std::pow(b.r, 4) * b.weight;
        den += w;
        if (b.mu == BondFlag::broken)
            num += w;
    }
    if (!(den > 0.0)) {
        log_warning("effective damage requested at a point without bonds; using 0");
        return 0.0;
    }
    return std::clamp(num / den, 0.0, 1.0);
}

} // namespace perifem
