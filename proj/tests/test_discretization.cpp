#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "perifem/discretization.hpp"

using namespace perifem;

namespace {

MaterialParams material(double h = 1.0)
{
    return make_material(30000.0, 1.0 / 3.0, 0.02, 1.0, h);
}

Mesh jittered(int nx, int ny, double amount, unsigned seed)
{
    const Mesh g = generate_rect_mesh(nx, ny, nx, ny);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-amount, amount);
    auto nodes = g.nodes();
    for (auto& n : nodes)
        n.position += Vec2(u(rng), u(rng));
    return Mesh(nodes, g.elements());
}

Eigen::Matrix<double, 16, 1> pe_vector(const Mesh& m, const PeriElement& pe, const std::function<Vec2(Vec2)>& f)
{
    Eigen::Matrix<double, 16, 1> v;
    for (int a = 0; a < 8; ++a)
        v.segment<2>(2 * a) = f(m.position(pe.node_ids[a]));
    return v;
}

} // namespace

TEST_CASE("gauss_rule")
{
    for (int n = 1; n <= 3; ++n) {
        const auto rule = gauss_rule(n);
        CHECK(rule.size() == static_cast<std::size_t>(n * n));
        double sum = 0.0;
        for (const auto& q : rule.points)
            sum += q.weight;
        CHECK(sum == doctest::Approx(4.0).epsilon(1e-15));
    }
    // 2x2 integrates bicubics exactly on the reference square
    double acc = 0.0;
    for (const auto& q : gauss_rule(2).points)
        acc += q.weight * std::pow(q.local.x(), 2) * std::pow(q.local.y(), 2) * (1 + q.local.x() * q.local.y());
    CHECK(acc == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK_THROWS(gauss_rule(0));
    CHECK_THROWS(gauss_rule(4));
}

TEST_CASE("shape_quad4")
{
    const auto a = shape_quad4(Vec2(-1, -1));
    CHECK(a == Shape4{1, 0, 0, 0});
    const auto c = shape_quad4(Vec2(0, 0));
    for (double v : c)
        CHECK(v == 0.25);
    const Vec2 corners[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (int i = 0; i < 4; ++i) {
        const auto n = shape_quad4(corners[i]);
        for (int j = 0; j < 4; ++j)
            CHECK(n[j] == (i == j ? 1.0 : 0.0));
    }
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 100; ++i) {
        const auto n = shape_quad4(Vec2(u(rng), u(rng)));
        CHECK(n[0] + n[1] + n[2] + n[3] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("map_to_physical")
{
    const Mesh unit = generate_rect_mesh(1, 1, 1, 1);
    const auto c = map_to_physical(unit, 0, Vec2(0, 0));
    CHECK(c.x.isApprox(Vec2(0.5, 0.5)));
    CHECK(c.detJ == doctest::Approx(0.25));
    const Vec2 corners[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (int i = 0; i < 4; ++i)
        CHECK((map_to_physical(unit, 0, corners[i]).x - unit.position(unit.elements()[0].node_ids[i])).norm() < 1e-15);

    // affine (parallelogram) element: constant Jacobian
    const Mesh para({{0, {0, 0}}, {1, {2, 0}}, {2, {3, 1}}, {3, {1, 1}}}, {{0, {0, 1, 2, 3}}});
    const double d0 = map_to_physical(para, 0, gauss_rule(2).points[0].local).detJ;
    for (const auto& q : gauss_rule(2).points)
        CHECK(map_to_physical(para, 0, q.local).detJ == doctest::Approx(d0).epsilon(1e-14));
    CHECK(d0 == doctest::Approx(0.5));
}

TEST_CASE("pe_quadrature")
{
    const Mesh m = generate_rect_mesh(2, 1, 2, 1);
    const MaterialParams p = material();
    const PeSet s = generate_pe_set(m, p.delta);
    const auto rule = gauss_rule(2);
    for (const auto& pe : s.pes) {
        const auto pairs = pe_quadrature(m, pe, rule, p);
        REQUIRE(pairs.size() == 16);
        for (const auto& bp : pairs) {
            CHECK((bp.xi - (bp.x_prime - bp.x)).norm() == 0.0);
            CHECK(bp.weight > 0.0);
            CHECK(bp.weight == doctest::Approx(1.0 / 16).epsilon(1e-14));   // (1/4 * 1)^2 per pair
        }
        if (pe.ej == pe.ei) {
            int inactive = 0;
            for (const auto& bp : pairs)
                inactive += !bp.active;
            CHECK(inactive == 4);   // coincident Gauss points
        }
    }

    // gap larger than the horizon: nothing active
    const Mesh apart({{0, {0, 0}}, {1, {1, 0}}, {2, {1, 1}}, {3, {0, 1}},
                      {4, {6, 0}}, {5, {7, 0}}, {6, {7, 1}}, {7, {6, 1}}},
                     {{0, {0, 1, 2, 3}}, {1, {4, 5, 6, 7}}});
    for (const auto& bp : pe_quadrature(apart, PeriElement{0, 1, 0, {4, 5, 6, 7, 0, 1, 2, 3}}, rule, p))
        CHECK_FALSE(bp.active);

    // a tiny element: self pairs collapse below min_bond_length
    const double t = 1e-10;
    const Mesh tiny({{0, {0, 0}}, {1, {t, 0}}, {2, {t, t}}, {3, {0, t}}}, {{0, {0, 1, 2, 3}}});
    int inactive = 0;
    for (const auto& bp : pe_quadrature(tiny, PeriElement{0, 0, 0, {0, 1, 2, 3, 0, 1, 2, 3}}, rule, p))
        inactive += !bp.active;
    CHECK(inactive == 16);
}

TEST_CASE("pe_stiffness properties on random PEs")
{
    const Mesh m = jittered(5, 4, 0.2, 42);
    const MaterialParams p = material();
    const PeSet s = generate_pe_set(m, p.delta);
    const auto rule = gauss_rule(2);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(s.size()) - 1);
    for (int trial = 0; trial < 40; ++trial) {
        const auto& pe = s.pes[pick(rng)];
        const auto pairs = pe_quadrature(m, pe, rule, p);
        const PeMatrix k = pe_stiffness(pe, pairs, p);
        const double kmax = k.cwiseAbs().maxCoeff();
        if (kmax == 0.0)
            continue;
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * kmax);

        const auto tx = pe_vector(m, pe, [](Vec2) { return Vec2(1, 0); });
        const auto ty = pe_vector(m, pe, [](Vec2) { return Vec2(0, 1); });
        const auto rot = pe_vector(m, pe, [](Vec2 x) { return Vec2(-x.y(), x.x()); });
        for (const auto* v : {&tx, &ty, &rot})
            CHECK((k * *v).cwiseAbs().maxCoeff() <= 1e-10 * kmax * v->cwiseAbs().maxCoeff());

        const Eigen::SelfAdjointEigenSolver<PeMatrix> eig(k);
        CHECK(eig.eigenvalues()[0] >= -1e-10 * eig.eigenvalues()[15]);

        // a larger horizon never lowers a diagonal entry
        MaterialParams wide = p;
        wide.delta = 1.5 * p.delta;
        const PeMatrix kw = pe_stiffness(pe, pe_quadrature(m, pe, rule, wide), wide);
        for (int i = 0; i < 16; ++i)
            CHECK(kw(i, i) >= k(i, i) - 1e-14 * kmax);

        auto broken = pairs;
        for (auto& bp : broken)
            bp.flag = BondFlag::broken;
        CHECK(pe_stiffness(pe, broken, p).isZero(0.0));
    }
}

TEST_CASE("pe_stiffness with one Gauss point equals a hand-evaluated term")
{
    // unit squares [0,1]^2 and [2,3]x[0,1], centroid pair: xi = (-2, 0) for PE (ej=0, ei=1)
    const Mesh m({{0, {0, 0}}, {1, {1, 0}}, {2, {1, 1}}, {3, {0, 1}},
                  {4, {2, 0}}, {5, {3, 0}}, {6, {3, 1}}, {7, {2, 1}}},
                 {{0, {0, 1, 2, 3}}, {1, {4, 5, 6, 7}}});
    const MaterialParams p = material();
    const PeriElement pe{0, 0, 1, {0, 1, 2, 3, 4, 5, 6, 7}};
    const auto pairs = pe_quadrature(m, pe, gauss_rule(1), p);
    REQUIRE(pairs.size() == 1);
    const PeMatrix k = pe_stiffness(pe, pairs, p);

    // weight = (4 * 1/4)^2 = 1; D = c(2) diag(1, 0); B = [N_j I, -N_i I] with N = 1/4
    const double c = p.tau0 * std::exp(-2.0 / p.ell);
    PeMatrix expected = PeMatrix::Zero();
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            const double sa = a < 4 ? 0.25 : -0.25, sb = b < 4 ? 0.25 : -0.25;
            expected(2 * a, 2 * b) = c * sa * sb;
        }
    CHECK((k - expected).cwiseAbs().maxCoeff() <= 1e-14 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("ce_load_vector")
{
    const Mesh unit = generate_rect_mesh(1, 1, 1, 1);
    const auto rule = gauss_rule(2);
    CHECK(ce_load_vector(unit, 0, [](const Vec2&) { return Vec2::Zero(); }, rule, 1.0).isZero(0.0));

    const CeVector f = ce_load_vector(unit, 0, [](const Vec2&) { return Vec2(2.0, -3.0); }, rule, 0.5);
    for (int a = 0; a < 4; ++a) {
        CHECK(f[2 * a] == doctest::Approx(0.25));
        CHECK(f[2 * a + 1] == doctest::Approx(-0.375));
    }

    // b = (x, 0): the integral of N_a x over the unit square is 1/12 at x = 0 corners and 1/6 at x = 1
    const CeVector g = ce_load_vector(unit, 0, [](const Vec2& x) { return Vec2(x.x(), 0.0); }, rule, 1.0);
    const double expected[2] = {1.0 / 12, 1.0 / 6};
    for (int a = 0; a < 4; ++a) {
        const int node = unit.elements()[0].node_ids[a];
        const double ex = unit.position(node).x() == 0.0 ? expected[0] : expected[1];
        CHECK(g[2 * a] == doctest::Approx(ex).epsilon(1e-14));
        CHECK(g[2 * a + 1] == 0.0);
    }
}
