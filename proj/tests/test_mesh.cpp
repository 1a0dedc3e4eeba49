#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "qlmass/field.hpp"
#include "qlmass/sphere.hpp"

using namespace qlm::mesh;

TEST_CASE("grid classification and counts") {
    auto g = Grid3::centered_box(1.0, 16);
    CHECK(g->size() == 16 * 16 * 16);
    CHECK(g->active_count() == g->size());
    // all six faces are boundary
    CHECK(g->node_class(0, 5, 5) == NodeClass::boundary);
    CHECK(g->node_class(15, 5, 5) == NodeClass::boundary);
    CHECK(g->node_class(7, 7, 7) == NodeClass::interior);
    CHECK(g->interior_count() == 14 * 14 * 14);
}

TEST_CASE("excised and outer-masked grids") {
    auto g = Grid3::centered_box(2.0, 33, 0.5, 1.8);
    bool saw_exterior = false, saw_hole = false;
    const auto& d = g->dims();
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                double r = g->pos(i, j, k).norm();
                auto c = g->node_class(i, j, k);
                if (r < 0.5) {
                    CHECK(c == NodeClass::exterior);
                    saw_hole = true;
                }
                if (r > 1.8) {
                    CHECK(c == NodeClass::exterior);
                    saw_exterior = true;
                }
                if (c == NodeClass::interior) {
                    CHECK(r >= 0.5);
                    CHECK(r <= 1.8);
                }
            }
    CHECK(saw_exterior);
    CHECK(saw_hole);
}

TEST_CASE("integration of a compact bump matches the radial value") {
    // int_{r<=1} (1 - r^2) dV = 8 pi / 15  [closed form]
    auto f = [](const Vec3& p) {
        double r2 = p.dot(p);
        return r2 < 1.0 ? 1.0 - r2 : 0.0;
    };
    double exact = 8.0 * M_PI / 15.0;
    auto g = Grid3::centered_box(1.2, 97);
    ScalarField F(g, f);
    CHECK(integrate(F) == doctest::Approx(exact).epsilon(2e-3));
}

TEST_CASE("quadrature error halves by ~4x when h halves") {
    // Node weights realize the midpoint rule on the half-cell-enlarged box, so
    // a Gaussian tested against its erf closed form shows the clean h^2 term.
    // (Compactly supported smooth bumps superconverge and are useless here.)
    auto f = [](const Vec3& p) { return std::exp(-p.dot(p)); };
    auto err = [&](int n) {
        auto g = Grid3::centered_box(1.0, n);
        double a = 1.0 + g->h() / 2;
        double one = std::sqrt(M_PI) * std::erf(a);
        return std::abs(integrate(ScalarField(g, f)) - one * one * one);
    };
    double ratio = err(41) / err(81);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("derivative stencils are exact on quadratics") {
    auto g = Grid3::centered_box(1.0, 12);
    ScalarField f(g, [](const Vec3& p) { return 2 * p.x * p.x - p.y * p.z + 3 * p.z; });
    // interior node
    CHECK(node_deriv(f, 5, 5, 5, 0) == doctest::Approx(4 * g->pos(5, 5, 5).x).epsilon(1e-12));
    CHECK(node_second_deriv(f, 5, 5, 5, 0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(node_mixed_deriv(f, 5, 5, 5, 1, 2) == doctest::Approx(-1.0).epsilon(1e-12));
    // one-sided at the face stays exact on quadratics
    CHECK(node_deriv(f, 0, 5, 5, 0) == doctest::Approx(4 * g->pos(0, 5, 5).x).epsilon(1e-10));
    CHECK(node_second_deriv(f, 0, 5, 5, 0) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("flat laplacian of |x|^2 is 6") {
    auto g = Grid3::centered_box(1.0, 16);
    ScalarField f(g, [](const Vec3& p) { return p.dot(p); });
    ScalarField lap = laplacian_flat(f);
    CHECK(lap.at(8, 8, 8) == doctest::Approx(6.0).epsilon(1e-11));
    CHECK(lap.at(1, 8, 8) == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("1/r is discretely harmonic away from the origin") {
    auto g = Grid3::centered_box(2.0, 65, 0.6);
    ScalarField f(g, [](const Vec3& p) { return 1.0 / p.norm(); });
    ScalarField lap = laplacian_flat(f);
    const auto& d = g->dims();
    double worst = 0;
    for (int k = 2; k < d[2] - 2; ++k)
        for (int j = 2; j < d[1] - 2; ++j)
            for (int i = 2; i < d[0] - 2; ++i) {
                if (g->node_class(i, j, k) != NodeClass::interior) continue;
                if (g->pos(i, j, k).norm() < 1.0) continue;
                worst = std::max(worst, std::abs(lap.at(i, j, k)));
            }
    CHECK(worst < 2e-2);  // O(h^2) against the 1/r^3 derivative scale
}

TEST_CASE("trilinear interpolation is exact on trilinear functions") {
    auto g = Grid3::centered_box(1.0, 9);
    ScalarField f(g, [](const Vec3& p) { return 1 + p.x + 2 * p.y * p.z + p.x * p.y * p.z; });
    Vec3 q{0.137, -0.54, 0.718};
    double exact = 1 + q.x + 2 * q.y * q.z + q.x * q.y * q.z;
    CHECK(f.interpolate(q) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("dirichlet energy of a linear ramp") {
    auto g = Grid3::centered_box(0.5, 21);
    ScalarField f(g, [](const Vec3& p) { return 3 * p.x; });
    double vol = g->size() * g->h() * g->h() * g->h();
    // link count differs from node count by one layer, so compare loosely
    CHECK(dirichlet_energy(f) == doctest::Approx(9.0 * vol).epsilon(0.06));
}

TEST_CASE("sobolev quotient is scale invariant and positive") {
    auto g = Grid3::centered_box(1.0, 25);
    ScalarField f(g, [](const Vec3& p) {
        double r2 = p.dot(p);
        return r2 < 0.49 ? (0.49 - r2) : 0.0;
    });
    double q1 = sobolev_quotient(f);
    ScalarField f2 = f;
    for (auto& v : f2.values()) v *= 7.0;
    CHECK(q1 > 0);
    CHECK(sobolev_quotient(f2) == doctest::Approx(q1).epsilon(1e-12));
}

TEST_CASE("integration order is deterministic") {
    auto g = Grid3::centered_box(1.0, 33);
    ScalarField f(g, [](const Vec3& p) { return std::sin(17 * p.x) * std::cos(13 * p.y * p.z); });
    double a = integrate(f);
    double b = integrate(f);
    CHECK(a == b);
}

TEST_CASE("binary round trip") {
    auto g = Grid3::centered_box(1.0, 10);
    ScalarField f(g, [](const Vec3& p) { return p.x * p.y + 0.25; });
    std::string path = "roundtrip.qlm";
    save_binary(f, path);
    ScalarField f2 = load_binary(path);
    REQUIRE(f2.values().size() == f.values().size());
    for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(f2[i] == f[i]);
    std::remove(path.c_str());
}

TEST_CASE("non-finite values are reported") {
    auto g = Grid3::centered_box(1.0, 8);
    ScalarField f(g, 1.0);
    f[10] = std::nan("");
    CHECK_THROWS(f.require_finite("test field"));
}

TEST_CASE("sphere quadrature integrates low-order moments") {
    SphereQuadrature q(12, 24);
    double w_sum = 0, x2 = 0, xy = 0;
    for (std::size_t i = 0; i < q.dirs.size(); ++i) {
        w_sum += q.weights[i];
        x2 += q.weights[i] * q.dirs[i].x * q.dirs[i].x;
        xy += q.weights[i] * q.dirs[i].x * q.dirs[i].y;
    }
    CHECK(w_sum == doctest::Approx(4 * M_PI).epsilon(1e-12));
    CHECK(x2 == doctest::Approx(4 * M_PI / 3).epsilon(1e-12));
    CHECK(xy == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}
