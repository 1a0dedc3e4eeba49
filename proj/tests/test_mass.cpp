#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>

#include "doctest.h"
#include "qlmass/mass.hpp"

using namespace qlm::mass;
using qlm::mesh::Grid3;
using qlm::mesh::ScalarField;
using qlm::mesh::Vec3;
using qlm::metric::MetricField;

namespace {

std::vector<double> theta_grid(int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = M_PI * i / (n - 1);
    t.back() = M_PI;
    return t;
}

SurfaceOfRevolution spheroid_profile(double a, double c, int n) {
    SurfaceOfRevolution s;
    s.theta = theta_grid(n);
    s.f.resize(n);
    s.z.resize(n);
    for (int i = 0; i < n; ++i) {
        s.f[i] = a * std::sin(s.theta[i]);
        s.z[i] = -c * std::cos(s.theta[i]);
    }
    s.f.front() = s.f.back() = 0;
    return s;
}

InducedMetric2 spheroid_metric(double a, double c, int n) {
    auto t = theta_grid(n);
    std::vector<double> E(n), G(n);
    for (int i = 0; i < n; ++i) {
        double st = std::sin(t[i]), ct = std::cos(t[i]);
        E[i] = a * a * ct * ct + c * c * st * st;
        G[i] = a * a * st * st;
    }
    G.front() = G.back() = 0;
    return InducedMetric2::from_coefficients(t, E, G);
}

// oracle regression constants for the (1,1,0.6) spheroid, frozen from an
// independent adaptive 1D quadrature of the closed-form profile
constexpr double kSpheroidArea = 9.38943837288047;
constexpr double kSpheroidVolume = 2.51327412287183;
constexpr double kSpheroidTotalH0 = 22.1057415915296;
constexpr double kSpheroidH0Equator = 3.77777777777778;
constexpr double kSpheroidH0Pole = 1.2;

}  // namespace

TEST_CASE("round metric embeds to the sphere exactly") {
    double rho = 1.7;
    int n = 513;
    auto t = theta_grid(n);
    std::vector<double> E(n, rho * rho), G(n);
    for (int i = 0; i < n; ++i) G[i] = rho * rho * std::sin(t[i]) * std::sin(t[i]);
    G.front() = G.back() = 0;
    auto m = InducedMetric2::from_coefficients(t, E, G);
    for (double k : m.K) CHECK(k == doctest::Approx(1.0 / (rho * rho)).epsilon(1e-5));
    auto s = weyl_embed_axisymmetric(m);
    for (int i = 0; i < n; ++i) {
        CHECK(s.f[i] == doctest::Approx(rho * std::sin(t[i])).epsilon(1e-9).scale(1.0));
        CHECK(s.z[i] - s.z[0] ==
              doctest::Approx(rho * (1 - std::cos(t[i]))).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("negative gauss curvature band is rejected") {
    // peanut profile: waist at the equator turns K negative there
    int n = 513;
    auto t = theta_grid(n);
    SurfaceOfRevolution s;
    s.theta = t;
    s.f.resize(n);
    s.z.resize(n);
    for (int i = 0; i < n; ++i) {
        double st = std::sin(t[i]);
        s.f[i] = st * (1 - 0.7 * st * st);
        s.z[i] = -std::cos(t[i]);
    }
    s.f.front() = s.f.back() = 0;
    auto m = induce(s);
    bool has_negative = false;
    for (double k : m.K) has_negative = has_negative || k < 0;
    CHECK(has_negative);
    CHECK_THROWS_AS(weyl_embed_axisymmetric(m), std::invalid_argument);
}

TEST_CASE("oblate spheroid round-trips through the embedding") {
    int n = 513;
    auto m = spheroid_metric(1.0, 0.6, n);
    auto s = weyl_embed_axisymmetric(m);
    auto ref = spheroid_profile(1.0, 0.6, n);
    double worst_f = 0, worst_z = 0;
    for (int i = 0; i < n; ++i) {
        worst_f = std::max(worst_f, std::abs(s.f[i] - ref.f[i]));
        worst_z = std::max(worst_z, std::abs((s.z[i] - s.z[0]) - (ref.z[i] - ref.z[0])));
    }
    CHECK(worst_f < 1e-6);
    CHECK(worst_z < 1e-6);

    // induce -> embed -> induce is the identity
    auto m2 = induce(s);
    double worst_E = 0, worst_G = 0;
    for (int i = 0; i < n; ++i) {
        worst_E = std::max(worst_E, std::abs(m2.E[i] - m.E[i]));
        worst_G = std::max(worst_G, std::abs(m2.G[i] - m.G[i]));
    }
    CHECK(worst_E < 1e-6);
    CHECK(worst_G < 1e-6);
}

TEST_CASE("reference mean curvature of spheres honors the convention") {
    for (double rho : {1.0, 2.0}) {
        auto s = spheroid_profile(rho, rho, 513);
        auto H0 = reference_mean_curvature(s);
        for (double v : H0) CHECK(v == doctest::Approx(2.0 / rho).epsilon(1e-6));
    }
}

TEST_CASE("spheroid principal curvature closed forms at equator and pole") {
    int n = 513;
    auto s = spheroid_profile(1.0, 0.6, n);
    auto H0 = reference_mean_curvature(s);
    CHECK(H0[(n - 1) / 2] == doctest::Approx(kSpheroidH0Equator).epsilon(1e-8));
    CHECK(H0.front() == doctest::Approx(kSpheroidH0Pole).epsilon(1e-6));
    CHECK(H0.back() == doctest::Approx(kSpheroidH0Pole).epsilon(1e-6));
}

TEST_CASE("surface functionals of the unit sphere give the closed forms") {
    auto s = spheroid_profile(1.0, 1.0, 513);
    auto fn = surface_functionals(s);
    CHECK(fn.area == doctest::Approx(4 * M_PI).epsilon(1e-10));
    CHECK(fn.volume == doctest::Approx(4 * M_PI / 3).epsilon(1e-10));
    CHECK(fn.total_h0 == doctest::Approx(8 * M_PI).epsilon(1e-10));
    CHECK(fn.convex);
    // equality cases of the two convex-surface inequalities
    CHECK(fn.total_h0 * fn.total_h0 == doctest::Approx(16 * M_PI * fn.area).epsilon(1e-8));
    CHECK(4 * std::pow(fn.area, 4) / (9 * fn.volume * fn.volume) ==
          doctest::Approx(fn.total_h0 * fn.total_h0).epsilon(1e-8));
}

TEST_CASE("radius-r sphere attains equality in both inequalities") {
    double r = 2.6;
    auto s = spheroid_profile(r, r, 513);
    auto fn = surface_functionals(s);
    CHECK(fn.total_h0 * fn.total_h0 == doctest::Approx(16 * M_PI * fn.area).epsilon(1e-8));
    CHECK(4 * std::pow(fn.area, 4) / (9 * fn.volume * fn.volume) ==
          doctest::Approx(64 * M_PI * M_PI * r * r).epsilon(1e-8));
}

TEST_CASE("spheroid functionals match the frozen quadrature oracle") {
    auto s = spheroid_profile(1.0, 0.6, 513);
    auto fn = surface_functionals(s);
    CHECK(fn.area == doctest::Approx(kSpheroidArea).epsilon(1e-9));
    CHECK(fn.volume == doctest::Approx(kSpheroidVolume).epsilon(1e-9));
    CHECK(fn.total_h0 == doctest::Approx(kSpheroidTotalH0).epsilon(1e-9));
    CHECK(fn.convex);
    // strict inequality margins
    CHECK(fn.total_h0 * fn.total_h0 - 16 * M_PI * fn.area > 1.0);
    CHECK(4 * std::pow(fn.area, 4) / (9 * fn.volume * fn.volume) -
              fn.total_h0 * fn.total_h0 >
          1.0);
}

TEST_CASE("non-convex profile clears the convexity flag") {
    int n = 513;
    auto t = theta_grid(n);
    SurfaceOfRevolution s;
    s.theta = t;
    s.f.resize(n);
    s.z.resize(n);
    for (int i = 0; i < n; ++i) {
        double st = std::sin(t[i]);
        s.f[i] = st * (1 - 0.7 * st * st);
        s.z[i] = -std::cos(t[i]);
    }
    s.f.front() = s.f.back() = 0;
    CHECK_FALSE(surface_functionals(s).convex);
}

TEST_CASE("rigid motions leave the surface functionals unchanged") {
    auto s = spheroid_profile(1.0, 0.6, 513);
    auto base = surface_functionals(s);
    auto H0_base = reference_mean_curvature(s);

    SurfaceOfRevolution shifted = s;
    for (auto& z : shifted.z) z += 5.0;
    auto fn_shift = surface_functionals(shifted);
    CHECK(fn_shift.area == doctest::Approx(base.area).epsilon(1e-12));
    CHECK(fn_shift.volume == doctest::Approx(base.volume).epsilon(1e-12));
    CHECK(fn_shift.total_h0 == doctest::Approx(base.total_h0).epsilon(1e-12));

    // reflection through the equatorial plane reverses the latitude order
    int n = static_cast<int>(s.theta.size());
    SurfaceOfRevolution mirror = s;
    for (int i = 0; i < n; ++i) {
        mirror.f[i] = s.f[n - 1 - i];
        mirror.z[i] = -s.z[n - 1 - i];
    }
    auto fn_mirror = surface_functionals(mirror);
    auto H0_mirror = reference_mean_curvature(mirror);
    CHECK(fn_mirror.area == doctest::Approx(base.area).epsilon(1e-12));
    CHECK(fn_mirror.volume == doctest::Approx(base.volume).epsilon(1e-12));
    CHECK(fn_mirror.total_h0 == doctest::Approx(base.total_h0).epsilon(1e-12));
    for (int i = 0; i < n; ++i)
        CHECK(H0_mirror[i] == doctest::Approx(H0_base[n - 1 - i]).epsilon(1e-8));
}

TEST_CASE("adm mass of the trivial conformal factor is zero") {
    auto g = Grid3::centered_box(8.0, 33);
    auto res = adm_mass(MetricField::conformal(ScalarField(g, 1.0)), {4.0, 5.0, 6.0});
    CHECK(res.mass == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(res.normalization == doctest::Approx(1.0 / (2 * M_PI)));
    for (auto& [r, flux] : res.flux_values) {
        (void)r;
        CHECK(std::abs(flux) < 1e-12);
    }
}

TEST_CASE("adm mass recovers the 1 + m/2r mass") {
    auto g = Grid3::centered_box(8.0, 129, 0.5);
    ScalarField u(g, [](const Vec3& p) {
        double r = std::max(p.norm(), 0.4);
        return 1.0 + 0.5 / r;
    });
    auto res = adm_mass(MetricField::conformal(u), {4.0, 5.0, 6.0});
    CHECK(res.mass == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("adm mass is linear in the harmonic perturbation") {
    auto g = Grid3::centered_box(8.0, 65, 0.5);
    auto mass_at = [&](double t) {
        ScalarField u(g, [&](const Vec3& p) {
            double r = std::max(p.norm(), 0.4);
            return 1.0 + t * 0.3 / r;
        });
        return adm_mass(MetricField::conformal(u), {4.0, 5.0, 6.0}).mass;
    };
    double m1 = mass_at(0.5), m2 = mass_at(1.0);
    CHECK(m2 == doctest::Approx(2 * m1).epsilon(1e-3));
    CHECK(m2 == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("coordinate flux path agrees with the conformal path") {
    auto g = Grid3::centered_box(8.0, 129, 0.5);
    ScalarField u(g, [](const Vec3& p) {
        double r = std::max(p.norm(), 0.4);
        return 1.0 + 0.5 / r;
    });
    auto conf = MetricField::conformal(u);
    std::array<ScalarField, 6> comps = {ScalarField(g, 0.0), ScalarField(g, 0.0),
                                        ScalarField(g, 0.0), ScalarField(g, 0.0),
                                        ScalarField(g, 0.0), ScalarField(g, 0.0)};
    for (std::size_t n = 0; n < g->size(); ++n) {
        double u4 = std::pow(u[n], 4);
        comps[0][n] = comps[3][n] = comps[5][n] = u4;
    }
    auto gen = MetricField::general(g, comps);
    std::vector<double> radii = {4.0, 5.0, 6.0};
    double m_conf = adm_mass(conf, radii).mass;
    double m_gen = adm_mass_coordinate_flux(gen, radii).mass;
    CHECK(m_conf == doctest::Approx(1.0).epsilon(0.01));
    CHECK(m_gen == doctest::Approx(m_conf).epsilon(0.05));
}

TEST_CASE("non asymptotically flat flux is flagged") {
    auto g = Grid3::centered_box(8.0, 65);
    ScalarField u(g, [](const Vec3& p) { return 1.0 + 0.2 * std::sin(3 * p.norm()); });
    CHECK_THROWS_AS(adm_mass(MetricField::conformal(u), {4.0, 5.0, 6.0}),
                    ExtrapolationUnreliable);
}

TEST_CASE("radial closed-form pipeline on schwarzschild") {
    auto u = [](double r) { return 1.0 + 0.5 / r; };
    auto up = [](double r) { return -0.5 / (r * r); };

    // horizon r0 = 1/2: areal radius 2, H = 0, bare mass 16 pi, physical 2
    auto horizon = brown_york_radial(u, up, 0.5);
    CHECK(horizon.H[0] == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(horizon.area == doctest::Approx(16 * M_PI).epsilon(1e-12));
    CHECK(horizon.m_by == doctest::Approx(16 * M_PI).epsilon(1e-12));
    CHECK(horizon.m_by_physical == doctest::Approx(2.0).epsilon(1e-12));

    // r0 = 2: rho = 3.125, H = 48/125, bare mass 10 pi
    auto outer = brown_york_radial(u, up, 2.0);
    CHECK(outer.H[0] == doctest::Approx(48.0 / 125.0).epsilon(1e-12));
    CHECK(outer.m_by == doctest::Approx(10 * M_PI).epsilon(1e-12));
    // physical value rho (1 - sqrt(1 - 2m/rho))
    double rho = 3.125;
    CHECK(outer.m_by_physical ==
          doctest::Approx(rho * (1 - std::sqrt(1 - 2.0 / rho))).epsilon(1e-2));
}

TEST_CASE("euclidean ball has vanishing brown-york mass") {
    auto g = Grid3::centered_box(2.0, 65);
    auto res = brown_york(MetricField::conformal(ScalarField(g, 1.0)), 1.0);
    CHECK(std::abs(res.m_by) <= 1e-6 * res.area);
    CHECK(res.area == doctest::Approx(4 * M_PI).epsilon(1e-10));
}

TEST_CASE("grid brown-york matches the radial pipeline on schwarzschild") {
    auto g = Grid3::centered_box(2.0, 129, 0.25);
    ScalarField u(g, [](const Vec3& p) {
        double r = std::max(p.norm(), 0.2);
        return 1.0 + 0.5 / r;
    });
    auto conf = MetricField::conformal(u);

    auto horizon = brown_york(conf, 0.5);
    CHECK(horizon.m_by == doctest::Approx(16 * M_PI).epsilon(0.01));
    CHECK(horizon.area == doctest::Approx(16 * M_PI).epsilon(0.01));

    auto outer = brown_york(conf, 1.5);
    auto oracle = brown_york_radial([](double r) { return 1.0 + 0.5 / r; },
                                    [](double r) { return -0.5 / (r * r); }, 1.5);
    CHECK(outer.m_by == doctest::Approx(oracle.m_by).epsilon(0.01));
}

TEST_CASE("non axisymmetric boundary metric is rejected") {
    auto g = Grid3::centered_box(2.0, 65);
    ScalarField u(g, [](const Vec3& p) { return 1.0 + 0.2 * p.x; });
    CHECK_THROWS_AS(brown_york(MetricField::conformal(u), 1.0), std::invalid_argument);
}
