#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qlmass/metric.hpp"

using namespace qlm::metric;
using qlm::mesh::Grid3;
using qlm::mesh::ScalarField;
using qlm::mesh::Vec3;

namespace {

ScalarField schwarzschild_u(qlm::mesh::GridPtr g, double m) {
    return ScalarField(g, [m](const Vec3& p) { return 1.0 + m / (2.0 * p.norm()); });
}

}  // namespace

TEST_CASE("conformal volume factor is u^6") {
    auto g = Grid3::centered_box(1.0, 10);
    ScalarField u(g, [](const Vec3& p) { return 1.0 + 0.1 * p.x; });
    auto mf = MetricField::conformal(u);
    auto vf = mf.volume_factor();
    std::size_t n = g->index(7, 3, 4);
    CHECK(vf[n] == doctest::Approx(std::pow(u[n], 6)).epsilon(1e-14));
}

TEST_CASE("flat metric volume matches the box") {
    auto g = Grid3::centered_box(0.5, 21);
    auto mf = MetricField::flat(g);
    double vol = g->size() * std::pow(g->h(), 3);
    CHECK(mf.metric_volume() == doctest::Approx(vol).epsilon(1e-13));
}

TEST_CASE("validate rejects degenerate input") {
    auto g = Grid3::centered_box(1.0, 8);
    ScalarField u(g, 1.0);
    u[17] = 1e-12;
    CHECK_THROWS(MetricField::conformal(u).validate());

    std::array<ScalarField, 6> c = {ScalarField(g, 1.0), ScalarField(g, 0.0), ScalarField(g, 0.0),
                                    ScalarField(g, -1.0), ScalarField(g, 0.0), ScalarField(g, 1.0)};
    CHECK_THROWS(MetricField::general(g, c).validate());
}

TEST_CASE("scalar curvature of a conformal bump matches the radial formula") {
    // u = 1 + 0.05 exp(-r^2): lap u = 0.05 e^{-r^2} (4 r^2 - 6), R = -8 lap u / u^5
    auto g = Grid3::centered_box(2.5, 81);
    ScalarField u(g, [](const Vec3& p) { return 1.0 + 0.05 * std::exp(-p.dot(p)); });
    ScalarField R = scalar_curvature(MetricField::conformal(u));
    for (auto [i, j, kk] : {std::array<int, 3>{40, 40, 40}, {50, 44, 40}, {60, 40, 36}}) {
        Vec3 p = g->pos(i, j, kk);
        double r2 = p.dot(p);
        double uv = 1.0 + 0.05 * std::exp(-r2);
        double lap = 0.05 * std::exp(-r2) * (4 * r2 - 6);
        double exact = -8.0 * lap / std::pow(uv, 5);
        CHECK(R.at(i, j, kk) == doctest::Approx(exact).epsilon(5e-3));
    }
}

TEST_CASE("schwarzschild slice is scalar flat on both curvature paths") {
    auto g = Grid3::centered_box(2.0, 49, 0.8);
    ScalarField u = schwarzschild_u(g, 1.0);
    auto mf = MetricField::conformal(u);

    ScalarField R_fast = scalar_curvature(mf);
    auto suite = curvature_suite(mf);
    const auto& d = g->dims();
    double worst_fast = 0, worst_suite = 0, mismatch = 0;
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                if (!node_in_trimmed_region(*g, i, j, k, 3)) continue;
                worst_fast = std::max(worst_fast, std::abs(R_fast.at(i, j, k)));
                worst_suite = std::max(worst_suite, std::abs(suite.R.at(i, j, k)));
                mismatch = std::max(mismatch, std::abs(R_fast.at(i, j, k) - suite.R.at(i, j, k)));
            }
    CHECK(worst_fast < 0.05);
    CHECK(worst_suite < 0.05);
    CHECK(mismatch < 0.08);
}

TEST_CASE("schwarzschild |Rm|^2 against the closed form 24 m^2 / rho^6") {
    double m = 0.5;
    auto g = Grid3::centered_box(2.2, 81, 0.9);
    ScalarField u = schwarzschild_u(g, m);
    auto suite = curvature_suite(MetricField::conformal(u));
    for (auto [i, j, kk] : {std::array<int, 3>{60, 40, 40}, {55, 55, 40}, {54, 54, 44}}) {
        Vec3 p = g->pos(i, j, kk);
        double r = p.norm();
        double uv = 1.0 + m / (2 * r);
        double rho = uv * uv * r;  // areal radius
        double exact = 24.0 * m * m / std::pow(rho, 6);
        CHECK(suite.riemann_norm_sq.at(i, j, kk) == doctest::Approx(exact).epsilon(5e-2));
    }
}

TEST_CASE("|grad Rm|^2 vanishes on the flat metric and converges on a bump") {
    auto gf = Grid3::centered_box(1.0, 17);
    auto flat_suite = curvature_suite(MetricField::flat(gf));
    CHECK(sup_trimmed(flat_suite.grad_riemann_norm_sq, 3) < 1e-20);

    auto probe = [](int n) {
        auto g = Grid3::centered_box(1.6, n);
        ScalarField u(g, [](const Vec3& p) { return 1.0 + 0.05 * std::exp(-p.dot(p)); });
        auto s = curvature_suite(MetricField::conformal(u));
        return s.grad_riemann_norm_sq.interpolate({0.4, 0.2, 0.1});
    };
    double a = probe(49), b = probe(97);
    CHECK(b != 0.0);
    CHECK(std::abs(a - b) / std::abs(b) < 0.08);
}

TEST_CASE("sign split closed forms on a unit-volume box") {
    int n = 32;
    double half = (n - 1) / (2.0 * n);  // n^3 h^3 = 1
    auto g = Grid3::centered_box(half, n);
    ScalarField q(g, -1.0);
    auto s = sign_split_and_lp(q);
    CHECK(s.domain_volume == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.alpha == doctest::Approx(1.0));
    CHECK(s.beta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.gamma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.delta == 0.0);

    ScalarField qp(g, 2.0);
    auto sp = sign_split_and_lp(qp);
    CHECK(sp.alpha == 0.0);
    CHECK(sp.gamma == 0.0);
    CHECK(sp.delta == doctest::Approx(std::pow(std::pow(2.0, 1.5), 2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("sign split is an exact decomposition") {
    auto g = Grid3::centered_box(1.0, 16);
    ScalarField q(g, [](const Vec3& p) { return std::sin(9 * p.x) + 0.3 * p.y; });
    auto s = sign_split_and_lp(q);
    for (std::size_t i = 0; i < q.values().size(); ++i) {
        CHECK(s.q_plus[i] - s.q_minus[i] == q[i]);
        CHECK(s.q_plus[i] * s.q_minus[i] == 0.0);
    }
}

TEST_CASE("gamma dominates beta on domains of volume <= 1") {
    int n = 24;
    double half = (n - 1) / (2.0 * n);
    auto g = Grid3::centered_box(half, n);
    ScalarField q(g, [](const Vec3& p) { return -std::abs(p.x) - 0.2; });
    auto s = sign_split_and_lp(q);
    CHECK(s.gamma >= s.beta);
    CHECK_FALSE(s.gamma_is_estimate);
}

TEST_CASE("radial mean curvature closed forms") {
    CHECK(mean_curvature_radial(1.0, 0.0, 1.0) == doctest::Approx(2.0));
    CHECK(mean_curvature_radial(1.0, 0.0, 3.0) == doctest::Approx(2.0 / 3.0));
    // horizon of the m=1 slice sits at r=1/2 and is minimal
    CHECK(mean_curvature_radial(2.0, -2.0, 0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    // m=1 slice at coordinate radius 2
    CHECK(mean_curvature_radial(1.25, -0.125, 2.0) == doctest::Approx(48.0 / 125.0).epsilon(1e-13));
}

TEST_CASE("level-set mean curvature on flat and conformal spheres") {
    auto g = Grid3::centered_box(1.5, 65);
    auto flat = MetricField::flat(g);
    auto rep = mean_curvature_level_set(flat, 0.9);
    CHECK(rep.H_min == doctest::Approx(2.0 / 0.9).epsilon(2e-3));
    CHECK(rep.H_plus_sup == doctest::Approx(2.0 / 0.9).epsilon(2e-3));
    CHECK(rep.area == doctest::Approx(4 * M_PI * 0.81).epsilon(2e-3));

    ScalarField uf(g, [](const Vec3& p) { return 1.0 + 0.1 / std::max(p.norm(), 0.05); });
    auto conf = MetricField::conformal(uf);
    auto rep2 = mean_curvature_level_set(conf, 0.9);
    double uv = 1.0 + 0.1 / 0.9, up = -0.1 / 0.81;
    CHECK(rep2.H_min == doctest::Approx(mean_curvature_radial(uv, up, 0.9)).epsilon(5e-3));
    CHECK(rep2.area == doctest::Approx(4 * M_PI * 0.81 * std::pow(uv, 4)).epsilon(5e-3));
}

TEST_CASE("decay fit recovers b + A/r") {
    auto g = Grid3::centered_box(4.0, 49);
    ScalarField u(g, [](const Vec3& p) { return 1.0 + 0.3 / std::max(p.norm(), 0.2); });
    auto dm = fit_decay(u, {2.0, 2.5, 3.0, 3.5});
    CHECK(dm.b == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(dm.A == doctest::Approx(0.3).epsilon(1e-2));
    CHECK(dm.order == 1);
    CHECK(dm.C < 1e-2);
}
