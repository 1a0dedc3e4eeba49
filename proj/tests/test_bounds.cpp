#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "qlmass/bounds.hpp"
#include "qlmass/elliptic.hpp"
#include "qlmass/mass.hpp"
#include "qlmass/metric.hpp"

using namespace qlm;
using bounds::BoundInputs;
using bounds::CompactDomain;
using bounds::Verdict;
using mesh::Grid3;
using mesh::ScalarField;
using mesh::Vec3;
using metric::MetricField;

namespace {

// spheroid profile with semi-axes (a, a, c) on n latitude nodes
mass::SurfaceOfRevolution spheroid_profile(double a, double c, int n) {
    mass::SurfaceOfRevolution s;
    s.theta.resize(n);
    s.f.resize(n);
    s.z.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = M_PI * i / (n - 1);
        s.theta[i] = t;
        s.f[i] = a * std::sin(t);
        s.z[i] = -c * std::cos(t);
    }
    s.theta.back() = M_PI;
    s.f.front() = s.f.back() = 0;
    return s;
}

double margin_tol(double bound, double mass) {
    return 5e-3 * std::max(std::abs(bound), std::abs(mass)) + 1e-8;
}

}  // namespace

TEST_CASE("split mass bound arithmetic and verdict logic") {
    BoundInputs in;
    in.Lambda = 10;
    in.a = 1;
    in.b = 2;
    in.int_R_plus = 5;
    in.int_R_minus = 1;
    auto v = bounds::adm_mass_split_bound(in);
    CHECK(v.applicable);
    CHECK(v.unresolved_constant);
    CHECK(v.bound == doctest::Approx((8.0 / 11.0) * (5.0 - 14.0 / 8.0)).epsilon(1e-13));
    CHECK(v.extra("nonneg_condition") == 1.0);

    // nonnegative scalar curvature: reduces to Lambda/(Lambda+b) * int R+
    BoundInputs pos = in;
    pos.a = 0;
    pos.int_R_minus = 0;
    auto vp = bounds::adm_mass_split_bound(pos);
    CHECK(vp.bound == doctest::Approx(10.0 / 12.0 * 5.0).epsilon(1e-13));

    // identically zero curvature: zero bound, condition holds with equality
    BoundInputs zero;
    zero.Lambda = 10;
    auto vz = bounds::adm_mass_split_bound(zero);
    CHECK(vz.bound == 0.0);
    CHECK(vz.extra("nonneg_condition") == 1.0);

    // hypothesis failure
    BoundInputs bad = in;
    bad.a = 6;
    auto vb = bounds::adm_mass_split_bound(bad);
    CHECK(!vb.applicable);

    // the unresolved constant scales the bound linearly
    BoundInputs scaled = in;
    scaled.C_margin = 2.0;
    CHECK(bounds::adm_mass_split_bound(scaled).bound == doctest::Approx(2 * v.bound));

    BoundInputs invalid = in;
    invalid.a = -1;
    CHECK_THROWS_AS(bounds::adm_mass_split_bound(invalid), std::invalid_argument);
}

TEST_CASE("moser sup bound closed form") {
    CHECK(bounds::moser_sup_bound(3, 1, 0, 5) == 1.0);  // gamma = 0: max principle
    double expected = 1 + 3 * std::pow(27.0, 0.125);
    CHECK(bounds::moser_sup_bound(1, 1, 1, 2) == doctest::Approx(expected).epsilon(1e-13));
    // excess over 1 is linear in gamma
    double e1 = bounds::moser_sup_bound(0.3, 0.7, 1.0, 4.0) - 1;
    double e2 = bounds::moser_sup_bound(0.3, 0.7, 2.0, 4.0) - 1;
    CHECK(e2 == doctest::Approx(2 * e1).epsilon(1e-13));
    CHECK_THROWS_AS(bounds::moser_sup_bound(1, 2, 1, 2), std::domain_error);
}

TEST_CASE("pointwise penalty minimum identity") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.1, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        double lam = U(rng), R = U(rng);
        double vstar = -R / (8 * lam + R);  // stationary point of 8 lam v^2 + R(1+v)^2
        double direct = 8 * lam * vstar * vstar + R * (1 + vstar) * (1 + vstar);
        double closed = bounds::pointwise_penalty_min(lam, R);
        CHECK(std::abs(direct - closed) <= 1e-12 * std::max(1.0, closed));
        // nearby probes never undercut the minimum
        for (double dv : {-0.3, -1e-3, 1e-3, 0.3}) {
            double vv = vstar + dv;
            CHECK(8 * lam * vv * vv + R * (1 + vv) * (1 + vv) >= closed - 1e-12);
        }
    }
    CHECK_THROWS_AS(bounds::pointwise_penalty_min(1.0, -8.0), std::domain_error);
}

TEST_CASE("fractional excision remainder basics") {
    std::vector<double> dens{4, 3, 2, 1}, vol(4, 1.0);
    CHECK(bounds::excision_remainder(dens, vol, 0.0) == doctest::Approx(10.0));
    CHECK(bounds::excision_remainder(dens, vol, 1.0) == doctest::Approx(6.0));
    CHECK(bounds::excision_remainder(dens, vol, 1.5) == doctest::Approx(4.5));
    CHECK(bounds::excision_remainder(dens, vol, 100.0) == doctest::Approx(0.0));
}

TEST_CASE("greedy excision equals exhaustive search on small fields") {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        int m = 3 + static_cast<int>(U(rng) * 10);  // up to 12 cells
        std::vector<double> dens(m), vol(m);
        for (int i = 0; i < m; ++i) {
            dens[i] = std::floor(10 * U(rng));  // ties exercised too
            vol[i] = 0.25 + U(rng);
        }
        double total_vol = 0, total_mass = 0;
        for (int i = 0; i < m; ++i) {
            total_vol += vol[i];
            total_mass += dens[i] * vol[i];
        }
        double budget = U(rng) * total_vol;

        // exhaustive: whole-cell subsets plus one fractional filler (any
        // optimum of the fractional relaxation has at most one partial cell)
        double best_removed = 0;
        for (int mask = 0; mask < (1 << m); ++mask) {
            double sv = 0, sm = 0;
            for (int i = 0; i < m; ++i)
                if (mask & (1 << i)) {
                    sv += vol[i];
                    sm += dens[i] * vol[i];
                }
            if (sv > budget + 1e-12) continue;
            best_removed = std::max(best_removed, sm);
            for (int c = 0; c < m; ++c) {
                if (mask & (1 << c)) continue;
                double extra_vol = std::min(vol[c], budget - sv);
                best_removed = std::max(best_removed, sm + dens[c] * extra_vol);
            }
        }
        double greedy = bounds::excision_remainder(dens, vol, budget);
        CHECK(greedy == doctest::Approx(total_mass - best_removed).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("excision condition degenerate and trivial regimes") {
    auto g = Grid3::centered_box(1.0, 9);
    BoundInputs in;
    in.Lambda = 5;
    in.A = 1.2;

    // flat metric: no curvature, empty condition holds with equality
    ScalarField zero(g);
    auto flat = bounds::excision_mass_condition(in, zero);
    CHECK(flat.applicable);
    CHECK(flat.extra("B") == 0.0);
    CHECK(flat.extra("rhs") == 0.0);

    // nonnegative scalar curvature: zero budget keeps all curvature energy
    ScalarField rm(g, [](const Vec3& p) { return 1.0 + p.x * p.x; });
    in.int_R_minus = 0;
    in.sup_Rm = 2.0;
    auto v = bounds::excision_mass_condition(in, rm);
    CHECK(v.extra("budget") == 0.0);
    CHECK(v.extra("B") > 0.0);
    CHECK(v.extra("rhs") == 0.0);
    CHECK(v.applicable);
    CHECK(v.unresolved_constant);
}

TEST_CASE("energy lower bounds: constant fields and zero curvature") {
    auto g = Grid3::centered_box(0.5, 17);
    ScalarField ones(g, 1.0);
    double volume = mesh::integrate(ones);

    ScalarField R8(g, 8.0);
    auto eb = bounds::energy_lower_bounds(R8, 10.0, 1.0);
    CHECK(eb.eigen_applicable);
    CHECK(eb.eigen_bound == doctest::Approx(0.5 * volume).epsilon(1e-12));

    ScalarField R0(g);
    auto ez = bounds::energy_lower_bounds(R0, 10.0, 1.0);
    CHECK(ez.split_applicable);
    CHECK(ez.split_bound == 0.0);
    CHECK(ez.eigen_bound == 0.0);

    // pointwise positivity violation is reported
    ScalarField Rneg(g, [](const Vec3& p) { return p.x < 0 ? -9.0 : 1.0; });
    auto ev = bounds::energy_lower_bounds(Rneg, 10.0, 1.0);
    CHECK(!ev.eigen_applicable);
    CHECK(ev.violating_node.has_value());
}

TEST_CASE("discretely minimized energy dominates the eigenvalue bound") {
    auto g = Grid3::centered_box(1.1, 33, std::nullopt, 1.0);
    MetricField flat = MetricField::flat(g);
    double lam = elliptic::first_dirichlet_eigenvalue(flat).lambda;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        double ax = 1 + 3 * U(rng), ay = 1 + 3 * U(rng), amp = 4 * U(rng);
        ScalarField R(g, [&](const Vec3& p) {
            double s = std::sin(ax * p.x) * std::cos(ay * p.y);
            return amp * (1 + s) * (1 + s) / 2;  // R >= 0
        });
        ScalarField q(g);
        for (std::size_t i = 0; i < g->size(); ++i) q[i] = R[i] / 8.0;
        auto sol = elliptic::solve_dirichlet({flat, q, 1.0, std::nullopt, std::nullopt});
        auto gr = mesh::gradient(sol.u);
        double energy = 0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            if (!g->active(i)) continue;
            double g2 = gr.x[i] * gr.x[i] + gr.y[i] * gr.y[i] + gr.z[i] * gr.z[i];
            energy += sol.u.quadrature_weight(i) * (g2 + q[i] * sol.u[i] * sol.u[i]);
        }
        auto eb = bounds::energy_lower_bounds(R, 10.0, lam);
        REQUIRE(eb.eigen_applicable);
        CHECK(energy >= eb.eigen_bound - margin_tol(eb.eigen_bound, energy) -
                            0.05 * std::abs(eb.eigen_bound));
    }
}

TEST_CASE("euclidean ball: both compact-domain bounds are zero with zero mass") {
    auto g = Grid3::centered_box(1.2, 49, std::nullopt, 1.0);
    ScalarField u(g, 1.0);
    CompactDomain dom{MetricField::conformal(u), 1.0, 0.3, "euclidean-ball"};

    auto vt = bounds::brown_york_bound_trig(dom);
    CHECK(vt.applicable);
    CHECK(std::abs(vt.bound) <= 1e-10);
    REQUIRE(vt.margin.has_value());
    CHECK(std::abs(*vt.margin) <= margin_tol(vt.bound, *vt.mass) + 1e-4);
    CHECK(vt.extra("comparison_worst") <= vt.extra("comparison_slack"));
    CHECK(vt.extra("normal_deriv_min") >=
          vt.extra("normal_deriv_floor") - 10 * g->h());

    auto vh = bounds::brown_york_bound_tanh(dom);
    CHECK(vh.applicable);
    CHECK(std::abs(vh.bound) <= 1e-10);
    REQUIRE(vh.margin.has_value());
    CHECK(std::abs(*vh.margin) <= margin_tol(vh.bound, *vh.mass) + 1e-4);
    CHECK(vh.extra("comparison_worst") <= vh.extra("comparison_slack"));
}

TEST_CASE("constant positive curvature ball satisfies both bounds") {
    const double rho = 2.0;  // R = 24 / rho^2 = 6
    auto g = Grid3::centered_box(1.2, 49, std::nullopt, 1.0);
    ScalarField u(g, [&](const Vec3& p) {
        double r2 = p.dot(p);
        return 1.0 / std::sqrt(1.0 + r2 / (rho * rho));
    });
    CompactDomain dom{MetricField::conformal(u), 1.0, 0.2, "constant-curvature-ball"};

    auto vh = bounds::brown_york_bound_tanh(dom);
    for (const auto& h : vh.hypotheses) {
        INFO(h.name, " computed=", h.computed, " required=", h.required);
        CHECK(h.pass);
    }
    CHECK(vh.bound > 0.1);
    REQUIRE(vh.margin.has_value());
    CHECK(*vh.margin >= -margin_tol(vh.bound, *vh.mass));
    CHECK(vh.extra("comparison_worst") <= vh.extra("comparison_slack"));
    CHECK(vh.extra("normal_deriv_min") >=
          vh.extra("normal_deriv_floor") - 10 * g->h());

    auto vt = bounds::brown_york_bound_trig(dom);
    for (const auto& h : vt.hypotheses) {
        INFO(h.name, " computed=", h.computed, " required=", h.required);
        CHECK(h.pass);
    }
    CHECK(vt.bound > 0.0);
    REQUIRE(vt.margin.has_value());
    CHECK(*vt.margin >= -margin_tol(vt.bound, *vt.mass));
    CHECK(vt.extra("comparison_worst") <= vt.extra("comparison_slack"));
    // the theorem's energy bound agrees with the boundary-flux identity
    CHECK(vt.extra("boundary_flux_quarter") == doctest::Approx(vt.bound).epsilon(0.05));
}

TEST_CASE("convex surface inequalities: sphere equality and spheroid margins") {
    auto sphere = mass::surface_functionals(spheroid_profile(1.0, 1.0, 513));
    auto vs = bounds::minkowski_checks(sphere);
    CHECK(vs.applicable);
    double scale = sphere.total_h0 * sphere.total_h0;
    CHECK(std::abs(vs.extra("area_inequality_margin")) <= 1e-8 * scale);
    CHECK(std::abs(vs.extra("volume_inequality_margin")) <= 1e-8 * scale);

    auto ob = mass::surface_functionals(spheroid_profile(1.0, 0.6, 513));
    auto vo = bounds::minkowski_checks(ob);
    CHECK(vo.applicable);
    CHECK(vo.extra("area_inequality_margin") ==
          doctest::Approx(16.6991614942737).epsilon(1e-6));
    CHECK(vo.extra("volume_inequality_margin") ==
          doctest::Approx(58.2214583032186).epsilon(1e-6));

    auto near = mass::surface_functionals(spheroid_profile(1.0, 0.99, 513));
    auto vn = bounds::minkowski_checks(near);
    CHECK(vn.extra("area_inequality_margin") ==
          doctest::Approx(0.0112133019440535).epsilon(1e-4));
    CHECK(vn.extra("volume_inequality_margin") ==
          doctest::Approx(0.0226429063351361).epsilon(1e-4));
    // monotone approach to the sphere equality case
    CHECK(vn.extra("area_inequality_margin") < vo.extra("area_inequality_margin"));
    CHECK(vn.extra("volume_inequality_margin") < vo.extra("volume_inequality_margin"));
}

TEST_CASE("mean curvature threshold: unit sphere is borderline") {
    std::vector<double> H(10, 2.0);
    auto v = bounds::mean_curvature_threshold(H, 4 * M_PI);
    CHECK(v.bound == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(v.applicable);

    std::vector<double> Hbig(10, 2.0 + 1e-6);
    CHECK(!bounds::mean_curvature_threshold(Hbig, 4 * M_PI).applicable);
}

TEST_CASE("negative-part functionals are monotone under pointwise weakening") {
    auto g = Grid3::centered_box(1.0, 17);
    ScalarField q(g, [](const Vec3& p) { return std::sin(5 * p.x) + 0.3 * p.y; });
    double prev_a = -1, prev_b = -1, prev_g = -1;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        ScalarField qt(g);
        for (std::size_t i = 0; i < g->size(); ++i)
            qt[i] = std::max(q[i], 0.0) - t * std::max(-q[i], 0.0);
        auto s = metric::sign_split_and_lp(qt);
        CHECK(s.alpha >= prev_a - 1e-14);
        CHECK(s.beta >= prev_b - 1e-14);
        CHECK(s.gamma >= prev_g - 1e-14);
        prev_a = s.alpha;
        prev_b = s.beta;
        prev_g = s.gamma;
    }
}
