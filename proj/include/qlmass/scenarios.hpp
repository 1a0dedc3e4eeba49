#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qlmass/mass.hpp"
#include "qlmass/metric.hpp"

namespace qlm::scenarios {

/// Radial conformal factor with its derivative and flat Laplacian
/// (u'' + 2u'/r), the carriers every closed-form oracle needs.
struct RadialProfile {
    std::function<double(double)> u, up, lap;
};

/// Named regression constant: recomputed from the profile at registration
/// and required to match `value` within `tol`.
struct OracleValue {
    std::string name;
    double value;
    double tol;
};

/// A concrete metric family instance: radial conformal profile plus domain
/// data and the analytic/radial-ODE reference values that pin its behavior.
struct Scenario {
    std::string name;
    std::vector<std::pair<std::string, double>> params;
    RadialProfile profile;
    double outer_extent = 2.0;    // suggested grid half-width
    double boundary_radius = 0;   // compact domains: coordinate radius of the boundary
    double s0 = 0;                // collar depth used by the mass-bound pipelines
    double excision_radius = 0;   // > 0: inner ball removed (annular domains)
    bool asymptotically_flat = false;
    int curvature_sign = 0;  // -1: R <= 0, 0: R == 0, +1: R >= 0, 2: mixed sign
    std::vector<OracleValue> oracles;

    /// Samples the profile on a centered box (excised nodes clamp the radius).
    metric::MetricField build(double half, int n) const;
    metric::MetricField build(int n) const { return build(outer_extent, n); }

    double oracle(const std::string& name) const;  // throws if absent
};

/// Harmonic profile u = 1 + m/(2r), scalar-flat with ADM mass m; the domain
/// excises the ball of radius `inner_radius` (default m, must exceed m/2).
Scenario schwarzschild(double m, double inner_radius = -1.0);

/// u = 1 + eps v with lap v = rho for the normalized bump rho = c (1-r^2)_+^4,
/// unit total integral. Mass is -2 eps A < 0 while R <= 0 with R < 0 exactly
/// on the bump support; rejects eps with min u <= 0.
Scenario example1(double eps);

/// Conformal rescale of `base` by phi = 1 + a (1-r^2)_+^4: mass is unchanged
/// (phi == 1 outside the unit ball) while the total scalar curvature
/// integral grows with a and turns positive for a large enough.
Scenario example2(double a, const Scenario& base);

/// Total scalar curvature integral of a radial profile,
/// int R dV_g = -32 pi int u lap(u) r^2 dr (integrand supported where lap != 0).
double total_scalar_curvature(const RadialProfile& p, double r_max);

/// Smallest a (bisection on the sweep grid) with positive total scalar
/// curvature for example2 over `base`; throws if not reached below a_max.
double positivity_threshold(const Scenario& base, double a_max = 64.0);

/// Euclidean ball, constant-curvature ball, annular harmonic domain and the
/// negative-mass families at reference parameters.
std::vector<Scenario> compact_scenarios();

/// Every registered scenario, oracles verified; throws on any mismatch.
std::vector<Scenario> registry();

/// Recomputes each stored oracle value from the profile and compares.
void verify_oracles(const Scenario& s);

/// Human-readable registry manifest (name, parameters, oracle constants).
void write_manifest(const std::vector<Scenario>& list, const std::string& path);

/// Oblate spheroid of revolution, semi-axes (a, a, c), for the geometric
/// inequality checks on boundary surfaces.
mass::SurfaceOfRevolution spheroid(double a, double c, int n = 513);

/// Eccentricity sweep with stored inequality margins.
struct SpheroidCase {
    std::string name;
    double c;                 // polar semi-axis (equatorial = 1)
    double area_margin;       // (int H0)^2 - 16 pi A
    double volume_margin;     // 4 A^4 / (9 V^2) - (int H0)^2
    double tol;
};
std::vector<SpheroidCase> spheroid_family();

}  // namespace qlm::scenarios
