#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qlmass/metric.hpp"

namespace qlm::mass {

using mesh::ScalarField;
using mesh::Vec3;

/// The axisymmetric profile cannot close in R^3: E - (f')^2 < 0 somewhere.
struct EmbeddingObstructed : std::runtime_error {
    double theta_lo, theta_hi;
    EmbeddingObstructed(double lo, double hi);
};

/// Flux sequence is not Cauchy against the m + k/r model.
struct ExtrapolationUnreliable : std::runtime_error {
    explicit ExtrapolationUnreliable(const std::string& what) : std::runtime_error(what) {}
};

/// Axisymmetric surface metric E dtheta^2 + G dphi^2 on a uniform latitude
/// grid over [0, pi], with the Gauss curvature per node.
struct InducedMetric2 {
    std::vector<double> theta, E, G, K;

    /// Fills K from E and G via K = -f_ss / f with f = sqrt(G) and s the
    /// arc length of the meridian (pole values by parabolic extrapolation).
    static InducedMetric2 from_coefficients(std::vector<double> theta, std::vector<double> E,
                                            std::vector<double> G);

    /// Positivity of E and G, pole closure G ~ E theta^2, and K > 0.
    void validate() const;
};

/// Profile curve (cylindrical radius f, height z) per latitude node.
struct SurfaceOfRevolution {
    std::vector<double> theta, f, z;
};

/// Induced metric and Gauss curvature of an explicit profile.
InducedMetric2 induce(const SurfaceOfRevolution& s);

/// Isometric embedding of a K > 0 axisymmetric metric into R^3:
/// f = sqrt(G), z' = sqrt(E - (f')^2), z by quadrature.
SurfaceOfRevolution weyl_embed_axisymmetric(const InducedMetric2& m);

/// H0 = kappa_1 + kappa_2, outward orientation (unit sphere -> 2); pole
/// values closed by the umbilic limit kappa_2 -> z''/(f' W), rejected if the
/// two principal curvatures disagree there.
std::vector<double> reference_mean_curvature(const SurfaceOfRevolution& s);

/// Intrinsic route for embedded metrics: kappa_2 = z'/(f W) from the
/// embedding radicand and kappa_1 = K / kappa_2, avoiding the noise-sensitive
/// second derivatives of the integrated height.
std::vector<double> reference_mean_curvature(const InducedMetric2& m);

struct SurfaceFunctionals {
    double total_h0 = 0;  // int H0 dsigma
    double area = 0;
    double volume = 0;  // enclosed volume (profile given in flat space)
    bool convex = true;
};

SurfaceFunctionals surface_functionals(const SurfaceOfRevolution& s);

struct AdmResult {
    double mass = 0;
    std::vector<std::pair<double, double>> flux_values;  // (radius, raw flux)
    double normalization = 0;  // c with mass = -c * flux (conformal path)
};

/// Mass by flux through 3+ coordinate spheres, fitted against m + k/r and
/// extrapolated to r -> infinity. Conformal metrics use the calibrated
/// flux m = -(1/2pi) oint du/dr dS (u = 1 + m/2r gives mass m exactly);
/// general metrics use the coordinate flux (1/16pi) oint (g_ij,i - g_ii,j)
/// nu_j dS. Throws ExtrapolationUnreliable when the model does not fit.
AdmResult adm_mass(const metric::MetricField& g, const std::vector<double>& radii);

/// Forces the coordinate-flux path (cross-check against the conformal path).
AdmResult adm_mass_coordinate_flux(const metric::MetricField& g,
                                   const std::vector<double>& radii);

struct ByResult {
    double m_by = 0;           // bare normalization: int (H0 - H) dsigma
    double m_by_physical = 0;  // m_by / (8 pi)
    std::vector<double> H0, H;
    double area = 0;
    double volume = std::numeric_limits<double>::quiet_NaN();
};

/// Radial closed-form pipeline for conformal u(r): areal radius rho = u^2 r0,
/// H from the radial formula, round reference H0 = 2 / rho.
ByResult brown_york_radial(const std::function<double(double)>& u,
                           const std::function<double(double)>& up, double r0);

/// Grid pipeline on the coordinate sphere r = r0: H from the level-set sweep,
/// H0 from the isometric embedding of the induced metric (round fast path
/// 2/(u^2 r0) when the sphere is round, cross-checked against the embedding).
ByResult brown_york(const metric::MetricField& g, double r0);

}  // namespace qlm::mass
