#pragma once

#include <array>
#include <optional>
#include <vector>

#include "qlmass/field.hpp"

namespace qlm::metric {

using mesh::GridPtr;
using mesh::ScalarField;
using mesh::Vec3;

/// Symmetric 3x3 metric on a grid. Conformal fast path stores only u (g = u^4 delta).
class MetricField {
public:
    static MetricField conformal(ScalarField u);
    static MetricField flat(GridPtr grid);
    /// Component order: xx, xy, xz, yy, yz, zz.
    static MetricField general(GridPtr grid, std::array<ScalarField, 6> comps);

    bool is_conformal() const { return static_cast<bool>(u_); }
    const ScalarField& u() const;
    const std::array<ScalarField, 6>& components() const;
    const GridPtr& grid() const { return grid_; }

    /// sqrt(det g) per node (u^6 on the conformal path).
    ScalarField volume_factor() const;
    double metric_volume() const;

    /// Rejects non-SPD nodes; conformal u must stay above 1e-8.
    void validate() const;

private:
    GridPtr grid_;
    std::optional<ScalarField> u_;
    mutable std::optional<std::array<ScalarField, 6>> comps_;
};

/// Fitted 1/r model u ~ b + A/r on outer shells; C bounds the r^-2 remainder.
struct DecayModel {
    double b = 1.0;
    double A = 0.0;
    int order = 1;       // asserted decay exponent of u - b (n - 2 = 1 in 3D)
    double C = 0.0;      // max_shells |u - b - A/r| r^2
};

/// Shell-averaged fit of u against b + A/r over the given radii.
DecayModel fit_decay(const ScalarField& u, const std::vector<double>& radii);

struct CurvatureFields {
    ScalarField R;
    std::array<ScalarField, 6> ricci;
    ScalarField riemann_norm_sq;       // |Rm|^2
    ScalarField grad_riemann_norm_sq;  // |grad Rm|^2
    int trim = 2;                      // layers of nodes sacrificed per differentiation
};

/// R = -8 u^-5 lap u on the conformal path, Christoffel route otherwise.
ScalarField scalar_curvature(const MetricField& g);

/// Full curvature carriers; in 3D the Riemann tensor is rebuilt from Ricci and R.
CurvatureFields curvature_suite(const MetricField& g);

/// True on nodes far enough from box faces and mask for `layers` differentiations.
bool node_in_trimmed_region(const mesh::Grid3& grid, int i, int j, int k, int layers);

/// Supremum of f over the trimmed region.
double sup_trimmed(const ScalarField& f, int layers);

struct SignSplit {
    ScalarField q_plus, q_minus;
    double alpha = 0;  // sup q_-
    double beta = 0;   // (int q_-^{3/2})^{2/3}
    double gamma = 0;  // sup_p (int q_-^p)^{1/p} over the sampled p-grid (lower estimate)
    double delta = 0;  // (int q_+^{3/2})^{2/3}
    double domain_volume = 0;
    bool gamma_is_estimate = true;
};

/// Splits q = q_+ - q_- exactly and evaluates the sup / L^{3/2} / L^p
/// functionals with the metric measure. The p-grid is log-spaced
/// {1, 1.5, 2, ..., 64}; alpha joins the candidate set when |Omega| <= 1.
SignSplit sign_split_and_lp(const ScalarField& q, const ScalarField* volume_factor = nullptr);

/// Radial conformal closed form H = 2 u^-2 (1/r + 2 u'/u); unit sphere gives 2.
double mean_curvature_radial(double u, double up, double r);

struct LevelSetReport {
    double H_min = 0;
    double H_plus_sup = 0;
    double area = 0;      // metric area of the level set
    std::vector<double> H_samples;
};

/// Mean curvature of the coordinate sphere of radius r, general path:
/// metric normal derivative of the area form, sampled over the sphere.
LevelSetReport mean_curvature_level_set(const MetricField& g, double r);

/// Shell-averaged export (radius, value) rows for plotting.
void save_shell_csv(const ScalarField& f, int n_shells, const std::string& path);

}  // namespace qlm::metric
