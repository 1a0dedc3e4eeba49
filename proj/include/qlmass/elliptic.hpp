#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qlmass/field.hpp"
#include "qlmass/metric.hpp"

namespace qlm::elliptic {

using mesh::ScalarField;
using mesh::Vec3;

/// CG breakdown on p^T A p <= 0: the operator -lap_g + q has a nonpositive
/// direction, i.e. its first Dirichlet eigenvalue is not positive.
struct NonCoerciveOperator : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// lap_g u - q u = rhs on the grid's interior, Dirichlet data on boundary
/// nodes (constant `boundary_value` unless per-node `boundary_data` given).
struct EllipticProblem {
    metric::MetricField metric;
    ScalarField q;
    double boundary_value = 1.0;
    std::optional<ScalarField> boundary_data;
    std::optional<ScalarField> rhs;
};

struct SolveReport {
    explicit SolveReport(ScalarField f) : u(std::move(f)) {}

    ScalarField u;
    double residual_norm = 0;  // discrete L2 of lap_g u - q u - rhs over interior
    int iterations = 0;
    std::vector<double> residual_history;
    // exterior solves only:
    std::optional<metric::DecayModel> extrapolation;
    std::vector<double> extrapolation_radii;
    bool extrapolation_unreliable = false;
    bool b_regime_one = true;  // fitted limit lands in the b ~ 1 branch
};

SolveReport solve_dirichlet(const EllipticProblem& p, double tol = 1e-10, int max_iter = 50000);

/// Exterior problem lap u - q u = 0: nested box truncations with u = outer_value
/// on the faces, pointwise Richardson extrapolation in 1/half-width on the
/// smallest box, plus a 1/r decay fit. An optional excised inner sphere
/// carries Dirichlet data from `inner_data`.
struct ExteriorSpec {
    std::function<double(const Vec3&)> q;
    std::vector<double> radii;  // ascending half-widths; 2 for extrapolation, 3rd as control
    double h;
    std::optional<double> inner_radius;
    std::function<double(const Vec3&)> inner_data;
    double outer_value = 1.0;
};

SolveReport solve_exterior(const ExteriorSpec& spec);

struct EigenResult {
    explicit EigenResult(ScalarField f) : eigenfunction(std::move(f)) {}

    double lambda = 0;
    ScalarField eigenfunction;  // L2(g)-normalized, integral made positive
    int iterations = 0;
    std::vector<double> ritz_history;
};

/// First Dirichlet eigenvalue of -lap_g + q by shifted inverse power iteration
/// (shift sup q_- keeps the inner solves coercive; the shift identity is exact).
EigenResult first_dirichlet_eigenvalue(const metric::MetricField& g,
                                       const ScalarField* q = nullptr);

struct SobolevEstimate {
    double lambda_lower = 0;      // (min u / max u)^2 * flat constant
    double lambda_minimized = 0;  // best descent iterate (upper bound on Lambda)
    bool descent_diverged = false;
};

SobolevEstimate sobolev_estimate(const metric::MetricField& g);

/// Rayleigh-Sobolev quotient int |grad f|^2 / (int f^6)^{1/3} of the trilinear
/// interpolant of f extended by zero outside the interior, integrated exactly
/// with per-cell Gauss quadrature (in the attached metric for conformal g).
/// Unlike the node-sum quotient this is a true continuum quotient, so it is
/// bounded below by the flat constant for the flat metric.  Rejects f == 0.
double interpolant_quotient(const metric::MetricField& g, const ScalarField& f);

/// Sharp flat-space constant 3 (pi/2)^{4/3} evaluated by quadrature of the
/// bubble profile (1 + r^2)^{-1/2}, not hard-coded.
double flat_sobolev_constant();

}  // namespace qlm::elliptic
