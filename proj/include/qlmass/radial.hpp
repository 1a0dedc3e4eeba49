#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace qlm::mesh {

/// 1D radial grid, strictly increasing uniform nodes on [r_min, r_max].
struct RadialGrid {
    double r_min, r_max;
    int n;

    RadialGrid(double r_min_, double r_max_, int n_) : r_min(r_min_), r_max(r_max_), n(n_) {
        if (!(r_min >= 0) || !(r_min < r_max)) throw std::invalid_argument("RadialGrid: need 0 <= r_min < r_max");
        if (n < 64) throw std::invalid_argument("RadialGrid: need n >= 64");
    }
    double node(int i) const { return r_min + (r_max - r_min) * i / (n - 1); }
    double spacing() const { return (r_max - r_min) / (n - 1); }
};

}  // namespace qlm::mesh

namespace qlm::radial {

/// Dense radial solution with cubic Hermite evaluation (derivative stored).
struct RadialSolution {
    std::vector<double> r, w, wp;

    double eval(double x) const;
    double eval_deriv(double x) const;
    double last_radius() const { return r.back(); }
};

/// Integrates  w'' + (2/r) w' = F(r, w, w')  by adaptive Dormand-Prince RK45.
/// With `regular_origin` the solve starts at r0 ~ 0 with w'(r0)=0 and the
/// origin term handled by the series limit w'' ~ F/3 at r=0.
struct ShootSpec {
    std::function<double(double, double, double)> rhs;  // F(r, w, w')
    double r_begin, r_end;
    double w0, wp0;
    bool regular_origin = false;
    double tol = 1e-10;
    int max_steps = 2'000'000;
};

RadialSolution radial_shoot(const ShootSpec& spec);

/// Solution of  (r^2 v')' = r^2 rho  with v -> 0 at infinity, for rho
/// supported in [0, r_support]:  v(r) = -(1/r) int_0^r s^2 rho ds - int_r^inf s rho ds.
/// Returns v on [0, r_max] plus the 1/r tail coefficient A = int_0^inf s^2 rho ds
/// (so v ~ -A/r beyond the support).
struct NewtonianPotential {
    RadialSolution v;
    double tail_coefficient;
};
NewtonianPotential newtonian_potential(const std::function<double(double)>& rho,
                                       double r_support, double r_max, int n = 4096);

/// Adaptive Simpson quadrature to `tol`.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-12);

}  // namespace qlm::radial
