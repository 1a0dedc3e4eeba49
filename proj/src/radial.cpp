#include "qlmass/radial.hpp"

#include <algorithm>
#include <cmath>

namespace qlm::radial {

namespace {

std::size_t bracket(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin() - 1);
    return std::min(i, xs.size() - 2);
}

}  // namespace

double RadialSolution::eval(double x) const {
    if (x <= r.front()) return w.front();
    if (x >= r.back()) return w.back();
    std::size_t i = bracket(r, x);
    double h = r[i + 1] - r[i], t = (x - r[i]) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    return h00 * w[i] + h10 * h * wp[i] + h01 * w[i + 1] + h11 * h * wp[i + 1];
}

double RadialSolution::eval_deriv(double x) const {
    if (x <= r.front()) return wp.front();
    if (x >= r.back()) return wp.back();
    std::size_t i = bracket(r, x);
    double h = r[i + 1] - r[i], t = (x - r[i]) / h;
    double d00 = (6 * t * t - 6 * t) / h;
    double d10 = 3 * t * t - 4 * t + 1;
    double d01 = (6 * t - 6 * t * t) / h;
    double d11 = 3 * t * t - 2 * t;
    return d00 * w[i] + d10 * wp[i] + d01 * w[i + 1] + d11 * wp[i + 1];
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct State {
    double w, wp;
};

}  // namespace

RadialSolution radial_shoot(const ShootSpec& spec) {
    double r0 = spec.r_begin;
    State y{spec.w0, spec.wp0};
    if (spec.regular_origin) {
        // Series start just off the origin: w' = F(0,w0,0) r / 3 + O(r^3).
        double eps = std::max(1e-8, 1e-6 * (spec.r_end - spec.r_begin));
        double f0 = spec.rhs(0.0, spec.w0, 0.0);
        r0 = eps;
        y.w = spec.w0 + 0.5 * f0 * eps * eps / 3.0;
        y.wp = f0 * eps / 3.0;
    }
    auto deriv = [&](double r, const State& s) -> State {
        double wpp = spec.rhs(r, s.w, s.wp) - (2.0 / r) * s.wp;
        return {s.wp, wpp};
    };

    RadialSolution sol;
    sol.r.push_back(r0);
    sol.w.push_back(y.w);
    sol.wp.push_back(y.wp);

    // Step cap keeps the cubic Hermite dense output near the solver tolerance.
    double h_max = (spec.r_end - r0) / 1024.0;
    double h = h_max;
    double r = r0;
    int steps = 0;
    while (r < spec.r_end) {
        if (++steps > spec.max_steps)
            throw std::runtime_error("radial_shoot: step limit reached at r=" + std::to_string(r));
        h = std::min({h, h_max, spec.r_end - r});
        State k1 = deriv(r, y);
        State k2 = deriv(r + c2 * h, {y.w + h * a21 * k1.w, y.wp + h * a21 * k1.wp});
        State k3 = deriv(r + c3 * h, {y.w + h * (a31 * k1.w + a32 * k2.w),
                                      y.wp + h * (a31 * k1.wp + a32 * k2.wp)});
        State k4 = deriv(r + c4 * h, {y.w + h * (a41 * k1.w + a42 * k2.w + a43 * k3.w),
                                      y.wp + h * (a41 * k1.wp + a42 * k2.wp + a43 * k3.wp)});
        State k5 = deriv(r + c5 * h,
                         {y.w + h * (a51 * k1.w + a52 * k2.w + a53 * k3.w + a54 * k4.w),
                          y.wp + h * (a51 * k1.wp + a52 * k2.wp + a53 * k3.wp + a54 * k4.wp)});
        State k6 = deriv(r + h,
                         {y.w + h * (a61 * k1.w + a62 * k2.w + a63 * k3.w + a64 * k4.w + a65 * k5.w),
                          y.wp + h * (a61 * k1.wp + a62 * k2.wp + a63 * k3.wp + a64 * k4.wp + a65 * k5.wp)});
        State y5{y.w + h * (b1 * k1.w + b3 * k3.w + b4 * k4.w + b5 * k5.w + b6 * k6.w),
                 y.wp + h * (b1 * k1.wp + b3 * k3.wp + b4 * k4.wp + b5 * k5.wp + b6 * k6.wp)};
        State k7 = deriv(r + h, y5);
        double errw = h * (e1 * k1.w + e3 * k3.w + e4 * k4.w + e5 * k5.w + e6 * k6.w + e7 * k7.w);
        double errwp = h * (e1 * k1.wp + e3 * k3.wp + e4 * k4.wp + e5 * k5.wp + e6 * k6.wp + e7 * k7.wp);
        double scale = spec.tol * (1.0 + std::max(std::abs(y.w), std::abs(y5.w)));
        double err = std::max(std::abs(errw), std::abs(errwp)) / scale;
        if (err <= 1.0) {
            r += h;
            y = y5;
            if (!std::isfinite(y.w) || !std::isfinite(y.wp))
                throw std::runtime_error("radial_shoot: blowup at r=" + std::to_string(r));
            sol.r.push_back(r);
            sol.w.push_back(y.w);
            sol.wp.push_back(y.wp);
        }
        double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
        if (h < 1e-14 * (spec.r_end - r0))
            throw std::runtime_error("radial_shoot: stiffness, last good r=" + std::to_string(r));
    }
    return sol;
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double m, double b,
             double fa, double fm, double fb, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, m, fa, flm, fm);
    double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, a, lm, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adapt(f, m, rm, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    return adapt(f, a, m, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48);
}

NewtonianPotential newtonian_potential(const std::function<double(double)>& rho,
                                       double r_support, double r_max, int n) {
    double A = integrate_adaptive([&](double s) { return s * s * rho(s); }, 0, r_support);
    NewtonianPotential out;
    out.tail_coefficient = A;
    out.v.r.resize(n);
    out.v.w.resize(n);
    out.v.wp.resize(n);
    for (int i = 0; i < n; ++i) {
        double r = r_max * i / (n - 1);
        double inner = integrate_adaptive([&](double s) { return s * s * rho(s); }, 0,
                                          std::min(r, r_support));
        double outer = r >= r_support
                           ? 0.0
                           : integrate_adaptive([&](double s) { return s * rho(s); }, r, r_support);
        double v, vp;
        if (r == 0) {
            v = -outer;
            vp = 0.0;
        } else {
            v = -inner / r - outer;
            vp = inner / (r * r);  // d/dr[-inner/r] + rho terms cancel with -outer'
        }
        out.v.r[i] = r;
        out.v.w[i] = v;
        out.v.wp[i] = vp;
    }
    return out;
}

}  // namespace qlm::radial
