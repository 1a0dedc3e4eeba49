#include "qlmass/sphere.hpp"

#include <cmath>

namespace qlm::mesh {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev estimate.
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

SphereQuadrature::SphereQuadrature(int n_theta, int n_phi) {
    std::vector<double> ct, wt;
    gauss_legendre(n_theta, ct, wt);
    double dphi = 2.0 * M_PI / n_phi;
    dirs.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    for (int it = 0; it < n_theta; ++it) {
        double c = ct[it], s = std::sqrt(std::max(0.0, 1.0 - c * c));
        double th = std::acos(c);
        for (int ip = 0; ip < n_phi; ++ip) {
            double phi = dphi * ip;
            dirs.push_back({s * std::cos(phi), s * std::sin(phi), c});
            weights.push_back(wt[it] * dphi);
            theta.push_back(th);
        }
    }
}

}  // namespace qlm::mesh
