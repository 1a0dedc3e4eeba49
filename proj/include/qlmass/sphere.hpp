#pragma once

#include <vector>

#include "qlmass/field.hpp"

namespace qlm::mesh {

/// Product quadrature on the unit sphere: Gauss-Legendre in cos(theta) times
/// uniform phi. Weights sum to 4*pi.
struct SphereQuadrature {
    std::vector<Vec3> dirs;
    std::vector<double> weights;
    std::vector<double> theta;  // colatitude per sample

    explicit SphereQuadrature(int n_theta = 24, int n_phi = 48);
};

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace qlm::mesh
