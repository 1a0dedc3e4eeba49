#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlm::mesh {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
};

enum class NodeClass : std::uint8_t {
    exterior = 0,  // masked out (excised hole, outside ball, never part of the domain)
    boundary = 1,  // carries Dirichlet data
    interior = 2,
};

/// Uniform Cartesian grid. Exterior/annulus domains are realized as
/// box-minus-ball with radial masking; masked/unmasked interface nodes are
/// boundary nodes (cut-cell snapping, no sub-cell geometry).
class Grid3 {
public:
    Grid3(Vec3 origin, double h, std::array<int, 3> dims,
          std::optional<double> excision_radius = std::nullopt,
          std::optional<double> outer_radius = std::nullopt);

    /// Cube [-half, half]^3 centered at the coordinate origin with n nodes per axis.
    static std::shared_ptr<const Grid3> centered_box(double half, int n,
                                                     std::optional<double> excision_radius = std::nullopt,
                                                     std::optional<double> outer_radius = std::nullopt);

    std::size_t size() const { return n_total_; }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i;
    }
    Vec3 pos(int i, int j, int k) const {
        return {origin_.x + h_ * i, origin_.y + h_ * j, origin_.z + h_ * k};
    }
    NodeClass node_class(std::size_t idx) const { return cls_[idx]; }
    NodeClass node_class(int i, int j, int k) const { return cls_[index(i, j, k)]; }
    bool active(std::size_t idx) const { return cls_[idx] != NodeClass::exterior; }

    double h() const { return h_; }
    const std::array<int, 3>& dims() const { return dims_; }
    Vec3 origin() const { return origin_; }
    std::optional<double> excision_radius() const { return excision_radius_; }
    std::optional<double> outer_radius() const { return outer_radius_; }
    std::size_t active_count() const { return n_active_; }
    std::size_t interior_count() const { return n_interior_; }

    /// Largest half-width of the box around the coordinate origin.
    double half_extent() const;

private:
    Vec3 origin_;
    double h_;
    std::array<int, 3> dims_;
    std::optional<double> excision_radius_;
    std::optional<double> outer_radius_;
    std::vector<NodeClass> cls_;
    std::size_t n_total_ = 0, n_active_ = 0, n_interior_ = 0;
};

using GridPtr = std::shared_ptr<const Grid3>;

/// Scalar samples on a Grid3 with midpoint quadrature weights.
/// Weights are h^3 on active nodes and 0 on masked nodes.
class ScalarField {
public:
    explicit ScalarField(GridPtr grid, double fill = 0.0);
    ScalarField(GridPtr grid, std::function<double(const Vec3&)> f);

    const GridPtr& grid() const { return grid_; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }
    double quadrature_weight(std::size_t i) const;

    double at(int i, int j, int k) const { return v_[grid_->index(i, j, k)]; }
    double& at(int i, int j, int k) { return v_[grid_->index(i, j, k)]; }

    /// Trilinear interpolation at an arbitrary point (must be inside the box).
    double interpolate(const Vec3& p) const;

    double min_active() const;
    double max_active() const;

    /// Throws with the offending node index if any active value is non-finite.
    void require_finite(const std::string& what) const;

private:
    GridPtr grid_;
    std::vector<double> v_;
};

enum class VolumeElement { euclidean, metric };

/// Sum of values * weights over active nodes in fixed lexicographic order.
/// `metric_volume_factor` is sqrt(det g) per node (u^6 for conformal metrics);
/// pass nullptr for the Euclidean measure.
double integrate(const ScalarField& field, const ScalarField* metric_volume_factor = nullptr);

struct VectorField {
    ScalarField x, y, z;
};

/// Second-order gradient: centered in the interior, one-sided at box faces
/// and next to masked nodes.
VectorField gradient(const ScalarField& f);

// Per-node second-order derivatives (centered with one-sided fallback).
double node_deriv(const ScalarField& f, int i, int j, int k, int axis);
double node_second_deriv(const ScalarField& f, int i, int j, int k, int axis);
/// Mixed derivative d2 f / dxa dxb, centered four-point stencil (a != b).
double node_mixed_deriv(const ScalarField& f, int i, int j, int k, int a, int b);

/// Flat 7-point Laplacian, one-sided second-order stencils at domain faces.
ScalarField laplacian_flat(const ScalarField& f);

/// Rayleigh-Sobolev quotient  int |grad f|^2 / (int |f|^6)^(1/3)  for a test
/// field extended by zero; f must vanish on a 2-cell boundary layer.
/// The link-based gradient energy matches the solver's stiffness form, so the
/// minimizer of this quotient is consistent with the elliptic module.
/// `conformal_u` attaches the metric u^4 delta (nullptr = flat).
double sobolev_quotient(const ScalarField& f, const ScalarField* conformal_u = nullptr);

/// Stiffness energy  sum_links a_face (df/h)^2 h^3  with a = u^2 face-averaged.
double dirichlet_energy(const ScalarField& f, const ScalarField* conformal_u = nullptr);

/// L^6 mass  int f^6 dV_g  (metric measure u^6 when u given).
double l6_mass(const ScalarField& f, const ScalarField* conformal_u = nullptr);

// Flat binary layout: header (dims, h, origin) + row-major f64 payload.
void save_binary(const ScalarField& f, const std::string& path);
ScalarField load_binary(const std::string& path);
void save_csv(const ScalarField& f, const std::string& path);

}  // namespace qlm::mesh
