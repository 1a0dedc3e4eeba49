#include "qlmass/field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace qlm::mesh {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Grid3::Grid3(Vec3 origin, double h, std::array<int, 3> dims,
             std::optional<double> excision_radius, std::optional<double> outer_radius)
    : origin_(origin), h_(h), dims_(dims),
      excision_radius_(excision_radius), outer_radius_(outer_radius) {
    if (h <= 0) throw std::invalid_argument("Grid3: h must be positive");
    for (int d = 0; d < 3; ++d)
        if (dims_[d] < 8) throw std::invalid_argument("Grid3: dims must be >= 8");
    n_total_ = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    cls_.assign(n_total_, NodeClass::interior);

    auto masked = [&](int i, int j, int k) {
        double r = pos(i, j, k).norm();
        if (excision_radius_ && r < *excision_radius_) return true;
        if (outer_radius_ && r > *outer_radius_) return true;
        return false;
    };

    for (int k = 0; k < dims_[2]; ++k)
        for (int j = 0; j < dims_[1]; ++j)
            for (int i = 0; i < dims_[0]; ++i)
                if (masked(i, j, k)) cls_[index(i, j, k)] = NodeClass::exterior;

    // Boundary: an active node on a box face or with a masked 6-neighbor.
    for (int k = 0; k < dims_[2]; ++k)
        for (int j = 0; j < dims_[1]; ++j)
            for (int i = 0; i < dims_[0]; ++i) {
                std::size_t idx = index(i, j, k);
                if (cls_[idx] == NodeClass::exterior) continue;
                bool face = i == 0 || j == 0 || k == 0 ||
                            i == dims_[0] - 1 || j == dims_[1] - 1 || k == dims_[2] - 1;
                bool next_to_mask =
                    !face &&
                    (cls_[index(i - 1, j, k)] == NodeClass::exterior ||
                     cls_[index(i + 1, j, k)] == NodeClass::exterior ||
                     cls_[index(i, j - 1, k)] == NodeClass::exterior ||
                     cls_[index(i, j + 1, k)] == NodeClass::exterior ||
                     cls_[index(i, j, k - 1)] == NodeClass::exterior ||
                     cls_[index(i, j, k + 1)] == NodeClass::exterior);
                if (face || next_to_mask) cls_[idx] = NodeClass::boundary;
            }

    for (std::size_t idx = 0; idx < n_total_; ++idx) {
        if (cls_[idx] != NodeClass::exterior) ++n_active_;
        if (cls_[idx] == NodeClass::interior) ++n_interior_;
    }
    if (n_interior_ == 0) throw std::invalid_argument("Grid3: no interior nodes after masking");
}

std::shared_ptr<const Grid3> Grid3::centered_box(double half, int n,
                                                 std::optional<double> excision_radius,
                                                 std::optional<double> outer_radius) {
    double h = 2.0 * half / (n - 1);
    return std::make_shared<Grid3>(Vec3{-half, -half, -half}, h,
                                   std::array<int, 3>{n, n, n}, excision_radius, outer_radius);
}

double Grid3::half_extent() const {
    double m = 0;
    for (int d = 0; d < 3; ++d) {
        double lo = d == 0 ? origin_.x : (d == 1 ? origin_.y : origin_.z);
        double hi = lo + h_ * (dims_[d] - 1);
        m = std::max(m, std::max(std::abs(lo), std::abs(hi)));
    }
    return m;
}

ScalarField::ScalarField(GridPtr grid, double fill)
    : grid_(std::move(grid)), v_(grid_->size(), fill) {}

ScalarField::ScalarField(GridPtr grid, std::function<double(const Vec3&)> f)
    : grid_(std::move(grid)), v_(grid_->size(), 0.0) {
    const auto& d = grid_->dims();
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i)
                v_[grid_->index(i, j, k)] = f(grid_->pos(i, j, k));
}

double ScalarField::quadrature_weight(std::size_t i) const {
    return grid_->active(i) ? grid_->h() * grid_->h() * grid_->h() : 0.0;
}

double ScalarField::interpolate(const Vec3& p) const {
    const auto& d = grid_->dims();
    double h = grid_->h();
    Vec3 o = grid_->origin();
    double fx = (p.x - o.x) / h, fy = (p.y - o.y) / h, fz = (p.z - o.z) / h;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    int k = static_cast<int>(std::floor(fz));
    i = std::max(0, std::min(i, d[0] - 2));
    j = std::max(0, std::min(j, d[1] - 2));
    k = std::max(0, std::min(k, d[2] - 2));
    double tx = fx - i, ty = fy - j, tz = fz - k;
    double c = 0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
                c += w * v_[grid_->index(i + dx, j + dy, k + dz)];
            }
    return c;
}

double ScalarField::min_active() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (grid_->active(i)) m = std::min(m, v_[i]);
    return m;
}

double ScalarField::max_active() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (grid_->active(i)) m = std::max(m, v_[i]);
    return m;
}

void ScalarField::require_finite(const std::string& what) const {
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (grid_->active(i) && !std::isfinite(v_[i]))
            throw std::domain_error(what + ": non-finite value at node " + std::to_string(i));
}

double integrate(const ScalarField& field, const ScalarField* metric_volume_factor) {
    field.require_finite("integrate");
    const auto& g = *field.grid();
    const auto& d = g.dims();
    double w = g.h() * g.h() * g.h();
    double sum = 0;
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                std::size_t idx = g.index(i, j, k);
                if (!g.active(idx)) continue;
                double m = metric_volume_factor ? (*metric_volume_factor)[idx] : 1.0;
                sum += field[idx] * m * w;
            }
    return sum;
}

// 1D derivative along one axis: centered when both neighbors are active,
// second-order one-sided otherwise, 0 when the stencil cannot be formed.
double node_deriv(const ScalarField& f, int i, int j, int k, int axis) {
    const auto& g = *f.grid();
    const auto& d = g.dims();
    double h = g.h();
    auto idx = [&](int di) {
        int ii = i + (axis == 0 ? di : 0);
        int jj = j + (axis == 1 ? di : 0);
        int kk = k + (axis == 2 ? di : 0);
        if (ii < 0 || jj < 0 || kk < 0 || ii >= d[0] || jj >= d[1] || kk >= d[2]) return std::size_t(-1);
        std::size_t id = g.index(ii, jj, kk);
        return g.active(id) ? id : std::size_t(-1);
    };
    std::size_t m1 = idx(-1), p1 = idx(1);
    if (m1 != std::size_t(-1) && p1 != std::size_t(-1))
        return (f[p1] - f[m1]) / (2 * h);
    std::size_t c = g.index(i, j, k);
    if (p1 != std::size_t(-1)) {
        std::size_t p2 = idx(2);
        if (p2 != std::size_t(-1)) return (-3 * f[c] + 4 * f[p1] - f[p2]) / (2 * h);
        return (f[p1] - f[c]) / h;
    }
    if (m1 != std::size_t(-1)) {
        std::size_t m2 = idx(-2);
        if (m2 != std::size_t(-1)) return (3 * f[c] - 4 * f[m1] + f[m2]) / (2 * h);
        return (f[c] - f[m1]) / h;
    }
    return 0.0;
}

double node_second_deriv(const ScalarField& f, int i, int j, int k, int axis) {
    const auto& g = *f.grid();
    const auto& d = g.dims();
    double h2 = g.h() * g.h();
    auto idx = [&](int di) {
        int ii = i + (axis == 0 ? di : 0);
        int jj = j + (axis == 1 ? di : 0);
        int kk = k + (axis == 2 ? di : 0);
        if (ii < 0 || jj < 0 || kk < 0 || ii >= d[0] || jj >= d[1] || kk >= d[2]) return std::size_t(-1);
        std::size_t id = g.index(ii, jj, kk);
        return g.active(id) ? id : std::size_t(-1);
    };
    std::size_t c = g.index(i, j, k);
    std::size_t m1 = idx(-1), p1 = idx(1);
    if (m1 != std::size_t(-1) && p1 != std::size_t(-1))
        return (f[p1] - 2 * f[c] + f[m1]) / h2;
    if (p1 != std::size_t(-1)) {
        std::size_t p2 = idx(2), p3 = idx(3);
        if (p2 != std::size_t(-1) && p3 != std::size_t(-1))
            return (2 * f[c] - 5 * f[p1] + 4 * f[p2] - f[p3]) / h2;
        if (p2 != std::size_t(-1)) return (f[c] - 2 * f[p1] + f[p2]) / h2;
    }
    if (m1 != std::size_t(-1)) {
        std::size_t m2 = idx(-2), m3 = idx(-3);
        if (m2 != std::size_t(-1) && m3 != std::size_t(-1))
            return (2 * f[c] - 5 * f[m1] + 4 * f[m2] - f[m3]) / h2;
        if (m2 != std::size_t(-1)) return (f[c] - 2 * f[m1] + f[m2]) / h2;
    }
    return 0.0;
}

double node_mixed_deriv(const ScalarField& f, int i, int j, int k, int a, int b) {
    const auto& g = *f.grid();
    double h = g.h();
    auto at = [&](int da, int db) {
        int ii = i + (a == 0 ? da : 0) + (b == 0 ? db : 0);
        int jj = j + (a == 1 ? da : 0) + (b == 1 ? db : 0);
        int kk = k + (a == 2 ? da : 0) + (b == 2 ? db : 0);
        return f[g.index(ii, jj, kk)];
    };
    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
}

VectorField gradient(const ScalarField& f) {
    const auto& g = *f.grid();
    const auto& d = g.dims();
    for (int a = 0; a < 3; ++a)
        if (d[a] < 3) throw std::invalid_argument("gradient: dims must be >= 3 per axis");
    VectorField out{ScalarField(f.grid()), ScalarField(f.grid()), ScalarField(f.grid())};
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                std::size_t idx = g.index(i, j, k);
                if (!g.active(idx)) continue;
                out.x[idx] = node_deriv(f, i, j, k, 0);
                out.y[idx] = node_deriv(f, i, j, k, 1);
                out.z[idx] = node_deriv(f, i, j, k, 2);
            }
    return out;
}

ScalarField laplacian_flat(const ScalarField& f) {
    const auto& g = *f.grid();
    const auto& d = g.dims();
    for (int a = 0; a < 3; ++a)
        if (d[a] < 3) throw std::invalid_argument("laplacian_flat: dims must be >= 3 per axis");
    ScalarField out(f.grid());
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                std::size_t idx = g.index(i, j, k);
                if (!g.active(idx)) continue;
                out[idx] = node_second_deriv(f, i, j, k, 0) + node_second_deriv(f, i, j, k, 1) +
                           node_second_deriv(f, i, j, k, 2);
            }
    return out;
}

double dirichlet_energy(const ScalarField& f, const ScalarField* conformal_u) {
    const auto& g = *f.grid();
    const auto& d = g.dims();
    double h = g.h();
    double sum = 0;
    // Link sum: a_face * (df)^2 * h, a = u^2 averaged over the link endpoints.
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                std::size_t c = g.index(i, j, k);
                if (!g.active(c)) continue;
                for (int axis = 0; axis < 3; ++axis) {
                    int ii = i + (axis == 0), jj = j + (axis == 1), kk = k + (axis == 2);
                    if (ii >= d[0] || jj >= d[1] || kk >= d[2]) continue;
                    std::size_t nb = g.index(ii, jj, kk);
                    if (!g.active(nb)) continue;
                    double a = 1.0;
                    if (conformal_u) {
                        double ua = (*conformal_u)[c], ub = (*conformal_u)[nb];
                        a = 0.5 * (ua * ua + ub * ub);
                    }
                    double df = f[nb] - f[c];
                    sum += a * df * df * h;
                }
            }
    return sum;
}

double l6_mass(const ScalarField& f, const ScalarField* conformal_u) {
    const auto& g = *f.grid();
    double w = g.h() * g.h() * g.h();
    double sum = 0;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
        if (!g.active(i)) continue;
        double m = 1.0;
        if (conformal_u) {
            double u = (*conformal_u)[i];
            m = u * u * u * u * u * u;
        }
        double v = f[i];
        double v2 = v * v;
        sum += v2 * v2 * v2 * m * w;
    }
    return sum;
}

double sobolev_quotient(const ScalarField& f, const ScalarField* conformal_u) {
    const auto& g = *f.grid();
    const auto& d = g.dims();
    // f must vanish on a 2-cell layer at the box faces.
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                bool layer = i < 2 || j < 2 || k < 2 ||
                             i >= d[0] - 2 || j >= d[1] - 2 || k >= d[2] - 2;
                if (layer && f.at(i, j, k) != 0.0)
                    throw std::invalid_argument("sobolev_quotient: field must vanish on 2-cell boundary layer");
            }
    double den = l6_mass(f, conformal_u);
    if (den == 0.0) throw std::invalid_argument("sobolev_quotient: field is identically zero");
    return dirichlet_energy(f, conformal_u) / std::cbrt(den);
}

void save_binary(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_binary: cannot open " + path);
    const auto& g = *f.grid();
    std::int64_t dims[3] = {g.dims()[0], g.dims()[1], g.dims()[2]};
    double h = g.h();
    Vec3 o = g.origin();
    double org[3] = {o.x, o.y, o.z};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    os.write(reinterpret_cast<const char*>(&h), sizeof(h));
    os.write(reinterpret_cast<const char*>(org), sizeof(org));
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.values().size() * sizeof(double)));
}

ScalarField load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_binary: cannot open " + path);
    std::int64_t dims[3];
    double h, org[3];
    is.read(reinterpret_cast<char*>(dims), sizeof(dims));
    is.read(reinterpret_cast<char*>(&h), sizeof(h));
    is.read(reinterpret_cast<char*>(org), sizeof(org));
    auto grid = std::make_shared<Grid3>(Vec3{org[0], org[1], org[2]}, h,
                                        std::array<int, 3>{(int)dims[0], (int)dims[1], (int)dims[2]});
    ScalarField f(grid);
    is.read(reinterpret_cast<char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    if (!is) throw std::runtime_error("load_binary: truncated payload in " + path);
    return f;
}

void save_csv(const ScalarField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_csv: cannot open " + path);
    os << "x,y,z,value\n";
    os.precision(17);
    const auto& g = *f.grid();
    const auto& d = g.dims();
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                std::size_t idx = g.index(i, j, k);
                if (!g.active(idx)) continue;
                Vec3 p = g.pos(i, j, k);
                os << p.x << ',' << p.y << ',' << p.z << ',' << f[idx] << '\n';
            }
}

}  // namespace qlm::mesh
