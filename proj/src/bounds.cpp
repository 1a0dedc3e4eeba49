#include "qlmass/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qlmass/elliptic.hpp"
#include "qlmass/sphere.hpp"

namespace qlm::bounds {

using mesh::integrate;
using mesh::NodeClass;
using mesh::SphereQuadrature;
using mesh::Vec3;

void BoundInputs::validate() const {
    if (n < 3) throw std::invalid_argument("BoundInputs: dimension must be >= 3");
    if (!(Lambda > 0)) throw std::invalid_argument("BoundInputs: Lambda must be positive");
    const double vals[] = {lambda, a, b, alpha, beta, gamma, delta, int_R_plus, int_R_minus};
    for (double v : vals)
        if (v < 0) throw std::invalid_argument("BoundInputs: curvature functionals must be >= 0");
}

double Verdict::extra(const std::string& key) const {
    for (const auto& [k, v] : extras)
        if (k == key) return v;
    throw std::out_of_range("Verdict::extra: no entry named " + key);
}

namespace {

bool all_pass(const std::vector<HypothesisCheck>& hs) {
    for (const auto& h : hs)
        if (!h.pass) return false;
    return true;
}

}  // namespace

Verdict adm_mass_split_bound(const BoundInputs& in) {
    in.validate();
    Verdict v;
    v.id = "adm-split";
    v.unresolved_constant = true;
    v.estimated_gamma = in.gamma_is_estimate;
    double L = in.Lambda;
    HypothesisCheck h{"a < Lambda/2", in.a, 0.5 * L, in.a < 0.5 * L};
    v.hypotheses.push_back(h);
    v.applicable = h.pass;
    if (h.pass) {
        double ratio = (L + 2 * in.b) / (L - 2 * in.a);
        double bracket = (L - 2 * in.a) / (L + in.b - in.a) *
                         (in.int_R_plus - ratio * in.int_R_minus);
        v.bound = in.C_margin * bracket;
        double threshold = ratio * in.int_R_minus;
        v.extras.emplace_back("bracket", bracket);
        v.extras.emplace_back("nonneg_threshold", threshold);
        v.extras.emplace_back("nonneg_condition", in.int_R_plus >= threshold ? 1.0 : 0.0);
    }
    return v;
}

double excision_remainder(const std::vector<double>& density, const std::vector<double>& volume,
                          double budget) {
    if (density.size() != volume.size())
        throw std::invalid_argument("excision_remainder: size mismatch");
    if (budget < 0) throw std::invalid_argument("excision_remainder: negative budget");
    std::vector<std::size_t> order(density.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return density[a] > density[b]; });
    double total = 0;
    for (std::size_t i = 0; i < density.size(); ++i) total += density[i] * volume[i];
    double removed = 0, left = budget;
    for (std::size_t i : order) {
        if (left <= 0) break;
        if (volume[i] <= 0) continue;
        double frac = std::min(1.0, left / volume[i]);
        removed += frac * volume[i] * density[i];
        left -= frac * volume[i];
    }
    return total - removed;
}

Verdict excision_mass_condition(const BoundInputs& in, const ScalarField& rm_sq,
                                const ScalarField* volume_factor) {
    in.validate();
    Verdict v;
    v.id = "excision-condition";
    v.unresolved_constant = true;
    int N = 1 << (in.n / 2);
    double eps = N / 32.0;
    double base = in.C_margin * in.A * N * in.int_R_minus / (eps * eps * in.Lambda);
    double budget = std::pow(std::max(base, 0.0),
                             static_cast<double>(in.n) / (in.n - 2));

    const auto& grid = *rm_sq.grid();
    std::vector<double> density, volume;
    density.reserve(grid.active_count());
    volume.reserve(grid.active_count());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.active(i)) continue;
        double m = volume_factor ? (*volume_factor)[i] : 1.0;
        density.push_back(rm_sq[i]);
        volume.push_back(rm_sq.quadrature_weight(i) * m);
    }
    double B = excision_remainder(density, volume, budget);
    double rhs = in.C_margin * in.A * in.A *
                 (in.sup_Rm * in.int_R_minus + in.grad_Rm_l2 * std::sqrt(in.int_R_minus));

    HypothesisCheck h{"B >= C A^2 [sup|Rm| intR- + ||grad Rm||_2 sqrt(intR-)]", B, rhs, B >= rhs};
    v.hypotheses.push_back(h);
    v.applicable = h.pass;
    v.extras.emplace_back("budget", budget);
    v.extras.emplace_back("B", B);
    v.extras.emplace_back("rhs", rhs);
    v.extras.emplace_back("m_psi_proxy", 0.25 * in.A * in.A * in.int_R_minus);
    return v;
}

double moser_sup_bound(double alpha, double beta, double gamma, double Lambda) {
    if (alpha < 0 || beta < 0 || gamma < 0)
        throw std::invalid_argument("moser_sup_bound: functionals must be >= 0");
    if (!(beta < Lambda))
        throw std::domain_error("moser_sup_bound: requires beta < Lambda");
    double factor = (alpha + 1) * (1 + Lambda - beta) / (Lambda * (Lambda - beta)) + 1;
    return 1.0 + std::pow(27.0, 0.125) * gamma * factor;
}

double pointwise_penalty_min(double lambda, double R) {
    double denom = 8 * lambda + R;
    if (!(denom > 0))
        throw std::domain_error("pointwise_penalty_min: requires 8 lambda + R > 0");
    return 8 * lambda * R / denom;
}

EnergyBounds energy_lower_bounds(const ScalarField& R, double Lambda, double lambda,
                                 const ScalarField* volume_factor) {
    EnergyBounds out;
    ScalarField q(R.grid());
    for (std::size_t i = 0; i < q.values().size(); ++i) q[i] = R[i] / 8.0;
    auto split = metric::sign_split_and_lp(q, volume_factor);
    double int_R_plus = 8.0 * integrate(split.q_plus, volume_factor);
    double int_R_minus = 8.0 * integrate(split.q_minus, volume_factor);

    out.split_applicable = split.beta < 0.5 * Lambda;
    if (out.split_applicable) {
        double ratio = (Lambda + 2 * split.delta) / (Lambda - 2 * split.beta);
        out.split_bound = (Lambda - 2 * split.beta) / (8 * (Lambda + split.delta - split.beta)) *
                          (int_R_plus - ratio * int_R_minus);
    }

    const auto& grid = *R.grid();
    out.eigen_applicable = true;
    ScalarField integrand(R.grid());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.active(i)) continue;
        if (!(8 * lambda + R[i] > 0)) {
            out.eigen_applicable = false;
            out.violating_node = i;
            break;
        }
        integrand[i] = R[i] / (8 * lambda + R[i]);
    }
    if (out.eigen_applicable) out.eigen_bound = lambda * integrate(integrand, volume_factor);
    return out;
}

namespace {

/// Metric distance from radius r to the ball boundary along radial rays,
/// using the sphere-averaged conformal factor (exact for radial metrics).
struct RadialDistance {
    std::vector<double> r, d;  // r ascending; d decreasing, d.back() = 0
    double rb = 0;

    double dist(double radius) const {
        if (radius <= r.front()) return d.front();
        if (radius >= rb) return 0;
        double step = r[1] - r[0];
        double s = (radius - r.front()) / step;
        std::size_t i = std::min(static_cast<std::size_t>(s), r.size() - 2);
        double t = s - i;
        return d[i] * (1 - t) + d[i + 1] * t;
    }
    double radius_at(double s) const {
        if (s <= 0) return rb;
        if (s >= d.front()) return r.front();
        // d is strictly decreasing
        std::size_t lo = 0, hi = d.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            (d[mid] > s ? lo : hi) = mid;
        }
        double t = (d[lo] - s) / (d[lo] - d[hi]);
        return r[lo] * (1 - t) + r[hi] * t;
    }
};

RadialDistance radial_distance(const metric::MetricField& g, double rb) {
    const int K = 1024;
    RadialDistance rd;
    rd.rb = rb;
    rd.r.resize(K + 1);
    rd.d.assign(K + 1, 0.0);
    double step = rb / K;
    SphereQuadrature quad(8, 16);
    std::vector<double> w2(K + 1, 1.0);  // sphere-averaged u^2
    for (int i = 0; i <= K; ++i) {
        rd.r[i] = step * i;
        if (g.is_conformal()) {
            double acc = 0;
            for (std::size_t q = 0; q < quad.dirs.size(); ++q) {
                double uv = g.u().interpolate(quad.dirs[q] * rd.r[i]);
                acc += quad.weights[q] * uv * uv;
            }
            w2[i] = acc / (4 * M_PI);
        }
    }
    for (int i = K - 1; i >= 0; --i)
        rd.d[i] = rd.d[i + 1] + 0.5 * step * (w2[i] + w2[i + 1]);
    return rd;
}

struct DomainData {
    DomainData(ScalarField R_, ScalarField w_) : R(std::move(R_)), w(std::move(w_)) {}

    ScalarField R;
    std::optional<metric::SignSplit> split;
    double Lambda = 0;
    ScalarField w;  // conformal-factor solve with unit boundary data
    double energy = 0;
    metric::LevelSetReport sigma;
    double H_min_collar = 0, H_plus_collar = 0;
    double R_min_collar = 0, R_min_domain = 0;
    double m_by = 0;
    bool embedding_ok = true;
    std::string embedding_error;
    RadialDistance rd;
    std::vector<double> nd;  // dw/dnu over the boundary quadrature
    double flux = 0;         // int dw/dnu dsigma_g
};

DomainData analyze(const CompactDomain& dom) {
    if (!dom.g.is_conformal())
        throw std::invalid_argument("compact-domain bounds support conformal metrics only");
    const auto& grid = dom.g.grid();
    double rb = dom.boundary_radius;
    double h = grid->h();

    DomainData d(metric::scalar_curvature(dom.g), ScalarField(grid));
    ScalarField q(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) q[i] = d.R[i] / 8.0;
    ScalarField vol = dom.g.volume_factor();
    d.split = metric::sign_split_and_lp(q, &vol);

    const ScalarField& uc = dom.g.u();
    double ur = uc.min_active() / uc.max_active();
    d.Lambda = ur * ur * elliptic::flat_sobolev_constant();

    elliptic::EllipticProblem prob{dom.g, q, 1.0, std::nullopt, std::nullopt};
    d.w = elliptic::solve_dirichlet(prob).u;

    // energy int (|grad w|^2 + q w^2) dV_g; conformal weights u^2 / u^6
    auto gr = mesh::gradient(d.w);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        if (!grid->active(i)) continue;
        double g2 = gr.x[i] * gr.x[i] + gr.y[i] * gr.y[i] + gr.z[i] * gr.z[i];
        double u2 = uc[i] * uc[i];
        d.energy += d.w.quadrature_weight(i) *
                    (g2 * u2 + q[i] * d.w[i] * d.w[i] * u2 * u2 * u2);
    }

    d.rd = radial_distance(dom.g, rb);
    if (dom.s0 >= d.rd.d.front())
        throw std::invalid_argument("compact domain: collar depth exceeds the inradius");

    d.sigma = metric::mean_curvature_level_set(dom.g, rb);
    d.H_min_collar = d.sigma.H_min;
    d.H_plus_collar = d.sigma.H_plus_sup;
    for (int k = 1; k <= 4; ++k) {
        double rs = d.rd.radius_at(dom.s0 * k / 4.0);
        auto rep = metric::mean_curvature_level_set(dom.g, rs);
        d.H_min_collar = std::min(d.H_min_collar, rep.H_min);
        d.H_plus_collar = std::max(d.H_plus_collar, rep.H_plus_sup);
    }

    // curvature extrema away from the ragged cut (one-sided stencils there)
    d.R_min_collar = 1e300;
    d.R_min_domain = 1e300;
    const auto& dims = grid->dims();
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                std::size_t idx = grid->index(i, j, k);
                if (grid->node_class(idx) != NodeClass::interior) continue;
                double r = grid->pos(i, j, k).norm();
                if (r > rb - 2 * h) continue;
                d.R_min_domain = std::min(d.R_min_domain, d.R[idx]);
                double s = d.rd.dist(r);
                if (s <= dom.s0) d.R_min_collar = std::min(d.R_min_collar, d.R[idx]);
            }
    if (d.R_min_collar == 1e300) d.R_min_collar = d.R_min_domain;

    try {
        d.m_by = mass::brown_york(dom.g, rb).m_by;
    } catch (const mass::EmbeddingObstructed& e) {
        d.embedding_ok = false;
        d.embedding_error = e.what();
    }

    // boundary normal derivative: the staircase Dirichlet cut corrupts w
    // within ~2h of rb, so measure the radial flux density m = r^2 u^2 dw/dr
    // at a clean interior radius and transport it to rb with the radial
    // identity (r^2 u^2 w')' = q u^6 w r^2
    SphereQuadrature quad(24, 48);
    double rm = rb - 4 * h;
    for (std::size_t qi = 0; qi < quad.dirs.size(); ++qi) {
        const Vec3& dir = quad.dirs[qi];
        auto wv = [&](double r) { return d.w.interpolate(dir * r); };
        double dw_rm = (wv(rm - 2 * h) - 8 * wv(rm - h) + 8 * wv(rm + h) - wv(rm + 2 * h)) /
                       (12 * h);
        double um = uc.interpolate(dir * rm);
        double m_rb = rm * rm * um * um * dw_rm;
        // Simpson over [rm, rb]; q and w are sampled at clamped clean radii
        const int ns = 8;
        double step = (rb - rm) / ns;
        for (int s = 0; s <= ns; ++s) {
            double r = rm + step * s;
            double rc = std::min(r, rb - 2 * h);
            double qv = d.R.interpolate(dir * rc) / 8.0;
            double wr = r <= rb - 2 * h ? wv(r) : 1.0 + dw_rm * (r - rb);
            double ur = uc.interpolate(dir * r);
            double coeff = (s == 0 || s == ns) ? 1.0 : (s % 2 ? 4.0 : 2.0);
            m_rb += coeff * step / 3.0 * qv * std::pow(ur, 6) * wr * r * r;
        }
        double uv = uc.interpolate(dir * rb);
        double u4 = uv * uv * uv * uv;
        d.nd.push_back(m_rb / (rb * rb * u4));  // dw/dnu in g
        d.flux += quad.weights[qi] * m_rb;      // dsigma_g integrand equals m(rb)
    }
    return d;
}

void comparison_and_floor(Verdict& v, const CompactDomain& dom, const DomainData& d,
                          const std::function<double(double)>& phi, bool extend_constant,
                          double floor_value) {
    const auto& grid = dom.g.grid();
    double h = grid->h();
    double rb = dom.boundary_radius;
    double worst = -1e300;
    const auto& dims = grid->dims();
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                std::size_t idx = grid->index(i, j, k);
                if (grid->node_class(idx) != NodeClass::interior) continue;
                double r = grid->pos(i, j, k).norm();
                if (r > rb - 2 * h) continue;  // cut-cell ring: O(h) geometry
                double s = d.rd.dist(r);
                if (s > dom.s0 && !extend_constant) continue;
                double f = phi(std::min(s, dom.s0));
                worst = std::max(worst, d.w[idx] - f);
            }
    double nd_min = *std::min_element(d.nd.begin(), d.nd.end());
    v.extras.emplace_back("comparison_worst", worst);
    v.extras.emplace_back("comparison_slack", 50 * h * h);
    v.extras.emplace_back("normal_deriv_min", nd_min);
    v.extras.emplace_back("normal_deriv_floor", floor_value);
    v.extras.emplace_back("boundary_flux_quarter", 0.25 * d.flux);
}

}  // namespace

Verdict brown_york_bound_trig(const CompactDomain& dom) {
    DomainData d = analyze(dom);
    Verdict v;
    v.id = "by-trig";
    v.scenario = dom.name;
    v.estimated_gamma = d.split->gamma_is_estimate;

    double xi = std::min(M_PI / (6 * dom.s0), 0.5 * d.sigma.H_min);
    double L = d.Lambda, al = d.split->alpha, be = d.split->beta, ga = d.split->gamma;

    v.hypotheses.push_back({"collar mean curvature positive", d.H_min_collar, 0.0,
                            d.H_min_collar > 0});
    v.hypotheses.push_back({"boundary Gauss curvature positive (embedding)",
                            d.embedding_ok ? 1.0 : 0.0, 1.0, d.embedding_ok});
    v.hypotheses.push_back({"beta < Lambda", be, L, be < L});
    v.hypotheses.push_back({"alpha <= xi^2", al, xi * xi, al <= xi * xi});
    double thr = 0;
    if (be < L) {
        double factor = (al + 1) * (1 + L - be) / (L - be) + 1;
        thr = std::pow(27.0, -0.125) / factor * xi * dom.s0 / 10.0;
    }
    v.hypotheses.push_back({"gamma below collar threshold", ga, thr, be < L && ga <= thr});
    v.applicable = all_pass(v.hypotheses);

    v.bound = 0.25 * d.energy;
    v.mass = d.m_by;
    if (d.embedding_ok) v.margin = d.m_by - v.bound;

    auto phi = [xi](double s) { return std::cos(xi * s) + std::sin(xi * s); };
    comparison_and_floor(v, dom, d, phi, false, -xi);
    v.extras.emplace_back("xi", xi);
    v.extras.emplace_back("alpha", al);
    v.extras.emplace_back("beta", be);
    v.extras.emplace_back("gamma", ga);
    v.extras.emplace_back("Lambda", L);
    v.extras.emplace_back("sigma_area", d.sigma.area);
    v.extras.emplace_back("energy", d.energy);
    return v;
}

Verdict brown_york_bound_tanh(const CompactDomain& dom) {
    DomainData d = analyze(dom);
    Verdict v;
    v.id = "by-tanh";
    v.scenario = dom.name;

    double h = dom.g.grid()->h();
    double r_scale = std::max(std::abs(d.R.max_active()), std::abs(d.R.min_active()));
    double r_slack = 1e-8 + 10 * h * h * r_scale;
    double xi = 0.25 * std::sqrt(std::max(d.R_min_collar, 0.0));
    double th = std::tanh(xi * dom.s0);

    v.hypotheses.push_back({"scalar curvature nonnegative (O(h^2) slack)", d.R_min_domain, 0.0,
                            d.R_min_domain >= -r_slack});
    v.hypotheses.push_back({"boundary Gauss curvature positive (embedding)",
                            d.embedding_ok ? 1.0 : 0.0, 1.0, d.embedding_ok});
    v.hypotheses.push_back({"xi >= H_+ tanh(xi s0)", xi, d.H_plus_collar * th,
                            xi >= d.H_plus_collar * th});
    v.hypotheses.push_back({"xi tanh(xi s0) >= -4 H_min", xi * th, -4 * d.sigma.H_min,
                            xi * th >= -4 * d.sigma.H_min});
    v.applicable = all_pass(v.hypotheses);

    v.bound = 0.25 * d.sigma.area * xi * th;
    v.mass = d.m_by;
    if (d.embedding_ok) v.margin = d.m_by - v.bound;

    auto phi = [xi, th](double s) { return std::cosh(xi * s) - th * std::sinh(xi * s); };
    comparison_and_floor(v, dom, d, phi, true, xi * th);
    v.extras.emplace_back("xi", xi);
    v.extras.emplace_back("R_min_collar", d.R_min_collar);
    v.extras.emplace_back("sigma_area", d.sigma.area);
    v.extras.emplace_back("energy", d.energy);
    return v;
}

MassIdentity conformal_mass_identity(const metric::MetricField& g,
                                     const std::vector<double>& radii) {
    if (!g.is_conformal())
        throw std::invalid_argument("conformal_mass_identity: conformal metrics only");
    const auto& grid = g.grid();
    const ScalarField& u = g.u();

    MassIdentity out;
    // shell-averaged tail fit u ~ b + A/r gives m = 2A; averaging over whole
    // shells suppresses the interpolation noise that the pointwise flux
    // quadrature picks up from the gradient field
    auto fit = metric::fit_decay(u, radii);
    out.mass = 2.0 * fit.A;
    out.c_mass = 2 * M_PI * out.mass;

    ScalarField R = metric::scalar_curvature(g);
    ScalarField vol = g.volume_factor();
    out.int_R8_metric = integrate(R, &vol) / 8.0;

    ScalarField lap = mesh::laplacian_flat(u);
    ScalarField ul(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) ul[i] = -u[i] * lap[i];
    out.int_R8_flat = integrate(ul);

    // gradient energy of v = 1 - u over the inscribed ball + fitted tail
    double Lb = 0.95 * grid->half_extent();
    ScalarField v(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) v[i] = 1.0 - u[i];
    auto gr = mesh::gradient(v);
    const auto& dims = grid->dims();
    double energy = 0;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                std::size_t idx = grid->index(i, j, k);
                if (!grid->active(idx)) continue;
                if (grid->pos(i, j, k).norm() > Lb) continue;
                energy += v.quadrature_weight(idx) * (gr.x[idx] * gr.x[idx] +
                                                      gr.y[idx] * gr.y[idx] +
                                                      gr.z[idx] * gr.z[idx]);
            }
    energy += 4 * M_PI * fit.A * fit.A / Lb;
    out.grad_v_energy = energy;
    out.decay_fit_poor = fit.C > 0.1 * std::abs(fit.A) * *std::min_element(radii.begin(),
                                                                           radii.end());
    out.residual = out.c_mass - out.int_R8_metric + out.grad_v_energy;
    return out;
}

Verdict minkowski_checks(const mass::SurfaceFunctionals& fn) {
    Verdict v;
    v.id = "minkowski";
    v.hypotheses.push_back({"surface convex", fn.convex ? 1.0 : 0.0, 1.0, fn.convex});
    v.applicable = fn.convex;
    double h0_sq = fn.total_h0 * fn.total_h0;
    double margin_area = h0_sq - 16 * M_PI * fn.area;
    v.extras.emplace_back("area_inequality_margin", margin_area);
    if (std::isfinite(fn.volume) && fn.volume > 0) {
        double lhs = 4 * std::pow(fn.area, 4) / (9 * fn.volume * fn.volume);
        v.extras.emplace_back("volume_inequality_margin", lhs - h0_sq);
        v.extras.emplace_back("sharpness_gap", lhs - 16 * M_PI * fn.area);
    }
    return v;
}

Verdict mean_curvature_threshold(const std::vector<double>& H, double area) {
    if (H.empty() || !(area > 0))
        throw std::invalid_argument("mean_curvature_threshold: need samples and positive area");
    Verdict v;
    v.id = "h-threshold";
    double sup = *std::max_element(H.begin(), H.end());
    double thr = 4 * std::sqrt(M_PI / area);
    v.bound = thr;
    v.hypotheses.push_back({"sup H <= 4 sqrt(pi/area)", sup, thr, sup <= thr});
    v.applicable = v.hypotheses.front().pass;
    v.extras.emplace_back("sup_H", sup);
    v.extras.emplace_back("threshold", thr);
    return v;
}

}  // namespace qlm::bounds
