// Python bindings: a thin scripting layer over the C++ core.  Exposes the
// scenario registry, the mass pipelines, and the closed-form bound helpers;
// heavyweight state (grids, metrics) stays on the C++ side of each call.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qlmass/bounds.hpp"
#include "qlmass/cli.hpp"
#include "qlmass/elliptic.hpp"
#include "qlmass/mass.hpp"
#include "qlmass/scenarios.hpp"

namespace py = pybind11;
using namespace qlm;

namespace {

scenarios::Scenario find_scenario(const std::string& name) {
    for (auto& s : scenarios::registry())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown scenario: " + name);
}

py::dict verdict_dict(const bounds::Verdict& v) {
    py::dict d;
    d["id"] = v.id;
    d["scenario"] = v.scenario;
    d["applicable"] = v.applicable;
    d["bound"] = v.bound;
    if (v.mass) d["mass"] = *v.mass;
    if (v.margin) d["margin"] = *v.margin;
    d["unresolved_constant"] = v.unresolved_constant;
    d["estimated_gamma"] = v.estimated_gamma;
    py::list hyp;
    for (const auto& h : v.hypotheses) {
        py::dict e;
        e["name"] = h.name;
        e["computed"] = h.computed;
        e["required"] = h.required;
        e["pass"] = h.pass;
        hyp.append(e);
    }
    d["hypotheses"] = hyp;
    py::dict ex;
    for (const auto& [k, val] : v.extras) ex[py::str(k)] = val;
    d["extras"] = ex;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qlmass, m) {
    m.doc() = "ADM and Brown-York mass pipelines for explicit 3-metrics";

    m.def("scenario_names", [] {
        std::vector<std::string> out;
        for (const auto& s : scenarios::registry()) out.push_back(s.name);
        return out;
    });

    m.def(
        "scenario_oracles",
        [](const std::string& name) {
            py::dict d;
            for (const auto& o : find_scenario(name).oracles)
                d[py::str(o.name)] = o.value;
            return d;
        },
        py::arg("name"));

    m.def(
        "adm_mass",
        [](const std::string& name, double half, int n, std::vector<double> radii) {
            auto g = find_scenario(name).build(half, n);
            auto a = mass::adm_mass(g, radii);
            py::dict d;
            d["mass"] = a.mass;
            d["normalization"] = a.normalization;
            py::list flux;
            for (const auto& [r, f] : a.flux_values) flux.append(py::make_tuple(r, f));
            d["flux_values"] = flux;
            return d;
        },
        py::arg("scenario"), py::arg("half_extent"), py::arg("n"), py::arg("radii"));

    m.def(
        "brown_york",
        [](const std::string& name, int n, double r0) {
            auto s = find_scenario(name);
            double half = s.boundary_radius > 0 ? 1.2 * s.boundary_radius : s.outer_extent;
            auto b = mass::brown_york(s.build(half, n), r0);
            py::dict d;
            d["m_by"] = b.m_by;
            d["m_by_physical"] = b.m_by_physical;
            d["area"] = b.area;
            return d;
        },
        py::arg("scenario"), py::arg("n"), py::arg("radius"));

    m.def(
        "compact_bound",
        [](const std::string& name, const std::string& kind, int n) {
            for (const auto& s : scenarios::compact_scenarios()) {
                if (s.name != name || s.boundary_radius == 0 || s.excision_radius > 0)
                    continue;
                auto g = s.build(1.2 * s.boundary_radius, n);
                bounds::CompactDomain dom{g, s.boundary_radius, s.s0, s.name};
                if (kind == "trig") return verdict_dict(bounds::brown_york_bound_trig(dom));
                if (kind == "tanh") return verdict_dict(bounds::brown_york_bound_tanh(dom));
                throw std::invalid_argument("kind must be 'trig' or 'tanh'");
            }
            throw std::invalid_argument("no compact ball scenario named " + name);
        },
        py::arg("scenario"), py::arg("kind"), py::arg("n"));

    m.def("moser_sup_bound", &bounds::moser_sup_bound, py::arg("alpha"), py::arg("beta"),
          py::arg("gamma"), py::arg("Lambda"));
    m.def("pointwise_penalty_min", &bounds::pointwise_penalty_min, py::arg("lambda_"),
          py::arg("R"));
    m.def("excision_remainder", &bounds::excision_remainder, py::arg("density"),
          py::arg("volume"), py::arg("budget"));
    m.def("flat_sobolev_constant", &elliptic::flat_sobolev_constant);

    m.def("run", &cli::run_file, py::arg("config_path"),
          "Execute a run config; returns the process exit code (0/1/2).");
    m.def("report", &cli::report, py::arg("artifact_dir"),
          "Render the margin matrix for an artifact directory; returns exit code.");
}
