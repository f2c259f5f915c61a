#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "capdist/analytic.hpp"
#include "capdist/cd_solver.hpp"
#include "capdist/errors.hpp"
#include "capdist/extensions.hpp"
#include "capdist/simulator.hpp"

namespace py = pybind11;
using namespace capdist;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

py::dict point_dict(const CDPoint& p) {
    py::dict d;
    d["distortion"] = p.distortion_budget;
    d["capacity"] = p.capacity;
    d["optimizer"] = to_vector(p.optimizer.probs());
    d["constraint_active"] = p.constraint_active;
    d["multiplier"] = p.multiplier;
    d["warning"] = p.convergence_warning;
    return d;
}

py::dict cpud_dict(const CpudResult& r) {
    py::dict d;
    d["value"] = r.value;
    d["infinite"] = r.infinite();
    d["reason"] = r.infinite_reason;
    d["witness_letter"] = r.witness_letter;
    d["witness_budget"] = r.witness_budget;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Capacity-distortion solver core";

    static py::exception<Error> base(m, "CapdistError", PyExc_ValueError);
    static py::exception<Error> input(m, "InputError", base.ptr());
    static py::exception<Error> infeasible(m, "InfeasibleError", base.ptr());
    static py::exception<Error> convergence(m, "ConvergenceError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            switch (e.kind()) {
                case ErrorKind::Input: py::set_error(input, e.what()); break;
                case ErrorKind::Infeasible: py::set_error(infeasible, e.what()); break;
                case ErrorKind::Convergence: py::set_error(convergence, e.what()); break;
            }
        }
    });

    py::class_<ChannelModel>(m, "ChannelModel")
        .def(py::init([](std::vector<std::vector<std::vector<double>>> transition, std::vector<double> prior,
                         std::vector<std::vector<double>> distortion) {
                 ChannelSpec spec;
                 spec.inputs = transition.size();
                 spec.states = prior.size();
                 spec.outputs = transition.empty() || transition[0].empty() ? 0 : transition[0][0].size();
                 spec.transition = std::move(transition);
                 spec.state_prior = std::move(prior);
                 spec.distortion = std::move(distortion);
                 return validate_channel(spec);
             }),
             py::arg("transition"), py::arg("state_prior"), py::arg("distortion"),
             "transition is indexed [x][s][y], distortion [s][s_hat].")
        .def_property_readonly("input_size", &ChannelModel::input_size)
        .def_property_readonly("output_size", &ChannelModel::output_size)
        .def_property_readonly("state_size", &ChannelModel::state_size)
        .def_property_readonly("state_prior", [](const ChannelModel& c) { return to_vector(c.state_prior()); })
        .def("with_prior", [](const ChannelModel& c, std::vector<double> p) { return c.with_prior(p); });

    m.def("scalar_multiplicative", &analytic::scalar_multiplicative_model, py::arg("r"));
    m.def("additive_mod2", &analytic::additive_mod2_model, py::arg("r"));
    m.def("block_multiplicative", &analytic::block_multiplicative_model, py::arg("r"), py::arg("K"));

    m.def("estimation_costs", [](const ChannelModel& c) { return optimal_estimator(c).cost_vector; },
          "Per-letter estimation cost d*(x).");
    m.def("mutual_information",
          [](const ChannelModel& c, std::vector<double> px) { return mutual_information(c, InputDistribution(px)); });
    m.def("feasible_range", [](const ChannelModel& c) {
        const auto r = feasible_range(c);
        return py::make_tuple(r.d_min, r.d_max, r.unconstrained_capacity);
    }, "(d_min, d_max, unconstrained capacity).");
    m.def("capacity_distortion",
          [](const ChannelModel& c, double d) { return point_dict(capacity_distortion_point(c, d)); },
          py::arg("model"), py::arg("distortion"));
    m.def("cd_curve", [](const ChannelModel& c, std::vector<double> grid) {
        py::list out;
        for (const auto& p : cd_curve(c, grid).points) out.append(point_dict(p));
        return out;
    });
    m.def("multi_constraint", [](const ChannelModel& c, std::vector<std::pair<std::vector<double>, double>> cs) {
        CostConstraintSet set;
        for (auto& [cost, budget] : cs) set.push_back({std::move(cost), budget});
        return point_dict(multi_constraint_point(c, set));
    }, py::arg("model"), py::arg("constraints"), "constraints: list of (per-letter cost, budget).");

    m.def("cpud_ratio_formula", [](const ChannelModel& c) { return cpud_dict(cpud_ratio_formula(c)); });
    m.def("cpud_sup_definition", [](const ChannelModel& c) { return cpud_dict(cpud_sup_definition(c)); });
    m.def("compound", [](const ChannelModel& c, std::vector<std::vector<double>> priors, double d) {
        const auto r = compound_cd(CompoundFamily(c, std::move(priors)), d);
        py::dict out;
        out["capacity"] = r.value;
        out["optimizer"] = to_vector(r.optimizer.probs());
        out["worst_member"] = r.worst_theta;
        out["upper_bound"] = r.upper_bound;
        return out;
    }, py::arg("model"), py::arg("priors"), py::arg("distortion"));

    m.def("simulate", [](const ChannelModel& c, std::vector<double> px, std::uint64_t n, std::uint64_t seed,
                         unsigned workers) {
        SimulationReport r;
        {
            py::gil_scoped_release release;
            r = simulate(c, InputDistribution(px), n, seed, workers);
        }
        py::dict out;
        out["samples"] = r.samples;
        out["empirical_distortion"] = r.empirical_distortion;
        out["standard_error"] = r.standard_error();
        out["analytic_distortion"] = r.analytic_distortion;
        out["empirical_mi"] = r.empirical_mi;
        return out;
    }, py::arg("model"), py::arg("px"), py::arg("samples"), py::arg("seed") = 1, py::arg("workers") = 1);

    m.def("scalar_closed_form", [](double r, double d) {
        const auto cf = analytic::scalar_cd_closed_form(r, d);
        return py::make_tuple(cf.capacity, cf.p_star);
    }, py::arg("r"), py::arg("distortion"), "(capacity, p*) for the scalar multiplicative channel.");
    m.def("block_closed_form", [](double r, unsigned k, double d) {
        const auto cf = analytic::block_cd_closed_form(r, k, d);
        return py::make_tuple(cf.capacity, cf.p_star, cf.case1);
    }, py::arg("r"), py::arg("K"), py::arg("distortion"), "(per-use capacity, p*, case 1 flag).");
    m.def("training_rate", &analytic::training_rate, py::arg("r"), py::arg("K"));
}
