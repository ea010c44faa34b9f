#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdiv/engine.hpp"
#include "sdiv/metrics.hpp"
#include "sdiv/pathfind.hpp"
#include "sdiv/scenario.hpp"

namespace py = pybind11;

namespace {

sdiv::StrategyConfig make_config(const sdiv::Scenario& sc, const std::string& strategy) {
    auto s = sdiv::strategy_from_name(strategy);
    if (!s) throw py::value_error("strategy must be 'baseline' or 'optimized'");
    sdiv::StrategyConfig cfg;
    cfg.strategy = *s;
    cfg.t_base_s = sc.params.t_base_s;
    cfg.k = sc.params.k;
    cfg.preinstall_hops = sc.params.preinstall_hops;
    return cfg;
}

py::dict delays_dict(const sdiv::MetricsReport& report) {
    py::dict out;
    for (const auto& v : sdiv::delivered_vehicles(report)) {
        auto ns = sdiv::vehicle_delay_ns(report, v);
        if (ns) out[py::str(v)] = static_cast<double>(*ns) / 1e6;  // milliseconds
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "SDN rule-installation simulator for vehicular query services";

    py::register_exception<sdiv::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<sdiv::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<sdiv::PathError>(m, "PathError", PyExc_RuntimeError);

    py::class_<sdiv::Scenario>(m, "Scenario")
        .def_property_readonly("moment_count", &sdiv::Scenario::moment_count)
        .def_property_readonly("warnings",
                               [](const sdiv::Scenario& sc) { return sc.report.warnings; })
        .def_property_readonly("node_ids", [](const sdiv::Scenario& sc) {
            std::vector<std::string> ids;
            for (const auto& [id, node] : sc.topology.nodes()) ids.push_back(id);
            return ids;
        });

    py::class_<sdiv::SimResult>(m, "SimResult")
        .def_property_readonly("strategy",
                               [](const sdiv::SimResult& r) { return r.report.strategy; })
        .def_property_readonly("packet_ins",
                               [](const sdiv::SimResult& r) { return r.report.packet_ins; })
        .def_property_readonly("losses",
                               [](const sdiv::SimResult& r) { return r.report.losses; })
        .def_property_readonly(
            "table_full_rejections",
            [](const sdiv::SimResult& r) { return r.report.table_full_rejections; })
        .def_property_readonly("deliveries",
                               [](const sdiv::SimResult& r) {
                                   std::vector<std::tuple<std::string, std::string, std::int64_t,
                                                          double, double>>
                                       out;
                                   for (const auto& d : r.report.deliveries)
                                       out.emplace_back(d.vehicle, d.camera, d.payload_seq,
                                                        d.emit_us / 1000.0,
                                                        d.receive_us / 1000.0);
                                   return out;
                               })
        .def_property_readonly("rule_counts",
                               [](const sdiv::SimResult& r) {
                                   std::vector<std::tuple<int, std::string, std::size_t>> out;
                                   for (const auto& rc : r.report.rule_counts)
                                       out.emplace_back(rc.moment, rc.node, rc.count);
                                   return out;
                               })
        .def_property_readonly("delays_ms",
                               [](const sdiv::SimResult& r) { return delays_dict(r.report); });

    m.def("load_scenario", &sdiv::build_scenario, py::arg("topology_text"), py::arg("trace_text"),
          "Build a scenario from topology and trace file contents");
    m.def("load_scenario_files", &sdiv::load_scenario_files, py::arg("topology_path"),
          py::arg("trace_path"));

    m.def(
        "path_find",
        [](const std::string& topology_text, const std::string& start, const std::string& dest,
           double vx, double vy) {
            sdiv::Topology topo = sdiv::load_topology(topology_text);
            return sdiv::path_find({start, dest, {vx, vy}}, topo).nodes;
        },
        py::arg("topology_text"), py::arg("start"), py::arg("dest"), py::arg("vx"), py::arg("vy"),
        "Predicted road path; raises PathError on NoForwardChild / PathNotFound");

    m.def(
        "hop_distance",
        [](const std::string& topology_text, const std::string& a, const std::string& b) {
            return sdiv::load_topology(topology_text).hop_distance(a, b);
        },
        py::arg("topology_text"), py::arg("a"), py::arg("b"));

    m.def(
        "run",
        [](const sdiv::Scenario& sc, const std::string& strategy) {
            return sdiv::run(sc, make_config(sc, strategy));
        },
        py::arg("scenario"), py::arg("strategy") = "optimized");

    m.def(
        "compare",
        [](const sdiv::Scenario& sc) {
            sdiv::SimResult base = sdiv::run(sc, make_config(sc, "baseline"));
            sdiv::SimResult opt = sdiv::run(sc, make_config(sc, "optimized"));
            auto diff = sdiv::first_delivery_difference(base, opt);
            py::object mismatch = py::none();
            if (diff) mismatch = py::cast(*diff);
            return py::make_tuple(std::move(base), std::move(opt), !diff, mismatch);
        },
        py::arg("scenario"),
        "Returns (baseline_result, optimized_result, equivalent, first_mismatch)");

    m.def(
        "write_report",
        [](const sdiv::SimResult& r, const std::string& directory) {
            sdiv::write_report(r.report, directory);
        },
        py::arg("result"), py::arg("directory"));

    m.def(
        "write_compare_report",
        [](const sdiv::SimResult& a, const sdiv::SimResult& b, const std::string& directory) {
            sdiv::write_report({&a.report, &b.report}, directory);
        },
        py::arg("baseline"), py::arg("optimized"), py::arg("directory"));

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
