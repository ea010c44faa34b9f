// Command-line front end: run one strategy, compare both, debug path
// prediction, validate scenario files.
//
// Exit codes: 0 success, 1 runtime error, 2 usage/validation error,
// 3 delivery-equivalence violation in compare mode.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sdiv/engine.hpp"
#include "sdiv/metrics.hpp"
#include "sdiv/pathfind.hpp"
#include "sdiv/scenario.hpp"

namespace {

struct CommonArgs {
    std::string topology;
    std::string trace;
    std::string out_dir = "out";
    std::string strategy = "optimized";
    double t_base = -1;
    double k = -1;
    int preinstall_hops = -1;
    long long capacity = -1;
    unsigned long long seed = 0;
};

void add_scenario_options(CLI::App* cmd, CommonArgs& args, bool with_strategy) {
    cmd->add_option("--topology", args.topology, "topology file")->required();
    cmd->add_option("--trace", args.trace, "trace file")->required();
    cmd->add_option("--out", args.out_dir, "output directory for the report files");
    if (with_strategy) {
        cmd->add_option("--strategy", args.strategy, "baseline or optimized")
            ->check(CLI::IsMember({"baseline", "optimized"}));
    }
    cmd->add_option("--t-base", args.t_base, "idle timeout at the camera-adjacent node, seconds");
    cmd->add_option("--k", args.k, "timeout decay factor (> 1)");
    cmd->add_option("--preinstall-hops", args.preinstall_hops,
                    "how many APs ahead to pre-install");
    cmd->add_option("--capacity", args.capacity, "flow table capacity (0 = unlimited)");
    cmd->add_option("--seed", args.seed, "reserved for scenario generation tooling");
}

sdiv::Scenario load_with_overrides(const CommonArgs& args) {
    sdiv::Scenario sc = sdiv::load_scenario_files(args.topology, args.trace);
    if (args.t_base >= 0) sc.params.t_base_s = args.t_base;
    if (args.k >= 0) sc.params.k = args.k;
    if (args.preinstall_hops >= 0) sc.params.preinstall_hops = args.preinstall_hops;
    if (args.capacity >= 0) sc.params.table_capacity = static_cast<std::size_t>(args.capacity);
    return sc;
}

sdiv::StrategyConfig config_for(const sdiv::Scenario& sc, sdiv::Strategy strategy) {
    sdiv::StrategyConfig cfg;
    cfg.strategy = strategy;
    cfg.t_base_s = sc.params.t_base_s;
    cfg.k = sc.params.k;
    cfg.preinstall_hops = sc.params.preinstall_hops;
    return cfg;
}

void print_warnings(const sdiv::Scenario& sc) {
    for (const auto& w : sc.report.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_run(const CommonArgs& args) {
    sdiv::Scenario sc = load_with_overrides(args);
    print_warnings(sc);
    auto strategy = sdiv::strategy_from_name(args.strategy);
    sdiv::SimResult result = sdiv::run(sc, config_for(sc, *strategy));
    sdiv::write_report(result.report, args.out_dir);
    std::cout << "report written to " << args.out_dir << "\n";
    return 0;
}

int cmd_compare(const CommonArgs& args) {
    sdiv::Scenario sc = load_with_overrides(args);
    print_warnings(sc);
    sdiv::SimResult base = sdiv::run(sc, config_for(sc, sdiv::Strategy::Baseline));
    sdiv::SimResult opt = sdiv::run(sc, config_for(sc, sdiv::Strategy::Optimized));
    sdiv::write_report({&base.report, &opt.report}, args.out_dir);
    std::cout << sdiv::summary_text({&base.report, &opt.report});
    auto diff = sdiv::first_delivery_difference(base, opt);
    if (diff) {
        const auto& [vehicle, camera, seq] = *diff;
        std::cerr << "delivery mismatch: vehicle=" << vehicle << " camera=" << camera
                  << " payload=" << seq << "\n";
        return 3;
    }
    std::cout << "delivery equivalence holds\n";
    return 0;
}

int cmd_pathfind(const std::string& topology, const std::string& s, const std::string& d,
                 double vx, double vy) {
    sdiv::Topology topo = sdiv::load_topology(sdiv::read_file(topology));
    try {
        sdiv::PredictedPath path = sdiv::path_find({s, d, {vx, vy}}, topo);
        for (std::size_t i = 0; i < path.nodes.size(); ++i) {
            if (i) std::cout << " ";
            std::cout << path.nodes[i];
        }
        std::cout << "\n";
    } catch (const sdiv::PathError& e) {
        std::cout << e.kind_name() << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& topology, const std::string& trace) {
    sdiv::Scenario sc = sdiv::load_scenario_files(topology, trace);
    print_warnings(sc);
    std::cout << "nodes " << sc.topology.nodes().size() << "\n";
    std::cout << "links " << sc.topology.links().size() << "\n";
    std::cout << "moments " << sc.moment_count() << "\n";
    std::cout << "discarded_marks " << sc.report.discarded_marks << "\n";
    std::cout << "discarded_requests " << sc.report.discarded_requests << "\n";
    std::cout << "ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator comparing naive and optimized "
                 "rule-installation strategies for vehicular query services"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run = app.add_subcommand("run", "simulate one strategy and write CSV reports");
    add_scenario_options(run, run_args, true);

    CommonArgs cmp_args;
    CLI::App* compare =
        app.add_subcommand("compare", "run both strategies on one scenario and diff them");
    add_scenario_options(compare, cmp_args, false);

    std::string pf_topology, pf_s, pf_d;
    double pf_vx = 1.0, pf_vy = 0.0;
    CLI::App* pathfind = app.add_subcommand("pathfind", "print the predicted road path");
    pathfind->add_option("--topology", pf_topology, "topology file")->required();
    pathfind->add_option("--from", pf_s, "start node")->required();
    pathfind->add_option("--to", pf_d, "destination node")->required();
    pathfind->add_option("--vx", pf_vx, "heading x component");
    pathfind->add_option("--vy", pf_vy, "heading y component");

    std::string val_topology, val_trace;
    CLI::App* validate = app.add_subcommand("validate", "check scenario files");
    validate->add_option("--topology", val_topology, "topology file")->required();
    validate->add_option("--trace", val_trace, "trace file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (compare->parsed()) return cmd_compare(cmp_args);
        if (pathfind->parsed()) return cmd_pathfind(pf_topology, pf_s, pf_d, pf_vx, pf_vy);
        if (validate->parsed()) return cmd_validate(val_topology, val_trace);
    } catch (const sdiv::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sdiv::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sdiv::LookupError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
