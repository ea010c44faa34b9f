#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdiv/controller.hpp"
#include "sdiv/flowtable.hpp"
#include "sdiv/metrics.hpp"
#include "sdiv/scenario.hpp"

namespace sdiv {

/// Per-emission state capture for the brute-force propagation oracle.
struct EmissionSnapshot {
    SimTime time_us = 0;
    NodeId camera;
    std::int64_t payload_seq = 0;
    std::vector<Header> emitted;  // one header per packet injected this tick

    std::map<NodeId, std::vector<Rule>> tables;

    struct VehicleSnap {
        VehicleId id;
        Vec2 pos;
        std::set<Address> subscriptions;
        bool active = false;
    };
    std::vector<VehicleSnap> vehicles;
};

struct RunOptions {
    bool capture_emissions = false;
};

struct SimResult {
    MetricsReport report;
    std::map<NodeId, std::vector<Rule>> final_tables;
    std::vector<EmissionSnapshot> emissions;  // only with capture_emissions
};

/// Runs the scenario to completion under one strategy. Bitwise deterministic
/// for identical inputs: one strictly ordered event queue, integer time,
/// ordered containers throughout.
SimResult run(const Scenario& scenario, const StrategyConfig& cfg, const RunOptions& opts = {});

/// Delivered payload multiset per vehicle: (vehicle, camera, payload_seq),
/// sorted. Equal vectors mean equivalent delivery.
std::vector<std::tuple<VehicleId, NodeId, std::int64_t>> delivery_multiset(const SimResult& r);

/// First delivery present in exactly one of the two results, if any.
std::optional<std::tuple<VehicleId, NodeId, std::int64_t>> first_delivery_difference(
    const SimResult& a, const SimResult& b);

}  // namespace sdiv
