#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdiv/topology.hpp"

namespace sdiv {

using VehicleId = std::string;

struct TraceMark {
    VehicleId vehicle;
    double t_seconds = 0.0;
    Vec2 pos;
};

struct RequestSpec {
    VehicleId vehicle;
    double t_seconds = 0.0;
    NodeId camera;
};

/// One vehicle's state at one moment, after snapping.
struct MomentMember {
    VehicleId vehicle;
    Vec2 pos;
    Vec2 heading;           // derived, always non-zero
    double mark_t_seconds;  // original timestamp of the snapped mark
};

struct Moment {
    int index = 0;
    double t_seconds = 0.0;
    std::vector<MomentMember> members;  // sorted by vehicle id
};

/// Engine knobs; times are kept in microseconds internally so the small
/// per-rewrite cost stays representable on the integer clock.
struct EngineParams {
    SimTime camera_period_us = 100'000;
    SimTime controller_latency_us = 5'000;
    SimTime rewrite_cost_us = 10;
    SimTime moment_interval_us = 120'000'000;
    SimTime snap_window_us = 30'000'000;
    SimTime move_offset_us = 37'000;     // vehicle moves at moment + offset
    SimTime request_offset_us = 53'000;  // requests at moment + offset
    double t_base_s = 80.0;
    double k = 2.0;
    int preinstall_hops = 1;
    std::size_t table_capacity = 0;  // 0 = unlimited
    Vec2 default_heading{1.0, 0.0};
    int sim_moments = 0;  // 0 = derive from traces
    bool gps_traces = false;
};

struct LoadReport {
    std::vector<std::string> warnings;
    int discarded_marks = 0;
    int discarded_requests = 0;
};

struct Scenario {
    Topology topology;
    EngineParams params;
    std::vector<TraceMark> marks;       // raw, in file order
    std::vector<RequestSpec> requests;  // raw, in file order
    std::vector<Moment> moments;        // derived by snapping
    std::map<VehicleId, std::vector<std::pair<int, RequestSpec>>> requests_by_moment;
    LoadReport report;

    int moment_count() const;
    SimTime moment_time_us(int index) const {
        return static_cast<SimTime>(index) * params.moment_interval_us;
    }
};

/// Parses the line-oriented topology grammar:
///   node <id> <x> <y> <switch|ap|camera|server>
///   link <idA> <idB> <latency_ms>
///   param <name> <value>
/// Errors carry the offending line number. Returns the topology plus any
/// engine parameters found in the file.
std::pair<Topology, EngineParams> load_topology_text(const std::string& text);
Topology load_topology(const std::string& text);

/// Parses the trace grammar:
///   mark <vehicle_id> <t_seconds> <x> <y>
///   request <vehicle_id> <t_seconds> <camera_id>
void parse_trace_text(const std::string& text, std::vector<TraceMark>& marks,
                      std::vector<RequestSpec>& requests);

/// Assigns each mark to the unique moment within the snap window (strictly
/// shorter than the window; a mark at exactly the window edge is discarded).
/// At most one mark per vehicle per moment survives: closest wins, earlier
/// timestamp breaks ties. Assignment is independent of input order.
std::vector<Moment> snap_to_moments(const std::vector<TraceMark>& marks, SimTime interval_us,
                                    SimTime window_us, LoadReport* report = nullptr);

/// Fills heading vectors: moment m points from mark(m) to mark(m+1); the
/// last moment reuses the previous heading; stationary steps retain the
/// previous heading; single-mark vehicles get the default heading.
void derive_headings(std::vector<Moment>& moments, const Vec2& default_heading);

/// Builds a validated scenario from topology and trace file contents.
Scenario build_scenario(const std::string& topology_text, const std::string& trace_text);

Scenario load_scenario_files(const std::string& topology_path, const std::string& trace_path);

/// Serialization (round-trips through the parsers).
std::string write_topology_text(const Topology& topo, const EngineParams& params);
std::string write_trace_text(const std::vector<TraceMark>& marks,
                             const std::vector<RequestSpec>& requests);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace sdiv
