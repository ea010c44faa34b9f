#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdiv/flowtable.hpp"
#include "sdiv/scenario.hpp"

namespace sdiv {

struct DeliveryRecord {
    VehicleId vehicle;
    NodeId camera;
    std::int64_t payload_seq = 0;
    SimTime emit_us = 0;
    SimTime receive_us = 0;
};

struct RuleCountRow {
    int moment = 0;
    NodeId node;
    std::size_t count = 0;
};

struct EventRow {
    SimTime time_us = 0;
    std::string kind;
    std::string detail;  // must stay comma-free
};

struct MetricsReport {
    std::string strategy;
    std::vector<RuleCountRow> rule_counts;
    std::vector<DeliveryRecord> deliveries;
    std::vector<EventRow> events;
    std::int64_t packet_ins = 0;
    std::int64_t losses = 0;
    std::int64_t table_full_rejections = 0;
    std::map<int, int> vehicles_per_moment;
};

/// Fixed-point formatting helpers (byte-stable across runs).
std::string format_us_as_ms(SimTime us);        // 3 decimals
std::string format_ns_as_ms(std::int64_t ns);   // 6 decimals

/// Mean delivery delay for one vehicle in integer nanoseconds, restricted to
/// the longest-delay camera when the vehicle holds concurrent connections.
/// Empty when the vehicle received nothing.
std::optional<std::int64_t> vehicle_delay_ns(const MetricsReport& report,
                                             const VehicleId& vehicle);

/// All vehicles that appear in the report's deliveries, sorted.
std::vector<VehicleId> delivered_vehicles(const MetricsReport& report);

/// Writes rules.csv, delays.csv, events.csv and summary.txt. Multiple reports
/// (one per strategy) merge into shared files with a strategy column.
void write_report(const std::vector<const MetricsReport*>& reports, const std::string& directory);
void write_report(const MetricsReport& report, const std::string& directory);

std::string rules_csv(const std::vector<const MetricsReport*>& reports);
std::string delays_csv(const std::vector<const MetricsReport*>& reports);
std::string events_csv(const std::vector<const MetricsReport*>& reports);
std::string summary_text(const std::vector<const MetricsReport*>& reports);

}  // namespace sdiv
