#include "sdiv/metrics.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace sdiv {

std::string format_us_as_ms(SimTime us) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%" PRId64 ".%03" PRId64, us / 1000, us % 1000);
    return buf;
}

std::string format_ns_as_ms(std::int64_t ns) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%" PRId64 ".%06" PRId64, ns / 1'000'000, ns % 1'000'000);
    return buf;
}

std::optional<std::int64_t> vehicle_delay_ns(const MetricsReport& report,
                                             const VehicleId& vehicle) {
    // Per camera: (sum of delays in us, count).
    std::map<NodeId, std::pair<std::int64_t, std::int64_t>> per_camera;
    for (const auto& d : report.deliveries) {
        if (d.vehicle != vehicle) continue;
        auto& acc = per_camera[d.camera];
        acc.first += d.receive_us - d.emit_us;
        acc.second += 1;
    }
    if (per_camera.empty()) return std::nullopt;
    // The reported figure is the longest connection's mean.
    std::int64_t best = -1;
    for (const auto& [camera, acc] : per_camera) {
        std::int64_t mean_ns = acc.first * 1000 / acc.second;
        best = std::max(best, mean_ns);
    }
    return best;
}

std::vector<VehicleId> delivered_vehicles(const MetricsReport& report) {
    std::vector<VehicleId> out;
    for (const auto& d : report.deliveries) out.push_back(d.vehicle);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string rules_csv(const std::vector<const MetricsReport*>& reports) {
    struct Row {
        int moment;
        NodeId node;
        std::string strategy;
        std::size_t count;
    };
    std::vector<Row> rows;
    for (const auto* r : reports)
        for (const auto& rc : r->rule_counts) rows.push_back({rc.moment, rc.node, r->strategy, rc.count});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.moment != b.moment) return a.moment < b.moment;
        if (a.node != b.node) return a.node < b.node;
        return a.strategy < b.strategy;
    });
    std::ostringstream out;
    out << "moment,switch,strategy,count\n";
    for (const auto& r : rows)
        out << r.moment << "," << r.node << "," << r.strategy << "," << r.count << "\n";
    return out.str();
}

std::string delays_csv(const std::vector<const MetricsReport*>& reports) {
    struct Row {
        VehicleId vehicle;
        std::string strategy;
        std::int64_t delay_ns;
    };
    std::vector<Row> rows;
    for (const auto* r : reports) {
        for (const auto& v : delivered_vehicles(*r)) {
            auto d = vehicle_delay_ns(*r, v);
            if (d) rows.push_back({v, r->strategy, *d});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.vehicle != b.vehicle) return a.vehicle < b.vehicle;
        return a.strategy < b.strategy;
    });
    std::ostringstream out;
    out << "vehicle,strategy,delay_ms\n";
    for (const auto& r : rows)
        out << r.vehicle << "," << r.strategy << "," << format_ns_as_ms(r.delay_ns) << "\n";
    return out.str();
}

std::string events_csv(const std::vector<const MetricsReport*>& reports) {
    std::ostringstream out;
    out << "time,kind,detail\n";
    for (const auto* r : reports) {
        for (const auto& e : r->events) {
            out << format_us_as_ms(e.time_us) << "," << e.kind << "," << r->strategy << " "
                << e.detail << "\n";
        }
    }
    return out.str();
}

std::string summary_text(const std::vector<const MetricsReport*>& reports) {
    std::ostringstream out;
    for (const auto* r : reports) {
        out << "strategy " << r->strategy << "\n";
        out << "  packet_ins " << r->packet_ins << "\n";
        out << "  losses " << r->losses << "\n";
        out << "  table_full_rejections " << r->table_full_rejections << "\n";
        std::map<int, std::size_t> totals;
        for (const auto& rc : r->rule_counts) totals[rc.moment] += rc.count;
        for (const auto& [moment, total] : totals)
            out << "  rules_total moment " << moment << ": " << total << "\n";
        for (const auto& [moment, count] : r->vehicles_per_moment)
            out << "  vehicles moment " << moment << ": " << count << "\n";
        for (const auto& v : delivered_vehicles(*r)) {
            auto d = vehicle_delay_ns(*r, v);
            if (d) out << "  delay " << v << ": " << format_ns_as_ms(*d) << " ms\n";
        }
    }
    if (reports.size() == 2) {
        out << "comparison\n";
        std::map<int, std::size_t> tot[2];
        for (int i = 0; i < 2; ++i)
            for (const auto& rc : reports[i]->rule_counts) tot[i][rc.moment] += rc.count;
        for (const auto& [moment, a] : tot[0]) {
            auto it = tot[1].find(moment);
            std::size_t b = it == tot[1].end() ? 0 : it->second;
            out << "  rules moment " << moment << ": " << reports[0]->strategy << "=" << a << " "
                << reports[1]->strategy << "=" << b << "\n";
        }
        for (const auto& v : delivered_vehicles(*reports[0])) {
            auto a = vehicle_delay_ns(*reports[0], v);
            auto b = vehicle_delay_ns(*reports[1], v);
            if (a && b) {
                out << "  delay_delta " << v << ": " << format_ns_as_ms(*b - *a) << " ms ("
                    << reports[1]->strategy << " - " << reports[0]->strategy << ")\n";
            }
        }
    }
    return out.str();
}

void write_report(const std::vector<const MetricsReport*>& reports, const std::string& directory) {
    std::filesystem::create_directories(directory);
    auto path = [&](const char* name) {
        return (std::filesystem::path(directory) / name).string();
    };
    write_file(path("rules.csv"), rules_csv(reports));
    write_file(path("delays.csv"), delays_csv(reports));
    write_file(path("events.csv"), events_csv(reports));
    write_file(path("summary.txt"), summary_text(reports));
}

void write_report(const MetricsReport& report, const std::string& directory) {
    write_report(std::vector<const MetricsReport*>{&report}, directory);
}

}  // namespace sdiv
