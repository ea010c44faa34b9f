#include "sdiv/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sdiv {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') break;
        tokens.push_back(tok);
    }
    return tokens;
}

double parse_number(const std::string& tok, int line_no) {
    double value = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    return value;
}

SimTime ms_to_us(double ms) { return static_cast<SimTime>(std::llround(ms * 1000.0)); }
SimTime s_to_us(double s) { return static_cast<SimTime>(std::llround(s * 1e6)); }

/// Named engine parameters accepted in topology files.
bool apply_param(EngineParams& p, const std::string& name, double value) {
    if (name == "camera_period_ms") p.camera_period_us = ms_to_us(value);
    else if (name == "controller_latency_ms") p.controller_latency_us = ms_to_us(value);
    else if (name == "rewrite_cost_ms") p.rewrite_cost_us = ms_to_us(value);
    else if (name == "moment_interval_s") p.moment_interval_us = s_to_us(value);
    else if (name == "snap_window_s") p.snap_window_us = s_to_us(value);
    else if (name == "move_offset_ms") p.move_offset_us = ms_to_us(value);
    else if (name == "request_offset_ms") p.request_offset_us = ms_to_us(value);
    else if (name == "t_base_s") p.t_base_s = value;
    else if (name == "k") p.k = value;
    else if (name == "preinstall_hops") p.preinstall_hops = static_cast<int>(value);
    else if (name == "table_capacity") p.table_capacity = static_cast<std::size_t>(value);
    else if (name == "default_heading_x") p.default_heading.x = value;
    else if (name == "default_heading_y") p.default_heading.y = value;
    else if (name == "sim_moments") p.sim_moments = static_cast<int>(value);
    else if (name == "gps_traces") p.gps_traces = value != 0.0;
    else return false;
    return true;
}

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(15);
    out << v;
    return out.str();
}

}  // namespace

int Scenario::moment_count() const {
    int derived = moments.empty() ? 0 : moments.back().index + 1;
    return std::max(derived, params.sim_moments);
}

std::pair<Topology, EngineParams> load_topology_text(const std::string& text) {
    TopologyBuilder builder;
    EngineParams params;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        try {
            if (tok[0] == "node") {
                if (tok.size() != 5)
                    throw ParseError("expected: node <id> <x> <y> <role>");
                auto role = role_from_name(tok[4]);
                if (!role)
                    throw ParseError("bad role '" + tok[4] + "'");
                builder.add_node(tok[1], {parse_number(tok[2], line_no), parse_number(tok[3], line_no)},
                                 *role);
            } else if (tok[0] == "link") {
                if (tok.size() != 4)
                    throw ParseError("expected: link <idA> <idB> <latency_ms>");
                builder.add_link(tok[1], tok[2], parse_number(tok[3], line_no));
            } else if (tok[0] == "param") {
                if (tok.size() != 3)
                    throw ParseError("expected: param <name> <value>");
                double value = parse_number(tok[2], line_no);
                if (tok[1] == "ap_range") {
                    builder.set_ap_range(value);
                } else if (!apply_param(params, tok[1], value)) {
                    throw ParseError("unknown param '" + tok[1] + "'");
                }
            } else {
                throw ParseError("unknown record '" + tok[0] + "'");
            }
        } catch (const ParseError& e) {
            std::string msg = e.what();
            if (msg.rfind("line ", 0) == 0) throw;
            throw ParseError("line " + std::to_string(line_no) + ": " + msg);
        } catch (const ValidationError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return {builder.build(), params};
}

Topology load_topology(const std::string& text) { return load_topology_text(text).first; }

void parse_trace_text(const std::string& text, std::vector<TraceMark>& marks,
                      std::vector<RequestSpec>& requests) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        if (tok[0] == "mark") {
            if (tok.size() != 5)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected: mark <vehicle_id> <t_seconds> <x> <y>");
            marks.push_back({tok[1], parse_number(tok[2], line_no),
                             {parse_number(tok[3], line_no), parse_number(tok[4], line_no)}});
        } else if (tok[0] == "request") {
            if (tok.size() != 4)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected: request <vehicle_id> <t_seconds> <camera_id>");
            requests.push_back({tok[1], parse_number(tok[2], line_no), tok[3]});
        } else {
            throw ParseError("line " + std::to_string(line_no) + ": unknown record '" + tok[0] +
                             "'");
        }
    }
}

std::vector<Moment> snap_to_moments(const std::vector<TraceMark>& marks, SimTime interval_us,
                                    SimTime window_us, LoadReport* report) {
    if (window_us * 2 > interval_us)
        throw ValidationError("snap window must be shorter than half the moment interval");

    // (vehicle, moment) -> chosen mark; closest wins, earlier timestamp ties.
    std::map<std::pair<VehicleId, int>, TraceMark> chosen;
    int discarded = 0;
    for (const TraceMark& m : marks) {
        SimTime t = s_to_us(m.t_seconds);
        int idx = static_cast<int>(std::llround(static_cast<double>(t) /
                                                static_cast<double>(interval_us)));
        if (idx < 0 || std::llabs(t - idx * interval_us) >= window_us) {
            ++discarded;
            continue;
        }
        auto key = std::make_pair(m.vehicle, idx);
        auto it = chosen.find(key);
        if (it == chosen.end()) {
            chosen.emplace(key, m);
            continue;
        }
        SimTime old_delta = std::llabs(s_to_us(it->second.t_seconds) - idx * interval_us);
        SimTime new_delta = std::llabs(t - idx * interval_us);
        bool better = new_delta < old_delta ||
                      (new_delta == old_delta && m.t_seconds < it->second.t_seconds);
        if (better) {
            it->second = m;
            ++discarded;  // the displaced mark counts as discarded
        } else {
            ++discarded;
        }
    }
    if (report) report->discarded_marks += discarded;

    std::map<int, Moment> by_index;
    for (const auto& [key, mark] : chosen) {
        Moment& mom = by_index[key.second];
        mom.index = key.second;
        mom.t_seconds = key.second * (static_cast<double>(interval_us) / 1e6);
        mom.members.push_back({key.first, mark.pos, {0, 0}, mark.t_seconds});
    }
    std::vector<Moment> result;
    for (auto& [idx, mom] : by_index) {
        std::sort(mom.members.begin(), mom.members.end(),
                  [](const MomentMember& a, const MomentMember& b) { return a.vehicle < b.vehicle; });
        result.push_back(std::move(mom));
    }
    return result;
}

void derive_headings(std::vector<Moment>& moments, const Vec2& default_heading) {
    // Gather each vehicle's (moment, member*) sequence in moment order.
    std::map<VehicleId, std::vector<MomentMember*>> per_vehicle;
    for (Moment& mom : moments) {
        for (MomentMember& mem : mom.members) per_vehicle[mem.vehicle].push_back(&mem);
    }
    for (auto& [vehicle, seq] : per_vehicle) {
        Vec2 prev = default_heading;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            Vec2 h = prev;
            if (i + 1 < seq.size()) {
                Vec2 delta = seq[i + 1]->pos - seq[i]->pos;
                if (!is_zero(delta)) h = normalized(delta);
            }
            seq[i]->heading = h;
            prev = h;
        }
    }
}

Scenario build_scenario(const std::string& topology_text, const std::string& trace_text) {
    Scenario sc;
    auto [topo, params] = load_topology_text(topology_text);
    sc.topology = std::move(topo);
    sc.params = params;
    parse_trace_text(trace_text, sc.marks, sc.requests);

    if (sc.params.gps_traces && !sc.marks.empty()) {
        // Equirectangular projection about the trace centroid; x=lon, y=lat.
        double lon0 = 0, lat0 = 0;
        for (const auto& m : sc.marks) {
            lon0 += m.pos.x;
            lat0 += m.pos.y;
        }
        lon0 /= static_cast<double>(sc.marks.size());
        lat0 /= static_cast<double>(sc.marks.size());
        constexpr double kEarthRadius = 6371000.0;
        constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
        for (auto& m : sc.marks) {
            double x = kEarthRadius * std::cos(lat0 * kDegToRad) * (m.pos.x - lon0) * kDegToRad;
            double y = kEarthRadius * (m.pos.y - lat0) * kDegToRad;
            m.pos = {x, y};
        }
    }

    // Per-vehicle timestamps must be non-decreasing.
    std::map<VehicleId, double> last_t;
    for (const auto& m : sc.marks) {
        auto it = last_t.find(m.vehicle);
        if (it != last_t.end() && m.t_seconds < it->second)
            throw ValidationError("trace timestamps for vehicle '" + m.vehicle +
                                  "' are not non-decreasing");
        last_t[m.vehicle] = m.t_seconds;
        if (sc.topology.has_node(m.vehicle))
            throw ValidationError("vehicle id '" + m.vehicle + "' collides with a topology node");
    }

    sc.moments = snap_to_moments(sc.marks, sc.params.moment_interval_us, sc.params.snap_window_us,
                                 &sc.report);
    derive_headings(sc.moments, sc.params.default_heading);

    // Snap requests to moments as well.
    std::set<VehicleId> known_vehicles;
    for (const auto& mom : sc.moments)
        for (const auto& mem : mom.members) known_vehicles.insert(mem.vehicle);

    for (const auto& req : sc.requests) {
        if (!known_vehicles.count(req.vehicle))
            throw ValidationError("request references vehicle '" + req.vehicle +
                                  "' with no trace marks");
        if (!sc.topology.has_node(req.camera) ||
            sc.topology.node(req.camera).role != NodeRole::Camera)
            throw ValidationError("request references '" + req.camera +
                                  "' which is not a camera node");
        SimTime t = s_to_us(req.t_seconds);
        int idx = static_cast<int>(std::llround(static_cast<double>(t) /
                                                static_cast<double>(sc.params.moment_interval_us)));
        if (idx < 0 || std::llabs(t - idx * sc.params.moment_interval_us) >= sc.params.snap_window_us) {
            sc.report.discarded_requests++;
            sc.report.warnings.push_back("request from '" + req.vehicle +
                                         "' discarded: timestamp outside every moment window");
            continue;
        }
        sc.requests_by_moment[req.vehicle].push_back({idx, req});
    }

    // Warn about marks outside every AP's coverage.
    if (sc.topology.ap_range() > 0) {
        for (const auto& mom : sc.moments) {
            for (const auto& mem : mom.members) {
                bool covered = false;
                for (const auto& [id, node] : sc.topology.nodes()) {
                    if (node.role == NodeRole::Ap &&
                        distance(node.pos, mem.pos) <= sc.topology.ap_range()) {
                        covered = true;
                        break;
                    }
                }
                if (!covered)
                    sc.report.warnings.push_back("vehicle '" + mem.vehicle + "' at moment " +
                                                 std::to_string(mom.index) +
                                                 " is outside every AP range");
            }
        }
    }
    return sc;
}

Scenario load_scenario_files(const std::string& topology_path, const std::string& trace_path) {
    return build_scenario(read_file(topology_path), read_file(trace_path));
}

std::string write_topology_text(const Topology& topo, const EngineParams& p) {
    std::ostringstream out;
    for (const auto& [id, node] : topo.nodes()) {
        out << "node " << id << " " << format_number(node.pos.x) << " "
            << format_number(node.pos.y) << " " << role_name(node.role) << "\n";
    }
    for (const auto& link : topo.links()) {
        out << "link " << link.a << " " << link.b << " "
            << format_number(static_cast<double>(link.latency_us) / 1000.0) << "\n";
    }
    out << "param ap_range " << format_number(topo.ap_range()) << "\n";
    out << "param camera_period_ms " << format_number(p.camera_period_us / 1000.0) << "\n";
    out << "param controller_latency_ms " << format_number(p.controller_latency_us / 1000.0)
        << "\n";
    out << "param rewrite_cost_ms " << format_number(p.rewrite_cost_us / 1000.0) << "\n";
    out << "param moment_interval_s " << format_number(p.moment_interval_us / 1e6) << "\n";
    out << "param snap_window_s " << format_number(p.snap_window_us / 1e6) << "\n";
    out << "param move_offset_ms " << format_number(p.move_offset_us / 1000.0) << "\n";
    out << "param request_offset_ms " << format_number(p.request_offset_us / 1000.0) << "\n";
    out << "param t_base_s " << format_number(p.t_base_s) << "\n";
    out << "param k " << format_number(p.k) << "\n";
    out << "param preinstall_hops " << p.preinstall_hops << "\n";
    out << "param table_capacity " << p.table_capacity << "\n";
    out << "param default_heading_x " << format_number(p.default_heading.x) << "\n";
    out << "param default_heading_y " << format_number(p.default_heading.y) << "\n";
    out << "param sim_moments " << p.sim_moments << "\n";
    return out.str();
}

std::string write_trace_text(const std::vector<TraceMark>& marks,
                             const std::vector<RequestSpec>& requests) {
    std::ostringstream out;
    for (const auto& m : marks) {
        out << "mark " << m.vehicle << " " << format_number(m.t_seconds) << " "
            << format_number(m.pos.x) << " " << format_number(m.pos.y) << "\n";
    }
    for (const auto& r : requests) {
        out << "request " << r.vehicle << " " << format_number(r.t_seconds) << " " << r.camera
            << "\n";
    }
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file '" + path + "'");
    out << content;
    if (!out) throw Error("failed writing file '" + path + "'");
}

}  // namespace sdiv
