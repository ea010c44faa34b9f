#include "sdiv/engine.hpp"

#include <algorithm>
#include <queue>

namespace sdiv {

namespace {

constexpr int kMaxHops = 64;

struct Payload {
    NodeId camera;
    std::int64_t seq = 0;

    bool operator<(const Payload& o) const {
        if (camera != o.camera) return camera < o.camera;
        return seq < o.seq;
    }
};

struct Packet {
    NodeId node;
    Header header;
    std::optional<Payload> payload;
    int hops = 0;
    bool reinjected = false;
};

// Event kinds in same-timestamp processing order.
enum EventKind : int {
    kPacketArrival = 0,
    kPlanApply = 1,
    kVehicleMove = 2,
    kRequestEmit = 3,
    kCameraTick = 4,
    kDespawn = 5,
    kMomentBoundary = 6,
};

struct Event {
    SimTime t = 0;
    int kind = 0;
    std::uint64_t seq = 0;

    Packet packet;                      // kPacketArrival
    NodeId plan_node;                   // kPlanApply
    Header plan_header;                 // kPlanApply
    InstallPlan plan;                   // kPlanApply
    VehicleId vehicle;                  // move / request / despawn
    Vec2 pos, heading;                  // kVehicleMove
    NodeId camera;                      // request / tick
    int moment = 0;                     // kMomentBoundary
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

struct VehicleState {
    VehicleId id;
    Vec2 pos;
    Vec2 heading{1.0, 0.0};
    bool active = false;
    std::optional<NodeId> ap;
    std::set<Address> subscriptions;
    std::set<NodeId> wants;
    std::set<Payload> received;
};

struct CameraState {
    bool ticking = false;
    std::set<VehicleId> flows;  // baseline: per-flow streams; optimized: watchers
};

class Engine {
public:
    Engine(const Scenario& sc, const StrategyConfig& cfg, const RunOptions& opts)
        : sc_(sc), topo_(sc.topology), cfg_(cfg), opts_(opts), controller_(topo_, cfg) {}

    SimResult run();

private:
    const Scenario& sc_;
    const Topology& topo_;
    StrategyConfig cfg_;
    RunOptions opts_;
    Controller controller_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_seq_ = 0;
    std::map<NodeId, FlowTable> tables_;
    std::map<VehicleId, VehicleState> vehicles_;
    std::map<NodeId, CameraState> cameras_;
    std::map<std::pair<NodeId, Header>, std::vector<Packet>> pending_;
    MetricsReport report_;
    std::vector<EmissionSnapshot> emissions_;
    SimTime end_time_ = 0;

    void push(Event e) {
        e.seq = next_seq_++;
        queue_.push(std::move(e));
    }

    void log(SimTime t, const char* kind, std::string detail) {
        report_.events.push_back({t, kind, std::move(detail)});
    }

    bool is_vehicle_addr(const Address& a) const {
        return a.kind == AddressKind::Unicast && !topo_.has_node(a.id) && vehicles_.count(a.id);
    }

    bool is_request(const Header& h) const {
        return is_vehicle_addr(h.src) && h.dst.kind == AddressKind::Unicast &&
               topo_.has_node(h.dst.id) && topo_.node(h.dst.id).role == NodeRole::Camera;
    }

    void lazy_expire(const NodeId& node, SimTime now) {
        auto removed = tables_[node].expire_idle(now);
        for (const Rule& r : removed) {
            log(now, "rule_expire", "node=" + node + " match=" + r.match.str() + " prio=" +
                                        std::to_string(r.priority));
            controller_.on_rule_expired(node, r.match, r.priority);
        }
    }

    std::optional<NodeId> nearest_ap(const Vec2& pos) const {
        std::optional<NodeId> best;
        double best_dist = 0;
        for (const auto& [id, node] : topo_.nodes()) {
            if (node.role != NodeRole::Ap) continue;
            double d = distance(node.pos, pos);
            if (d > topo_.ap_range()) continue;
            if (!best || d < best_dist) {
                best = id;
                best_dist = d;
            }
        }
        return best;
    }

    bool ap_multicasts(const NodeId& ap, const Address& mc, SimTime now) {
        for (const Rule& r : tables_[ap].entries()) {
            if (r.expired(now)) continue;
            Address working = r.match.dst ? *r.match.dst : Address{};
            bool have_dst = r.match.dst.has_value();
            for (const Action& a : r.actions) {
                if (a.type == Action::Type::SetDst) {
                    working = a.addr;
                    have_dst = true;
                } else if (a.type == Action::Type::Output && a.port == kWirelessPort &&
                           have_dst && working == mc) {
                    return true;
                }
            }
        }
        return false;
    }

    bool baseline_connected(const NodeId& ap, const NodeId& camera, const VehicleId& vehicle,
                            SimTime now) {
        Header h{unicast(camera), unicast(vehicle)};
        const Rule* r = tables_[ap].peek(h, now);
        if (!r) return false;
        ApplyResult res = apply_actions(*r, h);
        for (const auto& [port, out] : res.outputs) {
            if (port == kWirelessPort && out.dst == unicast(vehicle)) return true;
        }
        return false;
    }

    void ensure_service(VehicleState& veh, const NodeId& camera, SimTime now) {
        if (!veh.ap) {
            report_.losses++;
            log(now, "loss", "vehicle=" + veh.id + " offline wanting=" + camera);
            return;
        }
        if (cfg_.strategy == Strategy::Optimized) {
            Address mc = multicast_address_of(topo_, camera);
            veh.subscriptions.insert(mc);
            if (ap_multicasts(*veh.ap, mc, now)) return;  // data already flows here
        } else {
            if (baseline_connected(*veh.ap, camera, veh.id, now)) return;
        }
        log(now, "request", "vehicle=" + veh.id + " camera=" + camera + " ap=" + *veh.ap);
        Packet pkt{*veh.ap, Header{unicast(veh.id), unicast(camera)}, std::nullopt, 0, false};
        Event e;
        e.t = now;
        e.kind = kPacketArrival;
        e.packet = std::move(pkt);
        push(std::move(e));
    }

    void register_flow(const NodeId& camera, const VehicleId& vehicle, SimTime now) {
        auto veh = vehicles_.find(vehicle);
        if (veh == vehicles_.end() || !veh->second.active) return;
        CameraState& cs = cameras_[camera];
        cs.flows.insert(vehicle);
        controller_.notify_stream_active(camera);
        if (!cs.ticking) {
            cs.ticking = true;
            SimTime period = sc_.params.camera_period_us;
            SimTime next = (now / period + 1) * period;
            Event e;
            e.t = next;
            e.kind = kCameraTick;
            e.camera = camera;
            push(std::move(e));
        }
    }

    void drop_flow(const NodeId& camera, const VehicleId& vehicle) {
        auto it = cameras_.find(camera);
        if (it == cameras_.end()) return;
        it->second.flows.erase(vehicle);
        if (it->second.flows.empty()) controller_.notify_stream_inactive(camera);
    }

    void deliver(const VehicleId& vehicle, const Payload& payload, SimTime t) {
        VehicleState& veh = vehicles_.at(vehicle);
        if (!veh.received.insert(payload).second) return;  // duplicate copy of one emission
        DeliveryRecord rec;
        rec.vehicle = vehicle;
        rec.camera = payload.camera;
        rec.payload_seq = payload.seq;
        rec.emit_us = payload.seq * sc_.params.camera_period_us;
        rec.receive_us = t;
        report_.deliveries.push_back(rec);
    }

    void wireless_deliver(const NodeId& ap, const Header& h, const std::optional<Payload>& payload,
                          SimTime t) {
        if (!payload) return;  // only camera data goes down the wireless plane
        int delivered = 0;
        const Vec2& ap_pos = topo_.node(ap).pos;
        if (h.dst.kind == AddressKind::Multicast) {
            for (auto& [id, veh] : vehicles_) {
                if (!veh.active || !veh.subscriptions.count(h.dst)) continue;
                if (distance(veh.pos, ap_pos) > topo_.ap_range()) continue;
                deliver(id, *payload, t);
                ++delivered;
            }
        } else {
            auto it = vehicles_.find(h.dst.id);
            if (it != vehicles_.end() && it->second.active &&
                distance(it->second.pos, ap_pos) <= topo_.ap_range()) {
                deliver(it->first, *payload, t);
                ++delivered;
            }
        }
        if (delivered == 0) {
            report_.losses++;
            log(t, "loss", "ap=" + ap + " frame=" + h.str() + " undeliverable");
        }
    }

    void handle_miss(Packet pkt, SimTime now) {
        auto key = std::make_pair(pkt.node, pkt.header);
        auto pending = pending_.find(key);
        if (pending != pending_.end()) {
            pending->second.push_back(std::move(pkt));
            return;
        }
        if (pkt.reinjected) {
            report_.losses++;
            log(now, "loss", "node=" + pkt.node + " header=" + pkt.header.str() +
                                 " no rule after plan");
            return;
        }
        report_.packet_ins++;
        log(now, "packet_in", "node=" + pkt.node + " header=" + pkt.header.str());
        std::optional<VehicleInfo> info;
        if (is_vehicle_addr(pkt.header.src)) {
            const VehicleState& veh = vehicles_.at(pkt.header.src.id);
            info = VehicleInfo{veh.pos, veh.heading};
        }
        InstallPlan plan = controller_.handle_packet_in(pkt.header, pkt.node, now, info);
        Event e;
        e.t = now + sc_.params.controller_latency_us;
        e.kind = kPlanApply;
        e.plan_node = pkt.node;
        e.plan_header = pkt.header;
        e.plan = std::move(plan);
        pending_[key].push_back(std::move(pkt));
        push(std::move(e));
    }

    void validate_planned(const PlannedRule& pr) {
        const Node& node = topo_.node(pr.node);
        for (const Action& a : pr.rule.actions) {
            if (a.type != Action::Type::Output) continue;
            if (a.port == kWirelessPort) {
                if (node.role != NodeRole::Ap)
                    throw Error("plan outputs wirelessly at non-AP '" + pr.node + "'");
            } else if (!topo_.peer_at(pr.node, a.port)) {
                throw Error("plan outputs to missing port on '" + pr.node + "'");
            }
        }
    }

    void apply_plan(const NodeId& node, const Header& header, const InstallPlan& plan,
                    SimTime now) {
        for (const PlannedRule& pr : plan.rules) {
            validate_planned(pr);
            InstallResult res = tables_[pr.node].install(pr.rule, now);
            if (res == InstallResult::Rejected) {
                report_.table_full_rejections++;
                log(now, "table_full", "node=" + pr.node + " match=" + pr.rule.match.str());
            } else {
                log(now, "rule_install", "node=" + pr.node + " match=" + pr.rule.match.str() +
                                             " prio=" + std::to_string(pr.rule.priority));
            }
        }
        auto key = std::make_pair(node, header);
        auto it = pending_.find(key);
        if (it == pending_.end()) return;
        std::vector<Packet> buffered = std::move(it->second);
        pending_.erase(it);
        for (Packet& pkt : buffered) {
            pkt.reinjected = true;
            forward_packet(std::move(pkt), now);
        }
    }

    void forward_packet(Packet pkt, SimTime now) {
        if (pkt.hops > kMaxHops) {
            report_.losses++;
            log(now, "loss", "header=" + pkt.header.str() + " hop limit");
            return;
        }
        const Node& node = topo_.node(pkt.node);
        if ((node.role == NodeRole::Camera || node.role == NodeRole::Server) &&
            pkt.header.dst == unicast(pkt.node)) {
            if (is_request(pkt.header)) register_flow(pkt.node, pkt.header.src.id, now);
            return;
        }
        lazy_expire(pkt.node, now);
        Rule* rule = tables_[pkt.node].lookup(pkt.header, now);
        if (!rule) {
            handle_miss(std::move(pkt), now);
            return;
        }
        ApplyResult res = apply_actions(*rule, pkt.header);
        // Each output is delayed by the header rewrites that precede it.
        std::vector<int> rewrites_before;
        int rewrites = 0;
        for (const Action& a : rule->actions) {
            if (a.type == Action::Type::SetDst) ++rewrites;
            else if (a.type == Action::Type::Output) rewrites_before.push_back(rewrites);
        }
        for (std::size_t i = 0; i < res.outputs.size(); ++i) {
            const auto& [port, out_header] = res.outputs[i];
            SimTime t_emit = now + rewrites_before[i] * sc_.params.rewrite_cost_us;
            if (port == kWirelessPort) {
                wireless_deliver(pkt.node, out_header, pkt.payload, t_emit);
            } else if (const PortPeer* pp = topo_.peer_at(pkt.node, port)) {
                Event e;
                e.t = t_emit + pp->latency_us;
                e.kind = kPacketArrival;
                e.packet = Packet{pp->peer, out_header, pkt.payload, pkt.hops + 1, false};
                push(std::move(e));
            }
        }
    }

    void camera_tick(const NodeId& camera, SimTime now) {
        CameraState& cs = cameras_[camera];
        if (cs.flows.empty()) {
            cs.ticking = false;
            return;
        }
        std::int64_t seq = now / sc_.params.camera_period_us;
        std::vector<Header> emitted;
        if (cfg_.strategy == Strategy::Baseline) {
            for (const VehicleId& v : cs.flows)
                emitted.push_back(Header{unicast(camera), unicast(v)});
        } else {
            auto label = controller_.stream_label(camera);
            if (label) emitted.push_back(Header{unicast(camera), *label});
        }
        if (opts_.capture_emissions && !emitted.empty()) capture_emission(camera, seq, emitted, now);
        for (const Header& h : emitted) {
            Event e;
            e.t = now;
            e.kind = kPacketArrival;
            e.packet = Packet{camera, h, Payload{camera, seq}, 0, false};
            push(std::move(e));
        }
        Event next;
        next.t = now + sc_.params.camera_period_us;
        next.kind = kCameraTick;
        next.camera = camera;
        push(std::move(next));
    }

    void capture_emission(const NodeId& camera, std::int64_t seq,
                          const std::vector<Header>& emitted, SimTime now) {
        EmissionSnapshot snap;
        snap.time_us = now;
        snap.camera = camera;
        snap.payload_seq = seq;
        snap.emitted = emitted;
        for (const auto& [id, table] : tables_) snap.tables[id] = table.entries();
        for (const auto& [id, veh] : vehicles_) {
            snap.vehicles.push_back({id, veh.pos, veh.subscriptions, veh.active});
        }
        emissions_.push_back(std::move(snap));
    }

    void vehicle_move(const VehicleId& id, const Vec2& pos, const Vec2& heading, SimTime now) {
        VehicleState& veh = vehicles_[id];
        veh.id = id;
        veh.pos = pos;
        if (!is_zero(heading)) veh.heading = heading;
        veh.active = true;
        veh.ap = nearest_ap(pos);
        log(now, "move", "vehicle=" + id + " ap=" + (veh.ap ? *veh.ap : std::string("none")));
        for (const NodeId& cam : veh.wants) ensure_service(veh, cam, now);
    }

    void request_emit(const VehicleId& id, const NodeId& camera, SimTime now) {
        auto it = vehicles_.find(id);
        if (it == vehicles_.end() || !it->second.active) {
            log(now, "loss", "request from absent vehicle=" + id);
            report_.losses++;
            return;
        }
        it->second.wants.insert(camera);
        ensure_service(it->second, camera, now);
    }

    void despawn(const VehicleId& id, SimTime now) {
        auto it = vehicles_.find(id);
        if (it == vehicles_.end()) return;
        VehicleState& veh = it->second;
        veh.active = false;
        for (const NodeId& cam : veh.wants) drop_flow(cam, id);
        veh.wants.clear();
        veh.subscriptions.clear();
        log(now, "despawn", "vehicle=" + id);
    }

    void moment_boundary(int index, SimTime now) {
        for (auto& [id, table] : tables_) lazy_expire(id, now);
        for (const auto& [id, table] : tables_)
            report_.rule_counts.push_back({index, id, table.size()});
        log(now, "moment", "index=" + std::to_string(index));
    }
};

SimResult Engine::run() {
    report_.strategy = strategy_name(cfg_.strategy);
    std::size_t cap = sc_.params.table_capacity;
    for (const auto& [id, node] : topo_.nodes())
        tables_.emplace(id, cap > 0 ? FlowTable(cap) : FlowTable());

    // Vehicle presence per moment (for the summary) and movement schedule.
    std::map<VehicleId, int> last_moment;
    for (const Moment& mom : sc_.moments) {
        report_.vehicles_per_moment[mom.index] = static_cast<int>(mom.members.size());
        SimTime mt = sc_.moment_time_us(mom.index);
        for (const MomentMember& mem : mom.members) {
            Event e;
            e.t = mt + sc_.params.move_offset_us;
            e.kind = kVehicleMove;
            e.vehicle = mem.vehicle;
            e.pos = mem.pos;
            e.heading = mem.heading;
            push(std::move(e));
            auto it = last_moment.find(mem.vehicle);
            if (it == last_moment.end() || it->second < mom.index)
                last_moment[mem.vehicle] = mom.index;
        }
    }
    for (const auto& [vehicle, reqs] : sc_.requests_by_moment) {
        for (const auto& [moment, req] : reqs) {
            Event e;
            e.t = sc_.moment_time_us(moment) + sc_.params.request_offset_us;
            e.kind = kRequestEmit;
            e.vehicle = vehicle;
            e.camera = req.camera;
            push(std::move(e));
        }
    }
    for (const auto& [vehicle, last] : last_moment) {
        Event e;
        e.t = sc_.moment_time_us(last + 1) + sc_.params.move_offset_us;
        e.kind = kDespawn;
        e.vehicle = vehicle;
        push(std::move(e));
    }
    int moments = sc_.moment_count();
    for (int i = 0; i < moments; ++i) {
        Event e;
        e.t = sc_.moment_time_us(i + 1);
        e.kind = kMomentBoundary;
        e.moment = i;
        push(std::move(e));
    }
    end_time_ = sc_.moment_time_us(moments);

    while (!queue_.empty()) {
        Event e = queue_.top();
        if (e.t > end_time_) break;
        queue_.pop();
        switch (e.kind) {
            case kPacketArrival:
                forward_packet(std::move(e.packet), e.t);
                break;
            case kPlanApply:
                apply_plan(e.plan_node, e.plan_header, e.plan, e.t);
                break;
            case kVehicleMove:
                vehicle_move(e.vehicle, e.pos, e.heading, e.t);
                break;
            case kRequestEmit:
                request_emit(e.vehicle, e.camera, e.t);
                break;
            case kCameraTick:
                camera_tick(e.camera, e.t);
                break;
            case kDespawn:
                despawn(e.vehicle, e.t);
                break;
            case kMomentBoundary:
                moment_boundary(e.moment, e.t);
                break;
        }
    }

    SimResult result;
    result.report = std::move(report_);
    for (const auto& [id, table] : tables_) result.final_tables[id] = table.entries();
    result.emissions = std::move(emissions_);
    return result;
}

}  // namespace

SimResult run(const Scenario& scenario, const StrategyConfig& cfg, const RunOptions& opts) {
    Engine engine(scenario, cfg, opts);
    return engine.run();
}

std::vector<std::tuple<VehicleId, NodeId, std::int64_t>> delivery_multiset(const SimResult& r) {
    std::vector<std::tuple<VehicleId, NodeId, std::int64_t>> out;
    for (const auto& d : r.report.deliveries) out.emplace_back(d.vehicle, d.camera, d.payload_seq);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::tuple<VehicleId, NodeId, std::int64_t>> first_delivery_difference(
    const SimResult& a, const SimResult& b) {
    auto ma = delivery_multiset(a);
    auto mb = delivery_multiset(b);
    std::size_t i = 0, j = 0;
    while (i < ma.size() && j < mb.size()) {
        if (ma[i] == mb[j]) {
            ++i;
            ++j;
        } else if (ma[i] < mb[j]) {
            return ma[i];
        } else {
            return mb[j];
        }
    }
    if (i < ma.size()) return ma[i];
    if (j < mb.size()) return mb[j];
    return std::nullopt;
}

}  // namespace sdiv
