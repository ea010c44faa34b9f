#include "sdiv/controller.hpp"

#include <algorithm>
#include <cmath>

namespace sdiv {

const char* strategy_name(Strategy s) {
    return s == Strategy::Baseline ? "baseline" : "optimized";
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
    if (name == "baseline") return Strategy::Baseline;
    if (name == "optimized") return Strategy::Optimized;
    return std::nullopt;
}

Controller::Controller(const Topology& topo, StrategyConfig cfg) : topo_(&topo), cfg_(cfg) {
    if (cfg_.t_base_s <= 0) throw ValidationError("t_base must be positive");
    if (cfg_.k <= 1.0) throw ValidationError("timeout decay factor k must be > 1");
    if (cfg_.preinstall_hops < 0) throw ValidationError("preinstall_hops must be >= 0");
}

double Controller::timeout_for(const NodeId& node, const NodeId& camera_node) const {
    int d = topo_->hop_distance(node, camera_node);
    return cfg_.t_base_s * std::pow(cfg_.k, -static_cast<double>(d));
}

SimTime Controller::timeout_us_for(const NodeId& node, const NodeId& camera_node) const {
    SimTime us = static_cast<SimTime>(std::llround(timeout_for(node, camera_node) * 1e6));
    return std::max<SimTime>(us, 1);
}

int Controller::out_port(const NodeId& from, const NodeId& to) const {
    auto port = topo_->port_to(from, to);
    if (!port) throw Error("no link between '" + from + "' and '" + to + "'");
    return *port;
}

Controller::ShadowEntry* Controller::find_entry(const NodeId& node, const MatchPattern& match,
                                                int priority) {
    auto it = shadow_.find(node);
    if (it == shadow_.end()) return nullptr;
    for (auto& e : it->second) {
        if (e.match == match && e.priority == priority) return &e;
    }
    return nullptr;
}

Controller::ShadowEntry* Controller::find_exact(const NodeId& node, const Address& src,
                                                const Address& dst) {
    auto it = shadow_.find(node);
    if (it == shadow_.end()) return nullptr;
    for (auto& e : it->second) {
        if (e.match.src && *e.match.src == src && e.match.dst && *e.match.dst == dst)
            return &e;
    }
    return nullptr;
}

Controller::ShadowEntry* Controller::find_wildcard_src(const NodeId& node, const Address& src) {
    auto it = shadow_.find(node);
    if (it == shadow_.end()) return nullptr;
    for (auto& e : it->second) {
        if (e.match.src && *e.match.src == src && !e.match.dst) return &e;
    }
    return nullptr;
}

Controller::ShadowEntry* Controller::find_generic(const NodeId& node, const Address& dst) {
    auto it = shadow_.find(node);
    if (it == shadow_.end()) return nullptr;
    for (auto& e : it->second) {
        if (!e.match.src && e.match.dst && *e.match.dst == dst &&
            e.priority == kPriorityGeneric)
            return &e;
    }
    return nullptr;
}

std::vector<Controller::WiredOut> Controller::wired_outputs(const NodeId& node,
                                                            const ShadowEntry& entry,
                                                            const Address& arriving) const {
    std::vector<WiredOut> outs;
    Address working = arriving;
    for (const Action& a : entry.actions) {
        if (a.type == Action::Type::SetDst) {
            working = a.addr;
        } else if (a.type == Action::Type::Output && a.port != kWirelessPort) {
            const PortPeer* pp = topo_->peer_at(node, a.port);
            if (pp) outs.push_back({pp->peer, working, a.port});
        }
    }
    return outs;
}

bool Controller::emits_multicast(const ShadowEntry& entry, const Address& mc,
                                 const Address& arriving) const {
    Address working = arriving;
    for (const Action& a : entry.actions) {
        if (a.type == Action::Type::SetDst) working = a.addr;
        else if (a.type == Action::Type::Output && a.port == kWirelessPort && working == mc)
            return true;
    }
    return false;
}

void Controller::commit(const NodeId& node, const MatchPattern& match, int priority,
                        std::vector<Action> actions, const Address& source,
                        const NodeId& camera_node, InstallPlan& plan) {
    Rule rule;
    rule.match = match;
    rule.priority = priority;
    rule.actions = actions;
    rule.idle_timeout_us = timeout_us_for(node, camera_node);
    plan.rules.push_back({node, rule});

    if (ShadowEntry* e = find_entry(node, match, priority)) {
        e->actions = std::move(actions);
        if (e->sources.insert(source).second) source_entry_count_[source]++;
        return;
    }
    ShadowEntry entry;
    entry.match = match;
    entry.priority = priority;
    entry.actions = std::move(actions);
    entry.sources.insert(source);
    shadow_[node].push_back(std::move(entry));
    source_entry_count_[source]++;
}

void Controller::baseline_walk(const Address& source, const Address& flow_dst,
                               const std::vector<NodeId>& path, const NodeId& camera_node,
                               bool wireless_tail, InstallPlan& plan) {
    auto place = [&](const NodeId& node, int port) {
        if (ShadowEntry* exact = find_exact(node, source, flow_dst)) {
            // Re-emit (retargets after a move, refreshes otherwise).
            commit(node, exact->match, exact->priority, {Action::output(port)}, source,
                   camera_node, plan);
            return;
        }
        if (ShadowEntry* wild = find_wildcard_src(node, source)) {
            bool same_port = wild->actions.size() == 1 &&
                             wild->actions[0].type == Action::Type::Output &&
                             wild->actions[0].port == port;
            if (same_port) {
                commit(node, wild->match, wild->priority, wild->actions, source, camera_node,
                       plan);
            } else {
                // Divergent flow of an already-routed source: an exact entry
                // keeps both flows deliverable without touching the first.
                MatchPattern m{source, flow_dst};
                commit(node, m, kPriorityExact, {Action::output(port)}, source, camera_node,
                       plan);
            }
            return;
        }
        MatchPattern m{source, std::nullopt};
        commit(node, m, kPriorityGeneric, {Action::output(port)}, source, camera_node, plan);
    };

    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        place(path[i], out_port(path[i], path[i + 1]));
    if (wireless_tail) place(path.back(), kWirelessPort);
}

Address Controller::optimized_walk(const NodeId& camera, const Address& dest_label,
                                   const std::vector<NodeId>& path, InstallPlan& plan) {
    const Address src_addr = unicast(camera);
    auto label_it = stream_label_.find(camera);
    Address cur = label_it != stream_label_.end() ? label_it->second : dest_label;

    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const NodeId& n = path[i];
        const NodeId& nx = path[i + 1];
        arrival_label_[{n, camera}] = cur;
        int port_nx = out_port(n, nx);

        if (ShadowEntry* exact = find_exact(n, src_addr, cur)) {
            auto outs = wired_outputs(n, *exact, cur);
            auto hit = std::find_if(outs.begin(), outs.end(),
                                    [&](const WiredOut& o) { return o.peer == nx; });
            if (hit != outs.end()) {
                cur = hit->label;
                continue;
            }
            std::vector<Action> acts = exact->actions;
            acts.push_back(Action::set_dst(dest_label));
            acts.push_back(Action::output(port_nx));
            commit(n, exact->match, exact->priority, std::move(acts), src_addr, camera, plan);
            cur = dest_label;
            continue;
        }
        if (ShadowEntry* generic = find_generic(n, cur)) {
            auto outs = wired_outputs(n, *generic, cur);
            if (!outs.empty() && outs.front().peer == nx) {
                if (generic->sources.insert(src_addr).second) source_entry_count_[src_addr]++;
                continue;
            }
            // Branching node: keep the established direction, then re-label
            // toward the new destination.
            std::vector<Action> acts = generic->actions;
            acts.push_back(Action::set_dst(dest_label));
            acts.push_back(Action::output(port_nx));
            MatchPattern m{src_addr, cur};
            commit(n, m, kPriorityExact, std::move(acts), src_addr, camera, plan);
            cur = dest_label;
            continue;
        }
        MatchPattern m{std::nullopt, cur};
        commit(n, m, kPriorityGeneric, {Action::output(port_nx)}, src_addr, camera, plan);
    }
    arrival_label_[{path.back(), camera}] = cur;
    return cur;
}

void Controller::add_multicast(const NodeId& ap, const NodeId& camera, const Address& arriving,
                               InstallPlan& plan) {
    const Address src_addr = unicast(camera);
    const Address mc = multicast_address_of(*topo_, camera);
    if (ShadowEntry* exact = find_exact(ap, src_addr, arriving)) {
        if (emits_multicast(*exact, mc, arriving)) return;  // already rewriting
        std::vector<Action> acts = exact->actions;
        acts.push_back(Action::set_dst(mc));
        acts.push_back(Action::output(kWirelessPort));
        commit(ap, exact->match, exact->priority, std::move(acts), src_addr, camera, plan);
        return;
    }
    MatchPattern m{src_addr, arriving};
    commit(ap, m, kPriorityMulticast,
           {Action::set_dst(mc), Action::output(kWirelessPort)}, src_addr, camera, plan);
}

void Controller::preinstall(const RequestRecord& rec, InstallPlan& plan) {
    int remaining = cfg_.preinstall_hops;
    for (std::size_t i = 1; i < rec.predicted_path.size() && remaining > 0; ++i) {
        const NodeId& node = rec.predicted_path[i];
        if (topo_->node(node).role != NodeRole::Ap) continue;
        --remaining;
        std::vector<NodeId> ext;
        try {
            ext = topo_->tree_path(node, rec.camera);
        } catch (const Error&) {
            continue;
        }
        std::reverse(ext.begin(), ext.end());  // camera .. ap
        Address arriving = optimized_walk(rec.camera, unicast(node), ext, plan);
        add_multicast(node, rec.camera, arriving, plan);
    }
}

Address Controller::ensure_stream_label(const NodeId& camera, const NodeId& first_ap) {
    auto it = stream_label_.find(camera);
    if (it != stream_label_.end()) return it->second;
    Address label = unicast(first_ap);
    stream_label_[camera] = label;
    return label;
}

InstallPlan Controller::handle_packet_in(const Header& h, const NodeId& at, SimTime now,
                                         const std::optional<VehicleInfo>& info) {
    InstallPlan plan;
    // Only vehicle-to-camera requests are recognized.
    if (h.src.kind != AddressKind::Unicast || h.dst.kind != AddressKind::Unicast) return plan;
    if (topo_->has_node(h.src.id)) return plan;  // not a vehicle address
    if (!topo_->has_node(h.dst.id) || topo_->node(h.dst.id).role != NodeRole::Camera) return plan;

    const VehicleId vehicle = h.src.id;
    const NodeId camera = h.dst.id;

    std::vector<NodeId> request_path;
    try {
        request_path = topo_->tree_path(at, camera);
    } catch (const Error&) {
        return plan;  // camera unreachable
    }

    std::vector<NodeId> predicted = request_path;
    bool fell_back = true;
    if (info) {
        try {
            predicted = path_find({at, camera, info->heading}, *topo_).nodes;
            fell_back = false;
        } catch (const PathError&) {
        } catch (const InvalidDirectionError&) {
        }
    }
    RequestRecord rec{vehicle, camera, at, now, predicted, fell_back};
    records_[{vehicle, camera}] = rec;

    // Request direction keeps the baseline shape under both strategies; it is
    // only useful at setup time and ages out on its own.
    baseline_walk(unicast(vehicle), unicast(camera), request_path, camera, false, plan);

    std::vector<NodeId> data_path(request_path.rbegin(), request_path.rend());
    if (cfg_.strategy == Strategy::Baseline) {
        baseline_walk(unicast(camera), unicast(vehicle), data_path, camera, true, plan);
    } else {
        Address dest = unicast(at);
        ensure_stream_label(camera, at);
        Address arriving = optimized_walk(camera, dest, data_path, plan);
        add_multicast(at, camera, arriving, plan);
        preinstall(rec, plan);
    }
    return plan;
}

InstallPlan Controller::baseline_install(const NodeId& camera, const VehicleId& vehicle,
                                         const std::vector<NodeId>& path) {
    InstallPlan plan;
    baseline_walk(unicast(camera), unicast(vehicle), path, camera, true, plan);
    return plan;
}

InstallPlan Controller::optimized_install(const NodeId& camera, const NodeId& dest_ap,
                                          const std::vector<NodeId>& path) {
    InstallPlan plan;
    ensure_stream_label(camera, dest_ap);
    optimized_walk(camera, unicast(dest_ap), path, plan);
    return plan;
}

Rule Controller::last_hop_multicast(const NodeId& ap, const NodeId& camera) {
    if (topo_->node(ap).role != NodeRole::Ap)
        throw Error("node '" + ap + "' is not an AP");
    Address arriving = unicast(ap);
    auto it = arrival_label_.find({ap, camera});
    if (it != arrival_label_.end()) {
        arriving = it->second;
    } else if (auto label = stream_label(camera)) {
        arriving = *label;
    }
    InstallPlan plan;
    add_multicast(ap, camera, arriving, plan);
    if (plan.rules.empty()) {
        // Already rewriting; return the effective entry.
        ShadowEntry* e = find_exact(ap, unicast(camera), arriving);
        Rule rule;
        rule.match = e->match;
        rule.priority = e->priority;
        rule.actions = e->actions;
        rule.idle_timeout_us = timeout_us_for(ap, camera);
        return rule;
    }
    return plan.rules.back().rule;
}

InstallPlan Controller::preinstall_along_prediction(const RequestRecord& rec) {
    InstallPlan plan;
    preinstall(rec, plan);
    return plan;
}

std::optional<Address> Controller::stream_label(const NodeId& camera) const {
    auto it = stream_label_.find(camera);
    if (it == stream_label_.end()) return std::nullopt;
    return it->second;
}

void Controller::on_rule_expired(const NodeId& node, const MatchPattern& match, int priority) {
    auto it = shadow_.find(node);
    if (it == shadow_.end()) return;
    auto& entries = it->second;
    for (auto e = entries.begin(); e != entries.end(); ++e) {
        if (e->match == match && e->priority == priority) {
            std::set<Address> sources = e->sources;
            entries.erase(e);
            for (const Address& s : sources) {
                auto cnt = source_entry_count_.find(s);
                if (cnt != source_entry_count_.end() && --cnt->second <= 0)
                    source_entry_count_.erase(cnt);
                if (s.kind == AddressKind::Unicast && topo_->has_node(s.id) &&
                    topo_->node(s.id).role == NodeRole::Camera) {
                    auto lbl = arrival_label_.find({node, s.id});
                    if (lbl != arrival_label_.end()) arrival_label_.erase(lbl);
                    maybe_clear_stream(s.id);
                }
            }
            return;
        }
    }
}

void Controller::notify_stream_active(const NodeId& camera) { active_streams_.insert(camera); }

void Controller::notify_stream_inactive(const NodeId& camera) {
    active_streams_.erase(camera);
    maybe_clear_stream(camera);
}

void Controller::maybe_clear_stream(const NodeId& camera) {
    if (active_streams_.count(camera)) return;
    if (source_entry_count_.count(unicast(camera))) return;
    stream_label_.erase(camera);
    for (auto it = arrival_label_.begin(); it != arrival_label_.end();) {
        if (it->first.second == camera) it = arrival_label_.erase(it);
        else ++it;
    }
}

}  // namespace sdiv
