#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdiv/flowtable.hpp"
#include "sdiv/pathfind.hpp"
#include "sdiv/scenario.hpp"
#include "sdiv/topology.hpp"

namespace sdiv {

enum class Strategy { Baseline, Optimized };

const char* strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(const std::string& name);

struct StrategyConfig {
    Strategy strategy = Strategy::Optimized;
    double t_base_s = 80.0;  // timeout at the camera-adjacent node
    double k = 2.0;          // decay factor, > 1
    int preinstall_hops = 1;
};

struct RequestRecord {
    VehicleId vehicle;
    NodeId camera;
    NodeId ap;  // AP of most recent contact
    SimTime time_us = 0;
    std::vector<NodeId> predicted_path;
    bool prediction_fell_back = false;
};

struct PlannedRule {
    NodeId node;
    Rule rule;
};

struct InstallPlan {
    std::vector<PlannedRule> rules;
    bool empty() const { return rules.empty(); }
};

/// Vehicle conditions carried by a request.
struct VehicleInfo {
    Vec2 position;
    Vec2 heading;
};

/// Centralized control plane. Handles packet-in events in timestamp order,
/// keeps a shadow copy of every installed rule keyed by switch and traffic
/// source, and emits install plans under one of two strategies.
///
/// Baseline installs source-driven (src, *) forwarding per flow; where two
/// flows of one source diverge, the newer flow gets an exact (src, dst) rule
/// so both keep routing correctly while the shared segments stay merged.
///
/// Optimized implements the destination-driven walk: generic (*, dst) rules
/// shared across sources, exact rewrite rules at branching nodes that copy
/// toward the established direction and re-label toward the new one, a
/// multicast rewrite on the vehicle-facing AP, pre-installation along the
/// predicted road path, and distance-scaled idle timeouts.
class Controller {
public:
    Controller(const Topology& topo, StrategyConfig cfg);

    Strategy strategy() const { return cfg_.strategy; }
    const StrategyConfig& config() const { return cfg_; }

    /// Idle timeout in seconds: t_base * k^(-hop_distance(node, camera_node)),
    /// strictly decreasing away from the camera for k > 1.
    double timeout_for(const NodeId& node, const NodeId& camera_node) const;
    SimTime timeout_us_for(const NodeId& node, const NodeId& camera_node) const;

    /// Reacts to a table miss at `at`. Vehicle-to-camera requests produce the
    /// full plan (request path, data return, and under Optimized the multicast
    /// and pre-install rules); anything else yields an empty plan.
    InstallPlan handle_packet_in(const Header& h, const NodeId& at, SimTime now,
                                 const std::optional<VehicleInfo>& info);

    /// Source-driven per-flow installation along `path` (source first). When
    /// `wireless_tail` is set the last node additionally outputs on its
    /// wireless port with the flow destination unchanged.
    InstallPlan baseline_install(const NodeId& camera, const VehicleId& vehicle,
                                 const std::vector<NodeId>& path);

    /// The destination-driven walk over `path` from the camera toward the
    /// destination attachment `dest_ap`. Returns the plan for the wired part;
    /// the last-hop rewrite is a separate concern (last_hop_multicast).
    InstallPlan optimized_install(const NodeId& camera, const NodeId& dest_ap,
                                  const std::vector<NodeId>& path);

    /// Rewrite rule at the AP: match the arriving data header, set the
    /// camera's multicast address, output wirelessly. Composes with existing
    /// forwarding at the AP when the node is also a transit hop.
    Rule last_hop_multicast(const NodeId& ap, const NodeId& camera);

    /// Extends the data tree and installs multicast rules at the next
    /// preinstall_hops AP nodes along the record's predicted path.
    InstallPlan preinstall_along_prediction(const RequestRecord& rec);

    /// Emission destination the camera labels its packets with (Optimized).
    std::optional<Address> stream_label(const NodeId& camera) const;

    const std::map<std::pair<VehicleId, NodeId>, RequestRecord>& records() const {
        return records_;
    }

    // Engine synchronization.
    void on_rule_expired(const NodeId& node, const MatchPattern& match, int priority);
    void notify_stream_active(const NodeId& camera);
    void notify_stream_inactive(const NodeId& camera);

private:
    struct ShadowEntry {
        MatchPattern match;
        int priority = 0;
        std::vector<Action> actions;
        std::set<Address> sources;
    };

    struct WiredOut {
        NodeId peer;
        Address label;  // working dst at the moment of the output
        int port = 0;
    };

    const Topology* topo_;
    StrategyConfig cfg_;
    std::map<NodeId, std::vector<ShadowEntry>> shadow_;
    std::map<NodeId, Address> stream_label_;
    std::map<std::pair<NodeId, NodeId>, Address> arrival_label_;  // (node, camera) -> dst label
    std::map<Address, int> source_entry_count_;
    std::set<NodeId> active_streams_;
    std::map<std::pair<VehicleId, NodeId>, RequestRecord> records_;

    ShadowEntry* find_entry(const NodeId& node, const MatchPattern& match, int priority);
    ShadowEntry* find_exact(const NodeId& node, const Address& src, const Address& dst);
    ShadowEntry* find_wildcard_src(const NodeId& node, const Address& src);
    ShadowEntry* find_generic(const NodeId& node, const Address& dst);

    std::vector<WiredOut> wired_outputs(const NodeId& node, const ShadowEntry& entry,
                                        const Address& arriving) const;
    bool emits_multicast(const ShadowEntry& entry, const Address& mc, const Address& arriving) const;

    void commit(const NodeId& node, const MatchPattern& match, int priority,
                std::vector<Action> actions, const Address& source, const NodeId& camera_node,
                InstallPlan& plan);

    void baseline_walk(const Address& source, const Address& flow_dst,
                       const std::vector<NodeId>& path, const NodeId& camera_node,
                       bool wireless_tail, InstallPlan& plan);
    Address optimized_walk(const NodeId& camera, const Address& dest_label,
                           const std::vector<NodeId>& path, InstallPlan& plan);
    void add_multicast(const NodeId& ap, const NodeId& camera, const Address& arriving,
                       InstallPlan& plan);
    void preinstall(const RequestRecord& rec, InstallPlan& plan);

    Address ensure_stream_label(const NodeId& camera, const NodeId& first_ap);
    void maybe_clear_stream(const NodeId& camera);
    int out_port(const NodeId& from, const NodeId& to) const;
};

}  // namespace sdiv
