#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdiv/errors.hpp"
#include "sdiv/geometry.hpp"

namespace sdiv {

using NodeId = std::string;
using SimTime = std::int64_t;  // microseconds

enum class NodeRole { Switch, Ap, Camera, Server };

const char* role_name(NodeRole role);
std::optional<NodeRole> role_from_name(const std::string& name);

struct Node {
    NodeId id;
    Vec2 pos;
    NodeRole role = NodeRole::Switch;
};

struct Link {
    NodeId a;
    NodeId b;
    SimTime latency_us = 0;
    int port_a = 0;  // a's local port toward b
    int port_b = 0;  // b's local port toward a
};

/// One adjacency entry as seen from a node: the local port and what is behind it.
struct PortPeer {
    int port = 0;
    NodeId peer;
    SimTime latency_us = 0;
};

/// Immutable geometric graph of the wired plane. Built once by the scenario
/// loader (or TopologyBuilder in tests); every accessor is const and safe to
/// share across concurrent simulation runs.
class Topology {
public:
    Topology() = default;

    const Node& node(const NodeId& id) const;
    bool has_node(const NodeId& id) const { return nodes_.count(id) > 0; }
    const std::map<NodeId, Node>& nodes() const { return nodes_; }
    const std::vector<Link>& links() const { return links_; }

    double ap_range() const { return ap_range_; }

    double euclidean_distance(const NodeId& a, const NodeId& b) const;

    /// True iff the angle between v and the vector from->to is strictly
    /// less than 90 degrees, i.e. dot(v, pos(to) - pos(from)) > 0.
    bool direction_compatible(const Vec2& v, const NodeId& from, const NodeId& to) const;

    /// Minimum link count between a and b (breadth-first). Throws LookupError
    /// for unknown ids and Error("unreachable...") for disconnected pairs.
    int hop_distance(const NodeId& a, const NodeId& b) const;

    /// Adjacency sorted by local port number.
    const std::vector<PortPeer>& neighbors(const NodeId& id) const;

    /// Local port on `from` that leads to `to`, if the link exists.
    std::optional<int> port_to(const NodeId& from, const NodeId& to) const;

    /// Peer behind a local wired port.
    const PortPeer* peer_at(const NodeId& node, int port) const;

    /// Shortest-path route from `from` to `to` following the breadth-first
    /// tree rooted at `to` (deterministic: neighbors visited in port order).
    /// All routes toward a fixed destination therefore form a tree, which the
    /// controller relies on for branch bookkeeping.
    std::vector<NodeId> tree_path(const NodeId& from, const NodeId& to) const;

private:
    friend class TopologyBuilder;

    std::map<NodeId, Node> nodes_;
    std::vector<Link> links_;
    std::map<NodeId, std::vector<PortPeer>> adjacency_;
    double ap_range_ = 0.0;

    // Parent maps of BFS trees rooted at a destination, built lazily.
    mutable std::map<NodeId, std::map<NodeId, NodeId>> tree_cache_;

    const std::map<NodeId, NodeId>& bfs_tree(const NodeId& root) const;
};

/// Incremental construction; ports are assigned in link-declaration order,
/// starting at 1 per node.
class TopologyBuilder {
public:
    TopologyBuilder& add_node(const NodeId& id, Vec2 pos, NodeRole role);
    TopologyBuilder& add_link(const NodeId& a, const NodeId& b, double latency_ms);
    TopologyBuilder& set_ap_range(double range);

    Topology build();

private:
    Topology topo_;
    std::map<NodeId, int> next_port_;
};

}  // namespace sdiv
