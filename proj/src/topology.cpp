#include "sdiv/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace sdiv {

const char* role_name(NodeRole role) {
    switch (role) {
        case NodeRole::Switch: return "switch";
        case NodeRole::Ap: return "ap";
        case NodeRole::Camera: return "camera";
        case NodeRole::Server: return "server";
    }
    return "switch";
}

std::optional<NodeRole> role_from_name(const std::string& name) {
    if (name == "switch") return NodeRole::Switch;
    if (name == "ap") return NodeRole::Ap;
    if (name == "camera") return NodeRole::Camera;
    if (name == "server") return NodeRole::Server;
    return std::nullopt;
}

const Node& Topology::node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw LookupError("unknown node id '" + id + "'");
    return it->second;
}

double Topology::euclidean_distance(const NodeId& a, const NodeId& b) const {
    return distance(node(a).pos, node(b).pos);
}

bool Topology::direction_compatible(const Vec2& v, const NodeId& from, const NodeId& to) const {
    if (is_zero(v)) throw InvalidDirectionError("zero heading vector");
    const Vec2 delta = node(to).pos - node(from).pos;
    return dot(v, delta) > 0.0;
}

const std::vector<PortPeer>& Topology::neighbors(const NodeId& id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) throw LookupError("unknown node id '" + id + "'");
    return it->second;
}

std::optional<int> Topology::port_to(const NodeId& from, const NodeId& to) const {
    for (const auto& pp : neighbors(from)) {
        if (pp.peer == to) return pp.port;
    }
    return std::nullopt;
}

const PortPeer* Topology::peer_at(const NodeId& n, int port) const {
    for (const auto& pp : neighbors(n)) {
        if (pp.port == port) return &pp;
    }
    return nullptr;
}

int Topology::hop_distance(const NodeId& a, const NodeId& b) const {
    node(a);
    node(b);
    if (a == b) return 0;
    std::map<NodeId, int> dist;
    dist[a] = 0;
    std::deque<NodeId> queue{a};
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (const auto& pp : neighbors(cur)) {
            if (dist.count(pp.peer)) continue;
            dist[pp.peer] = dist[cur] + 1;
            if (pp.peer == b) return dist[pp.peer];
            queue.push_back(pp.peer);
        }
    }
    throw Error("nodes '" + a + "' and '" + b + "' are unreachable");
}

const std::map<NodeId, NodeId>& Topology::bfs_tree(const NodeId& root) const {
    auto it = tree_cache_.find(root);
    if (it != tree_cache_.end()) return it->second;

    std::map<NodeId, NodeId> parent;  // node -> next hop toward root
    parent[root] = root;
    std::deque<NodeId> queue{root};
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (const auto& pp : neighbors(cur)) {
            if (parent.count(pp.peer)) continue;
            parent[pp.peer] = cur;
            queue.push_back(pp.peer);
        }
    }
    return tree_cache_.emplace(root, std::move(parent)).first->second;
}

std::vector<NodeId> Topology::tree_path(const NodeId& from, const NodeId& to) const {
    node(from);
    node(to);
    const auto& parent = bfs_tree(to);
    auto it = parent.find(from);
    if (it == parent.end()) throw Error("nodes '" + from + "' and '" + to + "' are unreachable");
    std::vector<NodeId> path{from};
    NodeId cur = from;
    while (cur != to) {
        cur = parent.at(cur);
        path.push_back(cur);
    }
    return path;
}

TopologyBuilder& TopologyBuilder::add_node(const NodeId& id, Vec2 pos, NodeRole role) {
    if (id.empty()) throw ValidationError("empty node id");
    if (!std::isfinite(pos.x) || !std::isfinite(pos.y))
        throw ValidationError("non-finite position for node '" + id + "'");
    if (topo_.nodes_.count(id)) throw ValidationError("duplicate node id '" + id + "'");
    topo_.nodes_[id] = Node{id, pos, role};
    topo_.adjacency_[id];
    next_port_[id] = 1;
    return *this;
}

TopologyBuilder& TopologyBuilder::add_link(const NodeId& a, const NodeId& b, double latency_ms) {
    if (!topo_.nodes_.count(a)) throw ValidationError("link references unknown node '" + a + "'");
    if (!topo_.nodes_.count(b)) throw ValidationError("link references unknown node '" + b + "'");
    if (a == b) throw ValidationError("self link on node '" + a + "'");
    if (latency_ms < 0) throw ValidationError("negative latency on link " + a + "-" + b);
    for (const auto& l : topo_.links_) {
        if ((l.a == a && l.b == b) || (l.a == b && l.b == a))
            throw ValidationError("parallel link " + a + "-" + b);
    }
    Link link;
    link.a = a;
    link.b = b;
    link.latency_us = static_cast<SimTime>(std::llround(latency_ms * 1000.0));
    link.port_a = next_port_[a]++;
    link.port_b = next_port_[b]++;
    topo_.links_.push_back(link);
    topo_.adjacency_[a].push_back({link.port_a, b, link.latency_us});
    topo_.adjacency_[b].push_back({link.port_b, a, link.latency_us});
    return *this;
}

TopologyBuilder& TopologyBuilder::set_ap_range(double range) {
    if (range < 0) throw ValidationError("negative ap_range");
    topo_.ap_range_ = range;
    return *this;
}

Topology TopologyBuilder::build() {
    for (auto& [id, adj] : topo_.adjacency_) {
        std::sort(adj.begin(), adj.end(),
                  [](const PortPeer& x, const PortPeer& y) { return x.port < y.port; });
    }
    return std::move(topo_);
}

}  // namespace sdiv
