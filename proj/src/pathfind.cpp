#include "sdiv/pathfind.hpp"

#include <limits>
#include <set>

namespace sdiv {

PredictedPath path_find(const PathQuery& query, const Topology& topo) {
    const NodeId& s = query.start;
    const NodeId& d = query.destination;
    topo.node(s);
    topo.node(d);
    if (s == d) return PredictedPath{{s}};
    if (is_zero(query.heading)) throw InvalidDirectionError("zero heading vector");

    std::set<NodeId> visited{s};
    std::vector<NodeId> result{s};

    // Heading filter applies at the start node only.
    std::set<NodeId> frontier;
    for (const auto& pp : topo.neighbors(s)) {
        if (topo.direction_compatible(query.heading, s, pp.peer)) frontier.insert(pp.peer);
    }
    if (frontier.empty())
        throw PathError(PathError::Kind::NoForwardChild,
                        "no child of '" + s + "' lies ahead of the heading");

    NodeId prev = s;
    while (true) {
        if (frontier.count(d)) {
            result.push_back(d);
            return PredictedPath{std::move(result)};
        }
        // Consume the whole frontier; keep the min of D(prev,n) + D(n,d).
        // std::set iterates in id order, so equal scores keep the smaller id.
        NodeId chosen;
        double best = std::numeric_limits<double>::infinity();
        for (const NodeId& n : frontier) {
            visited.insert(n);
            double score = topo.euclidean_distance(prev, n) + topo.euclidean_distance(n, d);
            if (score < best) {
                best = score;
                chosen = n;
            }
        }
        frontier.clear();
        result.push_back(chosen);
        for (const auto& pp : topo.neighbors(chosen)) {
            if (!visited.count(pp.peer)) frontier.insert(pp.peer);
        }
        if (frontier.empty())
            throw PathError(PathError::Kind::PathNotFound,
                            "frontier exhausted before reaching '" + d + "'");
        prev = chosen;
    }
}

}  // namespace sdiv
