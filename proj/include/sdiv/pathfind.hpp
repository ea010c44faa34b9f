#pragma once

#include <vector>

#include "sdiv/topology.hpp"

namespace sdiv {

struct PathQuery {
    NodeId start;
    NodeId destination;
    Vec2 heading;
};

struct PredictedPath {
    std::vector<NodeId> nodes;  // start .. destination inclusive
};

/// Greedy geometric prediction of the road path a vehicle will drive.
///
/// The frontier is seeded with the children of the start node whose direction
/// passes the <90 degree heading filter; each round consumes the whole
/// frontier, keeps the node minimizing D(prev, n) + D(n, dest), and refills
/// the frontier with that node's unvisited children. As soon as the
/// destination shows up in the frontier it is appended and the search stops,
/// even when it is not the minimum-score candidate. Ties break on the
/// lexicographically smaller node id.
///
/// Throws PathError(NoForwardChild) when no child of the start passes the
/// heading filter and PathError(PathNotFound) when the frontier is exhausted.
/// The search cannot backtrack, so dead ends surface as PathNotFound and the
/// caller falls back to a plain shortest path.
PredictedPath path_find(const PathQuery& query, const Topology& topo);

}  // namespace sdiv
