#pragma once

#include <vector>

#include "flowrl/topology.hpp"
#include "flowrl/types.hpp"

namespace flowrl {

// Symmetrically normalized adjacency with self-loops:
//   S = D^{-1/2} (W + I) D^{-1/2}
// where W is the 0/1 adjacency and D the degree matrix of W + I. Symmetric,
// diagonal entries in (0, 1], eigenvalues in [-1, 1].
Matrix buildNormalizedAdjacency(const Topology& topo);

// Lexicographically least minimum-hop path from src to dst; empty when dst is
// unreachable. src == dst is a contract violation.
Path shortestPath(const Topology& topo, NodeId src, NodeId dst);

// Up to k loop-free paths ordered by (hop count, lexicographic node sequence),
// found by Yen-style enumeration over the hop-count metric. Returns fewer than
// k when fewer simple paths exist; empty when dst is unreachable.
std::vector<Path> kShortestPaths(const Topology& topo, NodeId src, NodeId dst, int k);

// Pre-computed candidate paths for every ordered node pair.
class CandidatePathTable {
 public:
  CandidatePathTable(const Topology& topo, int k);

  int k() const { return k_; }
  int nodeCount() const { return nodeCount_; }
  const std::vector<Path>& paths(NodeId src, NodeId dst) const;
  int validPathCount(NodeId src, NodeId dst) const {
    return static_cast<int>(paths(src, dst).size());
  }

 private:
  int nodeCount_ = 0;
  int k_ = 0;
  std::vector<std::vector<Path>> table_;  // (src * N + dst)
};

// Per-node centrality: how many candidate paths (over all ordered pairs) pass
// through the node as an intermediate hop, divided by the maximum counter.
// All zeros when no path has an intermediate node.
Vector nodeImportance(const CandidatePathTable& table);
Vector nodeImportance(const Topology& topo, int k);

}  // namespace flowrl
