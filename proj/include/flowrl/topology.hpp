#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowrl/types.hpp"

namespace flowrl {

struct Link {
  NodeId a = 0;
  NodeId b = 0;
  Scalar capacityMbps = 0;
  Scalar distanceM = 0;
};

// Undirected graph with per-link capacity and physical distance. Immutable
// after construction; construction validates connectivity, positive capacities
// and distances, and rejects self-loops and duplicate edges.
class Topology {
 public:
  Topology(int nodeCount, std::vector<Link> links);

  int nodeCount() const { return nodeCount_; }
  int linkCount() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int idx) const { return links_[static_cast<std::size_t>(idx)]; }

  bool hasLink(NodeId i, NodeId j) const { return linkIndex(i, j) >= 0; }
  // Index into links() for the edge {i, j}, or -1 when absent.
  int linkIndex(NodeId i, NodeId j) const;

  int degree(NodeId i) const { return static_cast<int>(neighbors_[static_cast<std::size_t>(i)].size()); }
  // Sorted ascending by node id.
  const std::vector<NodeId>& neighbors(NodeId i) const { return neighbors_[static_cast<std::size_t>(i)]; }

 private:
  int nodeCount_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<std::vector<int>> linkIndex_;  // dense N x N lookup, -1 = no edge
};

// Connected random graph: a random spanning tree over a shuffled node order
// plus uniformly chosen extra edges. All capacities are 100 Mbps; distances
// are uniform in [500, 700] m. Requires n-1 <= m <= n(n-1)/2.
Topology generateRandomTopology(int nodes, int links, std::uint64_t seed);

// The 14-node / 21-link NSFNET T1 backbone. Capacities 100 Mbps; distances
// drawn uniform in [500, 700] m from `distanceSeed` in edge-list order.
constexpr std::uint64_t kNsfnetDistanceSeed = 1991;
Topology nsfnet(std::uint64_t distanceSeed = kNsfnetDistanceSeed);

// Plain-text edge list: one `node_a node_b capacity_mbps distance_m` per line,
// `#` starts a comment. Node count is inferred from the highest endpoint id.
Topology loadTopology(std::istream& in);
Topology loadTopologyFile(const std::string& path);
void saveTopology(const Topology& topo, std::ostream& out);
void saveTopologyFile(const Topology& topo, const std::string& path);

}  // namespace flowrl
