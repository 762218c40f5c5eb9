#include "flowrl/topology.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

#include "flowrl/rng.hpp"

namespace flowrl {

namespace {

bool isConnected(int n, const std::vector<std::vector<NodeId>>& neighbors) {
  if (n == 0) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<NodeId> queue;
  queue.push(0);
  seen[0] = true;
  int visited = 1;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop();
    for (NodeId v : neighbors[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++visited;
        queue.push(v);
      }
    }
  }
  return visited == n;
}

}  // namespace

Topology::Topology(int nodeCount, std::vector<Link> links)
    : nodeCount_(nodeCount), links_(std::move(links)) {
  requireInput(nodeCount_ >= 1, "topology: node count must be positive");
  neighbors_.assign(static_cast<std::size_t>(nodeCount_), {});
  linkIndex_.assign(static_cast<std::size_t>(nodeCount_),
                    std::vector<int>(static_cast<std::size_t>(nodeCount_), -1));
  for (std::size_t idx = 0; idx < links_.size(); ++idx) {
    Link& l = links_[idx];
    requireInput(l.a >= 0 && l.a < nodeCount_ && l.b >= 0 && l.b < nodeCount_,
                 "topology: link endpoint out of range");
    requireInput(l.a != l.b, "topology: self-loop edges are not allowed");
    requireInput(l.capacityMbps > 0, "topology: link capacity must be positive");
    requireInput(l.distanceM > 0, "topology: link distance must be positive");
    requireInput(linkIndex_[static_cast<std::size_t>(l.a)][static_cast<std::size_t>(l.b)] < 0,
                 "topology: duplicate link");
    linkIndex_[static_cast<std::size_t>(l.a)][static_cast<std::size_t>(l.b)] = static_cast<int>(idx);
    linkIndex_[static_cast<std::size_t>(l.b)][static_cast<std::size_t>(l.a)] = static_cast<int>(idx);
    neighbors_[static_cast<std::size_t>(l.a)].push_back(l.b);
    neighbors_[static_cast<std::size_t>(l.b)].push_back(l.a);
  }
  for (auto& adj : neighbors_) std::sort(adj.begin(), adj.end());
  requireInput(isConnected(nodeCount_, neighbors_), "topology: graph must be connected");
}

int Topology::linkIndex(NodeId i, NodeId j) const {
  require(i >= 0 && i < nodeCount_ && j >= 0 && j < nodeCount_, "linkIndex: node out of range");
  return linkIndex_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

Topology generateRandomTopology(int nodes, int links, std::uint64_t seed) {
  requireInput(nodes >= 1, "random topology: need at least one node");
  const long maxLinks = static_cast<long>(nodes) * (nodes - 1) / 2;
  requireInput(links >= nodes - 1, "random topology: too few links for a connected graph");
  requireInput(links <= maxLinks, "random topology: more links than node pairs");

  Rng rng(seed);

  // Random spanning tree: shuffle the node order, attach each node to a
  // random earlier one.
  std::vector<NodeId> order(static_cast<std::size_t>(nodes));
  std::iota(order.begin(), order.end(), 0);
  for (int i = nodes - 1; i > 0; --i) std::swap(order[i], order[rng.uniformInt(i + 1)]);

  std::vector<std::vector<bool>> present(static_cast<std::size_t>(nodes),
                                         std::vector<bool>(static_cast<std::size_t>(nodes), false));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 1; i < nodes; ++i) {
    const NodeId a = order[static_cast<std::size_t>(i)];
    const NodeId b = order[static_cast<std::size_t>(rng.uniformInt(i))];
    edges.emplace_back(a, b);
    present[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
    present[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
  }
  while (static_cast<int>(edges.size()) < links) {
    const NodeId a = rng.uniformInt(nodes);
    const NodeId b = rng.uniformInt(nodes);
    if (a == b || present[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) continue;
    edges.emplace_back(a, b);
    present[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
    present[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
  }

  std::vector<Link> out;
  out.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    out.push_back(Link{a, b, 100.0, rng.uniform(500.0, 700.0)});
  }
  return Topology(nodes, std::move(out));
}

Topology nsfnet(std::uint64_t distanceSeed) {
  // 14-node / 21-link NSFNET T1 backbone edge list.
  static constexpr std::pair<NodeId, NodeId> kEdges[] = {
      {0, 1},  {0, 2},   {0, 3},   {1, 2},   {1, 7},   {2, 5},   {3, 4},
      {3, 10}, {4, 5},   {4, 6},   {5, 9},   {5, 13},  {6, 7},   {7, 8},
      {8, 9},  {8, 11},  {8, 12},  {10, 11}, {10, 13}, {11, 12}, {12, 13}};
  Rng rng(distanceSeed);
  std::vector<Link> links;
  links.reserve(std::size(kEdges));
  for (const auto& [a, b] : kEdges) {
    links.push_back(Link{a, b, 100.0, rng.uniform(500.0, 700.0)});
  }
  return Topology(14, std::move(links));
}

Topology loadTopology(std::istream& in) {
  std::vector<Link> links;
  int maxNode = -1;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    Link l;
    if (!(fields >> l.a)) continue;  // blank or comment-only line
    if (!(fields >> l.b >> l.capacityMbps >> l.distanceM)) {
      throw InputError("topology file: malformed line " + std::to_string(lineNo));
    }
    std::string extra;
    if (fields >> extra) {
      throw InputError("topology file: trailing tokens on line " + std::to_string(lineNo));
    }
    maxNode = std::max({maxNode, l.a, l.b});
    links.push_back(l);
  }
  requireInput(!links.empty(), "topology file: no edges");
  return Topology(maxNode + 1, std::move(links));
}

Topology loadTopologyFile(const std::string& path) {
  std::ifstream in(path);
  requireInput(in.good(), "cannot open topology file: " + path);
  return loadTopology(in);
}

void saveTopology(const Topology& topo, std::ostream& out) {
  out << "# node_a node_b capacity_mbps distance_m\n";
  out << std::setprecision(17);
  for (const Link& l : topo.links()) {
    out << l.a << ' ' << l.b << ' ' << l.capacityMbps << ' ' << l.distanceM << '\n';
  }
}

void saveTopologyFile(const Topology& topo, const std::string& path) {
  std::ofstream out(path);
  requireInput(out.good(), "cannot open file for writing: " + path);
  saveTopology(topo, out);
}

}  // namespace flowrl
