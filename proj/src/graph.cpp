#include "flowrl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace flowrl {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

// Hop distance from every node to dst over the allowed subgraph.
std::vector<int> hopDistanceToDst(const Topology& topo, NodeId dst,
                                  const std::vector<std::vector<bool>>* edgeBanned,
                                  const std::vector<bool>* nodeBanned) {
  const int n = topo.nodeCount();
  std::vector<int> dist(static_cast<std::size_t>(n), kUnreached);
  if (nodeBanned && (*nodeBanned)[static_cast<std::size_t>(dst)]) return dist;
  dist[static_cast<std::size_t>(dst)] = 0;
  std::queue<NodeId> queue;
  queue.push(dst);
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop();
    for (NodeId v : topo.neighbors(u)) {
      if (nodeBanned && (*nodeBanned)[static_cast<std::size_t>(v)]) continue;
      if (edgeBanned && (*edgeBanned)[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) continue;
      if (dist[static_cast<std::size_t>(v)] != kUnreached) continue;
      dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
      queue.push(v);
    }
  }
  return dist;
}

// Lexicographically least minimum-hop path over the allowed subgraph: walk
// from src, always taking the smallest neighbor that still lies on a shortest
// continuation. Empty when dst is unreachable.
Path constrainedShortestPath(const Topology& topo, NodeId src, NodeId dst,
                             const std::vector<std::vector<bool>>* edgeBanned,
                             const std::vector<bool>* nodeBanned) {
  if (nodeBanned && (*nodeBanned)[static_cast<std::size_t>(src)]) return {};
  const std::vector<int> dist = hopDistanceToDst(topo, dst, edgeBanned, nodeBanned);
  if (dist[static_cast<std::size_t>(src)] == kUnreached) return {};
  Path path{src};
  NodeId cur = src;
  while (cur != dst) {
    const int want = dist[static_cast<std::size_t>(cur)] - 1;
    NodeId next = -1;
    for (NodeId v : topo.neighbors(cur)) {  // sorted ascending
      if (nodeBanned && (*nodeBanned)[static_cast<std::size_t>(v)]) continue;
      if (edgeBanned && (*edgeBanned)[static_cast<std::size_t>(cur)][static_cast<std::size_t>(v)]) continue;
      if (dist[static_cast<std::size_t>(v)] == want) {
        next = v;
        break;
      }
    }
    if (next < 0) return {};  // cannot happen on a consistent BFS tree
    path.push_back(next);
    cur = next;
  }
  return path;
}

// (hop count, lexicographic node sequence) order
struct PathLess {
  bool operator()(const Path& a, const Path& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

}  // namespace

Matrix buildNormalizedAdjacency(const Topology& topo) {
  const int n = topo.nodeCount();
  Vector dinv(n);
  for (int i = 0; i < n; ++i) {
    dinv[i] = 1.0 / std::sqrt(static_cast<Scalar>(topo.degree(i) + 1));
  }
  Matrix s = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = dinv[i] * dinv[i];
    for (NodeId j : topo.neighbors(i)) s(i, j) = dinv[i] * dinv[j];
  }
  return s;
}

Path shortestPath(const Topology& topo, NodeId src, NodeId dst) {
  const int n = topo.nodeCount();
  require(src >= 0 && src < n && dst >= 0 && dst < n, "shortestPath: node out of range");
  require(src != dst, "shortestPath: src equals dst");
  return constrainedShortestPath(topo, src, dst, nullptr, nullptr);
}

std::vector<Path> kShortestPaths(const Topology& topo, NodeId src, NodeId dst, int k) {
  const int n = topo.nodeCount();
  require(src >= 0 && src < n && dst >= 0 && dst < n, "kShortestPaths: node out of range");
  require(src != dst, "kShortestPaths: src equals dst");
  require(k >= 1, "kShortestPaths: k must be positive");

  std::vector<Path> accepted;
  Path first = shortestPath(topo, src, dst);
  if (first.empty()) return accepted;
  accepted.push_back(std::move(first));

  std::set<Path, PathLess> candidates;
  std::vector<std::vector<bool>> edgeBanned(static_cast<std::size_t>(n),
                                            std::vector<bool>(static_cast<std::size_t>(n), false));

  while (static_cast<int>(accepted.size()) < k) {
    const Path& prev = accepted.back();
    for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
      const NodeId spurNode = prev[i];
      // Ban every edge that would recreate an accepted path sharing this root.
      for (auto& row : edgeBanned) std::fill(row.begin(), row.end(), false);
      for (const Path& p : accepted) {
        if (p.size() > i + 1 && std::equal(prev.begin(), prev.begin() + static_cast<long>(i) + 1, p.begin())) {
          edgeBanned[static_cast<std::size_t>(p[i])][static_cast<std::size_t>(p[i + 1])] = true;
          edgeBanned[static_cast<std::size_t>(p[i + 1])][static_cast<std::size_t>(p[i])] = true;
        }
      }
      std::vector<bool> nodeBanned(static_cast<std::size_t>(n), false);
      for (std::size_t j = 0; j < i; ++j) nodeBanned[static_cast<std::size_t>(prev[j])] = true;

      const Path spur = constrainedShortestPath(topo, spurNode, dst, &edgeBanned, &nodeBanned);
      if (spur.empty()) continue;
      Path total(prev.begin(), prev.begin() + static_cast<long>(i));
      total.insert(total.end(), spur.begin(), spur.end());
      if (std::find(accepted.begin(), accepted.end(), total) == accepted.end()) {
        candidates.insert(std::move(total));
      }
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return accepted;
}

CandidatePathTable::CandidatePathTable(const Topology& topo, int k)
    : nodeCount_(topo.nodeCount()), k_(k) {
  requireInput(k >= 1, "candidate paths: k must be positive");
  table_.resize(static_cast<std::size_t>(nodeCount_) * static_cast<std::size_t>(nodeCount_));
  for (NodeId s = 0; s < nodeCount_; ++s) {
    for (NodeId d = 0; d < nodeCount_; ++d) {
      if (s == d) continue;
      table_[static_cast<std::size_t>(s) * static_cast<std::size_t>(nodeCount_) + static_cast<std::size_t>(d)] =
          kShortestPaths(topo, s, d, k);
    }
  }
}

const std::vector<Path>& CandidatePathTable::paths(NodeId src, NodeId dst) const {
  require(src >= 0 && src < nodeCount_ && dst >= 0 && dst < nodeCount_ && src != dst,
          "candidate paths: invalid pair");
  return table_[static_cast<std::size_t>(src) * static_cast<std::size_t>(nodeCount_) + static_cast<std::size_t>(dst)];
}

Vector nodeImportance(const CandidatePathTable& table) {
  const int n = table.nodeCount();
  std::vector<long> counter(static_cast<std::size_t>(n), 0);
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId d = 0; d < n; ++d) {
      if (s == d) continue;
      for (const Path& path : table.paths(s, d)) {
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
          ++counter[static_cast<std::size_t>(path[i])];
        }
      }
    }
  }
  const long maxCount = *std::max_element(counter.begin(), counter.end());
  Vector importance = Vector::Zero(n);
  if (maxCount > 0) {
    for (int i = 0; i < n; ++i) {
      importance[i] = static_cast<Scalar>(counter[static_cast<std::size_t>(i)]) / static_cast<Scalar>(maxCount);
    }
  }
  return importance;
}

Vector nodeImportance(const Topology& topo, int k) {
  return nodeImportance(CandidatePathTable(topo, k));
}

}  // namespace flowrl
