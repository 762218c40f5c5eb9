#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "flowrl/graph.hpp"
#include "flowrl/rng.hpp"
#include "flowrl/topology.hpp"
#include "flowrl/types.hpp"

namespace flowrl {

struct FlowRequest {
  NodeId src = 0;
  NodeId dst = 0;
  Scalar rateReqMbps = 0;
};

// A flow request plus the number of future arrivals it stays in the network.
struct Arrival {
  FlowRequest request;
  int lifetime = 0;
};

struct ActiveFlow {
  FlowRequest request;
  Path path;
  Scalar rateAllocMbps = 0;
  int remainingLife = 0;  // < 0: never retires
  std::uint64_t id = 0;
};

// Node feature columns: [degree, importance, tx, rx, bw | src bits | dst bits].
namespace feat {
constexpr int kDegree = 0;
constexpr int kImportance = 1;
constexpr int kTx = 2;
constexpr int kRx = 3;
constexpr int kBw = 4;
constexpr int kSrcBase = 5;  // N columns, then N more for dst
inline int count(int nodes) { return 5 + 2 * nodes; }
}  // namespace feat

// Normalized link-state matrix plus the per-node feature matrix. The link
// state is shared (immutable per environment); node state is a fresh snapshot.
struct NetworkState {
  std::shared_ptr<const Matrix> linkState;
  Matrix nodeState;  // N x (5 + 2N), every entry in [0, 1]

  int nodeCount() const { return static_cast<int>(nodeState.rows()); }
};

struct StepOutcome {
  Scalar rateAllocMbps = 0;
  Scalar delayMs = 0;
  Scalar reward = 0;
  bool congestion = false;
  NetworkState nextState;
};

constexpr Scalar kPropagationSpeedMps = 2e8;   // fiber
constexpr Scalar kPacketBits = 12000;          // nominal 1500-byte packet
constexpr Scalar kRateNormalizationMbps = 100;
constexpr Scalar kMinDelayRateMbps = 1;        // keeps delay finite at zero allocation

// Sum of per-hop propagation and transmission delay, in milliseconds. The
// rate is floored at kMinDelayRateMbps so a zero allocation still yields a
// finite (penalty) delay.
Scalar computeDelayMs(const Topology& topo, const Path& path, Scalar rateAllocMbps);

// reward = rateAlloc / rateReq + 1 / delayMs
Scalar reward(Scalar rateAllocMbps, Scalar rateReqMbps, Scalar delayMs);

struct TrafficProfile {
  Scalar rateMinMbps = 40;
  Scalar rateMaxMbps = 60;
  int concurrentMin = 10;
  int concurrentMax = 20;
  // Empty: uniform over all ordered pairs. Otherwise requests are drawn
  // uniformly from this list.
  std::vector<std::pair<NodeId, NodeId>> pairs;
};

// Seeded stream of flow arrivals. Per arrival the draw order is fixed:
// endpoint pair, rate, lifetime. Lifetimes are uniform in
// [concurrentMin, concurrentMax], which keeps the number of concurrent flows
// inside that band once warmed up.
class TrafficGenerator {
 public:
  TrafficGenerator(TrafficProfile profile, int nodeCount, std::uint64_t seed);

  Arrival next();
  void setProfile(TrafficProfile profile);
  const TrafficProfile& profile() const { return profile_; }

 private:
  TrafficProfile profile_;
  int nodeCount_;
  Rng rng_;
};

// Flow-level network environment. Admits one flow per arrival on a chosen
// candidate path, allocating min(request, bottleneck residual); allocations
// are frozen at admission and only released when the flow retires. Link loads
// and node features are recomputed from the active-flow list on demand, so an
// emptied network reproduces the idle state bit-exactly.
class Environment {
 public:
  Environment(Topology topo, int candidateK);

  const Topology& topology() const { return topo_; }
  const CandidatePathTable& candidates() const { return candidates_; }
  const Matrix& linkState() const { return *linkState_; }
  int validPathCount(NodeId src, NodeId dst) const {
    return candidates_.validPathCount(src, dst);
  }

  // Admission sequence: allocate against current loads, install, then age the
  // pre-existing flows by one arrival and retire the expired ones (plus the
  // oldest ones past the concurrency cap). The outcome's nextState carries no
  // pending-request context.
  StepOutcome admitFlow(const FlowRequest& request, int pathIndex, int lifetime);
  StepOutcome admitFlow(const Arrival& arrival, int pathIndex) {
    return admitFlow(arrival.request, pathIndex, arrival.lifetime);
  }

  // Installs a flow that never retires; used to pin background load.
  void installPersistentFlow(const FlowRequest& request, int pathIndex);

  NetworkState state(const FlowRequest& pending) const;
  NetworkState state() const;  // no pending request

  // <= 0 disables the cap.
  void setMaxConcurrent(int maxConcurrent) { maxConcurrent_ = maxConcurrent; }

  const std::vector<ActiveFlow>& activeFlows() const { return active_; }
  Scalar linkLoadMbps(int linkIdx) const;
  void reset() { active_.clear(); }

 private:
  NetworkState buildState(const FlowRequest* pending) const;

  Topology topo_;
  CandidatePathTable candidates_;
  std::shared_ptr<const Matrix> linkState_;
  Vector importance_;
  Vector egressCapacity_;  // per node: sum of incident link capacities
  std::vector<ActiveFlow> active_;
  int maxConcurrent_ = 0;
  std::uint64_t nextFlowId_ = 0;
};

}  // namespace flowrl
