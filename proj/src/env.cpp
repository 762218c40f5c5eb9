#include "flowrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowrl {

Scalar computeDelayMs(const Topology& topo, const Path& path, Scalar rateAllocMbps) {
  require(path.size() >= 2, "computeDelayMs: path needs at least one link");
  const Scalar rate = std::max(rateAllocMbps, kMinDelayRateMbps);
  Scalar propagationMs = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const int idx = topo.linkIndex(path[i], path[i + 1]);
    require(idx >= 0, "computeDelayMs: path uses a nonexistent link");
    propagationMs += topo.link(idx).distanceM / kPropagationSpeedMps * 1e3;
  }
  const int hops = static_cast<int>(path.size()) - 1;
  const Scalar transmissionMs = hops * (kPacketBits / (rate * 1e6)) * 1e3;
  return propagationMs + transmissionMs;
}

Scalar reward(Scalar rateAllocMbps, Scalar rateReqMbps, Scalar delayMs) {
  require(rateReqMbps > 0, "reward: requested rate must be positive");
  require(delayMs > 0, "reward: delay must be positive");
  return rateAllocMbps / rateReqMbps + 1.0 / delayMs;
}

TrafficGenerator::TrafficGenerator(TrafficProfile profile, int nodeCount, std::uint64_t seed)
    : profile_(std::move(profile)), nodeCount_(nodeCount), rng_(seed) {
  requireInput(nodeCount_ >= 2, "traffic: need at least two nodes");
  requireInput(profile_.rateMinMbps > 0 && profile_.rateMaxMbps >= profile_.rateMinMbps,
               "traffic: invalid rate range");
  requireInput(profile_.concurrentMin >= 1 && profile_.concurrentMax >= profile_.concurrentMin,
               "traffic: invalid concurrency range");
  for (const auto& [s, d] : profile_.pairs) {
    requireInput(s >= 0 && s < nodeCount_ && d >= 0 && d < nodeCount_ && s != d,
                 "traffic: invalid pair in profile");
  }
}

Arrival TrafficGenerator::next() {
  Arrival arrival;
  if (profile_.pairs.empty()) {
    const NodeId src = rng_.uniformInt(nodeCount_);
    NodeId dst = rng_.uniformInt(nodeCount_ - 1);
    if (dst >= src) ++dst;
    arrival.request.src = src;
    arrival.request.dst = dst;
  } else {
    const auto& pair = profile_.pairs[static_cast<std::size_t>(rng_.uniformInt(static_cast<int>(profile_.pairs.size())))];
    arrival.request.src = pair.first;
    arrival.request.dst = pair.second;
  }
  arrival.request.rateReqMbps = rng_.uniform(profile_.rateMinMbps, profile_.rateMaxMbps);
  arrival.lifetime = rng_.uniformInt(profile_.concurrentMin, profile_.concurrentMax);
  return arrival;
}

void TrafficGenerator::setProfile(TrafficProfile profile) {
  for (const auto& [s, d] : profile.pairs) {
    requireInput(s >= 0 && s < nodeCount_ && d >= 0 && d < nodeCount_ && s != d,
                 "traffic: invalid pair in profile");
  }
  profile_ = std::move(profile);
}

Environment::Environment(Topology topo, int candidateK)
    : topo_(std::move(topo)), candidates_(topo_, candidateK) {
  requireInput(topo_.nodeCount() >= 2, "environment: need at least two nodes");
  linkState_ = std::make_shared<const Matrix>(buildNormalizedAdjacency(topo_));
  importance_ = nodeImportance(candidates_);
  egressCapacity_ = Vector::Zero(topo_.nodeCount());
  for (const Link& l : topo_.links()) {
    egressCapacity_[l.a] += l.capacityMbps;
    egressCapacity_[l.b] += l.capacityMbps;
  }
}

Scalar Environment::linkLoadMbps(int linkIdx) const {
  Scalar load = 0;
  for (const ActiveFlow& f : active_) {
    for (std::size_t i = 0; i + 1 < f.path.size(); ++i) {
      if (topo_.linkIndex(f.path[i], f.path[i + 1]) == linkIdx) {
        load += f.rateAllocMbps;
        break;
      }
    }
  }
  return load;
}

StepOutcome Environment::admitFlow(const FlowRequest& request, int pathIndex, int lifetime) {
  const auto& paths = candidates_.paths(request.src, request.dst);
  require(pathIndex >= 0 && pathIndex < static_cast<int>(paths.size()),
          "admitFlow: path index out of range for this pair");
  require(request.rateReqMbps > 0, "admitFlow: requested rate must be positive");
  require(lifetime > 0, "admitFlow: lifetime must be positive");
  const Path& path = paths[static_cast<std::size_t>(pathIndex)];

  Scalar bottleneckResidual = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const int idx = topo_.linkIndex(path[i], path[i + 1]);
    const Scalar residual = topo_.link(idx).capacityMbps - linkLoadMbps(idx);
    bottleneckResidual = std::min(bottleneckResidual, residual);
  }

  StepOutcome outcome;
  outcome.congestion = bottleneckResidual < request.rateReqMbps;
  outcome.rateAllocMbps = std::min(request.rateReqMbps, std::max(bottleneckResidual, Scalar(0)));
  outcome.delayMs = computeDelayMs(topo_, path, outcome.rateAllocMbps);
  outcome.reward = reward(outcome.rateAllocMbps, request.rateReqMbps, outcome.delayMs);

  active_.push_back(ActiveFlow{request, path, outcome.rateAllocMbps, lifetime, nextFlowId_++});

  // One arrival elapses: age the pre-existing flows and retire the expired.
  for (auto it = active_.begin(); it + 1 != active_.end();) {
    if (it->remainingLife > 0 && --it->remainingLife == 0) {
      it = active_.erase(it);
    } else {
      ++it;
    }
  }
  if (maxConcurrent_ > 0) {
    while (static_cast<int>(active_.size()) > maxConcurrent_) {
      auto oldest = std::find_if(active_.begin(), active_.end(),
                                 [](const ActiveFlow& f) { return f.remainingLife >= 0; });
      if (oldest == active_.end()) break;  // only persistent flows left
      active_.erase(oldest);
    }
  }

  outcome.nextState = state();
  return outcome;
}

void Environment::installPersistentFlow(const FlowRequest& request, int pathIndex) {
  const auto& paths = candidates_.paths(request.src, request.dst);
  require(pathIndex >= 0 && pathIndex < static_cast<int>(paths.size()),
          "installPersistentFlow: path index out of range");
  const Path& path = paths[static_cast<std::size_t>(pathIndex)];
  Scalar bottleneckResidual = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const int idx = topo_.linkIndex(path[i], path[i + 1]);
    bottleneckResidual = std::min(bottleneckResidual, topo_.link(idx).capacityMbps - linkLoadMbps(idx));
  }
  const Scalar alloc = std::min(request.rateReqMbps, std::max(bottleneckResidual, Scalar(0)));
  active_.push_back(ActiveFlow{request, path, alloc, -1, nextFlowId_++});
}

NetworkState Environment::state(const FlowRequest& pending) const {
  require(pending.src >= 0 && pending.src < topo_.nodeCount() && pending.dst >= 0 &&
              pending.dst < topo_.nodeCount() && pending.src != pending.dst,
          "state: invalid pending request");
  return buildState(&pending);
}

NetworkState Environment::state() const { return buildState(nullptr); }

NetworkState Environment::buildState(const FlowRequest* pending) const {
  const int n = topo_.nodeCount();
  NetworkState s;
  s.linkState = linkState_;
  s.nodeState = Matrix::Zero(n, feat::count(n));

  for (int i = 0; i < n; ++i) {
    s.nodeState(i, feat::kDegree) = static_cast<Scalar>(topo_.degree(i)) / static_cast<Scalar>(n - 1);
    s.nodeState(i, feat::kImportance) = importance_[i];
  }

  // Aggregated egress/ingress per node from the active allocations, normalized
  // by the node's total incident capacity.
  for (const ActiveFlow& f : active_) {
    for (std::size_t h = 0; h + 1 < f.path.size(); ++h) {
      s.nodeState(f.path[h], feat::kTx) += f.rateAllocMbps / egressCapacity_[f.path[h]];
      s.nodeState(f.path[h + 1], feat::kRx) += f.rateAllocMbps / egressCapacity_[f.path[h + 1]];
    }
    s.nodeState(f.request.dst, feat::kSrcBase + f.request.src) = 1.0;
    s.nodeState(f.request.src, feat::kSrcBase + n + f.request.dst) = 1.0;
  }

  if (pending) {
    s.nodeState(pending->src, feat::kBw) = pending->rateReqMbps / kRateNormalizationMbps;
  }
  return s;
}

}  // namespace flowrl
