#include <doctest.h>

#include <cmath>
#include <set>

#include "flowrl/env.hpp"
#include "flowrl/rng.hpp"
#include "oracles.hpp"

using namespace flowrl;

namespace {

Topology lineTopo(int nodes, Scalar dist = 600) {
  std::vector<Link> links;
  for (int i = 0; i + 1 < nodes; ++i) links.push_back(Link{i, i + 1, 100, dist});
  return Topology(nodes, std::move(links));
}

bool statesEqual(const NetworkState& a, const NetworkState& b) {
  return (a.nodeState.array() == b.nodeState.array()).all() &&
         (a.linkState->array() == b.linkState->array()).all();
}

}  // namespace

TEST_CASE("compute delay: propagation plus transmission, in milliseconds") {
  const Topology t = lineTopo(5, 600);
  const Scalar twoHop = computeDelayMs(t, {0, 1, 2}, 50);
  CHECK(twoHop == doctest::Approx(0.486).epsilon(1e-12));
}

TEST_CASE("compute delay: single 500 m link at 100 Mbps") {
  const Topology t = lineTopo(2, 500);
  CHECK(computeDelayMs(t, {0, 1}, 100) == doctest::Approx(0.1225).epsilon(1e-12));
}

TEST_CASE("compute delay: doubling the path doubles both terms exactly") {
  const Topology t = lineTopo(5, 600);
  const Scalar twoHop = computeDelayMs(t, {0, 1, 2}, 50);
  const Scalar fourHop = computeDelayMs(t, {0, 1, 2, 3, 4}, 50);
  CHECK(fourHop == 2 * twoHop);
}

TEST_CASE("compute delay: zero allocation is floored, stays finite") {
  const Topology t = lineTopo(2, 500);
  const Scalar floored = computeDelayMs(t, {0, 1}, 0);
  CHECK(std::isfinite(floored));
  CHECK(floored == computeDelayMs(t, {0, 1}, kMinDelayRateMbps));
  CHECK_THROWS_AS(computeDelayMs(t, {0}, 10), ContractError);
}

TEST_CASE("reward formula") {
  CHECK(reward(60, 60, 1.0) == 2.0);
  CHECK(reward(30, 60, 0.5) == 2.5);
  CHECK(reward(0, 40, 2.0) == 1.0 / 2.0);
  CHECK_THROWS_AS(reward(10, 0, 1.0), ContractError);
  CHECK_THROWS_AS(reward(10, 10, 0.0), ContractError);
}

TEST_CASE("admit flow: uncontended path allocates the full request") {
  Environment env(lineTopo(3), 3);
  const StepOutcome out = env.admitFlow(FlowRequest{0, 2, 50}, 0, 5);
  CHECK(out.rateAllocMbps == 50);
  CHECK(!out.congestion);
  CHECK(out.reward == reward(50, 50, out.delayMs));
}

TEST_CASE("admit flow: bottleneck residual clamps the allocation and flags congestion") {
  Environment env(lineTopo(4), 3);
  env.installPersistentFlow(FlowRequest{1, 2, 60}, 0);
  const StepOutcome out = env.admitFlow(FlowRequest{0, 2, 60}, 0, 5);
  CHECK(out.rateAllocMbps == 40);  // 100 - 60 on the shared link
  CHECK(out.congestion);
}

TEST_CASE("admit flow: residual exactly equal to the request is not congestion") {
  Environment env(lineTopo(4), 3);
  env.installPersistentFlow(FlowRequest{1, 2, 50}, 0);
  const StepOutcome out = env.admitFlow(FlowRequest{0, 2, 50}, 0, 5);
  CHECK(out.rateAllocMbps == 50);
  CHECK(!out.congestion);
}

TEST_CASE("admit flow: contract violations") {
  Environment env(lineTopo(3), 3);
  CHECK_THROWS_AS(env.admitFlow(FlowRequest{0, 2, 50}, 1, 5), ContractError);  // only 1 path
  CHECK_THROWS_AS(env.admitFlow(FlowRequest{0, 2, 50}, 0, 0), ContractError);  // lifetime
  CHECK_THROWS_AS(env.admitFlow(FlowRequest{0, 2, 0}, 0, 5), ContractError);   // rate
}

TEST_CASE("flows retire after their lifetime elapses") {
  Environment env(lineTopo(3), 3);
  env.admitFlow(FlowRequest{0, 2, 10}, 0, 1);
  CHECK(env.activeFlows().size() == 1);
  env.admitFlow(FlowRequest{2, 0, 10}, 0, 1);  // ages the first flow out
  CHECK(env.activeFlows().size() == 1);
  CHECK(env.activeFlows()[0].request.src == 2);
}

TEST_CASE("concurrency cap retires the oldest non-persistent flows") {
  Environment env(lineTopo(3), 3);
  env.setMaxConcurrent(2);
  env.installPersistentFlow(FlowRequest{0, 1, 5}, 0);
  env.admitFlow(FlowRequest{0, 2, 5}, 0, 100);
  env.admitFlow(FlowRequest{2, 0, 5}, 0, 100);
  CHECK(env.activeFlows().size() == 2);
  // the persistent flow survives; the oldest finite-lifetime flow went
  bool hasPersistent = false;
  for (const auto& f : env.activeFlows()) hasPersistent |= f.remainingLife < 0;
  CHECK(hasPersistent);
}

TEST_CASE("build state: idle network has zero traffic features") {
  Environment env(lineTopo(3), 3);
  const NetworkState s = env.state();
  const int n = 3;
  CHECK(s.nodeState.rows() == n);
  CHECK(s.nodeState.cols() == feat::count(n));
  // degree & importance columns populated, all else zero
  CHECK(s.nodeState(0, feat::kDegree) == doctest::Approx(0.5));
  CHECK(s.nodeState(1, feat::kDegree) == doctest::Approx(1.0));
  CHECK(s.nodeState(1, feat::kImportance) == 1.0);
  CHECK(s.nodeState.col(feat::kTx).cwiseAbs().sum() == 0.0);
  CHECK(s.nodeState.col(feat::kRx).cwiseAbs().sum() == 0.0);
  CHECK(s.nodeState.col(feat::kBw).cwiseAbs().sum() == 0.0);
  CHECK(s.nodeState.rightCols(2 * n).cwiseAbs().sum() == 0.0);
}

TEST_CASE("build state: one flow's aggregation and relation bits") {
  Environment env(lineTopo(3), 3);
  env.admitFlow(FlowRequest{0, 2, 50}, 0, 10);  // path [0,1,2]
  const NetworkState s = env.state();
  const int n = 3;
  CHECK(s.nodeState(0, feat::kTx) == doctest::Approx(0.5));   // 50 / (100 * deg 1)
  CHECK(s.nodeState(1, feat::kTx) == doctest::Approx(0.25));  // 50 / (100 * deg 2)
  CHECK(s.nodeState(1, feat::kRx) == doctest::Approx(0.25));
  CHECK(s.nodeState(2, feat::kRx) == doctest::Approx(0.5));
  CHECK(s.nodeState(0, feat::kRx) == 0.0);
  CHECK(s.nodeState(2, feat::kTx) == 0.0);
  CHECK(s.nodeState(2, feat::kSrcBase + 0) == 1.0);      // node 0 sends to node 2
  CHECK(s.nodeState(0, feat::kSrcBase + n + 2) == 1.0);  // node 0 lists dest 2
  CHECK(s.nodeState.col(feat::kBw).cwiseAbs().sum() == 0.0);

  const NetworkState sp = env.state(FlowRequest{1, 0, 40});
  CHECK(sp.nodeState(1, feat::kBw) == doctest::Approx(0.4));
  CHECK(sp.nodeState(0, feat::kBw) == 0.0);
  CHECK_THROWS_AS(env.state(FlowRequest{0, 0, 10}), ContractError);
}

TEST_CASE("build state: every entry stays in [0, 1] along a random rollout") {
  Environment env(generateRandomTopology(9, 16, 11), 3);
  TrafficGenerator gen(TrafficProfile{}, 9, 22);
  Rng actions(33);
  env.setMaxConcurrent(20);
  for (int step = 0; step < 400; ++step) {
    const Arrival a = gen.next();
    const NetworkState s = env.state(a.request);
    CHECK(s.nodeState.minCoeff() >= 0.0);
    CHECK(s.nodeState.maxCoeff() <= 1.0);
    env.admitFlow(a, actions.uniformInt(env.validPathCount(a.request.src, a.request.dst)));
  }
}

TEST_CASE("conservation and the congestion biconditional on a random rollout") {
  Environment env(generateRandomTopology(9, 16, 5), 3);
  TrafficGenerator gen(TrafficProfile{}, 9, 6);
  Rng actions(7);
  for (int step = 0; step < 600; ++step) {
    const Arrival a = gen.next();
    const StepOutcome out =
        env.admitFlow(a, actions.uniformInt(env.validPathCount(a.request.src, a.request.dst)));
    CHECK(out.congestion == (out.rateAllocMbps < a.request.rateReqMbps));
    CHECK(out.reward == doctest::Approx(out.rateAllocMbps / a.request.rateReqMbps + 1.0 / out.delayMs)
                            .epsilon(1e-12));
    for (int l = 0; l < env.topology().linkCount(); ++l) {
      CHECK(env.linkLoadMbps(l) <= env.topology().link(l).capacityMbps + 1e-9);
    }
  }
}

TEST_CASE("reset returns the state to idle bit-exactly") {
  Environment env(lineTopo(4), 3);
  const NetworkState idle = env.state();
  env.admitFlow(FlowRequest{0, 3, 47.5}, 0, 10);
  env.admitFlow(FlowRequest{3, 1, 21.25}, 0, 10);
  CHECK(!statesEqual(env.state(), idle));
  env.reset();
  CHECK(statesEqual(env.state(), idle));
}

TEST_CASE("expired flows leave no residue in the state") {
  // A: admit f1 with lifetime 1 (on disjoint links), then f2 which ages f1 out.
  Environment a(lineTopo(5), 3);
  a.admitFlow(FlowRequest{0, 1, 30}, 0, 1);
  const StepOutcome outA = a.admitFlow(FlowRequest{3, 4, 40}, 0, 9);
  // B: only f2.
  Environment b(lineTopo(5), 3);
  const StepOutcome outB = b.admitFlow(FlowRequest{3, 4, 40}, 0, 9);
  CHECK(outA.rateAllocMbps == outB.rateAllocMbps);
  CHECK(statesEqual(a.state(), b.state()));
}

TEST_CASE("environment evolution is deterministic") {
  auto rollout = [](std::uint64_t seed) {
    Environment env(generateRandomTopology(9, 16, seed), 3);
    TrafficGenerator gen(TrafficProfile{}, 9, seed + 1);
    Rng actions(seed + 2);
    std::vector<Scalar> rewards;
    for (int step = 0; step < 300; ++step) {
      const Arrival a = gen.next();
      rewards.push_back(
          env.admitFlow(a, actions.uniformInt(env.validPathCount(a.request.src, a.request.dst)))
              .reward);
    }
    return rewards;
  };
  CHECK(rollout(42) == rollout(42));
  CHECK(rollout(42) != rollout(43));
}

TEST_CASE("traffic generator: default profile ranges") {
  TrafficProfile profile;
  TrafficGenerator gen(profile, 9, 77);
  for (int i = 0; i < 2000; ++i) {
    const Arrival a = gen.next();
    CHECK(a.request.src != a.request.dst);
    CHECK(a.request.src >= 0);
    CHECK(a.request.src < 9);
    CHECK(a.request.dst >= 0);
    CHECK(a.request.dst < 9);
    CHECK(a.request.rateReqMbps >= 40.0);
    CHECK(a.request.rateReqMbps <= 60.0);
    CHECK(a.lifetime >= 10);
    CHECK(a.lifetime <= 20);
  }
}

TEST_CASE("traffic generator: profile shift moves the rate range") {
  TrafficProfile profile;
  TrafficGenerator gen(profile, 9, 78);
  for (int i = 0; i < 100; ++i) gen.next();
  TrafficProfile reduced;
  reduced.rateMinMbps = 20;
  reduced.rateMaxMbps = 40;
  gen.setProfile(reduced);
  for (int i = 0; i < 1000; ++i) {
    const Arrival a = gen.next();
    CHECK(a.request.rateReqMbps >= 20.0);
    CHECK(a.request.rateReqMbps <= 40.0);
  }
}

TEST_CASE("traffic generator: fixed pair list restricts endpoints") {
  TrafficProfile profile;
  profile.pairs = {{0, 1}, {2, 0}};
  TrafficGenerator gen(profile, 4, 9);
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < 200; ++i) {
    const Arrival a = gen.next();
    seen.insert({a.request.src, a.request.dst});
  }
  CHECK(seen == std::set<std::pair<int, int>>{{0, 1}, {2, 0}});
  CHECK_THROWS_AS(TrafficGenerator(TrafficProfile{40, 60, 10, 20, {{0, 0}}}, 4, 1), InputError);
}

TEST_CASE("traffic generator: identical seeds give identical streams") {
  TrafficGenerator a(TrafficProfile{}, 9, 123);
  TrafficGenerator b(TrafficProfile{}, 9, 123);
  for (int i = 0; i < 500; ++i) {
    const Arrival x = a.next();
    const Arrival y = b.next();
    CHECK(x.request.src == y.request.src);
    CHECK(x.request.dst == y.request.dst);
    CHECK(x.request.rateReqMbps == y.request.rateReqMbps);
    CHECK(x.lifetime == y.lifetime);
  }
}

TEST_CASE("concurrency stays in the profile band after warm-up") {
  Environment env(generateRandomTopology(9, 16, 3), 3);
  TrafficGenerator gen(TrafficProfile{}, 9, 4);
  Rng actions(5);
  for (int step = 0; step < 10020; ++step) {
    const Arrival a = gen.next();
    env.admitFlow(a, actions.uniformInt(env.validPathCount(a.request.src, a.request.dst)));
    if (step >= 20) {
      CHECK(static_cast<int>(env.activeFlows().size()) >= 10);
      CHECK(static_cast<int>(env.activeFlows().size()) <= 20);
    }
  }
}
