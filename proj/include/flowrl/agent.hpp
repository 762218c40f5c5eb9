#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "flowrl/env.hpp"
#include "flowrl/qmodel.hpp"
#include "flowrl/replay.hpp"
#include "flowrl/rng.hpp"
#include "flowrl/types.hpp"

namespace flowrl {

// Multiplicative epsilon decay with a floor; one decay event per flow.
class EpsilonSchedule {
 public:
  EpsilonSchedule(Scalar initial = 1.0, Scalar decayRate = 0.99995, Scalar floor = 0.01);

  Scalar value() const { return value_; }
  Scalar floorValue() const { return floor_; }
  Scalar decayRate() const { return decay_; }
  bool atFloor() const { return value_ <= floor_; }

  void decay() {
    value_ *= decay_;
    if (value_ < floor_) value_ = floor_;
  }
  void reset() { value_ = 1.0; }

 private:
  Scalar value_;
  Scalar decay_;
  Scalar floor_;
};

// Tracks the mean of the last `window` exploitation-phase rewards and flags
// when a reward leaves the open band (mean - band, mean + band).
class ExplorationMonitor {
 public:
  explicit ExplorationMonitor(int window = 100, Scalar band = 1.0);

  // Full window: returns true and clears the window when the reward falls
  // outside the band (the triggering reward is discarded); otherwise pushes
  // the reward, evicting the oldest. Partial window: always pushes.
  bool observe(Scalar reward);

  bool full() const { return count_ == window_; }
  int count() const { return count_; }
  Scalar threshold() const;  // mean of the window; requires full()
  Scalar band() const { return band_; }
  void clear();

 private:
  int window_;
  Scalar band_;
  std::vector<Scalar> values_;
  int count_ = 0;
  int next_ = 0;
};

// Epsilon-greedy over the first validCount q-values: exploit (masked argmax,
// ties to the lowest index) when epsilon < zeta for a fresh uniform zeta,
// otherwise a uniform valid action.
int selectAction(const Vector& q, int validCount, Scalar epsilon, Rng& rng);
int greedyAction(const Vector& q, int validCount);

// y = reward + (1 - congestion) * gamma * maxNextQ
Scalar tdTarget(Scalar reward, bool congestion, Scalar maxNextQ, Scalar gamma);

struct ErrorPriority {
  Scalar tdError = 0;
  Scalar priority = 0;
};
// delta = target - predicted; priority = |delta| + beta
ErrorPriority tdErrorAndPriority(Scalar qPredicted, Scalar target, Scalar beta = 0.01);

struct DqnHyper {
  Scalar learningRate = 0.00025;
  Scalar gamma = 0.99;
  int batchSize = 256;
  int updatesPerSession = 10;
  int targetSyncInterval = 100;  // flows
  int replayCapacity = 10000;
  Scalar priorityBeta = 0.01;
  Scalar epsilonInitial = 1.0;
  Scalar epsilonDecay = 0.99995;
  Scalar epsilonFloor = 0.01;
  Scalar gradClipNorm = 1.0;  // <= 0 disables clipping
  int monitorWindow = 100;
  Scalar monitorBand = 1.0;
};

// Deep Q-learning controller: epsilon-greedy selection, prioritized FIFO
// replay, congestion-gated TD targets against a periodically synced target
// network, and band-triggered re-exploration.
class DqnAgent {
 public:
  DqnAgent(QModel model, const DqnHyper& hyper, const CandidatePathTable& candidates,
           std::uint64_t policySeed, std::uint64_t replaySeed);

  int selectAction(const NetworkState& state, const FlowRequest& request);
  int greedyAction(const NetworkState& state, const FlowRequest& request);

  // Stores the transition with its store-time priority and, once the buffer
  // holds more than batchSize entries, runs the configured updates.
  void observe(NetworkState state, const FlowRequest& request, int action,
               StepOutcome outcome);

  // One mini-batch update; refreshes sampled priorities. Throws
  // DivergenceError on a non-finite loss.
  Scalar trainStep();

  // Per-flow bookkeeping: target sync every targetSyncInterval flows, monitor
  // check while epsilon sits at its floor (a triggered reset replaces that
  // flow's decay event), epsilon decay otherwise.
  void finishFlow(Scalar reward);

  void syncTarget();

  QModel& model() { return model_; }
  QModel& targetModel() { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  EpsilonSchedule& epsilon() { return epsilon_; }
  const EpsilonSchedule& epsilon() const { return epsilon_; }
  ExplorationMonitor& monitor() { return monitor_; }
  const DqnHyper& hyper() const { return hyper_; }
  long flowCount() const { return flowCount_; }
  int targetSyncCount() const { return targetSyncCount_; }
  int reexploreCount() const { return reexploreCount_; }
  Scalar lastLoss() const { return lastLoss_; }
  long trainStepCount() const { return trainStepCount_; }

 private:
  Scalar maxValidTargetQ(const Transition& t);

  QModel model_;
  QModel target_;
  DqnHyper hyper_;
  const CandidatePathTable& candidates_;
  ReplayBuffer buffer_;
  EpsilonSchedule epsilon_;
  ExplorationMonitor monitor_;
  Rng policyRng_;
  Rng replayRng_;
  long flowCount_ = 0;
  int targetSyncCount_ = 0;
  int reexploreCount_ = 0;
  long trainStepCount_ = 0;
  Scalar lastLoss_ = 0;
};

struct EpisodeRecord {
  int episode = 0;
  Scalar meanReward = 0;
  Scalar meanThroughputMbps = 0;
  Scalar meanDelayMs = 0;
  Scalar epsilon = 0;  // NaN for static policies
  Scalar congestionRate = 0;
};

struct FlowRecord {
  int episode = 0;
  FlowRequest request;
  int action = 0;
  Scalar rateAllocMbps = 0;
  Scalar delayMs = 0;
  Scalar reward = 0;
  bool congestion = false;
};

struct RunResult {
  std::vector<EpisodeRecord> episodes;
  std::vector<FlowRecord> flows;
};

// episode index -> profile that takes effect at the start of that episode
struct ShiftSchedule {
  std::map<int, TrafficProfile> atEpisode;
};

using ProgressFn = std::function<void(int episode, const EpisodeRecord&)>;

RunResult runTraining(Environment& env, TrafficGenerator& traffic, DqnAgent& agent,
                      int episodes, int flowsPerEpisode = 100,
                      const ShiftSchedule& shifts = {}, const ProgressFn& progress = nullptr);

using PolicyFn = std::function<int(const NetworkState&, const FlowRequest&)>;

// Static-policy rollout with the same stepping and metrics as runTraining but
// no learning and no epsilon; EpisodeRecord.epsilon is NaN.
RunResult runPolicy(Environment& env, TrafficGenerator& traffic, const PolicyFn& policy,
                    int episodes, int flowsPerEpisode = 100, const ShiftSchedule& shifts = {},
                    const ProgressFn& progress = nullptr);

}  // namespace flowrl
