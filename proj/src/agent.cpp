#include "flowrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowrl {

EpsilonSchedule::EpsilonSchedule(Scalar initial, Scalar decayRate, Scalar floor)
    : value_(initial), decay_(decayRate), floor_(floor) {
  require(initial >= floor && initial <= 1.0, "epsilon: initial outside [floor, 1]");
  require(decayRate > 0 && decayRate <= 1.0, "epsilon: decay rate outside (0, 1]");
  require(floor >= 0, "epsilon: floor must be nonnegative");
}

ExplorationMonitor::ExplorationMonitor(int window, Scalar band) : window_(window), band_(band) {
  require(window >= 1, "monitor: window must be positive");
  require(band > 0, "monitor: band must be positive");
  values_.assign(static_cast<std::size_t>(window), 0.0);
}

Scalar ExplorationMonitor::threshold() const {
  require(full(), "monitor: threshold undefined until the window is full");
  Scalar sum = 0;
  for (int i = 0; i < window_; ++i) sum += values_[static_cast<std::size_t>(i)];
  return sum / static_cast<Scalar>(window_);
}

bool ExplorationMonitor::observe(Scalar reward) {
  if (full()) {
    const Scalar tau = threshold();
    if (reward <= tau - band_ || reward >= tau + band_) {  // outside the open band
      clear();
      return true;
    }
  }
  values_[static_cast<std::size_t>(next_)] = reward;
  next_ = (next_ + 1) % window_;
  if (count_ < window_) ++count_;
  return false;
}

void ExplorationMonitor::clear() {
  count_ = 0;
  next_ = 0;
}

int selectAction(const Vector& q, int validCount, Scalar epsilon, Rng& rng) {
  require(validCount >= 1, "selectAction: no valid actions for this pair");
  require(validCount <= q.size(), "selectAction: valid count exceeds q width");
  const Scalar zeta = rng.uniform();
  if (epsilon < zeta) return greedyAction(q, validCount);
  return rng.uniformInt(validCount);
}

int greedyAction(const Vector& q, int validCount) {
  require(validCount >= 1 && validCount <= q.size(), "greedyAction: invalid action count");
  int best = 0;
  for (int a = 1; a < validCount; ++a) {
    if (q[a] > q[best]) best = a;  // ties keep the lowest index
  }
  return best;
}

Scalar tdTarget(Scalar reward, bool congestion, Scalar maxNextQ, Scalar gamma) {
  require(gamma >= 0 && gamma <= 1, "tdTarget: gamma outside [0, 1]");
  return reward + (congestion ? Scalar(0) : gamma * maxNextQ);
}

ErrorPriority tdErrorAndPriority(Scalar qPredicted, Scalar target, Scalar beta) {
  const Scalar delta = target - qPredicted;
  return {delta, std::abs(delta) + beta};
}

DqnAgent::DqnAgent(QModel model, const DqnHyper& hyper, const CandidatePathTable& candidates,
                   std::uint64_t policySeed, std::uint64_t replaySeed)
    : model_(std::move(model)),
      target_(model_),
      hyper_(hyper),
      candidates_(candidates),
      buffer_(hyper.replayCapacity),
      epsilon_(hyper.epsilonInitial, hyper.epsilonDecay, hyper.epsilonFloor),
      monitor_(hyper.monitorWindow, hyper.monitorBand),
      policyRng_(policySeed),
      replayRng_(replaySeed) {
  require(candidates_.nodeCount() == model_.nodeCount(), "agent: table/model node-count mismatch");
  require(candidates_.k() == model_.k(), "agent: table/model action-width mismatch");
  require(hyper_.batchSize >= 1, "agent: batch size must be positive");
  require(hyper_.updatesPerSession >= 1, "agent: updates per session must be positive");
  require(hyper_.targetSyncInterval >= 1, "agent: target sync interval must be positive");
}

int DqnAgent::selectAction(const NetworkState& state, const FlowRequest& request) {
  const int valid = candidates_.validPathCount(request.src, request.dst);
  const Vector q = model_.forward(state);
  return flowrl::selectAction(q, valid, epsilon_.value(), policyRng_);
}

int DqnAgent::greedyAction(const NetworkState& state, const FlowRequest& request) {
  const int valid = candidates_.validPathCount(request.src, request.dst);
  const Vector q = model_.forward(state);
  return flowrl::greedyAction(q, valid);
}

Scalar DqnAgent::maxValidTargetQ(const Transition& t) {
  const int valid = candidates_.validPathCount(t.request.src, t.request.dst);
  const Vector q = target_.forward(t.nextState);
  Scalar best = q[0];
  for (int a = 1; a < valid; ++a) best = std::max(best, q[a]);
  return best;
}

void DqnAgent::observe(NetworkState state, const FlowRequest& request, int action,
                       StepOutcome outcome) {
  Transition t;
  t.state = std::move(state);
  t.request = request;
  t.action = action;
  t.reward = outcome.reward;
  t.congestion = outcome.congestion;
  t.nextState = std::move(outcome.nextState);

  // Store-time priority from the TD error under the current models.
  const Scalar qPred = model_.forward(t.state)[action];
  const Scalar y = tdTarget(t.reward, t.congestion, maxValidTargetQ(t), hyper_.gamma);
  t.priority = tdErrorAndPriority(qPred, y, hyper_.priorityBeta).priority;
  buffer_.push(std::move(t));

  if (buffer_.size() > hyper_.batchSize) {
    for (int u = 0; u < hyper_.updatesPerSession; ++u) trainStep();
  }
}

Scalar DqnAgent::trainStep() {
  require(buffer_.size() > hyper_.batchSize, "trainStep: buffer not primed");
  const std::vector<int> slots = buffer_.sampleSlots(hyper_.batchSize, replayRng_);

  model_.zeroGrad();
  Scalar loss = 0;
  Vector dQ = Vector::Zero(model_.k());
  for (const int slot : slots) {
    const Transition& t = buffer_.bySlot(slot);
    const Vector q = model_.forward(t.state);
    const Scalar qPred = q[t.action];
    const Scalar y = tdTarget(t.reward, t.congestion, maxValidTargetQ(t), hyper_.gamma);
    const auto ep = tdErrorAndPriority(qPred, y, hyper_.priorityBeta);
    loss += ep.tdError * ep.tdError;

    dQ.setZero();
    dQ[t.action] = 2.0 * (qPred - y) / static_cast<Scalar>(hyper_.batchSize);
    model_.backward(dQ);

    buffer_.updatePriority(slot, ep.priority);
  }
  loss /= static_cast<Scalar>(hyper_.batchSize);
  if (!std::isfinite(loss)) {
    throw DivergenceError("training diverged: non-finite loss at step " +
                          std::to_string(trainStepCount_));
  }

  auto refs = model_.params();
  clipGradients(refs, hyper_.gradClipNorm);
  sgdStep(refs, hyper_.learningRate);

  ++trainStepCount_;
  lastLoss_ = loss;
  return loss;
}

void DqnAgent::finishFlow(Scalar reward) {
  ++flowCount_;
  if (flowCount_ % hyper_.targetSyncInterval == 0) syncTarget();

  // The monitor runs only in the exploitation regime; a triggered reset
  // replaces this flow's decay event.
  if (epsilon_.atFloor() && monitor_.observe(reward)) {
    epsilon_.reset();
    ++reexploreCount_;
  } else {
    epsilon_.decay();
  }
}

void DqnAgent::syncTarget() {
  model_.cloneInto(target_);
  ++targetSyncCount_;
}

namespace {

RunResult runLoop(Environment& env, TrafficGenerator& traffic, int episodes, int flowsPerEpisode,
                  const ShiftSchedule& shifts, DqnAgent* agent, const PolicyFn* policy,
                  const ProgressFn& progress) {
  require(episodes >= 1 && flowsPerEpisode >= 1, "run: episodes and flows must be positive");
  RunResult result;
  result.episodes.reserve(static_cast<std::size_t>(episodes));
  result.flows.reserve(static_cast<std::size_t>(episodes) * static_cast<std::size_t>(flowsPerEpisode));
  env.setMaxConcurrent(traffic.profile().concurrentMax);

  for (int ep = 0; ep < episodes; ++ep) {
    const auto shift = shifts.atEpisode.find(ep);
    if (shift != shifts.atEpisode.end()) {
      traffic.setProfile(shift->second);
      env.setMaxConcurrent(shift->second.concurrentMax);
    }

    EpisodeRecord record;
    record.episode = ep;
    int congested = 0;
    for (int f = 0; f < flowsPerEpisode; ++f) {
      const Arrival arrival = traffic.next();
      NetworkState state = env.state(arrival.request);
      const int action = agent ? agent->selectAction(state, arrival.request)
                               : (*policy)(state, arrival.request);
      StepOutcome outcome = env.admitFlow(arrival, action);

      result.flows.push_back(FlowRecord{ep, arrival.request, action, outcome.rateAllocMbps,
                                        outcome.delayMs, outcome.reward, outcome.congestion});
      record.meanReward += outcome.reward;
      record.meanThroughputMbps += outcome.rateAllocMbps;
      record.meanDelayMs += outcome.delayMs;
      congested += outcome.congestion ? 1 : 0;

      if (agent) {
        const Scalar reward = outcome.reward;
        agent->observe(std::move(state), arrival.request, action, std::move(outcome));
        agent->finishFlow(reward);
      }
    }
    record.meanReward /= flowsPerEpisode;
    record.meanThroughputMbps /= flowsPerEpisode;
    record.meanDelayMs /= flowsPerEpisode;
    record.congestionRate = static_cast<Scalar>(congested) / flowsPerEpisode;
    record.epsilon = agent ? agent->epsilon().value() : std::numeric_limits<Scalar>::quiet_NaN();
    result.episodes.push_back(record);
    if (progress) progress(ep, record);
  }
  return result;
}

}  // namespace

RunResult runTraining(Environment& env, TrafficGenerator& traffic, DqnAgent& agent, int episodes,
                      int flowsPerEpisode, const ShiftSchedule& shifts, const ProgressFn& progress) {
  return runLoop(env, traffic, episodes, flowsPerEpisode, shifts, &agent, nullptr, progress);
}

RunResult runPolicy(Environment& env, TrafficGenerator& traffic, const PolicyFn& policy,
                    int episodes, int flowsPerEpisode, const ShiftSchedule& shifts,
                    const ProgressFn& progress) {
  return runLoop(env, traffic, episodes, flowsPerEpisode, shifts, nullptr, &policy, progress);
}

}  // namespace flowrl
